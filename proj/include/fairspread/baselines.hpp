#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairspread/diffusion.hpp"
#include "fairspread/graph.hpp"
#include "fairspread/rng.hpp"

namespace fairspread {

/// All nodes ordered by (score desc, node index asc).
struct RankedNodes {
    std::vector<std::pair<NodeId, double>> entries;

    std::vector<NodeId> top(std::size_t k) const {
        if (k > entries.size()) throw std::invalid_argument("budget exceeds node count");
        std::vector<NodeId> out(k);
        for (std::size_t i = 0; i < k; ++i) out[i] = entries[i].first;
        return out;
    }
};

namespace detail {

inline RankedNodes rank_by_score(const std::vector<double>& scores) {
    RankedNodes r;
    r.entries.resize(scores.size());
    for (std::size_t v = 0; v < scores.size(); ++v)
        r.entries[v] = {static_cast<NodeId>(v), scores[v]};
    std::stable_sort(r.entries.begin(), r.entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return r;
}

}  // namespace detail

inline RankedNodes degree_ranking(const Graph& graph) {
    std::vector<double> scores(graph.node_count());
    for (NodeId v = 0; v < graph.node_count(); ++v)
        scores[v] = static_cast<double>(graph.degree(v));
    return detail::rank_by_score(scores);
}

/// Top-k nodes by degree, ties to the lowest index.
inline std::vector<NodeId> top_degree(const Graph& graph, std::size_t k) {
    return degree_ranking(graph).top(k);
}

/// PageRank on the undirected random walk with uniform teleport, by
/// power iteration until the L1 change drops below tol. Zero-degree
/// nodes spread their mass uniformly. Scores sum to 1.
inline RankedNodes pagerank(const Graph& graph, double damping = 0.85, double tol = 1e-10,
                            std::size_t max_iters = 200) {
    if (!(damping > 0.0 && damping < 1.0))
        throw std::invalid_argument("damping must be in (0,1)");
    const std::size_t n = graph.node_count();
    if (n == 0) throw std::invalid_argument("empty graph");
    std::vector<double> pr(n, 1.0 / static_cast<double>(n)), next(n);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        double dangling = 0.0;
        for (NodeId v = 0; v < n; ++v)
            if (graph.degree(v) == 0) dangling += pr[v];
        const double base = (1.0 - damping + damping * dangling) / static_cast<double>(n);
        for (NodeId v = 0; v < n; ++v) {
            double in = 0.0;
            for (NodeId u : graph.neighbors(v))
                in += pr[u] / static_cast<double>(graph.degree(u));
            next[v] = base + damping * in;
        }
        double change = 0.0;
        for (NodeId v = 0; v < n; ++v) change += std::abs(next[v] - pr[v]);
        pr.swap(next);
        if (change <= tol) return detail::rank_by_score(pr);
    }
    throw std::runtime_error("pagerank did not converge within " + std::to_string(max_iters) +
                             " iterations");
}

/// Estimated expected outreach fraction of a seed set; shared by greedy
/// and CELF so both see identical values for identical sets.
using SpreadFn = std::function<double(std::span<const NodeId>)>;

/// Fixed collection of live-edge realizations for Monte Carlo spread
/// evaluation with common random numbers.
///
/// Edge e of realization i is live iff stream derive_key(key, i) says so
/// at draw position e, independent of the seed set under evaluation.
/// Averaged reachability over the realizations is therefore an average
/// of set-coverage functions: monotone, submodular, and identical across
/// evaluation rounds, which is what makes lazy-forward evaluation return
/// exactly the greedy solution.
class LiveEdgeSampler {
public:
    LiveEdgeSampler(const Graph& graph, double p, std::size_t num_simulations,
                    std::uint64_t stream_key)
        : graph_(&graph), m_(num_simulations) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability must be in [0,1]");
        if (m_ == 0) throw std::invalid_argument("need at least one realization");
        const auto edges = graph.edges();
        const std::size_t e = edges.size();
        const std::size_t n = graph.node_count();

        arc_offset_.assign(n + 1, 0);
        for (NodeId v = 0; v < n; ++v) arc_offset_[v + 1] = arc_offset_[v] + graph.degree(v);

        // Map each CSR arc to its undirected edge id. The sorted edge
        // list visits each node's arcs in ascending neighbor order, the
        // same order the CSR stores them, so fill cursors line up.
        arc_edge_.resize(2 * e);
        std::vector<std::size_t> fill(arc_offset_.begin(), arc_offset_.end() - 1);
        for (std::size_t i = 0; i < e; ++i) {
            arc_edge_[fill[edges[i].first]++] = i;
            arc_edge_[fill[edges[i].second]++] = i;
        }

        words_per_sim_ = std::max<std::size_t>(1, (e + 63) / 64);
        live_.assign(m_ * words_per_sim_, 0);
        for (std::size_t i = 0; i < m_; ++i) {
            RngStream rng(derive_key(stream_key, i));
            for (std::size_t j = 0; j < e; ++j)
                if (rng.bernoulli(p)) live_[i * words_per_sim_ + j / 64] |= (1ULL << (j % 64));
        }
    }

    std::size_t num_simulations() const { return m_; }

    /// Mean over realizations of the fraction of nodes reachable from
    /// the seeds through live edges.
    double average_reach(std::span<const NodeId> seeds) const {
        check_seeds(*graph_, seeds);
        const std::size_t n = graph_->node_count();
        std::uint64_t total = 0;
        std::vector<char> visited(n);
        std::vector<NodeId> stack;
        for (std::size_t i = 0; i < m_; ++i) {
            const std::uint64_t* live = live_.data() + i * words_per_sim_;
            std::fill(visited.begin(), visited.end(), 0);
            stack.assign(seeds.begin(), seeds.end());
            std::size_t count = 0;
            for (NodeId s : stack) {
                if (!visited[s]) {
                    visited[s] = 1;
                    ++count;
                }
            }
            while (!stack.empty()) {
                NodeId u = stack.back();
                stack.pop_back();
                auto nbrs = graph_->neighbors(u);
                const std::size_t base = arc_offset_[u];
                for (std::size_t j = 0; j < nbrs.size(); ++j) {
                    const std::size_t eid = arc_edge_[base + j];
                    if (!(live[eid / 64] & (1ULL << (eid % 64)))) continue;
                    NodeId v = nbrs[j];
                    if (!visited[v]) {
                        visited[v] = 1;
                        ++count;
                        stack.push_back(v);
                    }
                }
            }
            total += count;
        }
        return static_cast<double>(total) /
               (static_cast<double>(m_) * static_cast<double>(n));
    }

    SpreadFn as_fn() const {
        return [this](std::span<const NodeId> seeds) { return average_reach(seeds); };
    }

private:
    const Graph* graph_;
    std::size_t m_;
    std::size_t words_per_sim_ = 1;
    std::vector<std::uint64_t> live_;        // m x words_per_sim bitset
    std::vector<std::size_t> arc_edge_;      // CSR arc -> undirected edge id
    std::vector<std::size_t> arc_offset_;    // node -> first arc
};

struct GreedyResult {
    std::vector<NodeId> seeds;       // in selection order
    std::size_t evaluations = 0;     // SpreadFn invocations
};

/// Plain greedy influence maximization: in every round evaluate every
/// remaining candidate and keep the one with the best estimated spread
/// (ties to the lowest index). Reference oracle for CELF.
inline GreedyResult greedy_im(const Graph& graph, std::size_t k, const SpreadFn& spread) {
    if (k > graph.node_count()) throw std::invalid_argument("budget exceeds node count");
    GreedyResult result;
    std::vector<char> selected(graph.node_count(), 0);
    std::vector<NodeId> candidate_set;
    for (std::size_t round = 0; round < k; ++round) {
        double best_value = -1.0;
        NodeId best_node = 0;
        bool found = false;
        for (NodeId c = 0; c < graph.node_count(); ++c) {
            if (selected[c]) continue;
            candidate_set = result.seeds;
            candidate_set.push_back(c);
            const double value = spread(candidate_set);
            ++result.evaluations;
            if (!found || value > best_value) {
                best_value = value;
                best_node = c;
                found = true;
            }
        }
        result.seeds.push_back(best_node);
        selected[best_node] = 1;
    }
    return result;
}

/// Lazy-forward greedy (CELF): keeps stale marginal gains in a priority
/// queue and re-evaluates only the queue head until it stays on top.
/// With a shared evaluator this selects exactly the greedy seed set
/// while evaluating far fewer candidates.
inline GreedyResult celf(const Graph& graph, std::size_t k, const SpreadFn& spread) {
    if (k > graph.node_count()) throw std::invalid_argument("budget exceeds node count");
    struct Entry {
        double gain;
        NodeId node;
        std::size_t round;  // round the gain was computed in
    };
    auto worse = [](const Entry& a, const Entry& b) {
        if (a.gain != b.gain) return a.gain < b.gain;
        return a.node > b.node;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> queue(worse);

    GreedyResult result;
    std::vector<NodeId> candidate_set;
    for (NodeId c = 0; c < graph.node_count(); ++c) {
        candidate_set.assign(1, c);
        queue.push({spread(candidate_set), c, 0});
        ++result.evaluations;
    }
    double current_value = 0.0;
    for (std::size_t round = 0; round < k; ++round) {
        while (true) {
            Entry top = queue.top();
            if (top.round == round) {
                queue.pop();
                result.seeds.push_back(top.node);
                current_value += top.gain;
                break;
            }
            queue.pop();
            candidate_set = result.seeds;
            candidate_set.push_back(top.node);
            top.gain = spread(candidate_set) - current_value;
            top.round = round;
            ++result.evaluations;
            queue.push(top);
        }
    }
    return result;
}

namespace detail {

// Cooperative wall-clock budget, checked once per spread evaluation.
inline SpreadFn with_deadline(SpreadFn fn, double budget_seconds) {
    if (budget_seconds <= 0.0) return fn;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(budget_seconds);
    return [fn = std::move(fn), deadline](std::span<const NodeId> seeds) {
        if (std::chrono::steady_clock::now() > deadline)
            throw std::runtime_error("method exceeded its wall-clock budget");
        return fn(seeds);
    };
}

}  // namespace detail

/// Monte Carlo evaluator wrappers (common random numbers across all
/// rounds and candidates). A positive time budget aborts the run with an
/// error once exceeded, checked between evaluations.
inline GreedyResult greedy_im(const Graph& graph, std::size_t k, const CascadeConfig& config,
                              std::uint64_t stream_key, double time_budget_seconds = 0.0) {
    config.validate();
    LiveEdgeSampler sampler(graph, config.influence_probability, config.num_simulations,
                            stream_key);
    return greedy_im(graph, k, detail::with_deadline(sampler.as_fn(), time_budget_seconds));
}

inline GreedyResult celf(const Graph& graph, std::size_t k, const CascadeConfig& config,
                         std::uint64_t stream_key, double time_budget_seconds = 0.0) {
    config.validate();
    LiveEdgeSampler sampler(graph, config.influence_probability, config.num_simulations,
                            stream_key);
    return celf(graph, k, detail::with_deadline(sampler.as_fn(), time_budget_seconds));
}

struct ParityResult {
    std::vector<NodeId> seeds;
    std::vector<std::size_t> quotas;   // per-community seats
    std::size_t spilled = 0;           // seats reassigned past a community's size
};

/// Quota seeding: seats proportional to community sizes via largest
/// remainder (remainder ties to the larger community, then the lower
/// community index), each quota filled with the community's best-ranked
/// nodes. Should a quota ever exceed a community's size, the surplus
/// spills to the globally best-ranked unselected nodes.
inline ParityResult parity_seeding(const RankedNodes& ranking,
                                   const CommunityPartition& partition, std::size_t k) {
    const std::size_t n = partition.node_count();
    if (ranking.entries.size() != n)
        throw std::invalid_argument("ranking does not cover all nodes");
    if (k > n) throw std::invalid_argument("budget exceeds node count");
    const std::size_t l = partition.community_count();

    ParityResult result;
    result.quotas.assign(l, 0);
    std::vector<std::pair<std::size_t, std::size_t>> remainder(l);  // (k*size % n, community)
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < l; ++c) {
        const std::size_t scaled = k * partition.community_sizes()[c];
        result.quotas[c] = scaled / n;
        remainder[c] = {scaled % n, c};
        assigned += result.quotas[c];
    }
    std::sort(remainder.begin(), remainder.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        const auto sa = partition.community_sizes()[a.second];
        const auto sb = partition.community_sizes()[b.second];
        if (sa != sb) return sa > sb;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < k; ++i, ++assigned)
        ++result.quotas[remainder[i % l].second];

    std::vector<std::size_t> taken(l, 0);
    std::vector<char> selected(n, 0);
    for (const auto& [node, score] : ranking.entries) {
        const std::uint32_t c = partition.label(node);
        if (taken[c] < std::min(result.quotas[c], partition.community_sizes()[c])) {
            ++taken[c];
            selected[node] = 1;
            result.seeds.push_back(node);
        }
    }
    // Spill for quotas larger than the community itself.
    for (const auto& [node, score] : ranking.entries) {
        if (result.seeds.size() >= k) break;
        if (!selected[node]) {
            selected[node] = 1;
            result.seeds.push_back(node);
            ++result.spilled;
        }
    }
    return result;
}

/// Parity seeding on the degree ranking.
inline ParityResult parity_degree(const Graph& graph, const CommunityPartition& partition,
                                  std::size_t k) {
    return parity_seeding(degree_ranking(graph), partition, k);
}

/// Parity seeding on the PageRank ranking.
inline ParityResult fair_pagerank(const Graph& graph, const CommunityPartition& partition,
                                  std::size_t k, double damping = 0.85, double tol = 1e-10,
                                  std::size_t max_iters = 200) {
    return parity_seeding(pagerank(graph, damping, tol, max_iters), partition, k);
}

}  // namespace fairspread
