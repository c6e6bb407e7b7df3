#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairspread/graph.hpp"
#include "fairspread/parallel.hpp"
#include "fairspread/rng.hpp"

namespace fairspread {

/// Uniform independent-cascade parameters: one influence probability for
/// every edge, and the number of Monte Carlo realizations to average.
struct CascadeConfig {
    double influence_probability = 0.1;
    std::size_t num_simulations = 1000;

    void validate() const {
        if (!(influence_probability >= 0.0 && influence_probability <= 1.0))
            throw std::invalid_argument("influence probability must be in [0,1]");
        if (num_simulations < 1)
            throw std::invalid_argument("need at least one simulation");
    }
};

/// Activation fractions from a (possibly exact) diffusion evaluation.
struct SpreadEstimate {
    double total_outreach = 0.0;               // fraction of all nodes activated
    std::vector<double> community_outreach;    // per-community activated fraction
    double std_total = 0.0;                    // per-realization std of the total fraction
};

inline void check_seeds(const Graph& graph, std::span<const NodeId> seeds) {
    if (seeds.empty()) throw std::invalid_argument("empty seed set");
    for (NodeId s : seeds) {
        if (s >= graph.node_count())
            throw std::invalid_argument("seed index " + std::to_string(s) + " out of range");
    }
}

/// One independent-cascade realization.
///
/// Breadth-style rounds: every node activated in the previous round,
/// taken in ascending index order, attempts each still-inactive neighbor
/// once with success probability p (one RNG draw per attempt). Returns
/// the sorted activated set, which always contains the seeds.
inline std::vector<NodeId> run_cascade(const Graph& graph, std::span<const NodeId> seeds,
                                       double p, RngStream& rng) {
    check_seeds(graph, seeds);
    std::vector<char> active(graph.node_count(), 0);
    std::vector<NodeId> frontier(seeds.begin(), seeds.end());
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    std::vector<NodeId> activated = frontier;
    for (NodeId s : frontier) active[s] = 1;

    std::vector<NodeId> next;
    while (!frontier.empty()) {
        next.clear();
        for (NodeId u : frontier) {
            for (NodeId v : graph.neighbors(u)) {
                if (active[v]) continue;
                if (rng.bernoulli(p)) {
                    active[v] = 1;
                    next.push_back(v);
                }
            }
        }
        std::sort(next.begin(), next.end());
        activated.insert(activated.end(), next.begin(), next.end());
        frontier = next;
    }
    std::sort(activated.begin(), activated.end());
    return activated;
}

namespace detail {

// Per-simulation activation counts; values are exact integers so any
// reduction order gives identical sums.
struct CascadeTallies {
    std::vector<std::int64_t> community_totals;   // summed over simulations
    std::int64_t total = 0;                       // summed activated counts
    std::int64_t total_sq = 0;                    // summed squared counts
    std::vector<std::int32_t> per_sim_community;  // optional, sims x communities
};

inline CascadeTallies run_simulations(const Graph& graph, const CommunityPartition& partition,
                                      std::span<const NodeId> seeds, const CascadeConfig& config,
                                      std::uint64_t stream_key, int jobs, bool keep_per_sim) {
    config.validate();
    check_seeds(graph, seeds);
    const std::size_t l = partition.community_count();
    const std::size_t m = config.num_simulations;

    CascadeTallies tallies;
    tallies.community_totals.assign(l, 0);
    if (keep_per_sim) tallies.per_sim_community.assign(m * l, 0);

    jobs = std::max(1, jobs);
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), m);
    std::vector<CascadeTallies> partial(workers);
    for (auto& t : partial) t.community_totals.assign(l, 0);

    parallel_for(workers, static_cast<int>(workers), [&](std::size_t w) {
        const std::size_t lo = m * w / workers;
        const std::size_t hi = m * (w + 1) / workers;
        std::vector<std::int32_t> counts(l);
        for (std::size_t i = lo; i < hi; ++i) {
            RngStream rng(derive_key(stream_key, i));
            auto activated = run_cascade(graph, seeds, config.influence_probability, rng);
            std::fill(counts.begin(), counts.end(), 0);
            for (NodeId v : activated) ++counts[partition.label(v)];
            std::int64_t total = static_cast<std::int64_t>(activated.size());
            auto& t = partial[w];
            for (std::size_t c = 0; c < l; ++c) t.community_totals[c] += counts[c];
            t.total += total;
            t.total_sq += total * total;
            if (keep_per_sim)
                for (std::size_t c = 0; c < l; ++c)
                    tallies.per_sim_community[i * l + c] = counts[c];
        }
    });
    for (const auto& t : partial) {
        for (std::size_t c = 0; c < l; ++c) tallies.community_totals[c] += t.community_totals[c];
        tallies.total += t.total;
        tallies.total_sq += t.total_sq;
    }
    return tallies;
}

inline SpreadEstimate estimate_from_tallies(const CascadeTallies& t,
                                            const CommunityPartition& partition, std::size_t m) {
    const std::size_t n = partition.node_count();
    const std::size_t l = partition.community_count();
    SpreadEstimate est;
    est.community_outreach.resize(l);
    for (std::size_t c = 0; c < l; ++c)
        est.community_outreach[c] = static_cast<double>(t.community_totals[c]) /
                                    (static_cast<double>(m) * static_cast<double>(partition.community_sizes()[c]));
    est.total_outreach = static_cast<double>(t.total) / (static_cast<double>(m) * static_cast<double>(n));
    const double mean = static_cast<double>(t.total) / static_cast<double>(m);
    const double mean_sq = static_cast<double>(t.total_sq) / static_cast<double>(m);
    est.std_total = std::sqrt(std::max(0.0, mean_sq - mean * mean)) / static_cast<double>(n);
    return est;
}

}  // namespace detail

/// Monte Carlo spread estimate over config.num_simulations realizations.
///
/// Simulation i draws from the stream derive_key(stream_key, i), so the
/// result is independent of worker count and identical to a serial run.
inline SpreadEstimate estimate_spread(const Graph& graph, const CommunityPartition& partition,
                                      std::span<const NodeId> seeds, const CascadeConfig& config,
                                      std::uint64_t stream_key, int jobs = 1) {
    auto tallies = detail::run_simulations(graph, partition, seeds, config, stream_key, jobs, false);
    return detail::estimate_from_tallies(tallies, partition, config.num_simulations);
}

/// Exact expected spread by live-edge enumeration.
///
/// Every subset of edges is considered live with probability
/// p^|live| (1-p)^|dead|; the activated set of a configuration is what
/// the seeds reach through live edges. Feasible only for tiny graphs.
inline SpreadEstimate exact_spread(const Graph& graph, const CommunityPartition& partition,
                                   std::span<const NodeId> seeds, double p,
                                   std::size_t max_edges = 20) {
    check_seeds(graph, seeds);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability must be in [0,1]");
    const auto edges = graph.edges();
    if (edges.size() > max_edges)
        throw std::invalid_argument("edge count " + std::to_string(edges.size()) +
                                    " exceeds enumeration bound " + std::to_string(max_edges));
    const std::size_t n = graph.node_count();
    const std::size_t l = partition.community_count();
    const std::size_t e = edges.size();

    std::vector<double> p_live(e + 1), p_dead(e + 1);
    p_live[0] = p_dead[0] = 1.0;
    for (std::size_t i = 1; i <= e; ++i) {
        p_live[i] = p_live[i - 1] * p;
        p_dead[i] = p_dead[i - 1] * (1.0 - p);
    }

    std::vector<char> seeded(n, 0);
    for (NodeId s : seeds) seeded[s] = 1;

    std::vector<NodeId> parent(n);
    auto find = [&](NodeId v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };

    SpreadEstimate est;
    est.community_outreach.assign(l, 0.0);
    double ex = 0.0, ex2 = 0.0;
    std::vector<std::int32_t> comm_counts(l);
    for (std::uint64_t mask = 0; mask < (1ULL << e); ++mask) {
        const int live = __builtin_popcountll(mask);
        const double prob = p_live[live] * p_dead[e - live];
        if (prob == 0.0) continue;
        for (NodeId v = 0; v < n; ++v) parent[v] = v;
        for (std::size_t i = 0; i < e; ++i) {
            if (mask & (1ULL << i)) {
                NodeId a = find(edges[i].first), b = find(edges[i].second);
                if (a != b) parent[a] = b;
            }
        }
        std::vector<char> root_seeded(n, 0);
        for (NodeId s : seeds) root_seeded[find(s)] = 1;
        std::fill(comm_counts.begin(), comm_counts.end(), 0);
        std::int64_t total = 0;
        for (NodeId v = 0; v < n; ++v) {
            if (root_seeded[find(v)]) {
                ++comm_counts[partition.label(v)];
                ++total;
            }
        }
        for (std::size_t c = 0; c < l; ++c)
            est.community_outreach[c] +=
                prob * static_cast<double>(comm_counts[c]) /
                static_cast<double>(partition.community_sizes()[c]);
        ex += prob * static_cast<double>(total);
        ex2 += prob * static_cast<double>(total) * static_cast<double>(total);
    }
    est.total_outreach = ex / static_cast<double>(n);
    est.std_total = std::sqrt(std::max(0.0, ex2 - ex * ex)) / static_cast<double>(n);
    return est;
}

/// Maximin fairness: the activation fraction of the worst-off community.
inline double maximin_fairness(const SpreadEstimate& est) {
    if (est.community_outreach.empty())
        throw std::invalid_argument("estimate has no communities");
    return *std::min_element(est.community_outreach.begin(), est.community_outreach.end());
}

/// Largest pairwise gap between community activation fractions.
inline double disparity(const SpreadEstimate& est) {
    if (est.community_outreach.empty())
        throw std::invalid_argument("estimate has no communities");
    auto [lo, hi] =
        std::minmax_element(est.community_outreach.begin(), est.community_outreach.end());
    return *hi - *lo;
}

/// Combined objective: outreach plus phi-weighted maximin fairness.
inline double fair_reward(const SpreadEstimate& est, double phi) {
    if (phi < 0.0) throw std::invalid_argument("fairness weight must be non-negative");
    return est.total_outreach + phi * maximin_fairness(est);
}

/// Marginal combined reward of adding new_node to current_seeds, both
/// sides estimated with train_config.num_simulations realizations.
/// The reward of the empty seed set is 0 by definition.
inline double marginal_reward(const Graph& graph, const CommunityPartition& partition,
                              std::span<const NodeId> current_seeds, NodeId new_node, double phi,
                              const CascadeConfig& train_config, std::uint64_t stream_key,
                              int jobs = 1) {
    for (NodeId s : current_seeds) {
        if (s == new_node)
            throw std::invalid_argument("node " + std::to_string(new_node) + " already seeded");
    }
    std::vector<NodeId> extended(current_seeds.begin(), current_seeds.end());
    extended.push_back(new_node);
    const double with_node = fair_reward(
        estimate_spread(graph, partition, extended, train_config, derive_key(stream_key, 1), jobs),
        phi);
    if (current_seeds.empty()) return with_node;
    const double without = fair_reward(
        estimate_spread(graph, partition, current_seeds, train_config, derive_key(stream_key, 0),
                        jobs),
        phi);
    return with_node - without;
}

}  // namespace fairspread
