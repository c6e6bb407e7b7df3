#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fairspread/graph.hpp"
#include "fairspread/rng.hpp"

namespace fairspread {

/// Homophilic Barabasi-Albert generator parameters.
struct HbaParams {
    std::size_t node_count = 1000;
    std::size_t edges_per_node = 4;     // attachment edges per arriving node
    double minority_fraction = 0.2;
    double homophily = 0.8;             // same-group attachment weight
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (edges_per_node < 1 || edges_per_node >= node_count)
            throw std::invalid_argument("edges_per_node must be in [1, node_count)");
        if (!(minority_fraction > 0.0 && minority_fraction < 1.0))
            throw std::invalid_argument("minority_fraction must be in (0,1)");
        if (!(homophily >= 0.0 && homophily <= 1.0))
            throw std::invalid_argument("homophily must be in [0,1]");
    }
};

/// Grow a homophilic scale-free graph with majority/minority groups.
///
/// Starts from a clique of edges_per_node nodes. Every node draws its
/// group label independently (minority with probability
/// minority_fraction). Each arriving node attaches edges_per_node
/// distinct edges, picking targets with probability proportional to
/// degree(target) * w, where w is `homophily` for a same-group target
/// and 1 - homophily otherwise. If every candidate weight is zero (all
/// degrees zero, or homophily pinned at 0/1 with no eligible group
/// present) the draw falls back to uniform over the remaining targets.
/// Fully deterministic given the seed. Community 0 is the majority,
/// community 1 the minority.
inline CommunityGraph generate_hba(const HbaParams& params) {
    params.validate();
    const std::size_t n = params.node_count;
    const std::size_t m = params.edges_per_node;
    RngStream rng(derive_key(params.rng_seed, name_key("hba")));

    std::vector<std::uint32_t> labels(n);
    for (std::size_t v = 0; v < n; ++v)
        labels[v] = rng.bernoulli(params.minority_fraction) ? 1 : 0;
    // Guarantee both groups exist; relevant only for tiny graphs.
    bool has[2] = {false, false};
    for (std::uint32_t c : labels) has[c] = true;
    if (!has[0]) labels[n - 1] = 0;
    if (!has[1]) labels[n - 1] = 1;

    std::vector<Edge> edges;
    edges.reserve((m * (m - 1)) / 2 + (n - m) * m);
    std::vector<std::uint32_t> degree(n, 0);
    for (NodeId u = 0; u < m; ++u) {
        for (NodeId v = u + 1; v < m; ++v) {
            edges.emplace_back(u, v);
            ++degree[u];
            ++degree[v];
        }
    }

    std::vector<double> weight(n);
    std::vector<char> chosen(n, 0);
    for (NodeId v = static_cast<NodeId>(m); v < n; ++v) {
        std::fill(chosen.begin(), chosen.begin() + v, 0);
        for (std::size_t pick = 0; pick < m; ++pick) {
            double total = 0.0;
            for (NodeId t = 0; t < v; ++t) {
                double w = chosen[t] ? 0.0
                                     : static_cast<double>(degree[t]) *
                                           (labels[t] == labels[v] ? params.homophily
                                                                   : 1.0 - params.homophily);
                weight[t] = w;
                total += w;
            }
            NodeId target = 0;
            if (total > 0.0) {
                double x = rng.next_double() * total;
                double acc = 0.0;
                target = v;  // sentinel
                for (NodeId t = 0; t < v; ++t) {
                    acc += weight[t];
                    if (x < acc) {
                        target = t;
                        break;
                    }
                }
                if (target == v) {  // numerical edge: x landed on the top boundary
                    for (NodeId t = v; t-- > 0;) {
                        if (!chosen[t]) {
                            target = t;
                            break;
                        }
                    }
                }
            } else {
                // all weights zero: uniform over remaining existing nodes
                std::vector<NodeId> remaining;
                remaining.reserve(v);
                for (NodeId t = 0; t < v; ++t)
                    if (!chosen[t]) remaining.push_back(t);
                target = remaining[rng.next_below(remaining.size())];
            }
            chosen[target] = 1;
            edges.emplace_back(target, v);
            ++degree[target];
            ++degree[v];
        }
    }

    Graph graph(n, std::move(edges));
    CommunityPartition partition(std::move(labels), 2, {"majority", "minority"});
    return {std::move(graph), std::move(partition)};
}

}  // namespace fairspread
