#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fairspread {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

class GraphError : public std::runtime_error {
public:
    explicit GraphError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Immutable undirected simple graph in CSR form.
///
/// Neighbor lists are sorted ascending and every edge appears in both
/// endpoint lists. Duplicate input edges collapse to one undirected edge;
/// self-loops are rejected. Isolated nodes are allowed.
class Graph {
public:
    Graph() = default;

    Graph(std::size_t node_count, std::vector<Edge> edges) {
        for (const auto& [u, v] : edges) {
            if (u >= node_count || v >= node_count)
                throw GraphError("edge endpoint " + std::to_string(std::max(u, v)) +
                                 " out of range for " + std::to_string(node_count) + " nodes");
            if (u == v)
                throw GraphError("self-loop rejected at node " + std::to_string(u));
        }
        for (auto& [u, v] : edges) {
            if (u > v) std::swap(u, v);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        std::vector<std::uint32_t> deg(node_count, 0);
        for (const auto& [u, v] : edges) {
            ++deg[u];
            ++deg[v];
        }
        offsets_.assign(node_count + 1, 0);
        for (std::size_t v = 0; v < node_count; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
        targets_.resize(offsets_.back());
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (const auto& [u, v] : edges) {
            targets_[cursor[u]++] = v;
            targets_[cursor[v]++] = u;
        }
        for (std::size_t v = 0; v < node_count; ++v)
            std::sort(targets_.begin() + offsets_[v], targets_.begin() + offsets_[v + 1]);
        edge_count_ = edges.size();
    }

    std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const { return edge_count_; }

    std::span<const NodeId> neighbors(NodeId v) const {
        check_node(v);
        return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }

    std::size_t degree(NodeId v) const {
        check_node(v);
        return offsets_[v + 1] - offsets_[v];
    }

    /// Undirected edge list, each edge once with u < v, sorted.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (NodeId u = 0; u < node_count(); ++u)
            for (NodeId v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

private:
    void check_node(NodeId v) const {
        if (v >= node_count())
            throw GraphError("node index " + std::to_string(v) + " out of range");
    }

    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
    std::size_t edge_count_ = 0;
};

/// Disjoint community labels, one per node.
class CommunityPartition {
public:
    CommunityPartition() = default;

    CommunityPartition(std::vector<std::uint32_t> labels, std::size_t community_count,
                       std::vector<std::string> names = {})
        : labels_(std::move(labels)), names_(std::move(names)) {
        if (community_count == 0) throw GraphError("partition needs at least one community");
        sizes_.assign(community_count, 0);
        for (std::uint32_t c : labels_) {
            if (c >= community_count)
                throw GraphError("community label " + std::to_string(c) + " out of range");
            ++sizes_[c];
        }
        for (std::size_t c = 0; c < community_count; ++c) {
            if (sizes_[c] == 0)
                throw GraphError("empty community " + std::to_string(c) + " after load");
        }
        if (names_.empty()) {
            names_.reserve(community_count);
            for (std::size_t c = 0; c < community_count; ++c) names_.push_back(std::to_string(c));
        } else if (names_.size() != community_count) {
            throw GraphError("community name count does not match community count");
        }
    }

    std::size_t node_count() const { return labels_.size(); }
    std::size_t community_count() const { return sizes_.size(); }
    std::uint32_t label(NodeId v) const { return labels_.at(v); }
    const std::vector<std::uint32_t>& labels() const { return labels_; }
    const std::vector<std::size_t>& community_sizes() const { return sizes_; }
    const std::vector<std::string>& community_names() const { return names_; }

private:
    std::vector<std::uint32_t> labels_;
    std::vector<std::size_t> sizes_;
    std::vector<std::string> names_;
};

/// A graph together with its community partition.
struct CommunityGraph {
    Graph graph;
    CommunityPartition partition;
};

struct LoadResult {
    CommunityGraph data;
    std::vector<std::string> node_ids;  // dense index -> original id token
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline bool skippable(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;  // blank
}

}  // namespace detail

/// Load an attributed graph from an edge-list file and an attribute file.
///
/// The attribute file defines the node universe and the dense node order:
/// one `node_id<TAB or spaces>community_label` line per node. Community
/// labels map to dense indices in first-seen order. Every edge endpoint
/// must have an attribute line; an edge id without one is reported as a
/// dangling id missing its community label. Nodes with no incident edges
/// are retained as zero-degree nodes.
inline LoadResult load_graph(const std::string& edge_path, const std::string& attr_path) {
    std::ifstream attrs(attr_path);
    if (!attrs) throw GraphError("cannot open attribute file: " + attr_path);

    std::vector<std::string> node_ids;
    std::vector<std::uint32_t> labels;
    std::vector<std::string> community_names;
    std::unordered_map<std::string, NodeId> node_index;
    std::unordered_map<std::string, std::uint32_t> community_index;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(attrs, line)) {
        ++lineno;
        if (detail::skippable(line)) continue;
        auto toks = detail::split_ws(line);
        if (toks.size() != 2)
            throw GraphError(attr_path + ":" + std::to_string(lineno) +
                             ": expected 'node_id community_label', got " +
                             std::to_string(toks.size()) + " fields");
        if (node_index.count(toks[0]))
            throw GraphError(attr_path + ":" + std::to_string(lineno) +
                             ": duplicate attribute line for node '" + toks[0] + "'");
        auto [it, fresh] = community_index.try_emplace(
            toks[1], static_cast<std::uint32_t>(community_index.size()));
        if (fresh) community_names.push_back(toks[1]);
        node_index.emplace(toks[0], static_cast<NodeId>(node_ids.size()));
        node_ids.push_back(toks[0]);
        labels.push_back(it->second);
    }
    if (node_ids.empty()) throw GraphError(attr_path + ": no nodes defined");

    std::ifstream edges_in(edge_path);
    if (!edges_in) throw GraphError("cannot open edge file: " + edge_path);
    std::vector<Edge> edges;
    lineno = 0;
    while (std::getline(edges_in, line)) {
        ++lineno;
        if (detail::skippable(line)) continue;
        auto toks = detail::split_ws(line);
        if (toks.size() != 2)
            throw GraphError(edge_path + ":" + std::to_string(lineno) +
                             ": expected two node ids, got " + std::to_string(toks.size()) +
                             " fields");
        NodeId ids[2];
        for (int i = 0; i < 2; ++i) {
            auto it = node_index.find(toks[i]);
            if (it == node_index.end())
                throw GraphError(edge_path + ":" + std::to_string(lineno) +
                                 ": dangling node id '" + toks[i] +
                                 "' (node missing a community label)");
            ids[i] = it->second;
        }
        if (ids[0] == ids[1])
            throw GraphError(edge_path + ":" + std::to_string(lineno) + ": self-loop rejected");
        edges.emplace_back(ids[0], ids[1]);
    }

    Graph graph(node_ids.size(), std::move(edges));
    const std::size_t community_count = community_names.size();
    CommunityPartition partition(std::move(labels), community_count,
                                 std::move(community_names));
    return {{std::move(graph), std::move(partition)}, std::move(node_ids)};
}

/// Write the edge-list/attribute pair read back by load_graph.
/// Node names default to the dense indices.
inline void save_graph(const Graph& graph, const CommunityPartition& partition,
                       const std::string& edge_path, const std::string& attr_path,
                       const std::vector<std::string>* node_ids = nullptr) {
    if (graph.node_count() != partition.node_count())
        throw GraphError("graph/partition node counts differ");
    auto name = [&](NodeId v) {
        return node_ids ? (*node_ids)[v] : std::to_string(v);
    };
    std::ofstream attrs(attr_path);
    if (!attrs) throw GraphError("cannot write attribute file: " + attr_path);
    for (NodeId v = 0; v < graph.node_count(); ++v)
        attrs << name(v) << '\t' << partition.community_names()[partition.label(v)] << '\n';
    std::ofstream edges(edge_path);
    if (!edges) throw GraphError("cannot write edge file: " + edge_path);
    for (const auto& [u, v] : graph.edges()) edges << name(u) << ' ' << name(v) << '\n';
}

/// Seed sets are stored as plain text, one node id per line.
inline void save_seed_set(const std::string& path, std::span<const NodeId> seeds,
                          const std::vector<std::string>* node_ids = nullptr) {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write seed file: " + path);
    for (NodeId v : seeds) out << (node_ids ? (*node_ids)[v] : std::to_string(v)) << '\n';
}

inline std::vector<NodeId> load_seed_set(const std::string& path,
                                         const std::vector<std::string>* node_ids = nullptr) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open seed file: " + path);
    std::unordered_map<std::string, NodeId> index;
    if (node_ids)
        for (NodeId v = 0; v < node_ids->size(); ++v) index.emplace((*node_ids)[v], v);
    std::vector<NodeId> seeds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::skippable(line)) continue;
        auto toks = detail::split_ws(line);
        if (toks.size() != 1)
            throw GraphError(path + ":" + std::to_string(lineno) + ": expected one node id");
        if (node_ids) {
            auto it = index.find(toks[0]);
            if (it == index.end())
                throw GraphError(path + ":" + std::to_string(lineno) + ": unknown node id '" +
                                 toks[0] + "'");
            seeds.push_back(it->second);
        } else {
            seeds.push_back(static_cast<NodeId>(std::stoul(toks[0])));
        }
    }
    return seeds;
}

}  // namespace fairspread
