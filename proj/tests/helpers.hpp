#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles
// here deliberately avoid the library's fast paths: brute-force set
// enumeration, finite differences, and scalar re-implementations.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "fairspread/fairspread.hpp"

namespace testutil {

using namespace fairspread;

inline CommunityPartition single_community(std::size_t n) {
    return CommunityPartition(std::vector<std::uint32_t>(n, 0), 1);
}

inline CommunityGraph path3() {
    Graph g(3, {{0, 1}, {1, 2}});
    return {std::move(g), single_community(3)};
}

inline CommunityGraph star(std::size_t leaves) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v <= leaves; ++v) edges.push_back({0, v});
    Graph g(leaves + 1, std::move(edges));
    return {std::move(g), single_community(leaves + 1)};
}

/// Random connected-ish simple graph with at most max_edges edges.
inline CommunityGraph random_small_graph(std::size_t n, std::size_t max_edges,
                                         std::size_t communities, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<Edge> all;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) all.push_back({u, v});
    // Shuffle edge pool and keep a prefix.
    for (std::size_t i = all.size(); i > 1; --i)
        std::swap(all[i - 1], all[rng.next_below(i)]);
    const std::size_t count = 1 + rng.next_below(std::min(max_edges, all.size()));
    all.resize(count);
    std::vector<std::uint32_t> labels(n);
    for (auto& l : labels) l = static_cast<std::uint32_t>(rng.next_below(communities));
    for (std::size_t c = 0; c < communities; ++c) labels[c % n] = static_cast<std::uint32_t>(c);
    Graph g(n, std::move(all));
    return {std::move(g), CommunityPartition(std::move(labels), communities)};
}

/// All k-subsets of [0, n).
inline std::vector<std::vector<NodeId>> subsets_of_size(std::size_t n, std::size_t k) {
    std::vector<std::vector<NodeId>> out;
    std::vector<NodeId> current;
    auto rec = [&](auto&& self, NodeId start) -> void {
        if (current.size() == k) {
            out.push_back(current);
            return;
        }
        for (NodeId v = start; v < n; ++v) {
            current.push_back(v);
            self(self, v + 1);
            current.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("fairspread_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
