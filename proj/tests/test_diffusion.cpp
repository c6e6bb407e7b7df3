#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fairspread/diffusion.hpp"
#include "helpers.hpp"

using namespace fairspread;
using testutil::single_community;

namespace {

CommunityGraph two_node_edge() {
    Graph g(2, {{0, 1}});
    return {std::move(g), single_community(2)};
}

}  // namespace

TEST_CASE("certain activation crosses an edge") {
    auto g = two_node_edge();
    RngStream rng(1);
    std::vector<NodeId> seeds{0};
    REQUIRE(run_cascade(g.graph, seeds, 1.0, rng) == std::vector<NodeId>{0, 1});
}

TEST_CASE("zero probability keeps exactly the seeds") {
    auto g = testutil::random_small_graph(8, 12, 1, 7);
    std::vector<NodeId> seeds{1, 4};
    RngStream rng(2);
    REQUIRE(run_cascade(g.graph, seeds, 0.0, rng) == seeds);
}

TEST_CASE("cascades are deterministic per stream") {
    Graph triangle(3, {{0, 1}, {0, 2}, {1, 2}});
    std::vector<NodeId> seeds{0};
    RngStream a(99), b(99);
    REQUIRE(run_cascade(triangle, seeds, 0.5, a) == run_cascade(triangle, seeds, 0.5, b));
}

TEST_CASE("seed validation") {
    auto g = two_node_edge();
    RngStream rng(0);
    std::vector<NodeId> none;
    REQUIRE_THROWS_AS(run_cascade(g.graph, none, 0.5, rng), std::invalid_argument);
    std::vector<NodeId> bad{9};
    REQUIRE_THROWS_AS(run_cascade(g.graph, bad, 0.5, rng), std::invalid_argument);
}

TEST_CASE("isolated nodes give an exact fraction") {
    Graph g(4, {});
    auto part = single_community(4);
    std::vector<NodeId> seeds{0};
    auto est = estimate_spread(g, part, seeds, {0.7, 50}, 1);
    REQUIRE(est.total_outreach == 0.25);
    REQUIRE(est.std_total == 0.0);
}

TEST_CASE("single edge estimate approaches the enumerated value") {
    auto g = two_node_edge();
    std::vector<NodeId> seeds{0};
    auto est = estimate_spread(g.graph, g.partition, seeds, {0.5, 100000}, 42);
    REQUIRE(std::abs(est.total_outreach - 0.75) <= 0.01);
}

TEST_CASE("fully reached communities report fraction one") {
    Graph g(2, {{0, 1}});
    CommunityPartition part({0, 1}, 2);
    std::vector<NodeId> seeds{0};
    auto est = estimate_spread(g, part, seeds, {1.0, 10}, 5);
    REQUIRE(est.community_outreach == std::vector<double>{1.0, 1.0});
}

TEST_CASE("estimates are reproducible and thread-count independent") {
    auto g = testutil::random_small_graph(12, 20, 2, 3);
    std::vector<NodeId> seeds{0, 5};
    auto serial = estimate_spread(g.graph, g.partition, seeds, {0.3, 501}, 77, 1);
    auto again = estimate_spread(g.graph, g.partition, seeds, {0.3, 501}, 77, 1);
    auto parallel = estimate_spread(g.graph, g.partition, seeds, {0.3, 501}, 77, 4);
    REQUIRE(serial.total_outreach == again.total_outreach);
    REQUIRE(serial.std_total == again.std_total);
    REQUIRE(serial.community_outreach == again.community_outreach);
    REQUIRE(serial.total_outreach == parallel.total_outreach);
    REQUIRE(serial.community_outreach == parallel.community_outreach);
    REQUIRE(serial.std_total == parallel.std_total);
}

TEST_CASE("total outreach is the size-weighted mean of community outreach") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto g = testutil::random_small_graph(10, 15, 3, seed);
        std::vector<NodeId> seeds{0, 1};
        auto est = estimate_spread(g.graph, g.partition, seeds, {0.4, 333}, seed);
        double weighted = 0.0;
        for (std::size_t c = 0; c < est.community_outreach.size(); ++c)
            weighted += est.community_outreach[c] *
                        static_cast<double>(g.partition.community_sizes()[c]) /
                        static_cast<double>(g.graph.node_count());
        REQUIRE(std::abs(weighted - est.total_outreach) <= 1e-12);
        REQUIRE(maximin_fairness(est) <= est.total_outreach + 1e-15);
        REQUIRE(est.total_outreach <=
                *std::max_element(est.community_outreach.begin(),
                                  est.community_outreach.end()) + 1e-15);
    }
}

TEST_CASE("exact spread of one edge") {
    auto g = two_node_edge();
    std::vector<NodeId> seeds{0};
    auto est = exact_spread(g.graph, g.partition, seeds, 0.5);
    REQUIRE(est.total_outreach == Catch::Approx(0.75).margin(1e-15));
    // activated count is 1 + Bernoulli(1/2): std = 0.5 of 2 nodes
    REQUIRE(est.std_total == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("exact spread of the 3-path") {
    auto g = testutil::path3();
    std::vector<NodeId> seeds{0};
    auto est = exact_spread(g.graph, g.partition, seeds, 0.5);
    REQUIRE(est.total_outreach == Catch::Approx(1.75 / 3.0).margin(1e-15));
}

TEST_CASE("exact spread at p=1 is reachability") {
    Graph g(5, {{0, 1}, {1, 2}, {3, 4}});
    auto part = single_community(5);
    std::vector<NodeId> seeds{0};
    auto est = exact_spread(g, part, seeds, 1.0);
    REQUIRE(est.total_outreach == Catch::Approx(0.6).margin(1e-15));
    REQUIRE(est.std_total == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("exact spread refuses oversized graphs") {
    auto g = testutil::random_small_graph(12, 20, 1, 1);
    std::vector<NodeId> seeds{0};
    if (g.graph.edge_count() > 10)
        REQUIRE_THROWS_AS(exact_spread(g.graph, g.partition, seeds, 0.5, 10),
                          std::invalid_argument);
}

TEST_CASE("monte carlo agrees with enumeration on small graphs") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto g = testutil::random_small_graph(8, 12, 2, seed);
        std::vector<NodeId> seeds{0, 3};
        auto exact = exact_spread(g.graph, g.partition, seeds, 0.4);
        auto mc = estimate_spread(g.graph, g.partition, seeds, {0.4, 20000}, seed + 100);
        const double margin = 4.0 * exact.std_total / std::sqrt(20000.0);
        REQUIRE(std::abs(mc.total_outreach - exact.total_outreach) <= margin);
    }
}

TEST_CASE("exact spread is monotone and submodular on small graphs") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto g = testutil::random_small_graph(7, 9, 1, seed);
        const std::size_t n = g.graph.node_count();
        auto sigma = [&](const std::vector<NodeId>& s) {
            return s.empty() ? 0.0 : exact_spread(g.graph, g.partition, s, 0.5).total_outreach;
        };
        for (const auto& s : testutil::subsets_of_size(n, 1)) {
            for (NodeId v = 0; v < n; ++v) {
                if (v == s[0]) continue;
                std::vector<NodeId> sv{s[0], v};
                REQUIRE(sigma(sv) >= sigma(s) - 1e-12);
                // submodularity: gain of v at {} >= gain at {s0}
                REQUIRE(sigma({v}) - 0.0 >= sigma(sv) - sigma(s) - 1e-12);
            }
        }
    }
}

TEST_CASE("fairness metrics on fixed estimates") {
    SpreadEstimate est;
    est.community_outreach = {0.3, 0.7};
    est.total_outreach = 0.5;
    REQUIRE(maximin_fairness(est) == 0.3);
    REQUIRE(disparity(est) == Catch::Approx(0.4).margin(1e-15));

    est.community_outreach = {0.5, 0.5, 0.5};
    REQUIRE(maximin_fairness(est) == 0.5);
    REQUIRE(disparity(est) == 0.0);

    est.community_outreach = {0.2, 0.5, 0.9};
    REQUIRE(disparity(est) == Catch::Approx(0.7).margin(1e-15));
}

TEST_CASE("disparity vanishes only for equal outreach") {
    SpreadEstimate est;
    est.community_outreach = {0.25, 0.25};
    REQUIRE(disparity(est) <= 1e-12);
    est.community_outreach = {0.25, 0.2500001};
    REQUIRE(disparity(est) > 1e-12);
}

TEST_CASE("fair reward arithmetic") {
    SpreadEstimate est;
    est.total_outreach = 0.2;
    est.community_outreach = {0.1, 0.4};
    REQUIRE(fair_reward(est, 1.0) == Catch::Approx(0.3).margin(1e-15));
    REQUIRE(fair_reward(est, 0.0) == Catch::Approx(0.2).margin(1e-15));
    REQUIRE_THROWS_AS(fair_reward(est, -0.5), std::invalid_argument);

    // reference configuration consistency: sigma 0.2098, fairness 0.2010
    SpreadEstimate table;
    table.total_outreach = 0.2098;
    table.community_outreach = {0.2010, 0.212};
    REQUIRE(maximin_fairness(table) <= table.total_outreach);
    REQUIRE(fair_reward(table, 1.0) == Catch::Approx(0.4108).margin(1e-12));
}

TEST_CASE("marginal reward on fixed cases") {
    // empty set baseline on isolated nodes
    Graph isolated(4, {});
    auto part = single_community(4);
    std::vector<NodeId> empty;
    REQUIRE(marginal_reward(isolated, part, empty, 0, 0.0, {0.5, 10}, 1) ==
            Catch::Approx(0.25).margin(1e-15));

    // p = 0: every marginal is exactly 1/n
    auto g = testutil::random_small_graph(10, 12, 1, 5);
    std::vector<NodeId> seeds{2, 7};
    REQUIRE(marginal_reward(g.graph, g.partition, seeds, 4, 0.0, {0.0, 25}, 2) ==
            Catch::Approx(0.1).margin(1e-15));

    // p = 1 on a single edge: adding the second endpoint adds nothing
    Graph edge(2, {{0, 1}});
    auto single = single_community(2);
    REQUIRE(marginal_reward(edge, single, empty, 0, 0.0, {1.0, 10}, 3) ==
            Catch::Approx(1.0).margin(1e-15));
    std::vector<NodeId> first{0};
    REQUIRE(marginal_reward(edge, single, first, 1, 0.0, {1.0, 10}, 3) ==
            Catch::Approx(0.0).margin(1e-15));

    REQUIRE_THROWS_AS(marginal_reward(edge, single, first, 0, 0.0, {1.0, 10}, 3),
                      std::invalid_argument);
}
