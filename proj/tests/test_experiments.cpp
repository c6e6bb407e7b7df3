#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "fairspread/experiments.hpp"
#include "fairspread/hba.hpp"
#include "helpers.hpp"

using namespace fairspread;
using testutil::single_community;

namespace {

TestSet small_test_set(std::size_t graphs, std::size_t n, std::uint64_t seed) {
    TestSet set;
    set.name = "hba" + std::to_string(n);
    for (std::size_t i = 0; i < graphs; ++i)
        set.graphs.push_back(generate_hba({.node_count = n,
                                           .edges_per_node = 2,
                                           .minority_fraction = 0.25,
                                           .homophily = 0.7,
                                           .rng_seed = derive_key(seed, i)}));
    return set;
}

std::string records_to_string(std::span<const EvalRecord> records) {
    std::ostringstream out;
    out << EvalRecord::csv_header << '\n';
    for (const auto& r : records) out << r.csv_row() << '\n';
    return out.str();
}

}  // namespace

TEST_CASE("evaluating at p=0 counts exactly the seeds") {
    Graph g(30, {{0, 1}, {2, 3}});
    auto part = single_community(30);
    std::vector<NodeId> seeds{0, 5, 9};
    auto rec = evaluate_seed_set(g, part, seeds, 0.0, 100, 1);
    REQUIRE(rec.outreach_mean == 0.1);
    REQUIRE(rec.outreach_std == 0.0);
    REQUIRE(rec.fairness_mean == 0.1);
    REQUIRE(rec.disparity_mean == 0.0);
}

TEST_CASE("single edge evaluation stays near the enumerated value") {
    Graph g(2, {{0, 1}});
    auto part = single_community(2);
    std::vector<NodeId> seeds{0};
    auto rec = evaluate_seed_set(g, part, seeds, 0.5, 1000, 2);
    REQUIRE(std::abs(rec.outreach_mean - 0.75) <= 0.03);
    REQUIRE(rec.k == 1);
    REQUIRE(rec.p == 0.5);
}

TEST_CASE("fully seeded communities saturate the record") {
    Graph g(4, {{0, 1}, {2, 3}});
    CommunityPartition part({0, 0, 1, 1}, 2);
    std::vector<NodeId> seeds{0, 1, 2, 3};
    auto rec = evaluate_seed_set(g, part, seeds, 0.3, 50, 3);
    REQUIRE(rec.outreach_mean == 1.0);
    REQUIRE(rec.fairness_mean == 1.0);
    REQUIRE(rec.disparity_mean == 0.0);
    REQUIRE(rec.fairness_std == 0.0);
}

TEST_CASE("every record keeps fairness at or below outreach") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto g = testutil::random_small_graph(12, 20, 3, seed);
        std::vector<NodeId> seeds{0, 4};
        auto rec = evaluate_seed_set(g.graph, g.partition, seeds, 0.35, 400, seed);
        REQUIRE(rec.fairness_mean <= rec.outreach_mean + 1e-15);
        REQUIRE(rec.disparity_mean >= 0.0);
        REQUIRE(rec.disparity_mean <= 1.0);
        REQUIRE(rec.outreach_std >= 0.0);
        REQUIRE(rec.fairness_std >= 0.0);
    }
}

TEST_CASE("comparison over one method and graph equals a direct evaluation") {
    auto set = small_test_set(1, 20, 100);
    std::vector<SeedMethod> methods{make_method("degree")};
    auto table = compare_methods(set, methods, 3, 0.2, 300, 7);
    REQUIRE(table.cells.size() == 1);
    REQUIRE(table.averages.size() == 1);

    const auto seeds = top_degree(set.graphs[0].graph, 3);
    const std::uint64_t method_key = derive_key(7ULL, name_key("degree"));
    auto direct = evaluate_seed_set(set.graphs[0].graph, set.graphs[0].partition, seeds, 0.2,
                                    300, derive_key(method_key, 0, 1));
    REQUIRE(table.cells[0].outreach_mean == direct.outreach_mean);
    REQUIRE(table.cells[0].fairness_mean == direct.fairness_mean);
    REQUIRE(table.averages[0].outreach_mean == direct.outreach_mean);
}

TEST_CASE("methods with identical seed sets give identical rows") {
    auto set = small_test_set(2, 20, 101);
    // same selector registered under two names; shared eval streams come
    // from the method key, so rows must agree only when names match --
    // use the same name twice to confirm full determinism instead
    std::vector<SeedMethod> methods{make_method("degree"), make_method("degree")};
    auto table = compare_methods(set, methods, 3, 0.2, 200, 8);
    REQUIRE(table.averages[0].outreach_mean == table.averages[1].outreach_mean);
    REQUIRE(table.averages[0].fairness_mean == table.averages[1].fairness_mean);
}

TEST_CASE("degree and parity coincide on a single community") {
    TestSet set;
    set.name = "single";
    set.graphs.push_back(testutil::random_small_graph(15, 30, 1, 102));
    std::vector<SeedMethod> methods{make_method("degree"), make_method("parity")};
    auto table = compare_methods(set, methods, 4, 0.25, 250, 9);
    // identical seed sets; rows differ only in the method-derived eval
    // stream, so compare the seed sets through the baselines oracle
    REQUIRE(top_degree(set.graphs[0].graph, 4) ==
            parity_degree(set.graphs[0].graph, set.graphs[0].partition, 4).seeds);
    REQUIRE(table.cells[0].error.empty());
    REQUIRE(table.cells[1].error.empty());
}

TEST_CASE("method failures are recorded per cell") {
    auto set = small_test_set(1, 10, 103);
    SeedMethod broken{"broken", [](const CommunityGraph&, std::size_t, std::uint64_t)
                          -> std::vector<NodeId> { throw std::runtime_error("boom"); }};
    std::vector<SeedMethod> methods{broken, make_method("degree")};
    auto table = compare_methods(set, methods, 2, 0.2, 50, 10);
    REQUIRE(table.cells[0].error == "boom");
    REQUIRE(std::isnan(table.cells[0].outreach_mean));
    REQUIRE(table.cells[1].error.empty());
    REQUIRE(table.averages[0].error == "all cells failed");
    REQUIRE(table.averages[1].error.empty());
}

TEST_CASE("unknown methods are rejected with the valid list") {
    REQUIRE_THROWS_WITH(make_method("mystery"),
                        Catch::Matchers::ContainsSubstring("dq4fairim"));
    REQUIRE_THROWS_WITH(make_method("dq4fairim"),
                        Catch::Matchers::ContainsSubstring("checkpoint"));
}

TEST_CASE("sweeping k emits one block per value with monotone outreach") {
    auto set = small_test_set(2, 24, 104);
    std::vector<SeedMethod> methods{make_method("degree"), make_method("pagerank")};
    std::vector<std::size_t> ks{2, 6};
    auto rows = sweep_k(set, methods, ks, 0.2, 400, 11);
    REQUIRE(rows.size() == 4);  // 2 values x 2 methods
    for (const auto& method : {std::string("degree"), std::string("pagerank")}) {
        double prev = -1.0;
        double prev_margin = 0.0;
        for (const auto& row : rows) {
            if (row.method != method) continue;
            const double margin = 3.0 * row.outreach_std;
            REQUIRE(row.outreach_mean + margin + prev_margin >= prev);
            prev = row.outreach_mean;
            prev_margin = margin;
        }
    }
}

TEST_CASE("seeding every node reaches outreach one") {
    auto set = small_test_set(1, 12, 105);
    std::vector<SeedMethod> methods{make_method("degree")};
    std::vector<std::size_t> ks{12};
    auto rows = sweep_k(set, methods, ks, 0.05, 50, 12);
    REQUIRE(rows[0].outreach_mean == 1.0);
    REQUIRE(rows[0].fairness_mean == 1.0);
}

TEST_CASE("sweeping p grows outreach and hits the p=0 floor") {
    auto set = small_test_set(2, 24, 106);
    std::vector<SeedMethod> methods{make_method("degree")};
    std::vector<double> ps{0.0, 0.15, 0.35};
    auto rows = sweep_p(set, methods, ps, 3, 400, 13);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0].outreach_mean == Catch::Approx(3.0 / 24.0).margin(1e-15));
    double prev = -1.0, prev_margin = 0.0;
    for (const auto& row : rows) {
        const double margin = 3.0 * row.outreach_std;
        REQUIRE(row.outreach_mean + margin + prev_margin >= prev);
        prev = row.outreach_mean;
        prev_margin = margin;
    }
}

TEST_CASE("sweep output is byte-identical across reruns") {
    auto set = small_test_set(2, 18, 107);
    std::vector<SeedMethod> methods{make_method("degree"), make_method("fair_pagerank")};
    std::vector<std::size_t> ks{2, 4};
    auto a = records_to_string(sweep_k(set, methods, ks, 0.2, 200, 14));
    auto b = records_to_string(sweep_k(set, methods, ks, 0.2, 200, 14));
    REQUIRE(a == b);
    auto c = records_to_string(sweep_k(set, methods, ks, 0.2, 200, 15));
    REQUIRE(a != c);
}

TEST_CASE("rolling mean has the documented length and stays in range") {
    std::vector<double> series{1, 2, 3, 4, 5, 4, 3, 2, 1, 0};
    auto rolled = rolling_mean(series, 4);
    REQUIRE(rolled.size() == series.size() - 4 + 1);
    const double lo = *std::min_element(series.begin(), series.end());
    const double hi = *std::max_element(series.begin(), series.end());
    for (double v : rolled) {
        REQUIRE(v >= lo);
        REQUIRE(v <= hi);
    }
    REQUIRE(rolled[0] == Catch::Approx(2.5).margin(1e-15));
    REQUIRE_THROWS_AS(rolling_mean(series, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(rolling_mean(series, 11), std::invalid_argument);
}

TEST_CASE("generalization reuses one checkpoint across sizes") {
    std::vector<CommunityGraph> pool;
    for (int i = 0; i < 2; ++i)
        pool.push_back(generate_hba({.node_count = 14, .edges_per_node = 2,
                                     .rng_seed = derive_key(108, i)}));
    std::vector<TestSet> sets{small_test_set(1, 20, 109), small_test_set(1, 28, 110)};
    sets[0].name = "n20";
    sets[1].name = "n28";

    Hyperparameters hp;
    hp.budget_k = 2;
    hp.episodes = 3;
    hp.batch_size = 4;
    hp.replay_capacity = 32;
    hp.train_sims = 4;
    hp.embed_dim = 4;
    hp.embed_iters = 2;
    hp.rng_seed = 111;

    std::vector<std::string> baselines{"degree"};
    auto result = generalization_run(pool, sets, hp, baselines, MethodOptions{}, 2, 0.2, 100,
                                     112);
    REQUIRE(result.rows.size() == 4);  // 2 sets x (dq4fairim + degree)
    REQUIRE(result.rows[0].method == "dq4fairim");
    REQUIRE(result.rows[0].dataset == "n20");
    REQUIRE(result.rows[2].dataset == "n28");
    REQUIRE(result.report.episodes.size() == 3);

    // frozen policy: the same parameters drive both evaluations
    testutil::TempDir dir("generalization");
    save_checkpoint(dir.file("a.bin"), result.params, hp.embed_iters);
    save_checkpoint(dir.file("b.bin"), result.params, hp.embed_iters);
    REQUIRE(testutil::read_file(dir.file("a.bin")) == testutil::read_file(dir.file("b.bin")));
}

TEST_CASE("phi ablation wires the reward decomposition") {
    std::vector<CommunityGraph> pool{generate_hba(
        {.node_count = 14, .edges_per_node = 2, .rng_seed = 113})};
    Hyperparameters hp;
    hp.budget_k = 2;
    hp.episodes = 4;
    hp.batch_size = 4;
    hp.replay_capacity = 32;
    hp.train_sims = 4;
    hp.embed_dim = 4;
    hp.embed_iters = 2;
    hp.rng_seed = 114;

    std::vector<double> phis{0.0, 1.0};
    auto ablation = ablate_phi(pool, phis, hp);
    REQUIRE(ablation.reports.size() == 2);
    for (const auto& e : ablation.reports[0].episodes)
        REQUIRE(e.reward == e.outreach);  // phi = 0
    for (const auto& e : ablation.reports[1].episodes)
        REQUIRE(e.reward == e.outreach + e.fairness);  // phi = 1

    testutil::TempDir dir("ablation");
    write_ablation_csv(dir.file("curves.csv"), ablation, 2);
    const auto text = testutil::read_file(dir.file("curves.csv"));
    // header + 2 phis x (episodes - window + 1) rows
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 3);
}
