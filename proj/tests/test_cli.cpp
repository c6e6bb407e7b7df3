#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FAIRSPREAD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("help exits cleanly for every subcommand") {
    REQUIRE(run_cli("--help") == 0);
    for (const std::string sub :
         {"generate", "train", "seeds", "evaluate", "sweep", "ablate"})
        REQUIRE(run_cli(sub + " --help") == 0);
}

TEST_CASE("generate writes the requested files deterministically") {
    testutil::TempDir dir("cli_generate");
    const std::string out_a = dir.file("a"), out_b = dir.file("b");
    const std::string flags =
        " --n 40 --count 3 --edges-per-node 2 --minority-fraction 0.25 --homophily 0.7";
    REQUIRE(run_cli("--seed 5 generate --out " + out_a + flags) == 0);
    REQUIRE(run_cli("--seed 5 generate --out " + out_b + flags) == 0);
    for (int i = 0; i < 3; ++i) {
        const std::string stem = "hba_" + std::to_string(i);
        REQUIRE(fs::exists(fs::path(out_a) / (stem + ".edges")));
        REQUIRE(testutil::read_file((fs::path(out_a) / (stem + ".edges")).string()) ==
                testutil::read_file((fs::path(out_b) / (stem + ".edges")).string()));
        REQUIRE(testutil::read_file((fs::path(out_a) / (stem + ".attrs")).string()) ==
                testutil::read_file((fs::path(out_b) / (stem + ".attrs")).string()));
    }
    REQUIRE(fs::exists(fs::path(out_a) / "manifest.json"));
}

TEST_CASE("generate rejects a zero count") {
    testutil::TempDir dir("cli_generate_zero");
    REQUIRE(run_cli("generate --out " + dir.file("x") + " --n 20 --count 0") != 0);
}

TEST_CASE("seeds runs baselines and rejects unknown methods") {
    testutil::TempDir dir("cli_seeds");
    REQUIRE(run_cli("--seed 6 generate --out " + dir.file("d") + " --n 30 --count 1") == 0);
    const std::string graph_flags = " --edges " + dir.file("d/hba_0.edges") + " --attrs " +
                                    dir.file("d/hba_0.attrs");
    REQUIRE(run_cli("seeds --method degree --k 5" + graph_flags + " --out " +
                    dir.file("s.txt")) == 0);
    const auto text = testutil::read_file(dir.file("s.txt"));
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 5);
    REQUIRE(run_cli("seeds --method nonsense --k 5" + graph_flags + " --out " +
                    dir.file("t.txt")) != 0);
    // dq4fairim without a checkpoint is an error
    REQUIRE(run_cli("seeds --method dq4fairim --k 5" + graph_flags + " --out " +
                    dir.file("u.txt")) != 0);
}

TEST_CASE("evaluate consumes seed files and emits one record") {
    testutil::TempDir dir("cli_eval");
    REQUIRE(run_cli("--seed 7 generate --out " + dir.file("d") + " --n 30 --count 1") == 0);
    const std::string graph_flags = " --edges " + dir.file("d/hba_0.edges") + " --attrs " +
                                    dir.file("d/hba_0.attrs");
    REQUIRE(run_cli("seeds --method pagerank --k 4" + graph_flags + " --out " +
                    dir.file("s.txt")) == 0);
    REQUIRE(run_cli("--seed 9 evaluate" + graph_flags + " --seeds-file " + dir.file("s.txt") +
                    " --p 0.2 --m-eval 200 --out " + dir.file("r.csv")) == 0);
    const auto text = testutil::read_file(dir.file("r.csv"));
    REQUIRE(text.starts_with(
        "method,dataset,k,p,outreach_mean,outreach_std,fairness_mean,fairness_std,"
        "disparity_mean,seconds,seed"));
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("a short train-evaluate pipeline reproduces itself") {
    testutil::TempDir dir("cli_pipeline");
    REQUIRE(run_cli("--seed 11 generate --out " + dir.file("d") + " --n 24 --count 3") == 0);
    const std::string train_flags = " train --data " + dir.file("d") +
                                    " --take 2 --k 2 --episodes 3 --batch-size 4"
                                    " --replay-capacity 32 --train-sims 4 --embed-dim 4"
                                    " --embed-iters 2";
    REQUIRE(run_cli("--seed 12" + train_flags + " --checkpoint " + dir.file("a.bin") +
                    " --report " + dir.file("a.csv")) == 0);
    REQUIRE(run_cli("--seed 12" + train_flags + " --checkpoint " + dir.file("b.bin") +
                    " --report " + dir.file("b.csv")) == 0);
    REQUIRE(testutil::read_file(dir.file("a.bin")) == testutil::read_file(dir.file("b.bin")));
    REQUIRE(testutil::read_file(dir.file("a.csv")) == testutil::read_file(dir.file("b.csv")));

    // method-comparison mode with the fresh checkpoint
    REQUIRE(run_cli("--seed 13 evaluate --data " + dir.file("d") +
                    " --skip 2 --methods dq4fairim,degree,parity --checkpoint " +
                    dir.file("a.bin") + " --k 2 --p 0.2 --m-eval 100 --out " +
                    dir.file("cmp.csv")) == 0);
    const auto cmp = testutil::read_file(dir.file("cmp.csv"));
    REQUIRE(std::count(cmp.begin(), cmp.end(), '\n') == 4);  // header + 3 methods
}

TEST_CASE("sweep produces one row per method and value") {
    testutil::TempDir dir("cli_sweep");
    REQUIRE(run_cli("--seed 14 generate --out " + dir.file("d") + " --n 24 --count 2") == 0);
    REQUIRE(run_cli("--seed 15 sweep --data " + dir.file("d") +
                    " --methods degree,pagerank --param k --values 2,4 --p 0.2"
                    " --m-eval 100 --out " + dir.file("k.csv")) == 0);
    auto text = testutil::read_file(dir.file("k.csv"));
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 5);  // header + 2x2

    REQUIRE(run_cli("--seed 15 sweep --data " + dir.file("d") +
                    " --methods degree --param p --values 0.1,0.2,0.3 --k 3"
                    " --m-eval 100 --out " + dir.file("p.csv")) == 0);
    text = testutil::read_file(dir.file("p.csv"));
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 4);

    REQUIRE(run_cli("--seed 15 sweep --data " + dir.file("d") +
                    " --methods degree --param z --values 1 --out " + dir.file("z.csv")) != 0);
}
