// Command-line entry point: graph generation, training, seed selection,
// evaluation, and parameter sweeps over one shared --seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fairspread/fairspread.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fairspread;

namespace {

struct GlobalConfig {
    std::uint64_t seed = 42;
    int jobs = 0;  // 0: FAIRSPREAD_JOBS env var, else 1
};

struct DataSlice {
    std::string dir;
    std::size_t skip = 0;
    std::size_t take = 0;  // 0: all remaining
};

std::vector<CommunityGraph> load_manifest_graphs(const DataSlice& slice,
                                                 std::vector<std::uint64_t>* seeds = nullptr) {
    const fs::path manifest_path = fs::path(slice.dir) / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
    json manifest = json::parse(in);
    const auto& entries = manifest.at("graphs");
    std::vector<CommunityGraph> graphs;
    for (std::size_t i = slice.skip; i < entries.size(); ++i) {
        if (slice.take > 0 && graphs.size() >= slice.take) break;
        const auto& entry = entries[i];
        auto loaded = load_graph((fs::path(slice.dir) / entry.at("edges").get<std::string>()).string(),
                                 (fs::path(slice.dir) / entry.at("attrs").get<std::string>()).string());
        graphs.push_back(std::move(loaded.data));
        if (seeds) seeds->push_back(entry.value("seed", 0ULL));
    }
    if (graphs.empty()) throw std::runtime_error("no graphs selected from " + slice.dir);
    return graphs;
}

void add_data_slice_options(CLI::App* cmd, DataSlice& slice) {
    cmd->add_option("--data", slice.dir, "Directory with manifest.json from `generate`")
        ->required();
    cmd->add_option("--skip", slice.skip, "Skip this many manifest entries");
    cmd->add_option("--take", slice.take, "Use at most this many entries (0 = all)");
}

struct HyperFlags {
    Hyperparameters hp;
    void attach(CLI::App* cmd) {
        cmd->add_option("--k", hp.budget_k, "Seed budget per episode")->capture_default_str();
        cmd->add_option("--phi", hp.phi, "Fairness weight in the reward")->capture_default_str();
        cmd->add_option("--episodes", hp.episodes, "Training episodes")->capture_default_str();
        cmd->add_option("--gamma", hp.gamma, "Discount factor")->capture_default_str();
        cmd->add_option("--epsilon", hp.epsilon0, "Initial exploration rate")
            ->capture_default_str();
        cmd->add_option("--epsilon-decay", hp.epsilon_decay, "Multiplicative epsilon decay")
            ->capture_default_str();
        cmd->add_option("--epsilon-min", hp.epsilon_min, "Exploration floor")
            ->capture_default_str();
        cmd->add_option("--batch-size", hp.batch_size, "SGD batch size")->capture_default_str();
        cmd->add_option("--learning-rate", hp.learning_rate, "SGD learning rate")
            ->capture_default_str();
        cmd->add_option("--update-period", hp.update_period,
                        "Apply one SGD update every K steps")
            ->capture_default_str();
        cmd->add_option("--replay-capacity", hp.replay_capacity, "Replay memory size")
            ->capture_default_str();
        cmd->add_option("--train-sims", hp.train_sims,
                        "Monte Carlo simulations per training reward")
            ->capture_default_str();
        cmd->add_option("--p", hp.influence_probability, "Influence probability")
            ->capture_default_str();
        cmd->add_option("--embed-dim", hp.embed_dim, "Embedding dimension")
            ->capture_default_str();
        cmd->add_option("--embed-iters", hp.embed_iters, "Embedding update rounds")
            ->capture_default_str();
        cmd->add_flag("--decay-per-episode", hp.decay_per_episode,
                      "Decay epsilon once per episode instead of per step");
    }
};

int run_generate(const GlobalConfig& global, const HbaParams& base, std::size_t count,
                 const std::string& out_dir, const std::string& prefix) {
    fs::create_directories(out_dir);
    json manifest;
    manifest["generator"] = "hba";
    manifest["params"] = {{"node_count", base.node_count},
                          {"edges_per_node", base.edges_per_node},
                          {"minority_fraction", base.minority_fraction},
                          {"homophily", base.homophily}};
    manifest["master_seed"] = global.seed;
    manifest["graphs"] = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        HbaParams params = base;
        params.rng_seed = derive_key(global.seed, name_key("generate"), i);
        const auto g = generate_hba(params);
        const std::string stem = prefix + "_" + std::to_string(i);
        save_graph(g.graph, g.partition, (fs::path(out_dir) / (stem + ".edges")).string(),
                   (fs::path(out_dir) / (stem + ".attrs")).string());
        manifest["graphs"].push_back(
            {{"edges", stem + ".edges"}, {"attrs", stem + ".attrs"}, {"seed", params.rng_seed}});
    }
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    out << manifest.dump(2) << '\n';
    std::cout << "wrote " << count << " graphs to " << out_dir << "\n";
    return 0;
}

int run_train(const GlobalConfig& global, const DataSlice& slice, Hyperparameters hp,
              const std::string& checkpoint_path, const std::string& report_path) {
    hp.rng_seed = global.seed;
    const auto pool = load_manifest_graphs(slice);
    auto result = train(pool, hp, TrainOptions{resolve_jobs(global.jobs)});
    save_checkpoint(checkpoint_path, result.params, hp.embed_iters);
    result.report.checkpoint_path = checkpoint_path;
    result.report.write_csv(report_path);
    std::cout << "trained " << hp.episodes << " episodes on " << pool.size()
              << " graphs; checkpoint: " << checkpoint_path << ", report: " << report_path
              << "\n";
    return 0;
}

MethodOptions make_method_options(const std::string& checkpoint_path, std::size_t celf_sims,
                                  double p, double damping, double method_timeout) {
    MethodOptions opts;
    opts.celf_sims = celf_sims;
    opts.influence_probability = p;
    opts.damping = damping;
    opts.time_budget_seconds = method_timeout;
    if (!checkpoint_path.empty()) opts.checkpoint = load_checkpoint(checkpoint_path);
    return opts;
}

int run_seeds(const GlobalConfig& global, const std::string& edges, const std::string& attrs,
              const std::string& method_name, std::size_t k, const MethodOptions& opts,
              const std::string& out_path) {
    auto loaded = load_graph(edges, attrs);
    const auto method = make_method(method_name, opts);
    const auto seeds =
        method.select(loaded.data, k, derive_key(global.seed, name_key(method_name.c_str())));
    save_seed_set(out_path, seeds, &loaded.node_ids);
    std::cout << "wrote " << seeds.size() << " seeds to " << out_path << "\n";
    return 0;
}

std::vector<SeedMethod> build_methods(const std::vector<std::string>& names,
                                      const MethodOptions& opts) {
    std::vector<SeedMethod> methods;
    for (const auto& name : names) methods.push_back(make_method(name, opts));
    return methods;
}

void warn_failed_cells(const ComparisonTable& table) {
    for (const auto& cell : table.cells)
        if (!cell.error.empty())
            std::cerr << "warning: " << cell.method << " failed on " << cell.dataset << ": "
                      << cell.error << "\n";
}

int run_evaluate_seedfile(const GlobalConfig& global, const std::string& edges,
                          const std::string& attrs, const std::string& seed_file, double p,
                          std::size_t m_eval, const std::string& dataset,
                          const std::string& out_path, bool timings) {
    auto loaded = load_graph(edges, attrs);
    const auto seeds = load_seed_set(seed_file, &loaded.node_ids);
    auto record = evaluate_seed_set(loaded.data.graph, loaded.data.partition, seeds, p, m_eval,
                                    derive_key(global.seed, name_key("evaluate")),
                                    resolve_jobs(global.jobs));
    record.method = "seed-file";
    record.dataset = dataset.empty() ? fs::path(edges).stem().string() : dataset;
    write_records_csv(out_path, std::vector<EvalRecord>{record}, timings);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_evaluate_methods(const GlobalConfig& global, const DataSlice& slice,
                         const std::vector<std::string>& method_names, std::size_t k, double p,
                         std::size_t m_eval, const MethodOptions& opts,
                         const std::string& out_path, const std::string& cells_path,
                         bool timings) {
    TestSet test_set{fs::path(slice.dir).filename().string(), load_manifest_graphs(slice)};
    const auto methods = build_methods(method_names, opts);
    const auto table = compare_methods(test_set, methods, k, p, m_eval, global.seed,
                                       resolve_jobs(global.jobs));
    warn_failed_cells(table);
    write_records_csv(out_path, table.averages, timings);
    if (!cells_path.empty()) write_records_csv(cells_path, table.cells, timings);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_sweep(const GlobalConfig& global, const DataSlice& slice,
              const std::vector<std::string>& method_names, const std::string& param,
              const std::vector<double>& values, std::size_t k, double p, std::size_t m_eval,
              const MethodOptions& opts, const std::string& out_path, bool timings) {
    TestSet test_set{fs::path(slice.dir).filename().string(), load_manifest_graphs(slice)};
    const auto methods = build_methods(method_names, opts);
    std::vector<EvalRecord> rows;
    if (param == "k") {
        std::vector<std::size_t> ks;
        for (double v : values) {
            if (v < 1 || v != std::floor(v))
                throw std::runtime_error("k sweep values must be positive integers");
            ks.push_back(static_cast<std::size_t>(v));
        }
        rows = sweep_k(test_set, methods, ks, p, m_eval, global.seed, resolve_jobs(global.jobs));
    } else if (param == "p") {
        rows = sweep_p(test_set, methods, values, k, m_eval, global.seed,
                       resolve_jobs(global.jobs));
    } else {
        throw std::runtime_error("unknown sweep parameter '" + param + "' (use k or p)");
    }
    write_records_csv(out_path, rows, timings);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_ablate(const GlobalConfig& global, const DataSlice& slice, Hyperparameters hp,
               const std::vector<double>& phis, const std::string& out_dir,
               std::size_t window) {
    hp.rng_seed = global.seed;
    const auto pool = load_manifest_graphs(slice);
    fs::create_directories(out_dir);
    const auto ablation = ablate_phi(pool, phis, hp, resolve_jobs(global.jobs));
    for (std::size_t i = 0; i < ablation.phis.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "report_phi_%.10g.csv", ablation.phis[i]);
        ablation.reports[i].write_csv((fs::path(out_dir) / name).string());
    }
    write_ablation_csv((fs::path(out_dir) / "curves.csv").string(), ablation, window);
    std::cout << "wrote ablation reports to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairspread: fairness-aware influence maximization toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file (flags win)");

    GlobalConfig global;
    app.add_option("--seed", global.seed, "Master RNG seed; all randomness derives from it")
        ->capture_default_str();
    app.add_option("--jobs", global.jobs,
                   "Worker threads (0: FAIRSPREAD_JOBS env var, else serial)")
        ->capture_default_str();

    // generate
    auto* gen = app.add_subcommand("generate", "Generate homophilic scale-free graphs");
    HbaParams hba;
    std::size_t gen_count = 1;
    std::string gen_out = "data", gen_prefix = "hba";
    gen->add_option("--n", hba.node_count, "Nodes per graph")->capture_default_str();
    gen->add_option("--edges-per-node", hba.edges_per_node, "Attachment edges per node")
        ->capture_default_str();
    gen->add_option("--minority-fraction", hba.minority_fraction, "Minority group fraction")
        ->capture_default_str();
    gen->add_option("--homophily", hba.homophily, "Same-group attachment weight")
        ->capture_default_str();
    gen->add_option("--count", gen_count, "Number of graphs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
    gen->add_option("--prefix", gen_prefix, "Output file prefix")->capture_default_str();

    // train
    auto* tr = app.add_subcommand("train", "Train the fairness-aware Q-learning agent");
    DataSlice train_slice;
    add_data_slice_options(tr, train_slice);
    HyperFlags train_flags;
    train_flags.attach(tr);
    std::string train_checkpoint = "checkpoint.bin", train_report = "train_report.csv";
    tr->add_option("--checkpoint", train_checkpoint, "Checkpoint output path")
        ->capture_default_str();
    tr->add_option("--report", train_report, "Per-episode report CSV path")
        ->capture_default_str();

    // seeds
    auto* sd = app.add_subcommand("seeds", "Select a seed set with a named method");
    std::string sd_edges, sd_attrs, sd_method, sd_checkpoint, sd_out = "seeds.txt";
    std::size_t sd_k = 30, sd_celf_sims = 200;
    double sd_p = 0.1, sd_damping = 0.85, sd_timeout = 0.0;
    sd->add_option("--edges", sd_edges, "Edge list file")->required();
    sd->add_option("--attrs", sd_attrs, "Attribute file")->required();
    sd->add_option("--method", sd_method, "One of: dq4fairim, celf, greedy, degree, pagerank, parity, fair_pagerank")
        ->required();
    sd->add_option("--k", sd_k, "Seed budget")->capture_default_str();
    sd->add_option("--checkpoint", sd_checkpoint, "Checkpoint (dq4fairim only)");
    sd->add_option("--celf-sims", sd_celf_sims, "Evaluator realizations for greedy/celf")
        ->capture_default_str();
    sd->add_option("--p", sd_p, "Influence probability for greedy/celf")->capture_default_str();
    sd->add_option("--damping", sd_damping, "PageRank damping")->capture_default_str();
    sd->add_option("--method-timeout", sd_timeout,
                   "Wall-clock budget in seconds for greedy/celf (0 = unlimited)")
        ->capture_default_str();
    sd->add_option("--out", sd_out, "Seed set output file")->capture_default_str();

    // evaluate
    auto* ev = app.add_subcommand("evaluate",
                                  "Evaluate a seed file, or compare methods on a test set");
    std::string ev_edges, ev_attrs, ev_seedfile, ev_dataset, ev_checkpoint;
    std::string ev_out = "results.csv", ev_cells;
    std::vector<std::string> ev_methods;
    DataSlice ev_slice;
    std::size_t ev_k = 30, ev_m = 1000, ev_celf_sims = 200;
    double ev_p = 0.1, ev_damping = 0.85, ev_timeout = 0.0;
    bool ev_timings = false;
    ev->add_option("--edges", ev_edges, "Edge list file (seed-file mode)");
    ev->add_option("--attrs", ev_attrs, "Attribute file (seed-file mode)");
    ev->add_option("--seeds-file", ev_seedfile, "Seed set to evaluate (seed-file mode)");
    ev->add_option("--dataset", ev_dataset, "Dataset label in the output");
    ev->add_option("--data", ev_slice.dir, "Test set directory (method mode)");
    ev->add_option("--skip", ev_slice.skip, "Skip this many manifest entries");
    ev->add_option("--take", ev_slice.take, "Use at most this many entries (0 = all)");
    ev->add_option("--methods", ev_methods, "Methods to compare (method mode)")
        ->delimiter(',');
    ev->add_option("--checkpoint", ev_checkpoint, "Checkpoint for dq4fairim");
    ev->add_option("--k", ev_k, "Seed budget (method mode)")->capture_default_str();
    ev->add_option("--p", ev_p, "Influence probability")->capture_default_str();
    ev->add_option("--m-eval", ev_m, "Monte Carlo evaluation simulations")
        ->capture_default_str();
    ev->add_option("--celf-sims", ev_celf_sims, "Evaluator realizations for greedy/celf")
        ->capture_default_str();
    ev->add_option("--damping", ev_damping, "PageRank damping")->capture_default_str();
    ev->add_option("--method-timeout", ev_timeout,
                   "Wall-clock budget in seconds for greedy/celf (0 = unlimited)")
        ->capture_default_str();
    ev->add_flag("--timings", ev_timings,
                 "Publish measured wall times in the seconds column (breaks byte-identical "
                 "reruns)");
    ev->add_option("--out", ev_out, "Results CSV path")->capture_default_str();
    ev->add_option("--cells", ev_cells, "Optional per-graph cells CSV path");

    // sweep
    auto* sw = app.add_subcommand("sweep", "Compare methods across k or p values");
    DataSlice sw_slice;
    add_data_slice_options(sw, sw_slice);
    std::vector<std::string> sw_methods;
    std::vector<double> sw_values;
    std::string sw_param, sw_checkpoint, sw_out = "sweep.csv";
    std::size_t sw_k = 30, sw_m = 1000, sw_celf_sims = 200;
    double sw_p = 0.1, sw_damping = 0.85, sw_timeout = 0.0;
    bool sw_timings = false;
    sw->add_option("--methods", sw_methods, "Methods to compare")->delimiter(',')->required();
    sw->add_option("--param", sw_param, "Swept parameter: k or p")->required();
    sw->add_option("--values", sw_values, "Swept values")->delimiter(',')->required();
    sw->add_option("--k", sw_k, "Fixed budget for p sweeps")->capture_default_str();
    sw->add_option("--p", sw_p, "Fixed probability for k sweeps")->capture_default_str();
    sw->add_option("--m-eval", sw_m, "Monte Carlo evaluation simulations")
        ->capture_default_str();
    sw->add_option("--celf-sims", sw_celf_sims, "Evaluator realizations for greedy/celf")
        ->capture_default_str();
    sw->add_option("--damping", sw_damping, "PageRank damping")->capture_default_str();
    sw->add_option("--method-timeout", sw_timeout,
                   "Wall-clock budget in seconds for greedy/celf (0 = unlimited)")
        ->capture_default_str();
    sw->add_flag("--timings", sw_timings,
                 "Publish measured wall times in the seconds column (breaks byte-identical "
                 "reruns)");
    sw->add_option("--checkpoint", sw_checkpoint, "Checkpoint for dq4fairim");
    sw->add_option("--out", sw_out, "Sweep CSV path")->capture_default_str();

    // ablate
    auto* ab = app.add_subcommand("ablate", "Train once per fairness weight phi");
    DataSlice ab_slice;
    add_data_slice_options(ab, ab_slice);
    HyperFlags ab_flags;
    ab_flags.attach(ab);
    std::vector<double> ab_phis{0.0, 0.25, 0.5, 0.75, 1.0};
    std::string ab_out = "ablation";
    std::size_t ab_window = 50;
    ab->add_option("--phis", ab_phis, "Fairness weights to train")
        ->delimiter(',')
        ->capture_default_str();
    ab->add_option("--out-dir", ab_out, "Output directory")->capture_default_str();
    ab->add_option("--window", ab_window, "Rolling mean window for curves")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_generate(global, hba, gen_count, gen_out, gen_prefix);
        if (tr->parsed())
            return run_train(global, train_slice, train_flags.hp, train_checkpoint, train_report);
        if (sd->parsed())
            return run_seeds(global, sd_edges, sd_attrs, sd_method, sd_k,
                             make_method_options(sd_checkpoint, sd_celf_sims, sd_p, sd_damping,
                                                 sd_timeout),
                             sd_out);
        if (ev->parsed()) {
            if (!ev_seedfile.empty()) {
                if (ev_edges.empty() || ev_attrs.empty())
                    throw std::runtime_error("--seeds-file mode needs --edges and --attrs");
                return run_evaluate_seedfile(global, ev_edges, ev_attrs, ev_seedfile, ev_p, ev_m,
                                             ev_dataset, ev_out, ev_timings);
            }
            if (ev_slice.dir.empty() || ev_methods.empty())
                throw std::runtime_error(
                    "evaluate needs either --seeds-file or --data with --methods");
            return run_evaluate_methods(
                global, ev_slice, ev_methods, ev_k, ev_p, ev_m,
                make_method_options(ev_checkpoint, ev_celf_sims, ev_p, ev_damping, ev_timeout),
                ev_out, ev_cells, ev_timings);
        }
        if (sw->parsed())
            return run_sweep(global, sw_slice, sw_methods, sw_param, sw_values, sw_k, sw_p, sw_m,
                             make_method_options(sw_checkpoint, sw_celf_sims, sw_p, sw_damping,
                                                 sw_timeout),
                             sw_out, sw_timings);
        if (ab->parsed())
            return run_ablate(global, ab_slice, ab_flags.hp, ab_phis, ab_out, ab_window);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
