#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairspread/agent.hpp"
#include "fairspread/baselines.hpp"
#include "fairspread/diffusion.hpp"
#include "fairspread/graph.hpp"
#include "fairspread/rng.hpp"

namespace fairspread {

/// One evaluated (method, dataset) cell.
///
/// fairness_mean is the maximin fairness of the averaged estimate (the
/// worst community's mean activation fraction) and fairness_std the
/// per-realization standard deviation of that community's fraction, so
/// fairness_std / sqrt(m_eval) is the standard error of fairness_mean.
struct EvalRecord {
    std::string method;
    std::string dataset;
    std::size_t k = 0;
    double p = 0.0;
    double outreach_mean = 0.0;
    double outreach_std = 0.0;
    double fairness_mean = 0.0;
    double fairness_std = 0.0;
    double disparity_mean = 0.0;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::string error;  // non-empty when the method failed on this cell

    static constexpr const char* csv_header =
        "method,dataset,k,p,outreach_mean,outreach_std,fairness_mean,fairness_std,"
        "disparity_mean,seconds,seed";

    /// The seconds column is zeroed by default so that reruns with one
    /// seed stay byte-identical; pass include_timings to publish the
    /// measured wall time instead.
    std::string csv_row(bool include_timings = false) const {
        char buf[512];
        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%llu",
                      method.c_str(), dataset.c_str(), k, p, outreach_mean, outreach_std,
                      fairness_mean, fairness_std, disparity_mean,
                      include_timings ? seconds : 0.0,
                      static_cast<unsigned long long>(seed));
        return buf;
    }
};

inline void write_records_csv(const std::string& path, std::span<const EvalRecord> records,
                              bool include_timings = false) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write results: " + path);
    out << EvalRecord::csv_header << '\n';
    for (const auto& r : records) out << r.csv_row(include_timings) << '\n';
}

/// Evaluate one seed set with m_eval Monte Carlo realizations.
inline EvalRecord evaluate_seed_set(const Graph& graph, const CommunityPartition& partition,
                                    std::span<const NodeId> seeds, double p, std::size_t m_eval,
                                    std::uint64_t stream_key, int jobs = 1) {
    const auto start = std::chrono::steady_clock::now();
    const CascadeConfig config{p, m_eval};
    const auto tallies =
        detail::run_simulations(graph, partition, seeds, config, stream_key, jobs, true);
    const auto est = detail::estimate_from_tallies(tallies, partition, m_eval);

    EvalRecord rec;
    rec.k = seeds.size();
    rec.p = p;
    rec.seed = stream_key;
    rec.outreach_mean = est.total_outreach;
    rec.outreach_std = est.std_total;
    rec.fairness_mean = maximin_fairness(est);
    rec.disparity_mean = disparity(est);

    // Std of the least-reached community's per-realization fraction.
    const std::size_t l = partition.community_count();
    std::size_t worst = 0;
    for (std::size_t c = 1; c < l; ++c)
        if (est.community_outreach[c] < est.community_outreach[worst]) worst = c;
    const double size = static_cast<double>(partition.community_sizes()[worst]);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < m_eval; ++i) {
        const double frac = tallies.per_sim_community[i * l + worst] / size;
        sum += frac;
        sum_sq += frac * frac;
    }
    const double mean = sum / static_cast<double>(m_eval);
    rec.fairness_std =
        std::sqrt(std::max(0.0, sum_sq / static_cast<double>(m_eval) - mean * mean));

    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

/// A named seeding strategy. The stream key feeds any Monte Carlo
/// estimation the method performs; deterministic methods ignore it.
struct SeedMethod {
    std::string name;
    std::function<std::vector<NodeId>(const CommunityGraph&, std::size_t k, std::uint64_t key)>
        select;
};

struct MethodOptions {
    std::optional<Checkpoint> checkpoint;  // required for dq4fairim
    std::size_t celf_sims = 200;           // evaluator realizations for greedy/celf
    double influence_probability = 0.1;
    double damping = 0.85;
    double pagerank_tol = 1e-10;
    std::size_t pagerank_iters = 200;
    double time_budget_seconds = 0.0;      // per-method wall-clock budget, 0 = unlimited
};

inline const std::vector<std::string>& known_method_names() {
    static const std::vector<std::string> names = {
        "dq4fairim", "celf", "greedy", "degree", "pagerank", "parity", "fair_pagerank"};
    return names;
}

inline SeedMethod make_method(const std::string& name, const MethodOptions& opts = {}) {
    if (name == "degree") {
        return {name, [](const CommunityGraph& g, std::size_t k, std::uint64_t) {
                    return top_degree(g.graph, k);
                }};
    }
    if (name == "pagerank") {
        return {name, [opts](const CommunityGraph& g, std::size_t k, std::uint64_t) {
                    return pagerank(g.graph, opts.damping, opts.pagerank_tol, opts.pagerank_iters)
                        .top(k);
                }};
    }
    if (name == "parity") {
        return {name, [](const CommunityGraph& g, std::size_t k, std::uint64_t) {
                    return parity_degree(g.graph, g.partition, k).seeds;
                }};
    }
    if (name == "fair_pagerank") {
        return {name, [opts](const CommunityGraph& g, std::size_t k, std::uint64_t) {
                    return fair_pagerank(g.graph, g.partition, k, opts.damping, opts.pagerank_tol,
                                         opts.pagerank_iters)
                        .seeds;
                }};
    }
    if (name == "celf") {
        return {name, [opts](const CommunityGraph& g, std::size_t k, std::uint64_t key) {
                    return celf(g.graph, k,
                                CascadeConfig{opts.influence_probability, opts.celf_sims}, key,
                                opts.time_budget_seconds)
                        .seeds;
                }};
    }
    if (name == "greedy") {
        return {name, [opts](const CommunityGraph& g, std::size_t k, std::uint64_t key) {
                    return greedy_im(g.graph, k,
                                     CascadeConfig{opts.influence_probability, opts.celf_sims},
                                     key, opts.time_budget_seconds)
                        .seeds;
                }};
    }
    if (name == "dq4fairim") {
        if (!opts.checkpoint)
            throw std::invalid_argument("method dq4fairim needs a checkpoint");
        const Checkpoint ck = *opts.checkpoint;
        return {name, [ck](const CommunityGraph& g, std::size_t k, std::uint64_t) {
                    return select_seeds(g.graph, g.partition, ck.params, ck.t_embed, k);
                }};
    }
    std::string valid;
    for (const auto& m : known_method_names()) valid += (valid.empty() ? "" : ", ") + m;
    throw std::invalid_argument("unknown method '" + name + "' (valid: " + valid + ")");
}

/// A labelled evaluation set.
struct TestSet {
    std::string name;
    std::vector<CommunityGraph> graphs;
};

struct ComparisonTable {
    std::vector<EvalRecord> cells;     // method x graph
    std::vector<EvalRecord> averages;  // one per method
};

/// Run every method on every test graph, average per method. A method
/// failure is recorded in its cell rather than aborting the table. Cell
/// RNG streams derive from (master seed, method name, graph index), so
/// the table is independent of execution order.
inline ComparisonTable compare_methods(const TestSet& test_set,
                                       std::span<const SeedMethod> methods, std::size_t k,
                                       double p, std::size_t m_eval, std::uint64_t master_seed,
                                       int jobs = 1) {
    if (test_set.graphs.empty()) throw std::invalid_argument("empty test set");
    ComparisonTable table;
    for (const auto& method : methods) {
        const std::uint64_t method_key = derive_key(master_seed, name_key(method.name.c_str()));
        EvalRecord avg;
        avg.method = method.name;
        avg.dataset = test_set.name;
        avg.k = k;
        avg.p = p;
        avg.seed = master_seed;
        double var_sum = 0.0, fair_var_sum = 0.0;
        std::size_t ok_cells = 0;
        for (std::size_t gi = 0; gi < test_set.graphs.size(); ++gi) {
            const auto& g = test_set.graphs[gi];
            EvalRecord cell;
            const auto started = std::chrono::steady_clock::now();
            try {
                const auto seeds = method.select(g, k, derive_key(method_key, gi, 0));
                cell = evaluate_seed_set(g.graph, g.partition, seeds, p, m_eval,
                                         derive_key(method_key, gi, 1), jobs);
            } catch (const std::exception& ex) {
                cell = EvalRecord{};
                cell.k = k;
                cell.p = p;
                cell.error = ex.what();
                cell.outreach_mean = cell.outreach_std = cell.fairness_mean = cell.fairness_std =
                    cell.disparity_mean = std::numeric_limits<double>::quiet_NaN();
            }
            cell.method = method.name;
            cell.dataset = test_set.name + "/" + std::to_string(gi);
            cell.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                    .count();
            cell.seed = master_seed;
            table.cells.push_back(cell);
            if (cell.error.empty()) {
                avg.outreach_mean += cell.outreach_mean;
                avg.fairness_mean += cell.fairness_mean;
                avg.disparity_mean += cell.disparity_mean;
                var_sum += cell.outreach_std * cell.outreach_std;
                fair_var_sum += cell.fairness_std * cell.fairness_std;
                ++ok_cells;
            }
            avg.seconds += cell.seconds;
        }
        if (ok_cells > 0) {
            const double g = static_cast<double>(ok_cells);
            avg.outreach_mean /= g;
            avg.fairness_mean /= g;
            avg.disparity_mean /= g;
            // Standard deviation of the averaged estimate (per-cell MC
            // errors propagated through the mean over graphs).
            avg.outreach_std = std::sqrt(var_sum) / g;
            avg.fairness_std = std::sqrt(fair_var_sum) / g;
        } else {
            avg.outreach_mean = avg.fairness_mean = avg.disparity_mean =
                std::numeric_limits<double>::quiet_NaN();
            avg.error = "all cells failed";
        }
        table.averages.push_back(avg);
    }
    return table;
}

/// compare_methods once per budget; plot-ready rows.
inline std::vector<EvalRecord> sweep_k(const TestSet& test_set,
                                       std::span<const SeedMethod> methods,
                                       std::span<const std::size_t> k_values, double p,
                                       std::size_t m_eval, std::uint64_t master_seed,
                                       int jobs = 1) {
    std::vector<EvalRecord> rows;
    for (std::size_t k : k_values) {
        auto table =
            compare_methods(test_set, methods, k, p, m_eval, derive_key(master_seed, k), jobs);
        rows.insert(rows.end(), table.averages.begin(), table.averages.end());
    }
    return rows;
}

/// compare_methods once per influence probability.
inline std::vector<EvalRecord> sweep_p(const TestSet& test_set,
                                       std::span<const SeedMethod> methods,
                                       std::span<const double> p_values, std::size_t k,
                                       std::size_t m_eval, std::uint64_t master_seed,
                                       int jobs = 1) {
    std::vector<EvalRecord> rows;
    std::size_t pi = 0;
    for (double p : p_values) {
        auto table =
            compare_methods(test_set, methods, k, p, m_eval, derive_key(master_seed, pi++), jobs);
        rows.insert(rows.end(), table.averages.begin(), table.averages.end());
    }
    return rows;
}

struct GeneralizationResult {
    ParameterSet params;
    int t_embed = 0;
    TrainReport report;
    std::vector<EvalRecord> rows;  // per test set and method
};

/// Train once on the small pool, then evaluate the frozen policy on each
/// (typically larger) test set next to re-executed baselines.
inline GeneralizationResult generalization_run(const std::vector<CommunityGraph>& train_pool,
                                               std::span<const TestSet> test_sets,
                                               const Hyperparameters& hp,
                                               std::span<const std::string> baseline_names,
                                               const MethodOptions& opts, std::size_t k, double p,
                                               std::size_t m_eval, std::uint64_t master_seed,
                                               int jobs = 1) {
    GeneralizationResult result;
    auto trained = train(train_pool, hp, TrainOptions{jobs});
    result.params = std::move(trained.params);
    result.t_embed = hp.embed_iters;
    result.report = std::move(trained.report);

    MethodOptions dq_opts = opts;
    dq_opts.checkpoint = Checkpoint{result.params, hp.embed_iters,
                                    static_cast<int>(result.params.feature_dim() - 1)};
    std::vector<SeedMethod> methods;
    methods.push_back(make_method("dq4fairim", dq_opts));
    for (const auto& name : baseline_names) methods.push_back(make_method(name, opts));

    for (const auto& test_set : test_sets) {
        auto table = compare_methods(test_set, methods, k, p, m_eval,
                                     derive_key(master_seed, name_key(test_set.name.c_str())),
                                     jobs);
        result.rows.insert(result.rows.end(), table.averages.begin(), table.averages.end());
    }
    return result;
}

/// Rolling mean with the given window; output length is n - window + 1.
inline std::vector<double> rolling_mean(std::span<const double> series, std::size_t window) {
    if (window == 0 || window > series.size())
        throw std::invalid_argument("window must be in [1, series length]");
    std::vector<double> out;
    out.reserve(series.size() - window + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        sum += series[i];
        if (i + 1 >= window) {
            out.push_back(sum / static_cast<double>(window));
            sum -= series[i + 1 - window];
        }
    }
    return out;
}

struct AblationResult {
    std::vector<double> phis;
    std::vector<TrainReport> reports;  // one per phi
};

/// Train one agent per fairness weight on the same pool and seed.
inline AblationResult ablate_phi(const std::vector<CommunityGraph>& pool,
                                 std::span<const double> phis, Hyperparameters hp, int jobs = 1) {
    AblationResult result;
    for (double phi : phis) {
        hp.phi = phi;
        result.phis.push_back(phi);
        result.reports.push_back(train(pool, hp, TrainOptions{jobs}).report);
    }
    return result;
}

/// Plot-ready ablation curves: per episode (windowed), one block of
/// outreach/fairness/reward rolling means per phi.
inline void write_ablation_csv(const std::string& path, const AblationResult& ablation,
                               std::size_t window = 50) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ablation curves: " + path);
    out << "phi,episode,outreach_rolling,fairness_rolling,reward_rolling\n";
    char buf[256];
    for (std::size_t i = 0; i < ablation.reports.size(); ++i) {
        const auto& episodes = ablation.reports[i].episodes;
        std::vector<double> outreach, fairness, reward;
        for (const auto& e : episodes) {
            outreach.push_back(e.outreach);
            fairness.push_back(e.fairness);
            reward.push_back(e.reward);
        }
        const std::size_t w = std::min(window, outreach.size());
        const auto ro = rolling_mean(outreach, w);
        const auto rf = rolling_mean(fairness, w);
        const auto rr = rolling_mean(reward, w);
        for (std::size_t j = 0; j < ro.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.10g,%zu,%.10g,%.10g,%.10g", ablation.phis[i],
                          j + w, ro[j], rf[j], rr[j]);
            out << buf << '\n';
        }
    }
}

}  // namespace fairspread
