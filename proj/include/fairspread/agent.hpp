#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairspread/diffusion.hpp"
#include "fairspread/embedding.hpp"
#include "fairspread/graph.hpp"
#include "fairspread/parallel.hpp"
#include "fairspread/replay.hpp"
#include "fairspread/rng.hpp"

namespace fairspread {

/// All training knobs. Defaults follow the reference configuration:
/// gamma 1, epsilon 1 -> 0.05 with decay 0.995, d = 64, replay 2000,
/// batch 32, learning rate 0.001, phi 1, update every step.
struct Hyperparameters {
    std::size_t budget_k = 30;
    double phi = 1.0;
    std::size_t episodes = 750;
    double gamma = 1.0;
    double epsilon0 = 1.0;
    double epsilon_decay = 0.995;
    double epsilon_min = 0.05;
    std::size_t batch_size = 32;
    double learning_rate = 0.001;
    std::size_t update_period = 1;        // K: SGD update every K global steps
    std::size_t replay_capacity = 2000;
    std::size_t train_sims = 20;          // Monte Carlo sims per reward estimate
    double influence_probability = 0.1;
    int embed_dim = 64;
    int embed_iters = 4;
    bool decay_per_episode = false;       // default: decay epsilon per step
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (budget_k < 1) throw std::invalid_argument("budget must be at least 1");
        if (phi < 0) throw std::invalid_argument("phi must be non-negative");
        if (episodes < 1) throw std::invalid_argument("need at least one episode");
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
        if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0) || !(epsilon_min >= 0.0) ||
            epsilon_min > epsilon0)
            throw std::invalid_argument("need 0 <= epsilon_min <= epsilon0 <= 1");
        if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
            throw std::invalid_argument("epsilon decay must be in (0,1]");
        if (batch_size < 1 || batch_size > replay_capacity)
            throw std::invalid_argument("batch size must be in [1, replay capacity]");
        if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
        if (update_period < 1) throw std::invalid_argument("update period must be at least 1");
        if (train_sims < 1) throw std::invalid_argument("need at least one training simulation");
        if (!(influence_probability >= 0.0 && influence_probability <= 1.0))
            throw std::invalid_argument("influence probability must be in [0,1]");
        if (embed_dim < 1 || embed_iters < 1)
            throw std::invalid_argument("embedding dimension/iterations must be positive");
    }
};

struct EpisodeRecord {
    std::size_t episode = 0;  // 1-based
    double reward = 0.0;      // cumulative fair reward at episode end
    double outreach = 0.0;    // outreach of the final seed set (training sims)
    double fairness = 0.0;    // maximin fairness of the final seed set
    double epsilon = 0.0;     // exploration rate after the episode
    double mean_loss = 0.0;   // mean squared TD error over this episode's updates
};

struct TrainReport {
    std::vector<EpisodeRecord> episodes;
    std::string checkpoint_path;  // filled by callers that persist the parameters

    static constexpr const char* csv_header =
        "episode,reward,outreach,fairness,epsilon,mean_loss";

    void write_csv(const std::string& path) const;
};

struct TrainResult {
    ParameterSet params;
    TrainReport report;
};

struct TrainOptions {
    int jobs = 1;
    // Warm start; must match the pool's feature width when set.
    const ParameterSet* initial_params = nullptr;
    // Test/diagnostic hook, called after each stored transition.
    std::function<void(const Transition&)> on_transition;
};

/// Epsilon-greedy action over the unselected nodes: with probability
/// epsilon a uniformly random unselected node, otherwise the Q argmax
/// with ties broken towards the lowest node index.
inline NodeId epsilon_greedy_action(const Graph& graph, const CommunityPartition& partition,
                                    std::span<const NodeId> seeds, const ParameterSet& params,
                                    int t_embed, double epsilon, RngStream& rng) {
    const std::size_t n = graph.node_count();
    std::vector<char> selected(n, 0);
    for (NodeId s : seeds) selected[s] = 1;
    std::vector<NodeId> unselected;
    unselected.reserve(n - seeds.size());
    for (NodeId v = 0; v < n; ++v)
        if (!selected[v]) unselected.push_back(v);
    if (unselected.empty()) throw std::invalid_argument("no unselected node remains");

    if (rng.next_double() < epsilon)
        return unselected[rng.next_below(unselected.size())];

    const auto features = StateFeatures::make(partition, seeds);
    const auto embeddings = compute_embeddings(graph, features, params, t_embed);
    const auto q = q_values(graph, embeddings, unselected, params);
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = i;
    return unselected[best];
}

/// Greedy rollout of the learned policy: k selections with embeddings
/// recomputed after every step. Returns the nodes in selection order.
inline std::vector<NodeId> select_seeds(const Graph& graph, const CommunityPartition& partition,
                                        const ParameterSet& params, int t_embed, std::size_t k) {
    if (k > graph.node_count())
        throw std::invalid_argument("budget exceeds node count");
    std::vector<NodeId> picked;
    std::vector<NodeId> sorted_seeds;
    RngStream unused(0);
    for (std::size_t t = 0; t < k; ++t) {
        NodeId a = epsilon_greedy_action(graph, partition, sorted_seeds, params, t_embed,
                                         /*epsilon=*/0.0, unused);
        picked.push_back(a);
        sorted_seeds.insert(std::upper_bound(sorted_seeds.begin(), sorted_seeds.end(), a), a);
    }
    return picked;
}

/// TD target for a stored transition: the reward alone when terminal,
/// otherwise reward + gamma * max Q over the next state's unselected
/// nodes.
inline double td_target(const CommunityGraph& g, const Transition& t, const ParameterSet& params,
                        double gamma, int t_embed) {
    if (t.terminal) return t.reward;
    const std::size_t n = g.graph.node_count();
    std::vector<char> selected(n, 0);
    for (NodeId s : t.seeds_after) selected[s] = 1;
    std::vector<NodeId> unselected;
    unselected.reserve(n - t.seeds_after.size());
    for (NodeId v = 0; v < n; ++v)
        if (!selected[v]) unselected.push_back(v);
    if (unselected.empty()) return t.reward;  // saturated state, no successor action
    const auto features = StateFeatures::make(g.partition, t.seeds_after);
    const auto embeddings = compute_embeddings(g.graph, features, params, t_embed);
    const auto q = q_values(g.graph, embeddings, unselected, params);
    return t.reward + gamma * *std::max_element(q.begin(), q.end());
}

/// Deep Q-learning over a pool of graphs.
///
/// Per episode: draw a pool graph uniformly, run k epsilon-greedy
/// selections, score each prefix of the seed set with a small Monte
/// Carlo estimate of outreach + phi * fairness, store the marginal
/// rewards, and every K steps (once the replay holds a full batch) apply
/// one SGD step over a sampled batch of squared TD errors. Epsilon
/// decays multiplicatively per step (or per episode when configured)
/// down to epsilon_min.
inline TrainResult train(const std::vector<CommunityGraph>& pool, const Hyperparameters& hp,
                         const TrainOptions& options = {}) {
    hp.validate();
    if (pool.empty()) throw std::invalid_argument("empty training pool");
    const std::size_t l = pool.front().partition.community_count();
    for (const auto& g : pool) {
        if (g.partition.community_count() != l)
            throw std::invalid_argument("pool graphs must share one community count");
        if (hp.budget_k > g.graph.node_count())
            throw std::invalid_argument("budget exceeds node count of a pool graph");
    }

    RngStream loop_rng(derive_key(hp.rng_seed, name_key("train-loop")));
    ParameterSet params;
    if (options.initial_params) {
        params = *options.initial_params;
        if (params.feature_dim() != static_cast<int>(1 + l))
            throw std::invalid_argument("initial parameters sized for a different community count");
    } else {
        RngStream init_rng(derive_key(hp.rng_seed, name_key("train-init")));
        params = ParameterSet::random(static_cast<int>(1 + l), hp.embed_dim, init_rng);
    }

    ReplayMemory replay(hp.replay_capacity);
    const CascadeConfig reward_config{hp.influence_probability, hp.train_sims};
    const int jobs = std::max(1, options.jobs);

    TrainResult result;
    result.report.episodes.reserve(hp.episodes);
    double epsilon = hp.epsilon0;
    std::size_t global_step = 0;

    std::vector<ParameterSet> batch_grads;
    std::vector<double> batch_losses;

    for (std::size_t episode = 1; episode <= hp.episodes; ++episode) {
        const std::size_t gid = loop_rng.next_below(pool.size());
        const CommunityGraph& g = pool[gid];

        std::vector<NodeId> seeds;  // sorted
        double prev_reward = 0.0;
        SpreadEstimate last_estimate;
        double loss_sum = 0.0;
        std::size_t updates = 0;

        for (std::size_t t = 1; t <= hp.budget_k; ++t) {
            const NodeId action = epsilon_greedy_action(g.graph, g.partition, seeds, params,
                                                        hp.embed_iters, epsilon, loop_rng);
            std::vector<NodeId> seeds_after = seeds;
            seeds_after.insert(
                std::upper_bound(seeds_after.begin(), seeds_after.end(), action), action);

            last_estimate = estimate_spread(
                g.graph, g.partition, seeds_after, reward_config,
                derive_key(hp.rng_seed, name_key("reward"), episode, t), jobs);
            const double cum_reward = fair_reward(last_estimate, hp.phi);
            Transition transition{gid,         seeds,
                                  action,      cum_reward - prev_reward,
                                  seeds_after, t == hp.budget_k};
            prev_reward = cum_reward;
            replay.push(transition);
            if (options.on_transition) options.on_transition(transition);
            seeds = std::move(seeds_after);

            ++global_step;
            if (global_step % hp.update_period == 0 && replay.size() >= hp.batch_size) {
                const auto batch = replay.sample_indices(hp.batch_size, loop_rng);
                batch_grads.assign(hp.batch_size,
                                   ParameterSet());  // filled per index below
                batch_losses.assign(hp.batch_size, 0.0);
                parallel_for(hp.batch_size, jobs, [&](std::size_t j) {
                    const Transition& tr = replay[batch[j]];
                    const CommunityGraph& tg = pool[tr.graph_id];
                    const double y = td_target(tg, tr, params, hp.gamma, hp.embed_iters);
                    const auto features = StateFeatures::make(tg.partition, tr.seeds_before);
                    batch_grads[j] = q_gradient(tg.graph, features, params, tr.action, y,
                                                hp.embed_iters, &batch_losses[j]);
                });
                ParameterSet grad_sum = std::move(batch_grads[0]);
                for (std::size_t j = 1; j < hp.batch_size; ++j) grad_sum += batch_grads[j];
                sgd_step(params, grad_sum, hp.learning_rate, hp.batch_size);
                double batch_loss = 0.0;
                for (double v : batch_losses) batch_loss += v;
                batch_loss /= static_cast<double>(hp.batch_size);
                if (!std::isfinite(batch_loss)) throw std::runtime_error("non-finite loss");
                loss_sum += batch_loss;
                ++updates;
            }
            if (!hp.decay_per_episode)
                epsilon = std::max(hp.epsilon_decay * epsilon, hp.epsilon_min);
        }
        if (hp.decay_per_episode)
            epsilon = std::max(hp.epsilon_decay * epsilon, hp.epsilon_min);

        result.report.episodes.push_back({episode, prev_reward, last_estimate.total_outreach,
                                          maximin_fairness(last_estimate), epsilon,
                                          updates ? loss_sum / static_cast<double>(updates)
                                                  : 0.0});
    }
    result.params = std::move(params);
    return result;
}

inline void TrainReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << csv_header << '\n';
    char line[256];
    for (const auto& e : episodes) {
        std::snprintf(line, sizeof line, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g", e.episode, e.reward,
                      e.outreach, e.fairness, e.epsilon, e.mean_loss);
        out << line << '\n';
    }
}

}  // namespace fairspread
