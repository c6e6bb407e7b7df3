#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairspread/graph.hpp"
#include "fairspread/rng.hpp"

namespace fairspread {

/// Trainable parameters of the embedding network and Q head.
///
/// theta1 maps node features (selection bit + community one-hot) into the
/// embedding space, theta2 mixes aggregated neighbor embeddings, and
/// theta3..theta5 form the Q head over the pooled graph embedding and the
/// candidate node embedding.
struct ParameterSet {
    Eigen::MatrixXd theta1;  // feature_dim x d
    Eigen::MatrixXd theta2;  // d x d
    Eigen::VectorXd theta3;  // 2d
    Eigen::MatrixXd theta4;  // d x d
    Eigen::MatrixXd theta5;  // d x d

    int embed_dim() const { return static_cast<int>(theta2.rows()); }
    int feature_dim() const { return static_cast<int>(theta1.rows()); }

    static ParameterSet zeros(int feature_dim, int d) {
        ParameterSet p;
        p.theta1 = Eigen::MatrixXd::Zero(feature_dim, d);
        p.theta2 = Eigen::MatrixXd::Zero(d, d);
        p.theta3 = Eigen::VectorXd::Zero(2 * d);
        p.theta4 = Eigen::MatrixXd::Zero(d, d);
        p.theta5 = Eigen::MatrixXd::Zero(d, d);
        return p;
    }

    /// Uniform init in [-0.05, 0.05]; fill order is fixed so results are
    /// reproducible from the stream.
    static ParameterSet random(int feature_dim, int d, RngStream& rng) {
        ParameterSet p = zeros(feature_dim, d);
        auto fill = [&rng](auto& m) {
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    m(r, c) = (rng.next_double() - 0.5) * 0.1;
        };
        fill(p.theta1);
        fill(p.theta2);
        fill(p.theta3);
        fill(p.theta4);
        fill(p.theta5);
        return p;
    }

    void set_zero() {
        theta1.setZero();
        theta2.setZero();
        theta3.setZero();
        theta4.setZero();
        theta5.setZero();
    }

    ParameterSet& operator+=(const ParameterSet& o) {
        theta1 += o.theta1;
        theta2 += o.theta2;
        theta3 += o.theta3;
        theta4 += o.theta4;
        theta5 += o.theta5;
        return *this;
    }

    bool all_finite() const {
        return theta1.allFinite() && theta2.allFinite() && theta3.allFinite() &&
               theta4.allFinite() && theta5.allFinite();
    }

    void check_shapes() const {
        const int d = embed_dim();
        if (theta1.cols() != d || theta2.cols() != d || theta3.size() != 2 * d ||
            theta4.rows() != d || theta4.cols() != d || theta5.rows() != d ||
            theta5.cols() != d)
            throw std::invalid_argument("parameter shapes are inconsistent");
    }
};

/// Per-node input features, one column per node:
/// row 0 holds the selection bit, rows 1.. the community one-hot.
struct StateFeatures {
    Eigen::MatrixXd x;  // feature_dim x n

    static StateFeatures make(const CommunityPartition& partition,
                              std::span<const NodeId> selected) {
        const std::size_t n = partition.node_count();
        const std::size_t l = partition.community_count();
        StateFeatures f;
        f.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(1 + l),
                                    static_cast<Eigen::Index>(n));
        for (std::size_t v = 0; v < n; ++v) f.x(1 + partition.label(static_cast<NodeId>(v)), v) = 1.0;
        for (NodeId s : selected) {
            if (s >= n) throw std::invalid_argument("selected node out of range");
            f.x(0, s) = 1.0;
        }
        return f;
    }
};

/// Node embeddings after a fixed number of synchronous update rounds,
/// one column per node.
struct EmbeddingState {
    Eigen::MatrixXd mu;  // d x n
    int iterations = 0;
};

namespace detail {

// out.col(v) = sum of in.col(u) over neighbors u of v.
inline void aggregate_neighbors(const Graph& graph, const Eigen::MatrixXd& in,
                                Eigen::MatrixXd& out) {
    out.setZero();
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        auto col = out.col(v);
        for (NodeId u : graph.neighbors(v)) col += in.col(u);
    }
}

}  // namespace detail

/// Run t_embed synchronous embedding rounds from the all-zero state:
///   mu_v <- relu(theta1^T x_v + theta2 * sum_{u in N(v)} mu_u)
inline EmbeddingState compute_embeddings(const Graph& graph, const StateFeatures& features,
                                         const ParameterSet& params, int t_embed) {
    params.check_shapes();
    if (t_embed < 1) throw std::invalid_argument("need at least one embedding iteration");
    if (features.x.rows() != params.theta1.rows())
        throw std::invalid_argument("feature dimension does not match theta1 rows");
    if (features.x.cols() != static_cast<Eigen::Index>(graph.node_count()))
        throw std::invalid_argument("feature column count does not match node count");
    const Eigen::Index n = features.x.cols();
    const Eigen::Index d = params.embed_dim();

    const Eigen::MatrixXd base = params.theta1.transpose() * features.x;  // d x n
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(d, n);
    Eigen::MatrixXd agg(d, n);
    for (int t = 0; t < t_embed; ++t) {
        detail::aggregate_neighbors(graph, mu, agg);
        mu = (base + params.theta2 * agg).cwiseMax(0.0);
    }
    return {std::move(mu), t_embed};
}

/// Q values for a batch of candidate actions in one state:
///   Q(S, a) = theta3 . relu([theta4 * sum_u mu_u ; theta5 * mu_a])
/// The pooled embedding term is computed once for all candidates.
inline std::vector<double> q_values(const Graph& graph, const EmbeddingState& embeddings,
                                    std::span<const NodeId> candidates,
                                    const ParameterSet& params) {
    if (candidates.empty()) throw std::invalid_argument("empty candidate set");
    if (embeddings.mu.cols() != static_cast<Eigen::Index>(graph.node_count()) ||
        embeddings.mu.rows() != params.embed_dim())
        throw std::invalid_argument("embedding shape does not match graph/parameters");
    const Eigen::Index d = params.embed_dim();
    const Eigen::VectorXd pooled = embeddings.mu.rowwise().sum();
    const Eigen::VectorXd h_state = (params.theta4 * pooled).cwiseMax(0.0);
    const double state_term = params.theta3.head(d).dot(h_state);

    std::vector<double> q(candidates.size());
    Eigen::VectorXd h_action(d);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        NodeId a = candidates[i];
        if (a >= graph.node_count()) throw std::invalid_argument("candidate node out of range");
        h_action.noalias() = params.theta5 * embeddings.mu.col(a);
        q[i] = state_term + params.theta3.tail(d).dot(h_action.cwiseMax(0.0));
    }
    return q;
}

/// Gradient of the squared TD error (target - Q(S, a))^2 with respect to
/// every parameter, by backpropagation through the Q head and the
/// unrolled embedding iterations. The target is treated as a constant.
/// Optionally reports the loss and the forward Q value.
inline ParameterSet q_gradient(const Graph& graph, const StateFeatures& features,
                               const ParameterSet& params, NodeId action, double target,
                               int t_embed, double* loss_out = nullptr,
                               double* q_out = nullptr) {
    params.check_shapes();
    if (action >= graph.node_count()) throw std::invalid_argument("action node out of range");
    if (t_embed < 1) throw std::invalid_argument("need at least one embedding iteration");
    const Eigen::Index n = features.x.cols();
    const Eigen::Index d = params.embed_dim();
    if (features.x.rows() != params.theta1.rows() ||
        n != static_cast<Eigen::Index>(graph.node_count()))
        throw std::invalid_argument("feature shape does not match graph/parameters");

    // Forward pass, caching per-iteration embeddings and neighbor sums.
    const Eigen::MatrixXd base = params.theta1.transpose() * features.x;
    std::vector<Eigen::MatrixXd> mu(t_embed + 1);   // mu[t], t = 0..T
    std::vector<Eigen::MatrixXd> agg(t_embed + 1);  // agg[t] = neighbor sums feeding mu[t]
    mu[0] = Eigen::MatrixXd::Zero(d, n);
    for (int t = 1; t <= t_embed; ++t) {
        agg[t].resize(d, n);
        detail::aggregate_neighbors(graph, mu[t - 1], agg[t]);
        mu[t] = (base + params.theta2 * agg[t]).cwiseMax(0.0);
    }
    const Eigen::MatrixXd& mu_T = mu[t_embed];
    const Eigen::VectorXd pooled = mu_T.rowwise().sum();
    Eigen::VectorXd z(2 * d);
    z.head(d).noalias() = params.theta4 * pooled;
    z.tail(d).noalias() = params.theta5 * mu_T.col(action);
    const Eigen::VectorXd relu_z = z.cwiseMax(0.0);
    const double q = params.theta3.dot(relu_z);
    if (!std::isfinite(q)) throw std::runtime_error("non-finite Q value in forward pass");
    if (q_out) *q_out = q;
    if (loss_out) *loss_out = (target - q) * (target - q);

    ParameterSet grad = ParameterSet::zeros(params.feature_dim(), static_cast<int>(d));
    const double g = -2.0 * (target - q);  // dL/dQ

    grad.theta3 = g * relu_z;
    const Eigen::VectorXd dz =
        (g * params.theta3.array() * (z.array() > 0.0).cast<double>()).matrix();
    grad.theta4.noalias() = dz.head(d) * pooled.transpose();
    grad.theta5.noalias() = dz.tail(d) * mu_T.col(action).transpose();

    // d loss / d mu[T]: the pooled term reaches every node, the action
    // term only the action column.
    Eigen::MatrixXd dmu(d, n);
    dmu.colwise() = Eigen::VectorXd(params.theta4.transpose() * dz.head(d));
    dmu.col(action) += params.theta5.transpose() * dz.tail(d);

    Eigen::MatrixXd dpre(d, n), dagg(d, n);
    for (int t = t_embed; t >= 1; --t) {
        dpre = (dmu.array() * (mu[t].array() > 0.0).cast<double>()).matrix();
        grad.theta1.noalias() += features.x * dpre.transpose();
        grad.theta2.noalias() += dpre * agg[t].transpose();
        if (t > 1) {
            dagg.noalias() = params.theta2.transpose() * dpre;
            // Reverse of the neighbor aggregation is the same sum, by
            // symmetry of the undirected adjacency.
            detail::aggregate_neighbors(graph, dagg, dmu);
        }
    }
    if (!grad.all_finite()) throw std::runtime_error("non-finite gradient");
    return grad;
}

/// One SGD step over a batch of accumulated gradients:
/// params <- params - (lr / batch) * grad_sum.
inline void sgd_step(ParameterSet& params, const ParameterSet& grad_sum, double learning_rate,
                     std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    if (params.theta1.rows() != grad_sum.theta1.rows() ||
        params.theta1.cols() != grad_sum.theta1.cols() ||
        params.theta2.cols() != grad_sum.theta2.cols())
        throw std::invalid_argument("gradient shape does not match parameters");
    const double scale = learning_rate / static_cast<double>(batch_size);
    params.theta1 -= scale * grad_sum.theta1;
    params.theta2 -= scale * grad_sum.theta2;
    params.theta3 -= scale * grad_sum.theta3;
    params.theta4 -= scale * grad_sum.theta4;
    params.theta5 -= scale * grad_sum.theta5;
}

// ---------------------------------------------------------------------------
// Checkpoint format (little-endian):
//   8 bytes   magic "FSPREAD1"
//   u32       version (currently 1)
//   u32       embedding dimension d
//   u32       community count l  (feature dim is 1 + l)
//   u32       embedding iterations used at training time
//   doubles   theta1 row-major ((1+l) x d), then theta2 (d x d),
//             theta3 (2d), theta4 (d x d), theta5 (d x d)
// ---------------------------------------------------------------------------

struct Checkpoint {
    ParameterSet params;
    int t_embed = 0;
    int community_count = 0;
};

namespace detail {

constexpr char kCheckpointMagic[8] = {'F', 'S', 'P', 'R', 'E', 'A', 'D', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename M>
void write_matrix_row_major(std::ofstream& out, const M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            double v = m(r, c);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

template <typename M>
void read_matrix_row_major(std::ifstream& in, M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            m(r, c) = v;
        }
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const ParameterSet& params, int t_embed) {
    params.check_shapes();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
    const std::uint32_t header[4] = {detail::kCheckpointVersion,
                                     static_cast<std::uint32_t>(params.embed_dim()),
                                     static_cast<std::uint32_t>(params.feature_dim() - 1),
                                     static_cast<std::uint32_t>(t_embed)};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    detail::write_matrix_row_major(out, params.theta1);
    detail::write_matrix_row_major(out, params.theta2);
    detail::write_matrix_row_major(out, params.theta3);
    detail::write_matrix_row_major(out, params.theta4);
    detail::write_matrix_row_major(out, params.theta5);
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, detail::kCheckpointMagic, sizeof magic) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::uint32_t header[4];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in || header[0] != detail::kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version in " + path);
    const int d = static_cast<int>(header[1]);
    const int l = static_cast<int>(header[2]);
    if (d < 1 || l < 1) throw std::runtime_error("invalid checkpoint header in " + path);
    Checkpoint ck;
    ck.community_count = l;
    ck.t_embed = static_cast<int>(header[3]);
    ck.params = ParameterSet::zeros(1 + l, d);
    detail::read_matrix_row_major(in, ck.params.theta1);
    detail::read_matrix_row_major(in, ck.params.theta2);
    detail::read_matrix_row_major(in, ck.params.theta3);
    detail::read_matrix_row_major(in, ck.params.theta4);
    detail::read_matrix_row_major(in, ck.params.theta5);
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    if (!ck.params.all_finite()) throw std::runtime_error("non-finite checkpoint values");
    return ck;
}

}  // namespace fairspread
