#include "rbill/sequences.hpp"

#include <cmath>
#include <limits>

namespace rbill {

std::string to_string(SequenceKind kind) {
    switch (kind) {
        case SequenceKind::fixed: return "fixed";
        case SequenceKind::iid_uniform_disk: return "iid_uniform_disk";
        case SequenceKind::finite_markov: return "finite_markov";
        case SequenceKind::finite_markov_nonstationary: return "finite_markov_nonstationary";
    }
    return "?";
}

SequenceKind sequence_kind_from_string(const std::string& s) {
    if (s == "fixed") return SequenceKind::fixed;
    if (s == "iid_uniform_disk" || s == "iid") return SequenceKind::iid_uniform_disk;
    if (s == "finite_markov" || s == "markov") return SequenceKind::finite_markov;
    if (s == "finite_markov_nonstationary" || s == "markov_nonstationary")
        return SequenceKind::finite_markov_nonstationary;
    throw ModelError("unknown sequence model kind: " + s);
}

SequenceModel SequenceModel::fixed(Vec2 c, double eps, std::uint64_t seed) {
    SequenceModel m;
    m.kind = SequenceKind::fixed;
    m.fixed_c = c;
    m.eps = eps;
    m.seed = seed;
    m.validate();
    return m;
}

SequenceModel SequenceModel::iid(double eps, std::uint64_t seed) {
    SequenceModel m;
    m.kind = SequenceKind::iid_uniform_disk;
    m.eps = eps;
    m.seed = seed;
    m.validate();
    return m;
}

SequenceModel SequenceModel::markov(std::vector<Vec2> states, Eigen::MatrixXd P, double eps, std::uint64_t seed) {
    SequenceModel m;
    m.kind = SequenceKind::finite_markov;
    m.states = std::move(states);
    m.transition = std::move(P);
    m.eps = eps;
    m.seed = seed;
    if (m.transition.rows() == static_cast<Eigen::Index>(m.states.size()) && is_stochastic(m.transition) &&
        is_primitive(m.transition))
        m.initial = stationary_distribution(m.transition);
    m.validate();
    return m;
}

SequenceModel SequenceModel::markov_nonstationary(std::vector<Vec2> states, Eigen::MatrixXd P,
                                                  Eigen::VectorXd init, double eps, std::uint64_t seed) {
    SequenceModel m;
    m.kind = SequenceKind::finite_markov_nonstationary;
    m.states = std::move(states);
    m.transition = std::move(P);
    m.initial = std::move(init);
    m.eps = eps;
    m.seed = seed;
    m.validate();
    return m;
}

bool is_admissible(Vec2 c, double eps) {
    // a few ulps of slack so that points constructed on the circle |c| = eps pass
    return std::hypot(c.x, c.y) <= eps * (1.0 + 4.0 * std::numeric_limits<double>::epsilon());
}

void SequenceModel::validate() const {
    if (!(std::isfinite(eps) && eps > 0.0)) throw ModelError("model: eps must be finite and positive");
    switch (kind) {
        case SequenceKind::fixed:
            if (!is_admissible(fixed_c, eps)) throw ModelError("model: fixed centering outside B_eps");
            return;
        case SequenceKind::iid_uniform_disk: return;
        case SequenceKind::finite_markov:
        case SequenceKind::finite_markov_nonstationary: break;
    }
    const auto n = static_cast<Eigen::Index>(states.size());
    if (n == 0) throw ModelError("model: markov chain needs at least one state");
    for (const auto& s : states)
        if (!is_admissible(s, eps)) throw ModelError("model: markov state outside B_eps");
    if (transition.rows() != n || transition.cols() != n) throw ModelError("model: transition matrix shape");
    if (!is_stochastic(transition)) throw ModelError("model: transition matrix is not stochastic");
    if (!is_primitive(transition)) throw ModelError("model: transition matrix is reducible or periodic");
    if (initial.size() != n) throw ModelError("model: initial law has the wrong size");
    if ((initial.array() < 0.0).any() || std::abs(initial.sum() - 1.0) > 1e-12)
        throw ModelError("model: initial law is not a probability vector");
}

bool is_stochastic(const Eigen::MatrixXd& P, double tol) {
    if (P.rows() != P.cols() || P.rows() == 0) return false;
    if ((P.array() < 0.0).any() || !P.allFinite()) return false;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        if (std::abs(P.row(i).sum() - 1.0) > tol) return false;
    return true;
}

bool is_primitive(const Eigen::MatrixXd& P) {
    const auto n = P.rows();
    using B = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
    B a = (P.array() > 0.0).cast<int>();
    B acc = a;
    // Wielandt: a primitive n x n pattern has a positive power of order (n-1)^2 + 1.
    const long long wielandt = (n - 1) * (n - 1) + 1;
    for (long long m = 1; m < wielandt; ++m) {
        acc = ((acc * a).array() > 0).cast<int>();
    }
    return (acc.array() > 0).all();
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
    const auto n = P.rows();
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
    return pi;
}

double markov_rho(const Eigen::MatrixXd& P, int k) {
    if (k < 0) throw std::invalid_argument("markov_rho: k must be non-negative");
    if (!is_stochastic(P) || !is_primitive(P)) throw ModelError("markov_rho: chain is not irreducible and aperiodic");
    const auto n = P.rows();
    if (n == 1) return 0.0;
    Eigen::VectorXd pi = stationary_distribution(P);
    Eigen::MatrixXd Pk = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < k; ++i) Pk = Pk * P;
    Eigen::VectorXd s = pi.array().sqrt();
    Eigen::MatrixXd Q = s.asDiagonal() * Pk * s.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q);
    // the top singular value is 1 (vector sqrt(pi)); the next one is the maximal correlation
    return svd.singularValues()(1);
}

Vec2 uniform_disk(Philox& rng, double eps) {
    for (;;) {
        double x = eps * (2.0 * rng.uniform() - 1.0);
        double y = eps * (2.0 * rng.uniform() - 1.0);
        if (std::hypot(x, y) <= eps) return {x, y};
    }
}

SequenceStream::SequenceStream(const SequenceModel& model, std::uint64_t stream)
    : model_(&model), rng_(model.seed, stream, kPurposeSequence) {}

int SequenceStream::draw_state(const double* probs, int n, int stride) {
    double u = rng_.uniform();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += probs[i * stride];
        if (u < acc) return i;
    }
    // rounding in the cumulative sum: last state with positive mass
    for (int i = n - 1; i >= 0; --i)
        if (probs[i * stride] > 0.0) return i;
    return n - 1;
}

Vec2 SequenceStream::next() {
    const SequenceModel& m = *model_;
    switch (m.kind) {
        case SequenceKind::fixed: return m.fixed_c;
        case SequenceKind::iid_uniform_disk: return uniform_disk(rng_, m.eps);
        case SequenceKind::finite_markov:
        case SequenceKind::finite_markov_nonstationary: break;
    }
    const int n = static_cast<int>(m.states.size());
    if (state_ < 0) {
        state_ = draw_state(m.initial.data(), n, 1);
    } else {
        // Eigen storage is column-major, so a row has stride rows()
        state_ = draw_state(m.transition.data() + state_, n, static_cast<int>(m.transition.rows()));
    }
    return m.states[state_];
}

void draw_sequence_into(const SequenceModel& model, std::uint64_t stream, std::vector<Vec2>& out, int length) {
    if (length < 0) throw std::invalid_argument("draw_sequence: negative length");
    out.resize(length);
    SequenceStream s(model, stream);
    for (int i = 0; i < length; ++i) out[i] = s.next();
}

std::vector<Vec2> draw_sequence(const SequenceModel& model, int length, std::uint64_t stream) {
    if (length < 1) throw std::invalid_argument("draw_sequence: length must be positive");
    std::vector<Vec2> out;
    draw_sequence_into(model, stream, out, length);
    return out;
}

}  // namespace rbill
