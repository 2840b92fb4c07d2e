#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbill/rng.hpp"
#include "rbill/vec2.hpp"

namespace rbill {

enum class SequenceKind { fixed, iid_uniform_disk, finite_markov, finite_markov_nonstationary };

std::string to_string(SequenceKind kind);
SequenceKind sequence_kind_from_string(const std::string& s);

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SequenceModel {
    SequenceKind kind = SequenceKind::fixed;
    double eps = 0.0;
    Vec2 fixed_c;
    std::vector<Vec2> states;
    Eigen::MatrixXd transition;
    Eigen::VectorXd initial;  // law of omega_0 (the stationary law for finite_markov)
    std::uint64_t seed = 1;

    static SequenceModel fixed(Vec2 c, double eps, std::uint64_t seed = 1);
    static SequenceModel iid(double eps, std::uint64_t seed = 1);
    static SequenceModel markov(std::vector<Vec2> states, Eigen::MatrixXd P, double eps, std::uint64_t seed = 1);
    static SequenceModel markov_nonstationary(std::vector<Vec2> states, Eigen::MatrixXd P, Eigen::VectorXd init,
                                              double eps, std::uint64_t seed = 1);

    // Throws ModelError when a state is inadmissible or the chain is malformed.
    void validate() const;
    bool is_markov() const {
        return kind == SequenceKind::finite_markov || kind == SequenceKind::finite_markov_nonstationary;
    }
};

// Incremental generator for one stream of a model.
class SequenceStream {
public:
    SequenceStream(const SequenceModel& model, std::uint64_t stream);
    Vec2 next();
    int state() const { return state_; }

private:
    const SequenceModel* model_;
    Philox rng_;
    int state_ = -1;
    int draw_state(const double* probs, int n, int stride);
};

std::vector<Vec2> draw_sequence(const SequenceModel& model, int length, std::uint64_t stream);
void draw_sequence_into(const SequenceModel& model, std::uint64_t stream, std::vector<Vec2>& out, int length);

// |c| <= eps up to rounding.
bool is_admissible(Vec2 c, double eps);

// Uniform draw from the closed disk of radius eps by rejection in the square.
Vec2 uniform_disk(Philox& rng, double eps);

bool is_stochastic(const Eigen::MatrixXd& P, double tol = 1e-12);
bool is_primitive(const Eigen::MatrixXd& P);
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P);
// Maximal correlation between X_0 and X_k for the stationary chain.
double markov_rho(const Eigen::MatrixXd& P, int k);

template <typename T>
T shift_average(const std::vector<T>& values, int k) {
    if (k <= 0) throw std::invalid_argument("shift_average: k must be positive");
    if (static_cast<std::size_t>(k) > values.size())
        throw std::invalid_argument("shift_average: fewer values than k");
    T acc = values[0];
    for (int j = 1; j < k; ++j) acc = acc + values[j];
    return acc * (1.0 / k);
}

}  // namespace rbill
