#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rbill/observables.hpp"

namespace rbill {

struct McOptions {
    int threads = 1;
    int batches = 50;
    int max_redraws = 1000;  // per replica, before giving up
};

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

struct McCounters {
    long long replicas = 0;
    long long discards = 0;
    double discard_rate() const {
        return replicas + discards > 0 ? static_cast<double>(discards) / static_cast<double>(replicas + discards)
                                       : 0.0;
    }
};

// Simulates replica trajectories: omega from the model stream of the replica,
// x0 ~ mu from the start stream, redrawing x0 when a step falls in the
// singularity band.
class ReplicaSimulator {
public:
    ReplicaSimulator(const Table& table, const SequenceModel& model, std::uint64_t seed, int max_redraws = 1000);
    // Returns the number of discarded starts.
    int run(std::uint64_t replica, int length);
    const std::vector<Vec2>& omega() const { return omega_; }
    const std::vector<ReturnRecord>& records() const { return records_; }
    // Row-major length x dim values of the centered observable.
    void observe(const ObservableSpec& obs, int length, std::vector<double>& out) const;

private:
    const Table* table_;
    const SequenceModel* model_;
    std::uint64_t seed_;
    int max_redraws_;
    std::vector<Vec2> omega_;
    std::vector<ReturnRecord> records_;
};

// Runs fn(batch, first_replica, end_replica) for each batch, spreading batches
// over threads. Batches own their accumulators, so results do not depend on
// the thread count.
template <typename Fn>
void run_batches(long long n_mc, const McOptions& opts, Fn&& fn);

struct PairCorrelationSeries {
    std::vector<Estimate> values;  // index = lag n
    McCounters counters;
};

PairCorrelationSeries pair_correlation_series(const Table& table, const ObservableSpec& f, int f_comp,
                                              const ObservableSpec& g, int g_comp, const SequenceModel& model,
                                              int n_max, long long n_mc, std::uint64_t seed,
                                              const McOptions& opts = {});
Estimate pair_correlation(const Table& table, const ObservableSpec& f, int f_comp, const ObservableSpec& g,
                          int g_comp, const SequenceModel& model, int n, long long n_mc, std::uint64_t seed,
                          const McOptions& opts = {});

struct GouezelPoint {
    int k = 0;
    double magnitude = 0.0;
    double se = 0.0;
    double re = 0.0;
    double im = 0.0;
};

struct GouezelSeries {
    std::vector<GouezelPoint> points;
    McCounters counters;
};

// Blocks [b_j, b_{j+1}) for j < split form the first group at their original
// position; the remaining blocks are shifted by k. t_vectors[j] weighs block j.
GouezelSeries gouezel_covariance(const Table& table, const ObservableSpec& obs, const std::vector<int>& boundaries,
                                 int split, const std::vector<Eigen::VectorXd>& t_vectors,
                                 const std::vector<int>& ks, const SequenceModel& model, long long n_mc,
                                 std::uint64_t seed, const McOptions& opts = {});

struct VmMatrix {
    int m = 0;
    int shift = 0;   // first shift l in the average
    int shifts = 1;  // number of shifts averaged
    Eigen::MatrixXd value;
    Eigen::MatrixXd se;
};

struct CovarianceEstimate {
    Eigen::MatrixXd sigma2;
    Eigen::MatrixXd standard_errors;
    int m_max = 0;
    int k = 0;
    long long samples = 0;
    McCounters counters;
    std::vector<VmMatrix> vm;  // shift-averaged V_m, m = 0..m_max
    std::vector<int> trace_k;
    std::vector<Eigen::MatrixXd> trace;  // estimate with shift depth trace_k[i]
    // Series evaluated at shift 0 only (the stationary formula under the initial law).
    Eigen::MatrixXd naive_sigma2;
    Eigen::MatrixXd naive_se;
};

CovarianceEstimate estimate_sigma2(const Table& table, const ObservableSpec& obs, const SequenceModel& model,
                                   int m_max, int k, long long n_mc, std::uint64_t seed, const McOptions& opts = {});

struct SumCovariances {
    int ell = 0;
    std::vector<int> n_grid;
    std::vector<Eigen::MatrixXd> second_moment;  // E(S (x) S), S = A_l + ... + A_{l+n-1}
    std::vector<Eigen::MatrixXd> se;
    std::vector<Eigen::MatrixXd> scaled_samples;  // replicas x d rows of S / sqrt(n), when kept
    McCounters counters;
};

SumCovariances sum_covariances(const Table& table, const ObservableSpec& obs, const SequenceModel& model,
                               const std::vector<int>& n_grid, int ell, long long n_mc, std::uint64_t seed,
                               bool keep_samples, const McOptions& opts = {});

struct GrowthPoint {
    int n = 0;
    double deviation = 0.0;
    double se = 0.0;
};

std::vector<GrowthPoint> variance_growth(const SumCovariances& sums, const Eigen::MatrixXd& sigma2,
                                         const Eigen::MatrixXd& sigma2_se);
std::vector<GrowthPoint> variance_growth(const Table& table, const ObservableSpec& obs, const SequenceModel& model,
                                         const std::vector<int>& n_grid, int ell, long long n_mc,
                                         std::uint64_t seed, const McOptions& opts = {});

struct LogFit {
    double alpha = 0.0;
    double beta = 0.0;
    double max_abs_z = 0.0;  // largest |residual| / se
};
// Weighted least-squares fit deviation ~ alpha + beta log n.
LogFit fit_log_growth(const std::vector<GrowthPoint>& points);

struct PdReport {
    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd eigenvalue_se;
    std::vector<bool> possibly_degenerate;
    int rank = 0;
    bool psd_within_noise = true;  // no eigenvalue below -3 SE
};
PdReport positive_definiteness_report(const CovarianceEstimate& est);
PdReport positive_definiteness_report(const Eigen::MatrixXd& sigma2, const Eigen::MatrixXd& se);

// Entrywise batch-means standard error from per-batch matrices.
Eigen::MatrixXd batch_mean(const std::vector<Eigen::MatrixXd>& batch_values);
Eigen::MatrixXd batch_se(const std::vector<Eigen::MatrixXd>& batch_values);

}  // namespace rbill

#include "rbill/statistics_impl.hpp"
