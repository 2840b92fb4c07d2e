#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace rbill {

// P(K > x) for the Kolmogorov distribution.
double kolmogorov_sf(double x);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Samples are sorted in place.
KsResult ks_two_sample(std::vector<double>& a, std::vector<double>& b);
KsResult ks_one_sample(std::vector<double>& a, const std::function<double(double)>& cdf);

struct MardiaResult {
    int dim = 0;
    double skewness = 0.0;
    double skewness_p = 1.0;
    double kurtosis = 0.0;
    double kurtosis_p = 1.0;
};
// Rows are observations; uses the sample mean and covariance.
MardiaResult mardia(const Eigen::MatrixXd& samples);

struct CltReport {
    std::vector<KsResult> marginal_ks;
    int rank = 0;
    MardiaResult mardia;
    double threshold = 1e-3;
    bool pass = false;
};

// Rows of `samples` are replicas of S_n / sqrt(n). Marginals are tested
// against N(0, sigma2_ii); the joint shape is checked with Mardia's tests on
// the subspace where sigma2 is not degenerate.
CltReport clt_diagnostics(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& sigma2,
                          const Eigen::MatrixXd& sigma2_se, double threshold = 1e-3);

}  // namespace rbill
