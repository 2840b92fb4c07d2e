#include "rbill/stat_tests.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

#include "rbill/statistics.hpp"

namespace rbill {

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {
double ks_p(double d, double ne) {
    double s = std::sqrt(ne);
    return kolmogorov_sf((s + 0.12 + 0.11 / s) * d);
}
}  // namespace

KsResult ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return {d, ks_p(d, na * nb / (na + nb))};
}

KsResult ks_one_sample(std::vector<double>& a, const std::function<double(double)>& cdf) {
    if (a.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double f = cdf(a[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return {d, ks_p(d, n)};
}

MardiaResult mardia(const Eigen::MatrixXd& x) {
    const auto n = x.rows();
    const auto d = x.cols();
    if (n < 2 || d < 1) throw std::invalid_argument("mardia: need at least two observations");
    Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::MatrixXd z = x.rowwise() - mean;
    Eigen::MatrixXd S = (z.transpose() * z) / static_cast<double>(n);
    Eigen::MatrixXd zs = z * S.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
    Eigen::MatrixXd g = zs * z.transpose();  // Mahalanobis inner products
    double b1 = 0.0, b2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) b1 += g(i, j) * g(i, j) * g(i, j);
        b2 += g(i, i) * g(i, i);
    }
    const double dn = static_cast<double>(n), dd = static_cast<double>(d);
    b1 /= dn * dn;
    b2 /= dn;
    MardiaResult r;
    r.dim = static_cast<int>(d);
    r.skewness = b1;
    r.kurtosis = b2;
    boost::math::chi_squared chi(dd * (dd + 1) * (dd + 2) / 6.0);
    r.skewness_p = boost::math::cdf(boost::math::complement(chi, dn * b1 / 6.0));
    double zk = (b2 - dd * (dd + 2)) / std::sqrt(8.0 * dd * (dd + 2) / dn);
    boost::math::normal nd;
    r.kurtosis_p = 2.0 * boost::math::cdf(boost::math::complement(nd, std::abs(zk)));
    return r;
}

CltReport clt_diagnostics(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& sigma2,
                          const Eigen::MatrixXd& sigma2_se, double threshold) {
    if (samples.rows() < 500) throw std::invalid_argument("clt_diagnostics: need at least 500 samples");
    const auto d = samples.cols();
    if (sigma2.rows() != d || sigma2.cols() != d) throw std::invalid_argument("clt_diagnostics: shape mismatch");
    CltReport rep;
    rep.threshold = threshold;
    bool ok = true;
    for (Eigen::Index i = 0; i < d; ++i) {
        std::vector<double> col(samples.rows());
        for (Eigen::Index r = 0; r < samples.rows(); ++r) col[r] = samples(r, i);
        double s = std::sqrt(std::max(sigma2(i, i), 0.0));
        KsResult ks;
        if (s > 0.0) {
            boost::math::normal nd(0.0, s);
            ks = ks_one_sample(col, [&](double v) { return boost::math::cdf(nd, v); });
        } else {
            // degenerate marginal: the samples must collapse to 0
            double m = 0.0;
            for (double v : col) m = std::max(m, std::abs(v));
            ks = {m, m == 0.0 ? 1.0 : 0.0};
        }
        ok = ok && ks.p_value > threshold;
        rep.marginal_ks.push_back(ks);
    }
    PdReport pd = positive_definiteness_report(sigma2, sigma2_se);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sigma2 + sigma2.transpose()));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index q = 0; q < d; ++q)
        if (!pd.possibly_degenerate[q] && es.eigenvalues()(q) > 0.0) keep.push_back(q);
    rep.rank = static_cast<int>(keep.size());
    if (!keep.empty()) {
        Eigen::MatrixXd U(d, keep.size());
        for (std::size_t c = 0; c < keep.size(); ++c) U.col(c) = es.eigenvectors().col(keep[c]);
        rep.mardia = mardia(samples * U);
        ok = ok && rep.mardia.skewness_p > threshold && rep.mardia.kurtosis_p > threshold;
    }
    rep.pass = ok;
    return rep;
}

}  // namespace rbill
