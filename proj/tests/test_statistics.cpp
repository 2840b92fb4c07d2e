#include <cmath>
#include <random>

#include "doctest.h"
#include "rbill/checks.hpp"
#include "rbill/stat_tests.hpp"
#include "rbill/statistics.hpp"

using namespace rbill;

namespace {

const Table& base_table() {
    static const Table t(TableConfig{0.36, 0.20, 0.01});
    return t;
}

Eigen::MatrixXd gaussian(int n, int d, unsigned seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = z(g);
    return x;
}

}  // namespace

TEST_CASE("Kolmogorov tail") {
    CHECK(kolmogorov_sf(0.0) == 1.0);
    CHECK(kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_sf(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
    CHECK(kolmogorov_sf(1.9495) == doctest::Approx(0.001).epsilon(2e-3));
}

TEST_CASE("KS tests") {
    std::mt19937_64 g(1);
    std::normal_distribution<double> z;
    std::vector<double> a(5000), b(5000), c(5000);
    for (auto& v : a) v = z(g);
    for (auto& v : b) v = z(g);
    for (auto& v : c) v = z(g) + 0.15;
    auto a2 = a;
    CHECK(ks_two_sample(a, b).p_value > 0.01);
    CHECK(ks_two_sample(a2, c).p_value < 1e-6);
    auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    CHECK(ks_one_sample(b, phi).p_value > 0.01);
    CHECK(ks_one_sample(c, phi).p_value < 1e-6);
}

TEST_CASE("Mardia tests") {
    MardiaResult ok = mardia(gaussian(3000, 2, 4));
    CHECK(ok.skewness_p > 0.01);
    CHECK(ok.kurtosis_p > 0.01);
    CHECK(ok.kurtosis == doctest::Approx(8.0).epsilon(0.05));
    std::mt19937_64 g(5);
    std::exponential_distribution<double> e;
    Eigen::MatrixXd x(3000, 2);
    for (int i = 0; i < 3000; ++i) x.row(i) << e(g), e(g);
    CHECK(mardia(x).skewness_p < 1e-6);
}

TEST_CASE("positive definiteness report") {
    Eigen::MatrixXd s(2, 2), se = Eigen::MatrixXd::Constant(2, 2, 0.01);
    s << 1.0, 0.0, 0.0, -0.001;
    PdReport a = positive_definiteness_report(s, se);
    CHECK(a.psd_within_noise);
    CHECK(a.rank == 1);
    s(1, 1) = -1.0;
    CHECK_FALSE(positive_definiteness_report(s, se).psd_within_noise);
}

TEST_CASE("CLT diagnostics on synthetic samples") {
    Eigen::MatrixXd sig(2, 2);
    sig << 2.0, 0.6, 0.6, 1.0;
    Eigen::MatrixXd L = sig.llt().matrixL();
    Eigen::MatrixXd x = gaussian(4000, 2, 6) * L.transpose();
    Eigen::MatrixXd se = Eigen::MatrixXd::Constant(2, 2, 0.01);
    CHECK(clt_diagnostics(x, sig, se).pass);
    // matching variance but flat marginals
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
    Eigen::MatrixXd y(4000, 2);
    for (int i = 0; i < 4000; ++i) y.row(i) << u(g), u(g);
    CHECK_FALSE(clt_diagnostics(y, Eigen::MatrixXd::Identity(2, 2), se).pass);
    CHECK_THROWS(clt_diagnostics(gaussian(100, 2, 1), sig, se));
}

TEST_CASE("observable centering and Birkhoff sums") {
    const Table& t = base_table();
    ObservableSpec obs = ObservableSpec::flight_time(t);
    CenteringEstimate ce = estimate_centering(obs, {0.01, 0.0}, t, 200000, 3);
    CHECK(std::abs(ce.mean(0) - t.constants().mean_flight_time) < 3 * ce.se(0));

    ObservableSpec disp = ObservableSpec::displacement(t);
    auto omega = draw_sequence(SequenceModel::iid(0.01, 2), 50, 0);
    PhasePoint x0 = sample_mu(t, 1, 4)[0];
    Trajectory tr = compose(t, x0, omega, 50);
    ObsVec s = birkhoff_sum(t, x0, omega, 50, disp);
    Vec2 total;
    for (const auto& r : tr.records) total = total + r.displacement;
    CHECK(s(0) == doctest::Approx(total.x));
    CHECK(s(1) == doctest::Approx(total.y));

    ObservableSpec g = ObservableSpec::flight_time(t);
    g.gain = {0.8, 0.0};
    g.gain_eps = 0.01;
    const ReturnRecord& r0 = tr.records[0];
    double base = ObservableSpec::flight_time(t).evaluate(t, r0, {0.01, 0.0})(0);
    CHECK(g.evaluate(t, r0, {0.01, 0.0})(0) == doctest::Approx(1.8 * base));
    CHECK(g.evaluate(t, r0, {-0.01, 0.0})(0) == doctest::Approx(0.2 * base));
}

TEST_CASE("tabulated observables") {
    const Table& t = base_table();
    // bilinear interpolation reproduces functions linear in (r, phi)
    auto f = [](const PhasePoint& x) {
        ObsVec v(1);
        v(0) = 2.0 * x.r - 0.5 * x.phi + x.wall;
        return v;
    };
    auto table = std::make_shared<PhaseTable>(PhaseTable::from_function(t.config(), 1, 9, 17, f));
    ObservableSpec obs = ObservableSpec::tabulated(table, {true});
    for (const auto& x : sample_mu(t, 200, 2)) CHECK(table->eval(t.config(), x)(0) == doctest::Approx(f(x)(0)));
    // coboundary components are evaluated as g(x) - g(F x)
    PhasePoint x = sample_mu(t, 1, 9)[0];
    ReturnRecord rec = step(t, x, {0.0, 0.0});
    CHECK(obs.evaluate(t, rec, {0.0, 0.0})(0) == doctest::Approx(f(rec.pre)(0) - f(rec.post)(0)));
}

TEST_CASE("Monte Carlo drivers do not depend on the thread count") {
    const Table& t = base_table();
    ObservableSpec obs = ObservableSpec::flight_time(t);
    auto model = SequenceModel::iid(0.01, 3);
    McOptions one, three;
    three.threads = 3;
    one.batches = three.batches = 10;
    auto a = pair_correlation_series(t, obs, 0, obs, 0, model, 5, 2000, 1, one);
    auto b = pair_correlation_series(t, obs, 0, obs, 0, model, 5, 2000, 1, three);
    for (int n = 0; n <= 5; ++n) {
        CHECK(a.values[n].value == b.values[n].value);
        CHECK(a.values[n].se == b.values[n].se);
    }
    auto e1 = estimate_sigma2(t, obs, model, 5, 4, 2000, 2, one);
    auto e3 = estimate_sigma2(t, obs, model, 5, 4, 2000, 2, three);
    CHECK(e1.sigma2(0, 0) == e3.sigma2(0, 0));
    CHECK(a.values[0].value > 0.0);
}

TEST_CASE("lag-zero correlation equals the variance") {
    const Table& t = base_table();
    ObservableSpec obs = ObservableSpec::flight_time(t);
    auto model = SequenceModel::iid(0.01, 8);
    McOptions opts;
    opts.batches = 20;
    auto s = pair_correlation_series(t, obs, 0, obs, 0, model, 0, 40000, 5, opts);
    auto est = estimate_sigma2(t, obs, model, 1, 1, 40000, 6, opts);
    CHECK(std::abs(s.values[0].value - est.vm[0].value(0, 0)) <
          3 * std::hypot(s.values[0].se, est.vm[0].se(0, 0)));
}

TEST_CASE("log growth fit") {
    std::vector<GrowthPoint> pts;
    for (int n : {250, 500, 1000, 2000, 4000}) pts.push_back({n, 1.5 + 0.25 * std::log(double(n)), 0.1});
    LogFit fit = fit_log_growth(pts);
    CHECK(fit.alpha == doctest::Approx(1.5));
    CHECK(fit.beta == doctest::Approx(0.25));
    CHECK(fit.max_abs_z < 1e-9);
    CHECK_THROWS(fit_log_growth({pts[0]}));
}

TEST_CASE("batch statistics") {
    std::vector<Eigen::MatrixXd> v;
    for (int b = 0; b < 4; ++b) v.push_back(Eigen::MatrixXd::Constant(1, 1, double(b)));
    CHECK(batch_mean(v)(0, 0) == doctest::Approx(1.5));
    // sample sd of {0,1,2,3} over sqrt(4)
    CHECK(batch_se(v)(0, 0) == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("decay envelope") {
    std::vector<Estimate> s;
    for (int n = 0; n <= 30; ++n) s.push_back({std::pow(0.5, n), 1e-4});
    EnvelopeReport ok = decay_envelope(s);
    CHECK(ok.violations == 0);
    CHECK(ok.checked > 5);
    s[12].value = 0.5;
    CHECK(decay_envelope(s).violations > 0);
}
