#include "rbill/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace rbill {

ReplicaSimulator::ReplicaSimulator(const Table& table, const SequenceModel& model, std::uint64_t seed,
                                   int max_redraws)
    : table_(&table), model_(&model), seed_(seed), max_redraws_(max_redraws) {}

int ReplicaSimulator::run(std::uint64_t replica, int length) {
    draw_sequence_into(*model_, mix_seed(seed_, replica), omega_, length);
    records_.resize(length);
    Philox rng(seed_, replica, kPurposeStart);
    int discards = 0;
    for (;;) {
        PhasePoint x = sample_mu_one(*table_, rng);
        try {
            for (int i = 0; i < length; ++i) {
                records_[i] = step(*table_, x, omega_[i]);
                x = records_[i].post;
            }
            return discards;
        } catch (const SingularityProximity&) {
            if (++discards > max_redraws_)
                throw std::runtime_error("replica could not avoid the singularity band");
        }
    }
}

void ReplicaSimulator::observe(const ObservableSpec& obs, int length, std::vector<double>& out) const {
    out.resize(static_cast<std::size_t>(length) * obs.dim);
    for (int i = 0; i < length; ++i) obs.evaluate(*table_, records_[i], omega_[i], &out[i * obs.dim]);
}

Eigen::MatrixXd batch_mean(const std::vector<Eigen::MatrixXd>& v) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(v.front().rows(), v.front().cols());
    for (const auto& x : v) m += x;
    return m / static_cast<double>(v.size());
}

Eigen::MatrixXd batch_se(const std::vector<Eigen::MatrixXd>& v) {
    const double b = static_cast<double>(v.size());
    Eigen::MatrixXd m = batch_mean(v);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    for (const auto& x : v) s += (x - m).cwiseAbs2();
    return (s / (b - 1.0) / b).cwiseSqrt();
}

namespace {

void check_options(const McOptions& opts, long long n_mc) {
    if (opts.batches < 2) throw std::invalid_argument("need at least two batches");
    if (n_mc < opts.batches) throw std::invalid_argument("n_mc must be at least the number of batches");
}

McCounters sum_counters(const std::vector<long long>& discards, long long n_mc) {
    McCounters c;
    c.replicas = n_mc;
    for (auto d : discards) c.discards += d;
    return c;
}

}  // namespace

PairCorrelationSeries pair_correlation_series(const Table& table, const ObservableSpec& f, int f_comp,
                                              const ObservableSpec& g, int g_comp, const SequenceModel& model,
                                              int n_max, long long n_mc, std::uint64_t seed,
                                              const McOptions& opts) {
    check_options(opts, n_mc);
    if (n_max < 0) throw std::invalid_argument("pair_correlation: n must be non-negative");
    if (f_comp < 0 || f_comp >= f.dim || g_comp < 0 || g_comp >= g.dim)
        throw std::invalid_argument("pair_correlation: component out of range");
    const int B = opts.batches;
    const int len = n_max + 1;
    std::vector<double> sf(B, 0.0), cnt(B, 0.0);
    std::vector<std::vector<double>> sg(B, std::vector<double>(len, 0.0)), sfg = sg;
    std::vector<long long> disc(B, 0);

    run_batches(n_mc, opts, [&](int b, long long lo, long long hi) {
        ReplicaSimulator sim(table, model, seed, opts.max_redraws);
        std::vector<double> fv, gv;
        for (long long r = lo; r < hi; ++r) {
            disc[b] += sim.run(r, len);
            sim.observe(f, 1, fv);
            sim.observe(g, len, gv);
            double f0 = fv[f_comp];
            sf[b] += f0;
            cnt[b] += 1.0;
            for (int n = 0; n < len; ++n) {
                double gn = gv[n * g.dim + g_comp];
                sg[b][n] += gn;
                sfg[b][n] += f0 * gn;
            }
        }
    });

    PairCorrelationSeries out;
    out.counters = sum_counters(disc, n_mc);
    double total = static_cast<double>(n_mc);
    double mf = 0.0;
    for (int b = 0; b < B; ++b) mf += sf[b];
    mf /= total;
    for (int n = 0; n < len; ++n) {
        double mg = 0.0, mfg = 0.0;
        std::vector<double> cb(B);
        for (int b = 0; b < B; ++b) {
            mg += sg[b][n];
            mfg += sfg[b][n];
            cb[b] = sfg[b][n] / cnt[b] - (sf[b] / cnt[b]) * (sg[b][n] / cnt[b]);
        }
        mg /= total;
        mfg /= total;
        double mean_b = 0.0;
        for (double c : cb) mean_b += c;
        mean_b /= B;
        double var = 0.0;
        for (double c : cb) var += (c - mean_b) * (c - mean_b);
        var /= (B - 1);
        out.values.push_back({mfg - mf * mg, std::sqrt(var / B)});
    }
    return out;
}

Estimate pair_correlation(const Table& table, const ObservableSpec& f, int f_comp, const ObservableSpec& g,
                          int g_comp, const SequenceModel& model, int n, long long n_mc, std::uint64_t seed,
                          const McOptions& opts) {
    return pair_correlation_series(table, f, f_comp, g, g_comp, model, n, n_mc, seed, opts).values.at(n);
}

GouezelSeries gouezel_covariance(const Table& table, const ObservableSpec& obs, const std::vector<int>& boundaries,
                                 int split, const std::vector<Eigen::VectorXd>& t_vectors,
                                 const std::vector<int>& ks, const SequenceModel& model, long long n_mc,
                                 std::uint64_t seed, const McOptions& opts) {
    check_options(opts, n_mc);
    if (boundaries.size() < 2) throw std::invalid_argument("gouezel: need at least one block");
    const int blocks = static_cast<int>(boundaries.size()) - 1;
    if (boundaries.front() < 0) throw std::invalid_argument("gouezel: negative boundary");
    for (int j = 0; j < blocks; ++j)
        if (boundaries[j + 1] <= boundaries[j]) throw std::invalid_argument("gouezel: boundaries must increase");
    if (static_cast<int>(t_vectors.size()) != blocks) throw std::invalid_argument("gouezel: one t-vector per block");
    for (const auto& t : t_vectors)
        if (t.size() != obs.dim) throw std::invalid_argument("gouezel: t-vector dimension mismatch");
    if (split < 0 || split > blocks) throw std::invalid_argument("gouezel: split out of range");
    if (ks.empty()) throw std::invalid_argument("gouezel: no gaps requested");
    for (int k : ks)
        if (k < 0) throw std::invalid_argument("gouezel: negative gap");

    const int B = opts.batches;
    const int nk = static_cast<int>(ks.size());
    const int kmax = *std::max_element(ks.begin(), ks.end());
    const int len = boundaries.back() + kmax;
    using C = std::complex<double>;
    std::vector<C> s1(B, 0.0);
    std::vector<std::vector<C>> s2(B, std::vector<C>(nk, 0.0)), s12 = s2;
    std::vector<double> cnt(B, 0.0);
    std::vector<long long> disc(B, 0);

    run_batches(n_mc, opts, [&](int b, long long lo, long long hi) {
        ReplicaSimulator sim(table, model, seed, opts.max_redraws);
        std::vector<double> A;
        for (long long r = lo; r < hi; ++r) {
            disc[b] += sim.run(r, len);
            sim.observe(obs, len, A);
            auto block_term = [&](int j, int shift) {
                double acc = 0.0;
                for (int i = boundaries[j] + shift; i < boundaries[j + 1] + shift; ++i)
                    for (int c = 0; c < obs.dim; ++c) acc += t_vectors[j](c) * A[i * obs.dim + c];
                return acc;
            };
            double x1 = 0.0;
            for (int j = 0; j < split; ++j) x1 += block_term(j, 0);
            C e1 = std::polar(1.0, x1);
            s1[b] += e1;
            cnt[b] += 1.0;
            for (int q = 0; q < nk; ++q) {
                double x2 = 0.0;
                for (int j = split; j < blocks; ++j) x2 += block_term(j, ks[q]);
                s2[b][q] += std::polar(1.0, x2);
                s12[b][q] += std::polar(1.0, x1 + x2);
            }
        }
    });

    GouezelSeries out;
    out.counters = sum_counters(disc, n_mc);
    const double total = static_cast<double>(n_mc);
    C m1 = 0.0;
    for (int b = 0; b < B; ++b) m1 += s1[b];
    m1 /= total;
    for (int q = 0; q < nk; ++q) {
        C m2 = 0.0, m12 = 0.0;
        std::vector<C> cb(B);
        for (int b = 0; b < B; ++b) {
            m2 += s2[b][q];
            m12 += s12[b][q];
            cb[b] = s12[b][q] / cnt[b] - (s1[b] / cnt[b]) * (s2[b][q] / cnt[b]);
        }
        m2 /= total;
        m12 /= total;
        C cov = m12 - m1 * m2;
        C mb = 0.0;
        for (auto c : cb) mb += c;
        mb /= static_cast<double>(B);
        double vre = 0.0, vim = 0.0;
        for (auto c : cb) {
            vre += (c.real() - mb.real()) * (c.real() - mb.real());
            vim += (c.imag() - mb.imag()) * (c.imag() - mb.imag());
        }
        double se = std::sqrt((vre + vim) / (B - 1) / B);
        out.points.push_back({ks[q], std::abs(cov), se, cov.real(), cov.imag()});
    }
    return out;
}

CovarianceEstimate estimate_sigma2(const Table& table, const ObservableSpec& obs, const SequenceModel& model,
                                   int m_max, int k, long long n_mc, std::uint64_t seed, const McOptions& opts) {
    check_options(opts, n_mc);
    if (m_max < 1 || k < 1) throw std::invalid_argument("estimate_sigma2: m_max and k must be positive");
    const int d = obs.dim;
    const int B = opts.batches;
    const int len = k + m_max;

    std::vector<int> checkpoints;
    for (int c = 1; c < k; c *= 2) checkpoints.push_back(c);
    checkpoints.push_back(k);
    const int nc = static_cast<int>(checkpoints.size());

    using M = Eigen::MatrixXd;
    const M zero = M::Zero(d, d);
    std::vector<M> bsig(B, zero), bnaive(B, zero);
    std::vector<std::vector<M>> bvm(B, std::vector<M>(m_max + 1, zero)), btrace(B, std::vector<M>(nc, zero));
    std::vector<double> cnt(B, 0.0);
    std::vector<long long> disc(B, 0);

    run_batches(n_mc, opts, [&](int b, long long lo, long long hi) {
        ReplicaSimulator sim(table, model, seed, opts.max_redraws);
        std::vector<double> A;
        std::vector<M> W(m_max + 1, zero);
        M G = zero, naive = zero;
        for (long long r = lo; r < hi; ++r) {
            disc[b] += sim.run(r, len);
            sim.observe(obs, len, A);
            for (auto& w : W) w.setZero();
            G.setZero();
            int next_cp = 0;
            for (int l = 0; l < k; ++l) {
                const double* a = &A[l * d];
                for (int m = 0; m <= m_max; ++m) {
                    const double* c = &A[(l + m) * d];
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) {
                            double p = a[i] * c[j];
                            W[m](i, j) += p;
                            if (m == 0)
                                G(i, j) += p;
                            else
                                G(i, j) += p + a[j] * c[i];
                        }
                }
                if (l == 0) naive = G;
                if (l + 1 == checkpoints[next_cp]) {
                    btrace[b][next_cp] += G / static_cast<double>(l + 1);
                    ++next_cp;
                }
            }
            bsig[b] += G / static_cast<double>(k);
            bnaive[b] += naive;
            bvm[b][0] += W[0] / static_cast<double>(k);
            for (int m = 1; m <= m_max; ++m) bvm[b][m] += (W[m] + W[m].transpose()) / static_cast<double>(k);
            cnt[b] += 1.0;
        }
    });

    auto per_batch = [&](const std::vector<M>& sums) {
        std::vector<M> v(B);
        for (int b = 0; b < B; ++b) v[b] = sums[b] / cnt[b];
        return v;
    };
    auto overall = [&](const std::vector<M>& sums) {
        M s = zero;
        for (const auto& x : sums) s += x;
        return M(s / static_cast<double>(n_mc));
    };

    CovarianceEstimate est;
    est.m_max = m_max;
    est.k = k;
    est.samples = n_mc;
    est.counters = sum_counters(disc, n_mc);
    M sig = overall(bsig);
    est.sigma2 = 0.5 * (sig + sig.transpose());
    est.standard_errors = batch_se(per_batch(bsig));
    M nv = overall(bnaive);
    est.naive_sigma2 = 0.5 * (nv + nv.transpose());
    est.naive_se = batch_se(per_batch(bnaive));
    for (int m = 0; m <= m_max; ++m) {
        std::vector<M> sums(B);
        for (int b = 0; b < B; ++b) sums[b] = bvm[b][m];
        est.vm.push_back({m, 0, k, overall(sums), batch_se(per_batch(sums))});
    }
    for (int c = 0; c < nc; ++c) {
        std::vector<M> sums(B);
        for (int b = 0; b < B; ++b) sums[b] = btrace[b][c];
        M t = overall(sums);
        est.trace_k.push_back(checkpoints[c]);
        est.trace.push_back(0.5 * (t + t.transpose()));
    }
    return est;
}

SumCovariances sum_covariances(const Table& table, const ObservableSpec& obs, const SequenceModel& model,
                               const std::vector<int>& n_grid, int ell, long long n_mc, std::uint64_t seed,
                               bool keep_samples, const McOptions& opts) {
    check_options(opts, n_mc);
    if (n_grid.empty()) throw std::invalid_argument("sum_covariances: empty n grid");
    for (std::size_t i = 0; i < n_grid.size(); ++i)
        if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1]))
            throw std::invalid_argument("sum_covariances: n grid must be positive and increasing");
    if (ell < 0) throw std::invalid_argument("sum_covariances: negative shift");
    const int d = obs.dim;
    const int B = opts.batches;
    const int ng = static_cast<int>(n_grid.size());
    const int len = ell + n_grid.back();
    using M = Eigen::MatrixXd;
    std::vector<std::vector<M>> bs(B, std::vector<M>(ng, M::Zero(d, d)));
    std::vector<double> cnt(B, 0.0);
    std::vector<long long> disc(B, 0);
    SumCovariances out;
    out.ell = ell;
    out.n_grid = n_grid;
    if (keep_samples) out.scaled_samples.assign(ng, M::Zero(n_mc, d));

    run_batches(n_mc, opts, [&](int b, long long lo, long long hi) {
        ReplicaSimulator sim(table, model, seed, opts.max_redraws);
        std::vector<double> A;
        Eigen::VectorXd S(d);
        for (long long r = lo; r < hi; ++r) {
            disc[b] += sim.run(r, len);
            sim.observe(obs, len, A);
            S.setZero();
            int g = 0;
            for (int i = 0; i < n_grid.back(); ++i) {
                for (int c = 0; c < d; ++c) S(c) += A[(ell + i) * d + c];
                if (i + 1 == n_grid[g]) {
                    bs[b][g] += S * S.transpose();
                    if (keep_samples) out.scaled_samples[g].row(r) = S.transpose() / std::sqrt(double(n_grid[g]));
                    ++g;
                }
            }
            cnt[b] += 1.0;
        }
    });

    out.counters = sum_counters(disc, n_mc);
    for (int g = 0; g < ng; ++g) {
        std::vector<M> per(B);
        M tot = M::Zero(d, d);
        for (int b = 0; b < B; ++b) {
            per[b] = bs[b][g] / cnt[b];
            tot += bs[b][g];
        }
        out.second_moment.push_back(tot / static_cast<double>(n_mc));
        out.se.push_back(batch_se(per));
    }
    return out;
}

std::vector<GrowthPoint> variance_growth(const SumCovariances& sums, const Eigen::MatrixXd& sigma2,
                                         const Eigen::MatrixXd& sigma2_se) {
    std::vector<GrowthPoint> out;
    for (std::size_t g = 0; g < sums.n_grid.size(); ++g) {
        const double n = sums.n_grid[g];
        Eigen::MatrixXd D = sums.second_moment[g] - n * sigma2;
        double dev = D.norm();
        double var = 0.0;
        for (Eigen::Index i = 0; i < D.rows(); ++i)
            for (Eigen::Index j = i; j < D.cols(); ++j) {
                double w = (i == j) ? 1.0 : 2.0;
                double grad = dev > 0.0 ? w * D(i, j) / dev : w / std::sqrt(double(D.size()));
                double v = sums.se[g](i, j) * sums.se[g](i, j) + n * n * sigma2_se(i, j) * sigma2_se(i, j);
                var += grad * grad * v;
            }
        out.push_back({sums.n_grid[g], dev, std::sqrt(var)});
    }
    return out;
}

std::vector<GrowthPoint> variance_growth(const Table& table, const ObservableSpec& obs, const SequenceModel& model,
                                         const std::vector<int>& n_grid, int ell, long long n_mc,
                                         std::uint64_t seed, const McOptions& opts) {
    CovarianceEstimate est = estimate_sigma2(table, obs, model, 30, 50, n_mc, mix_seed(seed, 1), opts);
    SumCovariances sums = sum_covariances(table, obs, model, n_grid, ell, n_mc, seed, false, opts);
    return variance_growth(sums, est.sigma2, est.standard_errors);
}

LogFit fit_log_growth(const std::vector<GrowthPoint>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("fit_log_growth: need at least two points");
    Eigen::MatrixXd X(pts.size(), 2);
    Eigen::VectorXd y(pts.size()), w(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double s = pts[i].se > 0.0 ? pts[i].se : 1.0;
        w(i) = 1.0 / s;
        X(i, 0) = w(i);
        X(i, 1) = w(i) * std::log(static_cast<double>(pts[i].n));
        y(i) = w(i) * pts[i].deviation;
    }
    Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    LogFit fit{beta(0), beta(1), 0.0};
    for (std::size_t i = 0; i < pts.size(); ++i)
        fit.max_abs_z = std::max(fit.max_abs_z, std::abs(y(i) - X.row(i).dot(beta)));
    return fit;
}

PdReport positive_definiteness_report(const Eigen::MatrixXd& sigma2, const Eigen::MatrixXd& se) {
    Eigen::MatrixXd sym = 0.5 * (sigma2 + sigma2.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    PdReport rep;
    rep.eigenvalues = es.eigenvalues();
    const auto d = sym.rows();
    rep.eigenvalue_se = Eigen::VectorXd::Zero(d);
    for (Eigen::Index q = 0; q < d; ++q) {
        Eigen::VectorXd u = es.eigenvectors().col(q);
        double var = 0.0;
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = i; j < d; ++j) {
                double g = (i == j ? 1.0 : 2.0) * u(i) * u(j);
                var += g * g * se(i, j) * se(i, j);
            }
        rep.eigenvalue_se(q) = std::sqrt(var);
        bool flag = std::abs(rep.eigenvalues(q)) <= 3.0 * rep.eigenvalue_se(q);
        rep.possibly_degenerate.push_back(flag);
        if (!flag && rep.eigenvalues(q) > 0.0) ++rep.rank;
        if (rep.eigenvalues(q) < -3.0 * rep.eigenvalue_se(q)) rep.psd_within_noise = false;
    }
    return rep;
}

PdReport positive_definiteness_report(const CovarianceEstimate& est) {
    return positive_definiteness_report(est.sigma2, est.standard_errors);
}

}  // namespace rbill
