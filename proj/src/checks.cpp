#include "rbill/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rbill/sequences.hpp"

namespace rbill {

namespace {

Philox check_rng(std::uint64_t seed, std::uint64_t stream) { return Philox(seed, stream, kPurposeCheck); }

TangentVector unit(double dr, double dphi) {
    double n = std::hypot(dr, dphi);
    return {dr / n, dphi / n};
}

}  // namespace

InvarianceReport measure_invariance(const Table& table, Vec2 c, int samples, std::uint64_t seed) {
    InvarianceReport rep;
    rep.c = c;
    rep.samples = samples;
    std::vector<PhasePoint> start = sample_mu(table, samples, mix_seed(seed, 1));
    std::vector<PhasePoint> fresh = sample_mu(table, samples, mix_seed(seed, 2));
    std::vector<std::vector<double>> pr(8), pp(8), fr(8), fp(8);
    for (const auto& x : start) {
        try {
            PhasePoint y = step(table, x, c).post;
            pr[y.wall - 1].push_back(y.r);
            pp[y.wall - 1].push_back(y.phi);
        } catch (const SingularityProximity&) {
            ++rep.skipped;
        }
    }
    for (const auto& x : fresh) {
        fr[x.wall - 1].push_back(x.r);
        fp[x.wall - 1].push_back(x.phi);
    }
    for (int w = 0; w < 8; ++w) {
        rep.r_ks.push_back(ks_two_sample(pr[w], fr[w]));
        rep.phi_ks.push_back(ks_two_sample(pp[w], fp[w]));
        rep.min_p = std::min({rep.min_p, rep.r_ks.back().p_value, rep.phi_ks.back().p_value});
    }
    return rep;
}

ReversibilityReport reversibility_check(const Table& table, int starts, std::uint64_t seed) {
    ReversibilityReport rep;
    Philox rng = check_rng(seed, 1);
    auto round_trip = [&](const PhasePoint& x, Vec2 c) {
        PhasePoint y = step(table, x, c).post;
        PhasePoint z = step(table, involution(table, y), c).post;
        return involution(table, z);
    };
    while (rep.starts < starts) {
        PhasePoint x = sample_mu_one(table, rng);
        Vec2 c = uniform_disk(rng, table.eps());
        PhasePoint z1, z2;
        try {
            z1 = round_trip(x, c);
            z2 = round_trip(z1, c);
        } catch (const SingularityProximity&) {
            ++rep.skipped;
            continue;
        }
        ++rep.starts;
        for (const PhasePoint& z : {z1, z2}) {
            if (z.wall != x.wall) {
                ++rep.wall_mismatches;
                continue;
            }
            rep.max_error = std::max({rep.max_error, std::abs(z.r - x.r), std::abs(z.phi - x.phi)});
        }
    }
    return rep;
}

ConeReport cone_check(const Table& table, int samples_per_centering, int centerings, double band,
                      std::uint64_t seed) {
    const TableConstants& k = table.constants();
    ConeReport rep;
    rep.centerings = centerings;
    rep.min_p_factor = std::numeric_limits<double>::infinity();
    rep.min_cone_slack = std::numeric_limits<double>::infinity();
    Philox crng = check_rng(seed, 2);
    for (int j = 0; j < centerings; ++j) {
        Vec2 c = uniform_disk(crng, table.eps());
        Philox rng = check_rng(seed, 100 + j);
        for (int i = 0; i < samples_per_centering; ++i) {
            PhasePoint x = sample_mu_one(table, rng);
            if (singularity_distance(table, x, c) < band) {
                ++rep.skipped;
                continue;
            }
            ConeBounds cb = cone_bounds(table, x);
            ++rep.tested;
            bool bad = false;
            for (double s : {cb.a, cb.b}) {
                TangentStep ts = tangent_step(table, x, unit(1.0, s), c);
                ConeBounds img = cone_bounds(table, ts.record.post);
                double slope = ts.v.slope();
                double slack = std::min(slope - img.a, img.b - slope) / (img.b - img.a);
                rep.min_cone_slack = std::min(rep.min_cone_slack, slack);
                if (!(slope > img.a && slope < img.b)) bad = true;
                for (int l = 0; l < ts.legs; ++l) {
                    rep.min_p_factor = std::min(rep.min_p_factor, ts.p_factors[l]);
                    if (ts.p_factors[l] < k.Lambda) ++rep.p_violations;
                }
            }
            if (bad) ++rep.cone_violations;
        }
    }
    return rep;
}

ExpansionReport expansion_check(const Table& table, int orbits, int n_max, std::uint64_t seed) {
    const TableConstants& k = table.constants();
    ExpansionReport rep;
    rep.n_max = n_max;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.min_p_factor = std::numeric_limits<double>::infinity();
    const double log_c = std::log(k.C), log_l = std::log(k.Lambda);
    Philox rng = check_rng(seed, 3);
    std::vector<Vec2> omega;
    while (rep.orbits < orbits) {
        PhasePoint x = sample_mu_one(table, rng);
        ConeBounds cb = cone_bounds(table, x);
        TangentVector v = unit(1.0, cb.a + rng.uniform() * (cb.b - cb.a));
        omega.resize(n_max);
        for (auto& c : omega) c = uniform_disk(rng, table.eps());
        // log of |DF^n v| / |v|, renormalizing after every step
        double log_norm = 0.0;
        double min_ratio = std::numeric_limits<double>::infinity(), min_p = min_ratio;
        long long p_bad = 0, bad = 0;
        bool skipped = false;
        for (int n = 1; n <= n_max && !skipped; ++n) {
            try {
                TangentStep ts = tangent_step(table, x, v, omega[n - 1]);
                for (int l = 0; l < ts.legs; ++l) {
                    min_p = std::min(min_p, ts.p_factors[l]);
                    if (ts.p_factors[l] < k.Lambda) ++p_bad;
                }
                double nv = ts.v.norm();
                log_norm += std::log(nv);
                v = {ts.v.dr / nv, ts.v.dphi / nv};
                x = ts.record.post;
            } catch (const SingularityProximity&) {
                skipped = true;
                break;
            }
            double log_ratio = log_norm - log_c - n * log_l;
            min_ratio = std::min(min_ratio, std::exp(log_ratio));
            if (log_ratio < 0.0) ++bad;
        }
        if (skipped) {
            ++rep.skipped;
            continue;
        }
        ++rep.orbits;
        rep.min_ratio = std::min(rep.min_ratio, min_ratio);
        rep.min_p_factor = std::min(rep.min_p_factor, min_p);
        rep.p_violations += p_bad;
        rep.violations += bad;
    }
    return rep;
}

TangentCheckReport tangent_fd_check(const Table& table, int samples, double margin_threshold, std::uint64_t seed) {
    TangentCheckReport rep;
    rep.margin_threshold = margin_threshold;
    Philox rng = check_rng(seed, 4);
    while (rep.samples < samples) {
        PhasePoint x = sample_mu_one(table, rng);
        Vec2 c = uniform_disk(rng, table.eps());
        double ang = 2.0 * M_PI * rng.uniform();
        TangentVector v{std::cos(ang), std::sin(ang)};
        double margin = singularity_distance(table, x, c);
        if (margin < margin_threshold) {
            ++rep.skipped;
            continue;
        }
        TangentVector exact = tangent_step(table, x, v, c).v;
        const int wall = step(table, x, c).post.wall;
        bool ok = true;
        auto central = [&](double h) {
            PhasePoint p{x.wall, x.r + h * v.dr, x.phi + h * v.dphi};
            PhasePoint m{x.wall, x.r - h * v.dr, x.phi - h * v.dphi};
            PhasePoint yp = step(table, p, c).post, ym = step(table, m, c).post;
            if (yp.wall != wall || ym.wall != wall) ok = false;
            return TangentVector{(yp.r - ym.r) / (2 * h), (yp.phi - ym.phi) / (2 * h)};
        };
        const double h = 1e-5 * std::min(margin, 1.0);
        TangentVector d1, d2;
        try {
            d1 = central(h);
            d2 = central(h / 2);
        } catch (const SingularityProximity&) {
            ok = false;
        }
        if (!ok) {
            ++rep.skipped;
            continue;
        }
        TangentVector fd{(4 * d2.dr - d1.dr) / 3, (4 * d2.dphi - d1.dphi) / 3};
        double err = std::hypot(fd.dr - exact.dr, fd.dphi - exact.dphi) / exact.norm();
        rep.max_rel_error = std::max(rep.max_rel_error, err);
        ++rep.samples;
    }
    return rep;
}

SeparationReport separation_check(const Table& table, int pairs, int max_n, std::uint64_t seed, double tolerance) {
    const TableConstants& k = table.constants();
    SeparationReport rep;
    rep.max_n = max_n;
    rep.tolerance = tolerance;
    rep.bound = std::log(k.Lambda * std::sqrt(1.0 + k.b_max * k.b_max) * k.max_component_diameter / k.C);
    rep.fitted_max = -std::numeric_limits<double>::infinity();
    const double log_l = std::log(k.Lambda);
    Philox rng = check_rng(seed, 5);
    std::vector<Vec2> omega(max_n);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    while (rep.pairs < pairs) {
        PhasePoint x = sample_mu_one(table, rng);
        ConeBounds cb = cone_bounds(table, x);
        TangentVector u = unit(1.0, 0.5 * (cb.a + cb.b));
        double log_h = std::log(10.0) * (-10.0 + 8.0 * rng.uniform());
        double h = std::exp(log_h);
        PhasePoint y{x.wall, x.r + h * u.dr, x.phi + h * u.dphi};
        for (auto& c : omega) c = uniform_disk(rng, table.eps());
        if (y.r > wall_length(table.config(), y.wall) || std::abs(y.phi) >= M_PI / 2 || !in_cross_section(table, y)) {
            ++rep.skipped;
            continue;
        }
        std::optional<int> s;
        try {
            s = separation_time(table, x, y, omega, max_n, k.k0);
        } catch (const SingularityProximity&) {
            ++rep.skipped;
            continue;
        }
        ++rep.pairs;
        int sn = s ? *s : max_n;
        if (!s) ++rep.never_separated;
        double d = std::hypot(y.r - x.r, y.phi - x.phi);
        double value = std::log(d) + sn * log_l;
        rep.fitted_max = std::max(rep.fitted_max, value);
        if (!s || value > rep.bound + tolerance) ++rep.exceedances;
        sx += -std::log(d);
        sy += sn;
        sxx += std::log(d) * std::log(d);
        sxy += -std::log(d) * sn;
    }
    double n = rep.pairs;
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

EnvelopeReport decay_envelope(const std::vector<Estimate>& series, int window, double sig, double z) {
    EnvelopeReport rep;
    for (std::size_t n = 0; n + window < series.size(); ++n) {
        const Estimate& e = series[n];
        if (std::abs(e.value) < sig * e.se) continue;
        ++rep.checked;
        const Estimate& f = series[n + window];
        if (!(std::abs(f.value) + z * f.se < std::abs(e.value))) {
            ++rep.violations;
            if (rep.first_violation < 0) rep.first_violation = static_cast<int>(n);
        }
    }
    return rep;
}

}  // namespace rbill
