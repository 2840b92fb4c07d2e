#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rbill/dynamics.hpp"
#include "rbill/phase_space.hpp"
#include "rbill/rng.hpp"
#include "rbill/table.hpp"

namespace rbill {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;

// Clean-pass boundary on wall 2 at arclength r, searched between 0 and `limit`
// (+-pi/2). Returns 0 when even the normal crossing is not clean.
double clean_phi_edge(const TableConfig& cfg, double r, double limit) {
    Vec2 p{cfg.rbar + r, 0.0};
    auto clean = [&](double phi) { return clean_distance(cfg, p, {std::sin(phi), std::cos(phi)}) > 0.0; };
    if (!clean(0.0)) return 0.0;
    double lo = 0.0, hi = limit;
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        (clean(mid) ? lo : hi) = mid;
    }
    return lo;
}

double widest_clean_angle(const TableConfig& cfg, double r) {
    return std::max(clean_phi_edge(cfg, r, kHalfPi), -clean_phi_edge(cfg, r, -kHalfPi));
}

// Start point of a leg in the comparison table; white disk of radius rw at the center.
struct SearchStart {
    int wall;  // 1..8 or kWhiteWall
    double r;
    double phi;
};

bool search_ray(const TableConfig& cfg, double rw, const SearchStart& s, Vec2& p, Vec2& v) {
    if (!(std::abs(s.phi) < kHalfPi)) return false;
    if (s.wall == kWhiteWall) {
        double len = 2.0 * kPi * rw;
        if (!(s.r >= 0.0 && s.r <= len)) return false;
        double theta = -s.r / rw;
        Vec2 n{std::cos(theta), std::sin(theta)};
        p = Vec2{0.5, 0.5} + n * rw;
        v = velocity_at({p, n, 1.0 / rw}, s.phi);
        return true;
    }
    if (!(s.r >= 0.0 && s.r <= wall_length(cfg, s.wall))) return false;
    WallPoint wp = wall_chart(cfg, s.wall, s.r);
    p = wp.point;
    v = velocity_at(wp, s.phi);
    if (is_transparent(s.wall) && !clean_pass(cfg, p, v)) return false;
    return true;
}

double search_leg_length(const TableConfig& cfg, const Scene& scene, const SearchStart& s) {
    Vec2 p, v;
    if (!search_ray(cfg, scene.white_radius, s, p, v)) return -1.0;
    LegEvent ev = trace_leg(scene, p, v);
    if (ev.tie) return -1.0;
    return ev.t;
}

}  // namespace

double Table::clean_phi_max(double r) const { return clean_phi_edge(cfg_, r, kHalfPi); }
double Table::clean_phi_min(double r) const { return clean_phi_edge(cfg_, r, -kHalfPi); }

double compute_clean_cos_infimum(const TableConfig& cfg) {
    const double len = 1.0 - 2.0 * cfg.rbar;
    const int n = 2000;
    int best_i = 0;
    double best = -1.0;
    for (int i = 0; i <= n; ++i) {
        double g = widest_clean_angle(cfg, len * i / n);
        if (g > best) {
            best = g;
            best_i = i;
        }
    }
    // golden-section refinement of the maximum angle around the best grid node
    double a = len * std::max(best_i - 1, 0) / n;
    double b = len * std::min(best_i + 1, n) / n;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = widest_clean_angle(cfg, c), fd = widest_clean_angle(cfg, d);
    for (int it = 0; it < 100 && b - a > 1e-14; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = widest_clean_angle(cfg, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = widest_clean_angle(cfg, d);
        }
    }
    best = std::max({best, fc, fd});
    return std::cos(best);
}

Table::Table(const TableConfig& cfg, const TableOptions& opts) : cfg_(cfg), opts_(opts) {
    ValidationReport rep = validate_table(cfg.rbar, cfg.r, cfg.eps);
    if (!rep.pass()) {
        std::string failed;
        for (const auto& c : rep.conditions)
            if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
        throw std::invalid_argument("table violates: " + failed);
    }
    k_.k0 = opts.k0;
    k_.L = rep.free_zone_L;
    k_.kappa_gray = 1.0 / cfg.rbar;
    k_.kappa_white = 1.0 / cfg.r;
    k_.kappa_min = std::min(k_.kappa_gray, k_.kappa_white);
    k_.d = compute_clean_cos_infimum(cfg);
    double k0sq = 1.0 / (static_cast<double>(opts.k0) * opts.k0);
    if (!(k_.d > std::sin(k0sq)))
        throw std::invalid_argument("transparent components are not inside the central homogeneity strip for k0");

    const double len = 1.0 - 2.0 * cfg.rbar;
    const double s2 = std::sqrt(2.0);
    k_.tau_min = std::min({1.0 - 2.0 * cfg.rbar, 1.0 / s2 - cfg.eps - cfg.rbar - cfg.r, 1.0 - 2.0 * cfg.r,
                           0.5 - cfg.eps - cfg.r, 0.5, s2 * cfg.rbar});

    // longest leg of the comparison table (white disk of radius r - eps, centered)
    {
        Scene scene{cfg.rbar, cfg.r - cfg.eps, {0.5, 0.5}};
        Philox rng(opts.seed, 0, kPurposeSearch);
        double ls = wall_length(cfg, 1), lw = 2.0 * kPi * scene.white_radius;
        double total = 4.0 * (ls + len) + lw;
        struct Cand {
            double len;
            SearchStart s;
        };
        std::vector<Cand> top;
        const std::size_t keep = 12;
        for (int i = 0; i < opts.tau_max_samples; ++i) {
            double u = rng.uniform() * total;
            SearchStart s{};
            if (u >= 4.0 * (ls + len)) {
                s.wall = kWhiteWall;
                s.r = u - 4.0 * (ls + len);
            } else {
                int k = std::min(static_cast<int>(u / (ls + len)), 3);
                double rem = u - k * (ls + len);
                if (rem < ls) {
                    s.wall = 2 * k + 1;
                    s.r = rem;
                } else {
                    s.wall = 2 * k + 2;
                    s.r = std::min(rem - ls, len);
                }
            }
            s.phi = (rng.uniform() - 0.5) * kPi;
            double t = search_leg_length(cfg, scene, s);
            if (t < 0.0) continue;
            if (top.size() < keep || t > top.back().len) {
                top.push_back({t, s});
                std::sort(top.begin(), top.end(), [](const Cand& a, const Cand& b) { return a.len > b.len; });
                if (top.size() > keep) top.pop_back();
            }
        }
        double best = top.empty() ? 0.0 : top.front().len;
        for (Cand cand : top) {
            double step = 1e-2;
            while (step > 1e-13) {
                bool improved = false;
                for (int dim = 0; dim < 2; ++dim)
                    for (double sgn : {1.0, -1.0}) {
                        SearchStart s = cand.s;
                        (dim == 0 ? s.r : s.phi) += sgn * step;
                        double t = search_leg_length(cfg, scene, s);
                        if (t > cand.len) {
                            cand = {t, s};
                            improved = true;
                        }
                    }
                if (!improved) step *= 0.5;
            }
            best = std::max(best, cand.len);
        }
        k_.tau_max_search = best;
        k_.tau_max = std::min(5.0, 1.02 * best);
    }

    k_.a_min = std::min({k_.kappa_gray, k_.kappa_white, k_.d / (k_.tau_max + 1.0 / k_.kappa_min)});
    k_.b_max = std::max(k_.kappa_gray, k_.kappa_white) + 1.0 / k_.tau_min;
    k_.Lambda = 1.0 + k_.tau_min * k_.a_min;
    k_.C = (1.0 / k_.Lambda) * (k_.tau_min * k_.a_min / std::sqrt(1.0 + k_.b_max * k_.b_max)) *
           std::sqrt(1.0 + k_.a_min * k_.a_min);

    k_.solid_mass = 4.0 * kPi * cfg.rbar;
    auto width = [&](double r) {
        return std::sin(clean_phi_edge(cfg, r, kHalfPi)) - std::sin(clean_phi_edge(cfg, r, -kHalfPi));
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double transparent = GK::integrate(width, 0.0, 0.5 * len, 12, 1e-12) +
                         GK::integrate(width, 0.5 * len, len, 12, 1e-12);
    k_.mass = k_.solid_mass + 4.0 * transparent;
    k_.area = 1.0 - kPi * (cfg.rbar * cfg.rbar + cfg.r * cfg.r);
    k_.mean_flight_time = 2.0 * kPi * k_.area / k_.mass;

    double ls = wall_length(cfg, 1), lw = wall_length(cfg, kWhiteWall);
    k_.max_component_diameter =
        std::sqrt(std::max({ls, len, lw}) * std::max({ls, len, lw}) + kPi * kPi);

    k_.tau_min_observed = std::numeric_limits<double>::quiet_NaN();
    k_.tau_max_observed = std::numeric_limits<double>::quiet_NaN();
    if (opts.tau_observed_returns > 0) {
        Philox rng(opts.seed, 1, kPurposeSearch);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int i = 0; i < opts.tau_observed_returns; ++i) {
            PhasePoint x = sample_mu_one(*this, rng);
            double rad = cfg.eps * std::sqrt(rng.uniform());
            double ang = 2.0 * kPi * rng.uniform();
            Vec2 c{rad * std::cos(ang), rad * std::sin(ang)};
            ReturnLegs rl = return_legs(*this, x, c);
            for (int j = 0; j < rl.count; ++j) {
                if (rl.legs[j].margin < kSingularityBand) continue;
                lo = std::min(lo, rl.legs[j].tau);
                hi = std::max(hi, rl.legs[j].tau);
            }
        }
        k_.tau_min_observed = lo;
        k_.tau_max_observed = hi;
    }
}

}  // namespace rbill
