#include "rbill/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rbill {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
// No leg of an admissible table comes close to this; guards the crossing loop.
constexpr double kHorizonGuard = 10.0;

double fast_clean_distance(double rbar, Vec2 x, Vec2 v) {
    Vec2 a = x - v * 0.5;
    Vec2 b = x + v * 0.5;
    double ix = std::floor(x.x);
    double iy = std::floor(x.y);
    double best = kInf;
    for (int i = 0; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) best = std::min(best, segment_point_distance(a, b, {ix + i, iy + j}));
    return best - rbar;
}

Vec2 reflect(Vec2 v, Vec2 n) { return v - n * (2.0 * dot(v, n)); }

}  // namespace

Scene make_scene(const TableConfig& cfg, Vec2 c) {
    return {cfg.rbar, cfg.r, Vec2{0.5, 0.5} + c};
}

LegEvent trace_leg(const Scene& s, Vec2 p, Vec2 v) {
    struct Miss {
        double b, perp, dist, rho;
    };
    std::array<Miss, 64> misses;
    int nm = 0;

    LegEvent ev;
    double best_t = kInf;
    double second_t = kInf;
    double best_rho = 0.0, best_perp2 = 0.0;

    auto consider = [&](Vec2 center, double rho, EventKind kind) {
        Vec2 w = center - p;
        double b = dot(w, v);
        if (b <= 0.0) return;
        double w2 = norm2(w);
        double perp2 = w2 - b * b;
        double rho2 = rho * rho;
        if (perp2 < rho2) {
            double t = b - std::sqrt(rho2 - perp2);
            if (t <= kRootEpsilon) return;
            if (t < best_t) {
                second_t = best_t;
                best_t = t;
                ev.kind = kind;
                ev.center = center;
                best_rho = rho;
                best_perp2 = perp2;
            } else if (t < second_t) {
                second_t = t;
            }
        } else if (nm < static_cast<int>(misses.size())) {
            misses[nm++] = {b, std::sqrt(std::max(perp2, 0.0)), std::sqrt(w2), rho};
        }
    };

    double fx = std::floor(p.x), fy = std::floor(p.y);
    for (int i = -2; i <= 3; ++i)
        for (int j = -2; j <= 3; ++j) consider({fx + i, fy + j}, s.rbar, EventKind::gray);
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
            consider(Vec2{fx + i, fy + j} + s.white_center, s.white_radius, EventKind::white);

    double margin = kInf;
    bool tie = second_t - best_t < kTieTolerance;

    // grid-line crossings before the disk hit, in time order
    double tx = kInf, ty = kInf, dtx = kInf, dty = kInf, kx = 0.0, ky = 0.0;
    if (v.x != 0.0) {
        kx = v.x > 0.0 ? std::floor(p.x) + 1.0 : std::ceil(p.x) - 1.0;
        dtx = 1.0 / std::abs(v.x);
        tx = (kx - p.x) / v.x;
        if (tx <= kRootEpsilon) {
            kx += v.x > 0.0 ? 1.0 : -1.0;
            tx += dtx;
        }
    }
    if (v.y != 0.0) {
        ky = v.y > 0.0 ? std::floor(p.y) + 1.0 : std::ceil(p.y) - 1.0;
        dty = 1.0 / std::abs(v.y);
        ty = (ky - p.y) / v.y;
        if (ty <= kRootEpsilon) {
            ky += v.y > 0.0 ? 1.0 : -1.0;
            ty += dty;
        }
    }
    bool crossing = false;
    double limit = std::min(best_t + kTieTolerance, kHorizonGuard);
    while (std::min(tx, ty) < limit) {
        bool xl = tx <= ty;
        double t = xl ? tx : ty;
        if (std::abs(tx - ty) < kTieTolerance) tie = true;
        Vec2 x = p + v * t;
        if (xl)
            x.x = kx;
        else
            x.y = ky;
        double cd = fast_clean_distance(s.rbar, x, v);
        margin = std::min(margin, std::abs(cd));
        if (cd > 0.0) {
            if (std::abs(t - best_t) < kTieTolerance) tie = true;
            crossing = true;
            ev.kind = EventKind::crossing;
            ev.t = t;
            ev.point = x;
            ev.x_line = xl;
            break;
        }
        if (xl) {
            kx += v.x > 0.0 ? 1.0 : -1.0;
            tx += dtx;
        } else {
            ky += v.y > 0.0 ? 1.0 : -1.0;
            ty += dty;
        }
    }
    if (!crossing) {
        if (!std::isfinite(best_t)) throw std::logic_error("trace_leg: no event within the horizon guard");
        ev.t = best_t;
        ev.point = p + v * best_t;
        // angle between the incoming ray and the tangent line at the hit
        double c = std::sqrt(std::max(best_rho * best_rho - best_perp2, 0.0)) / best_rho;
        margin = std::min(margin, std::asin(std::min(c, 1.0)));
    }
    for (int i = 0; i < nm; ++i) {
        const Miss& m = misses[i];
        if (m.b >= ev.t) continue;
        double alpha = std::atan2(m.perp, m.b);
        margin = std::min(margin, alpha - std::asin(std::min(m.rho / m.dist, 1.0)));
    }
    ev.tie = tie;
    ev.margin = tie ? 0.0 : std::max(margin, 0.0);
    return ev;
}

Leg extended_leg(const Table& table, const PhasePoint& x, Vec2 c) {
    const auto& cfg = table.config();
    WallPoint wp = wall_chart(cfg, x.wall, x.r, c);
    Vec2 v = velocity_at(wp, x.phi);
    LegEvent ev = trace_leg(make_scene(cfg, c), wp.point, v);

    Leg leg;
    leg.from = x;
    leg.tau = ev.t;
    leg.delta = ev.point - wp.point;
    double margin = ev.margin;
    if (!is_transparent(x.wall)) margin = std::min(margin, kHalfPi - std::abs(x.phi));

    switch (ev.kind) {
        case EventKind::gray: {
            Vec2 n = ev.point - ev.center;
            n = n * (1.0 / norm(n));
            Vec2 out = reflect(v, n);
            double theta = std::atan2(n.y, n.x);
            if (theta < 0.0) theta += 2.0 * kPi;
            int j = static_cast<int>(std::floor(theta / kHalfPi));
            if (j >= 1 && theta == j * kHalfPi) --j;  // lowest index at identified endpoints
            j = std::clamp(j, 0, 3);
            double len = wall_length(cfg, 1);
            double r = std::clamp(cfg.rbar * ((j + 1) * kHalfPi - theta), 0.0, len);
            leg.to = {2 * j + 1, r, angle_from_velocity(n, out)};
            margin = std::min(margin, std::min(r, len - r));
            leg.reflect = true;
            break;
        }
        case EventKind::white: {
            Vec2 n = ev.point - ev.center;
            n = n * (1.0 / norm(n));
            Vec2 out = reflect(v, n);
            double len = 2.0 * kPi * cfg.r;
            double r = -cfg.r * std::atan2(n.y, n.x);
            if (r < 0.0) r += len;
            if (r >= len) r -= len;
            leg.to = {kWhiteWall, r, angle_from_velocity(n, out)};
            leg.reflect = true;
            break;
        }
        case EventKind::crossing: {
            int wall;
            double r;
            if (ev.x_line) {
                double yl = ev.point.y - std::floor(ev.point.y);
                if (v.x > 0.0) {
                    wall = 8;
                    r = 1.0 - cfg.rbar - yl;
                } else {
                    wall = 4;
                    r = yl - cfg.rbar;
                }
            } else {
                double xl = ev.point.x - std::floor(ev.point.x);
                if (v.y > 0.0) {
                    wall = 2;
                    r = xl - cfg.rbar;
                } else {
                    wall = 6;
                    r = 1.0 - cfg.rbar - xl;
                }
            }
            double len = wall_length(cfg, wall);
            r = std::clamp(r, 0.0, len);
            Vec2 n = wall_chart(cfg, wall, r).normal;
            leg.to = {wall, r, angle_from_velocity(n, v)};
            margin = std::min(margin, std::min(r, len - r));
            leg.reflect = false;
            break;
        }
    }
    leg.margin = ev.tie ? 0.0 : std::max(margin, 0.0);
    return leg;
}

PhasePoint step_extended(const Table& table, const PhasePoint& x, Vec2 c) {
    Leg leg = extended_leg(table, x, c);
    if (leg.margin < kSingularityBand) throw SingularityProximity(leg.margin);
    return leg.to;
}

ReturnLegs return_legs(const Table& table, const PhasePoint& x, Vec2 c) {
    ReturnLegs rl;
    rl.legs[0] = extended_leg(table, x, c);
    rl.count = 1;
    if (rl.legs[0].to.wall == kWhiteWall) {
        rl.legs[1] = extended_leg(table, rl.legs[0].to, c);
        rl.count = 2;
        if (rl.legs[1].to.wall == kWhiteWall)
            throw std::logic_error("return_legs: second white-disk collision within one return");
    }
    return rl;
}

namespace {

double legs_margin(const ReturnLegs& rl) {
    double m = rl.legs[0].margin;
    if (rl.count == 2) m = std::min(m, rl.legs[1].margin);
    return m;
}

ReturnRecord make_record(const PhasePoint& x, const ReturnLegs& rl) {
    ReturnRecord rec;
    rec.pre = x;
    rec.n_c = rl.count;
    rec.post = rl.legs[rl.count - 1].to;
    rec.tau = rl.legs[0].tau;
    rec.displacement = rl.legs[0].delta;
    if (rl.count == 2) {
        rec.white = rl.legs[0].to;
        rec.tau += rl.legs[1].tau;
        rec.displacement += rl.legs[1].delta;
    }
    rec.sing_margin = legs_margin(rl);
    return rec;
}

}  // namespace

int n_steps(const Table& table, const PhasePoint& x, Vec2 c) {
    ReturnLegs rl = return_legs(table, x, c);
    double m = legs_margin(rl);
    if (m < kSingularityBand) throw SingularityProximity(m);
    return rl.count;
}

ReturnRecord step(const Table& table, const PhasePoint& x, Vec2 c) {
    ReturnLegs rl = return_legs(table, x, c);
    ReturnRecord rec = make_record(x, rl);
    if (rec.sing_margin < kSingularityBand) throw SingularityProximity(rec.sing_margin);
    return rec;
}

PhasePoint inverse_step(const Table& table, const PhasePoint& y, Vec2 c) {
    return involution(table, step(table, involution(table, y), c).post);
}

double singularity_distance(const Table& table, const PhasePoint& x, Vec2 c) {
    return legs_margin(return_legs(table, x, c));
}

double leg_curvature(const Table& table, int wall) {
    switch (wall_kind(wall)) {
        case WallKind::solid: return table.constants().kappa_gray;
        case WallKind::white: return table.constants().kappa_white;
        case WallKind::transparent: return 0.0;
    }
    return 0.0;
}

TangentVector transport_leg(const TangentVector& v, double kappa0, double phi0, double tau, double kappa1,
                            double phi1, bool reflect) {
    double sigma = reflect ? -1.0 : 1.0;
    double c0 = std::cos(phi0);
    double c1 = std::cos(phi1);
    TangentVector out;
    out.dr = sigma * ((c0 + tau * kappa0) * v.dr + tau * v.dphi) / c1;
    out.dphi = kappa1 * out.dr + sigma * (kappa0 * v.dr + v.dphi);
    return out;
}

TangentStep tangent_step(const Table& table, const PhasePoint& x, const TangentVector& v, Vec2 c) {
    auto bad = [](const TangentVector& w) {
        return !std::isfinite(w.dr) || !std::isfinite(w.dphi) || (w.dr == 0.0 && w.dphi == 0.0);
    };
    if (bad(v)) throw DegenerateTangent("tangent_step: zero or non-finite tangent vector");
    ReturnLegs rl = return_legs(table, x, c);
    TangentStep out;
    out.record = make_record(x, rl);
    if (out.record.sing_margin < kSingularityBand) throw SingularityProximity(out.record.sing_margin);
    TangentVector w = v;
    for (int i = 0; i < rl.count; ++i) {
        const Leg& leg = rl.legs[i];
        double k0 = leg_curvature(table, leg.from.wall);
        double k1 = leg_curvature(table, leg.to.wall);
        double c0 = std::cos(leg.from.phi);
        double num = std::abs((c0 + leg.tau * k0) * w.dr + leg.tau * w.dphi);
        out.p_factors[i] = w.dr == 0.0 ? kInf : num / (c0 * std::abs(w.dr));
        w = transport_leg(w, k0, leg.from.phi, leg.tau, k1, leg.to.phi, leg.reflect);
    }
    if (bad(w)) throw DegenerateTangent("tangent_step: image tangent vector is degenerate");
    out.legs = rl.count;
    out.v = w;
    return out;
}

Trajectory compose(const Table& table, const PhasePoint& x, const std::vector<Vec2>& omega, int n) {
    if (n < 0 || static_cast<std::size_t>(n) > omega.size())
        throw std::invalid_argument("compose: sequence shorter than n");
    Trajectory tr;
    tr.start = x;
    tr.sequence.assign(omega.begin(), omega.begin() + n);
    tr.records.reserve(n);
    PhasePoint cur = x;
    for (int i = 0; i < n; ++i) {
        try {
            tr.records.push_back(step(table, cur, omega[i]));
        } catch (const SingularityProximity& e) {
            throw SingularityProximity(e.margin, i);
        }
        cur = tr.records.back().post;
    }
    return tr;
}

std::optional<int> separation_time(const Table& table, const PhasePoint& x, const PhasePoint& y,
                                   const std::vector<Vec2>& omega, int max_n, int k0) {
    if (max_n < 0 || static_cast<std::size_t>(max_n) > omega.size())
        throw std::invalid_argument("separation_time: sequence shorter than max_n");
    auto differ = [&](const PhasePoint& a, const PhasePoint& b) {
        return a.wall != b.wall || homogeneity_index(a, k0) != homogeneity_index(b, k0);
    };
    if (differ(x, y)) return 0;
    if (x == y) return std::nullopt;
    PhasePoint a = x, b = y;
    for (int n = 1; n <= max_n; ++n) {
        ReturnLegs la = return_legs(table, a, omega[n - 1]);
        ReturnLegs lb = return_legs(table, b, omega[n - 1]);
        double m = std::min(legs_margin(la), legs_margin(lb));
        if (m < kSingularityBand) throw SingularityProximity(m, n - 1);
        if (la.count != lb.count) return n;
        if (la.count == 2 && differ(la.legs[0].to, lb.legs[0].to)) return n;
        a = la.legs[la.count - 1].to;
        b = lb.legs[lb.count - 1].to;
        if (differ(a, b)) return n;
    }
    return std::nullopt;
}

}  // namespace rbill
