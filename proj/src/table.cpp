#include "rbill/table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rbill {

namespace {

constexpr double kPi = std::numbers::pi;

ConditionCheck strict_less(std::string name, double lhs, double rhs) {
    return {std::move(name), lhs, rhs, lhs < rhs, rhs - lhs};
}

ConditionCheck weak_greater(std::string name, double lhs, double rhs) {
    return {std::move(name), lhs, rhs, lhs >= rhs, lhs - rhs};
}

void require_positive_finite(double v, const char* what) {
    if (!std::isfinite(v) || v <= 0.0)
        throw std::invalid_argument(std::string(what) + " must be finite and positive");
}

}  // namespace

bool ValidationReport::pass() const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const ConditionCheck& c) { return c.pass; });
}

const ConditionCheck& ValidationReport::condition(const std::string& name) const {
    for (const auto& c : conditions)
        if (c.name == name) return c;
    throw std::out_of_range("no condition named " + name);
}

double free_zone_bound(double rbar) {
    if (!std::isfinite(rbar) || rbar <= 0.0)
        throw std::invalid_argument("free_zone_bound: rbar must be finite and positive");
    if (rbar >= 0.5) throw std::domain_error("free_zone_bound: rbar must be below 1/2");
    double s = 1.0 - 2.0 * rbar;
    return (std::sqrt(s) - rbar * s) / (2.0 * (1.0 - rbar));
}

ValidationReport validate_table(double rbar, double r, double eps) {
    require_positive_finite(rbar, "rbar");
    require_positive_finite(r, "r");
    require_positive_finite(eps, "eps");

    ValidationReport rep;
    rep.conditions.push_back(strict_less("no_overlap_max", std::max(rbar, r + eps), 0.5));
    rep.conditions.push_back(strict_less("no_overlap_diagonal", rbar + r + eps, 1.0 / std::sqrt(2.0)));
    rep.conditions.push_back(weak_greater("finite_horizon_diagonal", rbar, 1.0 / (2.0 * std::sqrt(2.0))));
    rep.conditions.push_back(weak_greater("finite_horizon_axis", rbar + r - eps, 0.5));
    if (rbar < 0.5) {
        rep.free_zone_L = free_zone_bound(rbar);
        rep.conditions.push_back(strict_less("free_zone", r + eps, rep.free_zone_L));
    } else {
        rep.free_zone_L = std::numeric_limits<double>::quiet_NaN();
        ConditionCheck c{"free_zone", r + eps, rep.free_zone_L, false, rep.free_zone_L};
        rep.conditions.push_back(c);
    }
    return rep;
}

WallKind wall_kind(int id) {
    if (id == kWhiteWall) return WallKind::white;
    if (id < 1 || id > 8) throw std::invalid_argument("wall id out of range");
    return (id % 2) ? WallKind::solid : WallKind::transparent;
}

Vec2 arc_corner(int id) {
    switch (id) {
        case 1: return {0.0, 0.0};
        case 3: return {1.0, 0.0};
        case 5: return {1.0, 1.0};
        case 7: return {0.0, 1.0};
        default: throw std::invalid_argument("arc_corner: not a gray arc");
    }
}

int opposite_wall(int id) {
    switch (id) {
        case 2: return 6;
        case 6: return 2;
        case 4: return 8;
        case 8: return 4;
        default: throw std::invalid_argument("opposite_wall: not a transparent wall");
    }
}

double wall_length(const TableConfig& cfg, int id) {
    switch (wall_kind(id)) {
        case WallKind::solid: return 0.5 * kPi * cfg.rbar;
        case WallKind::transparent: return 1.0 - 2.0 * cfg.rbar;
        case WallKind::white: return 2.0 * kPi * cfg.r;
    }
    return 0.0;
}

WallPoint wall_chart(const TableConfig& cfg, int id, double r, Vec2 c) {
    double len = wall_length(cfg, id);
    if (!(r >= 0.0 && r <= len)) throw std::invalid_argument("wall_chart: r out of range");
    const double rb = cfg.rbar;
    switch (id) {
        case kWhiteWall: {
            double theta = -r / cfg.r;
            Vec2 n{std::cos(theta), std::sin(theta)};
            return {Vec2{0.5, 0.5} + c + n * cfg.r, n, 1.0 / cfg.r};
        }
        case 1:
        case 3:
        case 5:
        case 7: {
            int j = (id - 1) / 2;
            double theta = (j + 1) * 0.5 * kPi - r / rb;
            Vec2 n{std::cos(theta), std::sin(theta)};
            return {arc_corner(id) + n * rb, n, 1.0 / rb};
        }
        case 2: return {{rb + r, 0.0}, {0.0, 1.0}, 0.0};
        case 4: return {{1.0, rb + r}, {-1.0, 0.0}, 0.0};
        case 6: return {{1.0 - rb - r, 1.0}, {0.0, -1.0}, 0.0};
        case 8: return {{0.0, 1.0 - rb - r}, {1.0, 0.0}, 0.0};
        default: break;
    }
    throw std::invalid_argument("wall_chart: bad wall id");
}

WallCoord wall_locate(const TableConfig& cfg, Vec2 p) {
    const double rb = cfg.rbar;
    double best = std::numeric_limits<double>::infinity();
    WallCoord out;
    auto consider = [&](double dist, int id, double r) {
        if (dist < best) {
            best = dist;
            out = {id, std::clamp(r, 0.0, wall_length(cfg, id))};
        }
    };
    for (int id : {1, 3, 5, 7}) {
        int j = (id - 1) / 2;
        Vec2 w = p - arc_corner(id);
        double theta = std::atan2(w.y, w.x);
        double lo = j * 0.5 * kPi;
        // bring theta into [lo - pi, lo + pi)
        while (theta < lo - kPi) theta += 2.0 * kPi;
        while (theta >= lo + kPi) theta -= 2.0 * kPi;
        double tc = std::clamp(theta, lo, lo + 0.5 * kPi);
        Vec2 q = arc_corner(id) + Vec2{std::cos(tc), std::sin(tc)} * rb;
        consider(norm(p - q), id, rb * ((j + 1) * 0.5 * kPi - tc));
    }
    double len = 1.0 - 2.0 * rb;
    auto side = [&](int id, Vec2 a, Vec2 dir) {
        double s = std::clamp(dot(p - a, dir), 0.0, len);
        consider(norm(p - (a + dir * s)), id, s);
    };
    side(2, {rb, 0.0}, {1.0, 0.0});
    side(4, {1.0, rb}, {0.0, 1.0});
    side(6, {1.0 - rb, 1.0}, {-1.0, 0.0});
    side(8, {0.0, 1.0 - rb}, {0.0, -1.0});
    return out;
}

double clean_distance(const TableConfig& cfg, Vec2 point, Vec2 dir) {
    double fx = std::abs(point.x - std::round(point.x));
    double fy = std::abs(point.y - std::round(point.y));
    if (!(fx <= kOnWallTolerance || fy <= kOnWallTolerance))
        throw std::invalid_argument("clean_pass: point is not on a square side");
    Vec2 a = point - dir * 0.5;
    Vec2 b = point + dir * 0.5;
    double ix = std::floor(point.x);
    double iy = std::floor(point.y);
    double best = std::numeric_limits<double>::infinity();
    for (int i = -1; i <= 2; ++i)
        for (int j = -1; j <= 2; ++j)
            best = std::min(best, segment_point_distance(a, b, {ix + i, iy + j}));
    return best - cfg.rbar;
}

bool clean_pass(const TableConfig& cfg, Vec2 point, Vec2 dir) {
    return clean_distance(cfg, point, dir) > 0.0;
}

}  // namespace rbill
