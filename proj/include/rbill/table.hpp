#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbill/vec2.hpp"

namespace rbill {

// Gray disk of radius rbar at the lattice points, white disk of radius r
// centered at (1/2, 1/2) + c with |c| <= eps. Torus side is 1.
struct TableConfig {
    double rbar = 0.36;
    double r = 0.20;
    double eps = 0.01;
};

struct ConditionCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    double slack = 0.0;  // positive when satisfied
};

struct ValidationReport {
    std::vector<ConditionCheck> conditions;
    double free_zone_L = 0.0;  // NaN when rbar >= 1/2
    bool pass() const;
    const ConditionCheck& condition(const std::string& name) const;
};

ValidationReport validate_table(double rbar, double r, double eps);
double free_zone_bound(double rbar);

// Walls 1..8 of the fundamental cell; odd = gray quarter arcs, even = free
// parts of the square sides. Index 0 denotes the white disk boundary.
constexpr int kWhiteWall = 0;
enum class WallKind { solid, transparent, white };

WallKind wall_kind(int id);
inline bool is_solid(int id) { return id >= 1 && id <= 8 && (id % 2) == 1; }
inline bool is_transparent(int id) { return id >= 2 && id <= 8 && (id % 2) == 0; }

struct WallPoint {
    Vec2 point;
    Vec2 normal;  // points into the billiard domain
    double kappa = 0.0;
};

struct WallCoord {
    int wall = 1;
    double r = 0.0;
};

double wall_length(const TableConfig& cfg, int id);
// Chart of wall `id`. For the white disk the center offset c is needed; its
// arclength parametrization does not depend on c.
WallPoint wall_chart(const TableConfig& cfg, int id, double r, Vec2 c = {});
// Nearest non-random wall to a point of the closed unit cell.
WallCoord wall_locate(const TableConfig& cfg, Vec2 p);
// Lattice corner carrying gray arc `id`.
Vec2 arc_corner(int id);
// Transparent wall paired with `id` by the side identification.
int opposite_wall(int id);

// Signed clearance of the unit segment centered at `point` along `dir`:
// min distance to the gray disk images minus rbar. Positive means a clean pass.
double clean_distance(const TableConfig& cfg, Vec2 point, Vec2 dir);
bool clean_pass(const TableConfig& cfg, Vec2 point, Vec2 dir);

constexpr double kOnWallTolerance = 1e-9;

struct TableOptions {
    int k0 = 10;
    // Random legs of the comparison table used to bracket the longest leg.
    int tau_max_samples = 20000;
    // Returns sampled to report observed leg extremes (0 disables).
    int tau_observed_returns = 0;
    std::uint64_t seed = 20240601;
};

struct TableConstants {
    double L = 0.0;
    double d = 0.0;
    double kappa_gray = 0.0;
    double kappa_white = 0.0;
    double kappa_min = 0.0;
    double tau_min = 0.0;  // certified lower bound on leg length
    double tau_max = 0.0;  // certified upper bound on leg length
    double tau_min_observed = 0.0;
    double tau_max_observed = 0.0;
    double tau_max_search = 0.0;  // raw maximum found by the bracketing search
    double a_min = 0.0;
    double b_max = 0.0;
    double Lambda = 0.0;
    double C = 0.0;
    double mass = 0.0;        // integral of cos(phi) dr dphi over the cross section
    double solid_mass = 0.0;  // contribution of the four gray arcs
    double area = 0.0;        // billiard domain area in one cell
    double mean_flight_time = 0.0;
    double max_component_diameter = 0.0;
    int k0 = 10;
};

class Table {
public:
    explicit Table(const TableConfig& cfg, const TableOptions& opts = {});

    const TableConfig& config() const { return cfg_; }
    const TableConstants& constants() const { return k_; }
    const TableOptions& options() const { return opts_; }
    double rbar() const { return cfg_.rbar; }
    double r() const { return cfg_.r; }
    double eps() const { return cfg_.eps; }

    // Upper end of the clean angle interval on transparent walls at arclength r
    // (the interval is symmetric: [-phi_clean(len - r), phi_clean(r)]).
    double clean_phi_max(double r) const;
    double clean_phi_min(double r) const;

private:
    TableConfig cfg_;
    TableOptions opts_;
    TableConstants k_;
};

// Numerical infimum of cos(phi) over the clean region (grid + refinement).
double compute_clean_cos_infimum(const TableConfig& cfg);

}  // namespace rbill
