#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbill/phase_space.hpp"

namespace rbill {

constexpr double kSingularityBand = 1e-9;
constexpr double kRootEpsilon = 1e-12;
constexpr double kTieTolerance = 1e-12;

class SingularityProximity : public std::runtime_error {
public:
    SingularityProximity(double margin, int index = -1)
        : std::runtime_error("trajectory within singularity band (margin " + std::to_string(margin) + ")"),
          margin(margin),
          index(index) {}
    double margin;
    int index;  // step index within a composition, -1 when not applicable
};

class DegenerateTangent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Obstacles seen by the flow: gray disks at lattice points, white disks of the
// given radius at lattice + (1/2, 1/2) + c.
struct Scene {
    double rbar = 0.0;
    double white_radius = 0.0;
    Vec2 white_center{0.5, 0.5};
};
Scene make_scene(const TableConfig& cfg, Vec2 c);

enum class EventKind { gray, white, crossing };

struct LegEvent {
    EventKind kind = EventKind::gray;
    double t = 0.0;
    Vec2 point;
    Vec2 center;   // disk center for disk hits
    bool x_line = false;  // crossing of a vertical grid line
    double margin = 0.0;  // smallest singularity margin met along the leg
    bool tie = false;
};

// First event of the straight flight from p along the unit vector v.
LegEvent trace_leg(const Scene& scene, Vec2 p, Vec2 v);

struct Leg {
    PhasePoint from;
    PhasePoint to;
    double tau = 0.0;
    Vec2 delta;
    double margin = 0.0;
    bool reflect = false;  // ends with a disk reflection
};

// One extended-map leg without the singularity check.
Leg extended_leg(const Table& table, const PhasePoint& x, Vec2 c);

PhasePoint step_extended(const Table& table, const PhasePoint& x, Vec2 c);
int n_steps(const Table& table, const PhasePoint& x, Vec2 c);

struct ReturnRecord {
    PhasePoint pre;
    PhasePoint post;
    double tau = 0.0;
    Vec2 displacement;
    int n_c = 1;
    double sing_margin = 0.0;
    PhasePoint white;  // white-disk collision when n_c == 2
};

struct ReturnLegs {
    std::array<Leg, 2> legs;
    int count = 0;
};

// Legs of one return (1 or 2) without the singularity check.
ReturnLegs return_legs(const Table& table, const PhasePoint& x, Vec2 c);

ReturnRecord step(const Table& table, const PhasePoint& x, Vec2 c);
PhasePoint inverse_step(const Table& table, const PhasePoint& y, Vec2 c);
double singularity_distance(const Table& table, const PhasePoint& x, Vec2 c);

struct TangentStep {
    TangentVector v;
    std::array<double, 2> p_factors{};
    int legs = 0;
    ReturnRecord record;
};

// Transports (dr, dphi) across one leg with curvature kappa0 at the start,
// kappa1 at the end, ending with a reflection when `reflect` is set.
TangentVector transport_leg(const TangentVector& v, double kappa0, double phi0, double tau, double kappa1,
                            double phi1, bool reflect);
double leg_curvature(const Table& table, int wall);

TangentStep tangent_step(const Table& table, const PhasePoint& x, const TangentVector& v, Vec2 c);

struct Trajectory {
    PhasePoint start;
    std::vector<Vec2> sequence;
    std::vector<ReturnRecord> records;
};

Trajectory compose(const Table& table, const PhasePoint& x, const std::vector<Vec2>& omega, int n);

// First n <= max_n at which the orbits of x and y occupy different
// components or homogeneity strips; nullopt when they never separate.
std::optional<int> separation_time(const Table& table, const PhasePoint& x, const PhasePoint& y,
                                   const std::vector<Vec2>& omega, int max_n, int k0);

}  // namespace rbill
