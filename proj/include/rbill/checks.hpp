#pragma once

#include <cstdint>
#include <vector>

#include "rbill/dynamics.hpp"
#include "rbill/stat_tests.hpp"
#include "rbill/statistics.hpp"

// Numerical diagnostics for the dynamical properties of a table: measure
// invariance, reversibility, cone invariance, expansion rates, tangent map
// accuracy and separation times. Shared by the CLI and the acceptance suite.
namespace rbill {

struct InvarianceReport {
    Vec2 c;
    int samples = 0;
    long long skipped = 0;         // pushforwards inside the singularity band
    std::vector<KsResult> r_ks;    // walls 1..8 at index 0..7
    std::vector<KsResult> phi_ks;
    double min_p = 1.0;
};

// Pushes `samples` mu-samples through F_c and compares the per-wall r and phi
// marginals with fresh mu-samples.
InvarianceReport measure_invariance(const Table& table, Vec2 c, int samples, std::uint64_t seed);

struct ReversibilityReport {
    int starts = 0;
    long long skipped = 0;
    double max_error = 0.0;  // max |dr|, |dphi| after I F I F, applied once and twice
    int wall_mismatches = 0;
};

// x -> I(F_c(I(F_c x))) should return x; c is uniform on the eps-disk.
ReversibilityReport reversibility_check(const Table& table, int starts, std::uint64_t seed);

struct ConeReport {
    int centerings = 0;
    long long tested = 0;
    long long skipped = 0;  // within `band` of a singularity
    long long cone_violations = 0;
    long long p_violations = 0;
    double min_p_factor = 0.0;
    double min_cone_slack = 0.0;  // smallest distance of an image slope to the cone boundary, relative to b - a
};

// Maps the boundary vectors of the unstable cone (slopes a(x) and b(x)) and
// checks that they land strictly inside the image cone, with every leg
// expanding the p-norm by at least Lambda.
ConeReport cone_check(const Table& table, int samples_per_centering, int centerings, double band,
                      std::uint64_t seed);

struct ExpansionReport {
    int orbits = 0;
    int n_max = 0;
    long long skipped = 0;
    long long violations = 0;
    double min_ratio = 0.0;   // min over orbits and n of |DF^n v| / (C Lambda^n |v|)
    double min_p_factor = 0.0;
    long long p_violations = 0;
};

// Euclidean growth of unstable vectors along iid-centering orbits.
ExpansionReport expansion_check(const Table& table, int orbits, int n_max, std::uint64_t seed);

struct TangentCheckReport {
    int samples = 0;
    long long skipped = 0;
    double max_rel_error = 0.0;
    double margin_threshold = 0.0;
};

// tangent_step against Richardson-extrapolated central differences of step on
// starts whose singularity distance exceeds margin_threshold.
TangentCheckReport tangent_fd_check(const Table& table, int samples, double margin_threshold, std::uint64_t seed);

struct SeparationReport {
    int pairs = 0;
    long long skipped = 0;
    int max_n = 0;
    double bound = 0.0;          // log(Lambda sqrt(1 + b_max^2) D_max / C)
    double fitted_max = 0.0;     // max of log d + s log Lambda
    double slope = 0.0;          // regression of s on -log d
    int exceedances = 0;         // values above bound + tol
    int never_separated = 0;
    double tolerance = 1e-6;
};

// Pairs y = x + h u with u in the unstable cone at x and log10 h uniform in
// [-10, -2], separated under a common iid sequence.
SeparationReport separation_check(const Table& table, int pairs, int max_n, std::uint64_t seed,
                                  double tolerance = 1e-6);

struct EnvelopeReport {
    int checked = 0;        // lags where the estimate is significant
    int violations = 0;
    int first_violation = -1;
};

// Decay envelope of a correlation series: wherever |est(n)| >= sig * se(n),
// require |est(n + window)| + z * se(n + window) < |est(n)|.
EnvelopeReport decay_envelope(const std::vector<Estimate>& series, int window = 5, double sig = 6.0,
                              double z = 3.0);

}  // namespace rbill
