#pragma once

// Range-only position estimation from (possibly quantized) distance samples.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "proxsim/geo.hpp"

namespace proxsim::mlat {

/// One observation: where the observer stood, what distance the service
/// reported, when, and the quantization step that produced the value.
struct DistanceSample {
    geo::EnuPoint observer;
    double reported_m = 0.0;
    double t_s = 0.0;
    double quantum_m = 0.0; // 0 = exact
};

enum class Norm { L1, L2 };

struct SolverConfig {
    Norm norm = Norm::L1;
    int max_iterations = 600;
    double step_init_m = 500.0;
    double tol_m = 0.01;
    std::uint64_t seed = 0;
    /// Extra descents started from the best points of a coarse lattice scan
    /// (0 = centroid start only).
    int restarts = 4;
};

struct PositionEstimate {
    geo::EnuPoint p_hat;
    double residual = 0.0; // objective at p_hat
    int iterations_used = 0;
    int samples_used = 0;
};

/// Mean absolute (L1) or mean squared (L2) range residual at (x, y).
/// Throws EmptySamplesError when `samples` is empty.
double objective(double x_m, double y_m, std::span<const DistanceSample> samples, Norm norm);
double objective(const geo::EnuPoint& p, std::span<const DistanceSample> samples, Norm norm);

/// Throws UnderdeterminedError for fewer than three samples and
/// DegenerateGeometryError when the observers are (numerically) collinear.
void check_geometry(std::span<const DistanceSample> samples);

/// Derivative-free pattern search over the plane, started at the observer
/// centroid plus a seeded jitter. Each iteration polls a rotated star of
/// directions at the current step; an improving poll moves and doubles the
/// step (capped at step_init_m), a failed poll halves it. Stops once the
/// step drops below tol_m or after max_iterations polls.
///
/// With cfg.restarts > 0 the objective is also scanned on a lattice of
/// pitch step_init_m covering every observer's reported circle, and further
/// descents start from the `restarts` best lattice points. All descents
/// share the max_iterations budget; the best end point wins.
///
/// Deterministic for fixed (samples, cfg). Equal-objective candidates are
/// ordered lexicographically by (x, y).
PositionEstimate multilaterate(std::span<const DistanceSample> samples, const SolverConfig& cfg);

struct TimingCell {
    int samples = 0;
    int iterations = 0;
    double seconds_per_solve = 0.0;
};

/// Wall-clock cost of multilaterate over a grid of sample counts and
/// iteration budgets. Uses a synthetic ring instance and sets the
/// convergence tolerance to the smallest positive double so every solve
/// runs its full iteration budget. Best of `repeats` timings per cell.
/// Run single-threaded.
std::vector<TimingCell> runtime_profile(std::span<const int> sample_counts,
                                        std::span<const int> iteration_counts,
                                        const SolverConfig& cfg, int repeats = 5);

/// CSV with header `observer_x_m,observer_y_m,reported_m,t_s,quantum_m`.
void write_samples_csv(std::ostream& out, std::span<const DistanceSample> samples);
/// Parses the format above; observers get a default (0, 0) frame reference.
/// Throws ValidationError on malformed input.
std::vector<DistanceSample> read_samples_csv(std::istream& in, geo::GeoPoint ref = {});

} // namespace proxsim::mlat
