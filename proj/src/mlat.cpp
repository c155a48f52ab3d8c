#include "proxsim/mlat.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "proxsim/error.hpp"
#include "proxsim/rng.hpp"
#include "proxsim/text.hpp"

namespace proxsim::mlat {
namespace {

constexpr int kPollDirections = 16;
// Successive polls rotate the direction star by the golden angle so that
// no fixed set of directions can be trapped along a ridge of the L1 surface.
constexpr double kGoldenAngle = std::numbers::pi * (3.0 - 2.2360679774997896964);
constexpr double kCollinearityRatio = 1e-6;

struct Columns {
    std::vector<double> x, y, r;

    explicit Columns(std::span<const DistanceSample> samples) {
        x.reserve(samples.size());
        y.reserve(samples.size());
        r.reserve(samples.size());
        for (const auto& s : samples) {
            x.push_back(s.observer.x_m);
            y.push_back(s.observer.y_m);
            r.push_back(s.reported_m);
        }
    }

    double eval(double px, double py, Norm norm) const {
        const std::size_t n = x.size();
        double acc = 0.0;
        if (norm == Norm::L1) {
            for (std::size_t i = 0; i < n; ++i) {
                const double dx = px - x[i];
                const double dy = py - y[i];
                acc += std::abs(std::sqrt(dx * dx + dy * dy) - r[i]);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double dx = px - x[i];
                const double dy = py - y[i];
                const double e = std::sqrt(dx * dx + dy * dy) - r[i];
                acc += e * e;
            }
        }
        return acc / static_cast<double>(n);
    }
};

bool lex_less(double ax, double ay, double bx, double by) {
    return ax < bx || (ax == bx && ay < by);
}

} // namespace

double objective(double x_m, double y_m, std::span<const DistanceSample> samples, Norm norm) {
    if (samples.empty()) throw EmptySamplesError("objective needs at least one sample");
    double acc = 0.0;
    for (const auto& s : samples) {
        const double e = std::hypot(x_m - s.observer.x_m, y_m - s.observer.y_m) - s.reported_m;
        acc += norm == Norm::L1 ? std::abs(e) : e * e;
    }
    return acc / static_cast<double>(samples.size());
}

double objective(const geo::EnuPoint& p, std::span<const DistanceSample> samples, Norm norm) {
    return objective(p.x_m, p.y_m, samples, norm);
}

void check_geometry(std::span<const DistanceSample> samples) {
    if (samples.size() < 3) {
        throw UnderdeterminedError("multilateration needs at least 3 samples, got " +
                                   std::to_string(samples.size()));
    }
    double cx = 0.0, cy = 0.0;
    for (const auto& s : samples) {
        cx += s.observer.x_m;
        cy += s.observer.y_m;
    }
    cx /= static_cast<double>(samples.size());
    cy /= static_cast<double>(samples.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& s : samples) {
        const double dx = s.observer.x_m - cx;
        const double dy = s.observer.y_m - cy;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // Singular values of the centred observer matrix are the square roots of
    // the eigenvalues of its 2x2 scatter matrix.
    const double mean = 0.5 * (sxx + syy);
    const double spread = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
    const double sigma_max = std::sqrt(std::max(0.0, mean + spread));
    const double sigma_min = std::sqrt(std::max(0.0, mean - spread));
    if (sigma_max == 0.0 || sigma_min <= kCollinearityRatio * sigma_max) {
        throw DegenerateGeometryError(
            "observers are collinear; the range equations admit mirror solutions");
    }
}

namespace {

struct Descent {
    double x, y, f;
    int iterations;
};

Descent descend(const Columns& cols, double x, double y, const SolverConfig& cfg, int budget) {
    double best = cols.eval(x, y, cfg.norm);
    double step = cfg.step_init_m;
    int iter = 0;
    while (iter < budget && step >= cfg.tol_m) {
        const double base = kGoldenAngle * static_cast<double>(iter);
        ++iter;
        double cand_f = std::numeric_limits<double>::infinity();
        double cand_x = 0.0, cand_y = 0.0;
        for (int k = 0; k < kPollDirections; ++k) {
            const double a = base + 2.0 * std::numbers::pi * k / kPollDirections;
            const double px = x + step * std::cos(a);
            const double py = y + step * std::sin(a);
            const double f = cols.eval(px, py, cfg.norm);
            if (f < cand_f || (f == cand_f && lex_less(px, py, cand_x, cand_y))) {
                cand_f = f;
                cand_x = px;
                cand_y = py;
            }
        }
        if (cand_f < best) {
            best = cand_f;
            x = cand_x;
            y = cand_y;
            step = std::min(2.0 * step, cfg.step_init_m);
        } else {
            step *= 0.5;
        }
    }
    return Descent{x, y, best, iter};
}

bool better(const Descent& a, const Descent& b) {
    return a.f < b.f || (a.f == b.f && lex_less(a.x, a.y, b.x, b.y));
}

// Best `count` points of a lattice covering every reported circle.
std::vector<Descent> lattice_starts(const Columns& cols, const SolverConfig& cfg, int count) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    for (std::size_t i = 0; i < cols.x.size(); ++i) {
        x0 = std::min(x0, cols.x[i] - cols.r[i]);
        x1 = std::max(x1, cols.x[i] + cols.r[i]);
        y0 = std::min(y0, cols.y[i] - cols.r[i]);
        y1 = std::max(y1, cols.y[i] + cols.r[i]);
    }
    constexpr double kMaxLatticeSide = 64.0;
    const double pitch = std::max({cfg.step_init_m, (x1 - x0) / kMaxLatticeSide,
                                   (y1 - y0) / kMaxLatticeSide});
    const int nx = static_cast<int>(std::floor((x1 - x0) / pitch)) + 1;
    const int ny = static_cast<int>(std::floor((y1 - y0) / pitch)) + 1;
    std::vector<Descent> pts;
    pts.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const double px = x0 + pitch * i, py = y0 + pitch * j;
            pts.push_back(Descent{px, py, cols.eval(px, py, cfg.norm), 0});
        }
    }
    const auto keep = std::min(pts.size(), static_cast<std::size_t>(count));
    std::partial_sort(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(keep), pts.end(), better);
    pts.resize(keep);
    return pts;
}

} // namespace

PositionEstimate multilaterate(std::span<const DistanceSample> samples, const SolverConfig& cfg) {
    if (cfg.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (!(cfg.tol_m > 0.0)) throw ValidationError("tol_m must be > 0");
    if (!(cfg.step_init_m > 0.0)) throw ValidationError("step_init_m must be > 0");
    if (cfg.restarts < 0) throw ValidationError("restarts must be >= 0");
    check_geometry(samples);

    const Columns cols(samples);
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < cols.x.size(); ++i) {
        cx += cols.x[i];
        cy += cols.y[i];
    }
    cx /= static_cast<double>(cols.x.size());
    cy /= static_cast<double>(cols.y.size());

    Rng rng(derive_seed(cfg.seed, {0x6d6c6174ULL}));
    const double jitter = 0.5 * cfg.step_init_m;
    const double sx = cx + rng.uniform(-jitter, jitter);
    const double sy = cy + rng.uniform(-jitter, jitter);

    Descent best = descend(cols, sx, sy, cfg, cfg.max_iterations);
    int used = best.iterations;
    if (cfg.restarts > 0) {
        for (const auto& start : lattice_starts(cols, cfg, cfg.restarts)) {
            if (used >= cfg.max_iterations) break;
            const Descent d = descend(cols, start.x, start.y, cfg, cfg.max_iterations - used);
            used += d.iterations;
            if (better(d, best)) best = d;
        }
    }

    PositionEstimate est;
    est.p_hat = geo::EnuPoint{best.x, best.y, samples.front().observer.ref};
    est.residual = best.f;
    est.iterations_used = used;
    est.samples_used = static_cast<int>(samples.size());
    return est;
}

std::vector<TimingCell> runtime_profile(std::span<const int> sample_counts,
                                        std::span<const int> iteration_counts,
                                        const SolverConfig& cfg, int repeats) {
    using clock = std::chrono::steady_clock;
    std::vector<TimingCell> grid;
    for (int n : sample_counts) {
        if (n < 3) throw ValidationError("runtime_profile sample counts must be >= 3");
        std::vector<DistanceSample> samples;
        samples.reserve(static_cast<std::size_t>(n));
        const double tx = 137.0, ty = -59.0;
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * std::numbers::pi * i / n;
            DistanceSample s;
            s.observer = geo::EnuPoint{1000.0 * std::cos(a), 1000.0 * std::sin(a), {}};
            s.reported_m = std::hypot(tx - s.observer.x_m, ty - s.observer.y_m);
            s.t_s = i;
            samples.push_back(s);
        }
        for (int iters : iteration_counts) {
            if (iters < 1) throw ValidationError("runtime_profile iteration counts must be >= 1");
            SolverConfig run = cfg;
            run.max_iterations = iters;
            run.tol_m = std::numeric_limits<double>::denorm_min();
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < std::max(1, repeats); ++r) {
                const auto start = clock::now();
                const auto est = multilaterate(samples, run);
                const std::chrono::duration<double> dt = clock::now() - start;
                if (est.iterations_used != iters) {
                    throw Error("internal", "profile solve stopped early");
                }
                best = std::min(best, dt.count());
            }
            grid.push_back(TimingCell{n, iters, best});
        }
    }
    return grid;
}

void write_samples_csv(std::ostream& out, std::span<const DistanceSample> samples) {
    out << "observer_x_m,observer_y_m,reported_m,t_s,quantum_m\n";
    for (const auto& s : samples) {
        out << text::fmt_double(s.observer.x_m) << ',' << text::fmt_double(s.observer.y_m) << ','
            << text::fmt_double(s.reported_m) << ',' << text::fmt_double(s.t_s) << ','
            << text::fmt_double(s.quantum_m) << '\n';
    }
}

std::vector<DistanceSample> read_samples_csv(std::istream& in, geo::GeoPoint ref) {
    std::string line;
    if (!std::getline(in, line) ||
        text::trim(line) != "observer_x_m,observer_y_m,reported_m,t_s,quantum_m") {
        throw ValidationError("sample CSV: missing or unexpected header");
    }
    std::vector<DistanceSample> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const auto cells = text::split(text::trim(line), ',');
        if (cells.size() != 5) {
            throw ValidationError("sample CSV line " + std::to_string(lineno) +
                                  ": expected 5 columns");
        }
        double v[5];
        for (int i = 0; i < 5; ++i) {
            auto parsed = text::parse_double(cells[static_cast<std::size_t>(i)]);
            if (!parsed) {
                throw ValidationError("sample CSV line " + std::to_string(lineno) +
                                      ": bad number '" + std::string(cells[static_cast<std::size_t>(i)]) + "'");
            }
            v[i] = *parsed;
        }
        if (v[2] < 0.0 || v[4] < 0.0) {
            throw ValidationError("sample CSV line " + std::to_string(lineno) +
                                  ": negative distance or quantum");
        }
        out.push_back(DistanceSample{geo::EnuPoint{v[0], v[1], ref}, v[2], v[3], v[4]});
    }
    return out;
}

} // namespace proxsim::mlat
