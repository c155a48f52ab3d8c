#include "proxsim/attacker.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "proxsim/error.hpp"
#include "proxsim/rng.hpp"
#include "proxsim/text.hpp"

namespace proxsim::attacker {

ServiceChannel::ServiceChannel(service::Service& svc, std::string_view token)
    : svc_(svc), session_(svc.login(token)) {}

void ServiceChannel::update_location(const geo::GeoPoint& p) { svc_.update_location(session_, p); }
std::vector<service::NearbyEntry> ServiceChannel::nearby(double radius_m) { return svc_.nearby(session_, radius_m); }
service::NearbyEntry ServiceChannel::profile(UserId target) { return svc_.profile(session_, target); }
void ServiceChannel::like_page(PageId page) { svc_.like_page(session_, page); }
double ServiceChannel::now_s() { return svc_.now_s(); }
void ServiceChannel::wait_until(double t_s) { svc_.advance_to(t_s); }

const char* to_string(ProbeStrategy s) {
    switch (s) {
    case ProbeStrategy::Ring: return "ring";
    case ProbeStrategy::Adaptive: return "adaptive";
    case ProbeStrategy::FixedPoints: return "fixed_points";
    }
    return "?";
}

std::optional<ProbeStrategy> parse_probe_strategy(std::string_view s) {
    if (s == "ring") return ProbeStrategy::Ring;
    if (s == "adaptive") return ProbeStrategy::Adaptive;
    if (s == "fixed_points") return ProbeStrategy::FixedPoints;
    return std::nullopt;
}

ProbePlan ProbePlan::ring(int count, double radius_m) {
    ProbePlan p;
    p.count = count;
    p.ring_radius_m = radius_m;
    return p;
}

ProbePlan ProbePlan::fixed(std::vector<geo::EnuPoint> points) {
    ProbePlan p;
    p.strategy = ProbeStrategy::FixedPoints;
    p.count = static_cast<int>(points.size());
    p.points = std::move(points);
    return p;
}

void validate(const ProbePlan& plan) {
    if (plan.strategy == ProbeStrategy::FixedPoints) {
        for (const auto& p : plan.points) {
            if (!std::isfinite(p.x_m) || !std::isfinite(p.y_m)) throw ValidationError("probe point must be finite");
        }
        return;
    }
    if (plan.count < 0) throw ValidationError("probe count must be >= 0");
    if (!(plan.ring_radius_m > 0.0) || !std::isfinite(plan.ring_radius_m)) {
        throw ValidationError("ring_radius_m must be a positive finite number");
    }
    if (!std::isfinite(plan.phase_rad)) throw ValidationError("phase must be finite");
    if (plan.center && (!std::isfinite(plan.center->x_m) || !std::isfinite(plan.center->y_m))) {
        throw ValidationError("ring centre must be finite");
    }
}

namespace {

std::vector<geo::EnuPoint> ring_points(int count, double radius, double phase, const geo::EnuPoint& c) {
    std::vector<geo::EnuPoint> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) {
        const double a = phase + 2.0 * std::numbers::pi * k / count;
        out.push_back(geo::EnuPoint{c.x_m + radius * std::cos(a), c.y_m + radius * std::sin(a), c.ref});
    }
    return out;
}

int plan_size(const ProbePlan& plan) {
    return plan.strategy == ProbeStrategy::FixedPoints ? static_cast<int>(plan.points.size()) : plan.count;
}

int adaptive_first_stage(int count) { return std::max(3, count / 2); }

} // namespace

std::vector<geo::EnuPoint> probe_points(const ProbePlan& plan, const geo::EnuPoint& center) {
    validate(plan);
    switch (plan.strategy) {
    case ProbeStrategy::FixedPoints: return plan.points;
    case ProbeStrategy::Ring: return ring_points(plan.count, plan.ring_radius_m, plan.phase_rad, center);
    case ProbeStrategy::Adaptive:
        return ring_points(std::min(plan.count, adaptive_first_stage(plan.count)), plan.ring_radius_m,
                           plan.phase_rad, center);
    }
    return {};
}

Attacker::Attacker(Channel& channel, geo::GeoPoint frame, geo::EnuPoint anchor)
    : channel_(channel), frame_(frame), anchor_{anchor.x_m, anchor.y_m, frame} {
    geo::validate(frame_);
}

void Attacker::set_anchor(const geo::EnuPoint& p) { anchor_ = geo::EnuPoint{p.x_m, p.y_m, frame_}; }

geo::GeoPoint Attacker::to_geo(const geo::EnuPoint& p) const {
    return geo::from_enu(geo::EnuPoint{p.x_m, p.y_m, frame_});
}

std::vector<service::NearbyEntry> Attacker::discover(double radius_m) {
    channel_.update_location(to_geo(anchor_));
    return channel_.nearby(radius_m);
}

std::vector<mlat::DistanceSample> Attacker::probe(UserId target, const std::vector<geo::EnuPoint>& points,
                                                  std::vector<std::size_t>& probe_events) {
    std::vector<mlat::DistanceSample> samples;
    for (const auto& raw : points) {
        const geo::EnuPoint p{raw.x_m, raw.y_m, frame_};
        channel_.update_location(to_geo(p));
        const double t = channel_.now_s();
        probe_events.push_back(trace_.append({report::EventKind::Probe, t, target.value, p.x_m, p.y_m, 0.0, {}, {}}));
        const auto view = channel_.profile(target);
        if (!view.distance_m) throw PolicyError("the service does not disclose distances");
        trace_.append({report::EventKind::ProfilePoll, t, target.value, p.x_m, p.y_m, *view.distance_m, {}, {}});
        // The client cannot see the quantization step, so quantum_m stays 0.
        samples.push_back(mlat::DistanceSample{p, *view.distance_m, t, 0.0});
    }
    return samples;
}

mlat::PositionEstimate Attacker::localize(UserId target, const ProbePlan& plan, const mlat::SolverConfig& cfg) {
    validate(plan);
    if (plan_size(plan) < 3) {
        throw UnderdeterminedError("a fix needs at least 3 probes, plan has " + std::to_string(plan_size(plan)));
    }
    const geo::EnuPoint center = plan.center ? geo::EnuPoint{plan.center->x_m, plan.center->y_m, frame_} : anchor_;
    std::vector<std::size_t> events;
    last_samples_.clear();
    auto samples = probe(target, probe_points(plan, center), events);
    auto est = [&] {
        if (plan.strategy != ProbeStrategy::Adaptive) return mlat::multilaterate(samples, cfg);
        // Second stage: a tighter ring around the first-stage estimate,
        // rotated half a step so no probe repeats a bearing.
        const auto first = mlat::multilaterate(samples, cfg);
        const int rest = plan.count - static_cast<int>(samples.size());
        if (rest <= 0) return first;
        const auto stage2 = ring_points(rest, plan.ring_radius_m / 2.0, plan.phase_rad + std::numbers::pi / rest,
                                        first.p_hat);
        const auto more = probe(target, stage2, events);
        samples.insert(samples.end(), more.begin(), more.end());
        return mlat::multilaterate(samples, cfg);
    }();
    est.p_hat.ref = frame_;
    last_samples_ = std::move(samples);
    trace_.append({report::EventKind::LocalizeResult, channel_.now_s(), target.value, est.p_hat.x_m, est.p_hat.y_m,
                   est.residual, events, {}});
    return est;
}

TrackRecord Attacker::track(UserId target, double interval_s, double duration_s, const ProbePlan& plan,
                            const mlat::SolverConfig& cfg, const TrackOptions& opts) {
    if (!(interval_s > 0.0) || !std::isfinite(interval_s)) throw ValidationError("interval_s must be > 0");
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) throw ValidationError("duration_s must be >= 0");
    validate(plan);

    TrackRecord rec;
    rec.target = target;
    const double t0 = channel_.now_s();
    // A duration shorter than the interval still yields the fix at t0.
    const auto fixes = static_cast<long>(std::floor(duration_s / interval_s)) + 1;
    ProbePlan step_plan = plan;
    for (long k = 0; k < fixes; ++k) {
        const double t = t0 + static_cast<double>(k) * interval_s;
        if (k > 0) channel_.wait_until(t);
        mlat::SolverConfig c = cfg;
        c.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(k)});
        try {
            const auto est = localize(target, step_plan, c);
            rec.estimates.push_back(Fix{t, est});
            if (opts.follow && !plan.center) step_plan.center = est.p_hat;
        } catch (const PolicyError&) {
            throw;
        } catch (const UnderdeterminedError&) {
            throw;
        } catch (const ValidationError&) {
            throw;
        } catch (const Error& e) {
            rec.gaps.push_back(Gap{t, std::string(e.code()) + ": " + e.what()});
        }
    }
    return rec;
}

std::vector<Poi> extract_pois(const TrackRecord& track, double radius_m, double min_dwell_s) {
    if (track.estimates.empty()) throw ValidationError("track has no estimates");
    if (!(radius_m > 0.0)) throw ValidationError("radius_m must be > 0");
    if (!(min_dwell_s >= 0.0)) throw ValidationError("min_dwell_s must be >= 0");

    const auto& fx = track.estimates;
    const auto fits = [&](std::size_t i, std::size_t j, double cx, double cy) {
        for (std::size_t k = i; k <= j; ++k) {
            if (std::hypot(fx[k].estimate.p_hat.x_m - cx, fx[k].estimate.p_hat.y_m - cy) > radius_m) return false;
        }
        return true;
    };

    std::vector<Poi> out;
    std::size_t i = 0;
    while (i < fx.size()) {
        double sx = fx[i].estimate.p_hat.x_m, sy = fx[i].estimate.p_hat.y_m;
        std::size_t j = i;
        while (j + 1 < fx.size()) {
            const double nx = sx + fx[j + 1].estimate.p_hat.x_m, ny = sy + fx[j + 1].estimate.p_hat.y_m;
            const double n = static_cast<double>(j + 2 - i);
            if (!fits(i, j + 1, nx / n, ny / n)) break;
            sx = nx;
            sy = ny;
            ++j;
        }
        const double n = static_cast<double>(j + 1 - i);
        const double dwell = fx[j].t_s - fx[i].t_s;
        if (dwell >= min_dwell_s && j > i) {
            out.push_back(Poi{geo::EnuPoint{sx / n, sy / n, fx[i].estimate.p_hat.ref}, dwell, fx[i].t_s, fx[j].t_s,
                              static_cast<int>(j + 1 - i)});
        }
        i = j + 1;
    }
    return out;
}

void write_track_csv(std::ostream& out, const TrackRecord& track) {
    out << "t_s,est_x_m,est_y_m,residual_m\n";
    for (const auto& f : track.estimates) {
        out << text::fmt_double(f.t_s) << ',' << text::fmt_double(f.estimate.p_hat.x_m) << ','
            << text::fmt_double(f.estimate.p_hat.y_m) << ',' << text::fmt_double(f.estimate.residual) << '\n';
    }
}

} // namespace proxsim::attacker
