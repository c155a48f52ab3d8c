#pragma once

// The adversary: moves its own account around, reads the target's disclosed
// distance after each move, and turns the readings into position fixes,
// tracks and points of interest.
//
// The attacker only sees the world through Channel, which exposes exactly
// what a logged-in client can do. It never touches ground truth.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proxsim/geo.hpp"
#include "proxsim/mlat.hpp"
#include "proxsim/service.hpp"
#include "proxsim/trace.hpp"

namespace proxsim::attacker {

/// Client-side view of the service for one logged-in account.
class Channel {
public:
    virtual ~Channel() = default;
    virtual void update_location(const geo::GeoPoint& p) = 0;
    virtual std::vector<service::NearbyEntry> nearby(double radius_m) = 0;
    virtual service::NearbyEntry profile(UserId target) = 0;
    virtual void like_page(PageId page) = 0;
    virtual double now_s() = 0;
    /// Let simulated time pass until t_s.
    virtual void wait_until(double t_s) = 0;
};

/// Channel bound to an in-process Service session.
class ServiceChannel : public Channel {
public:
    /// Logs in with `token`; throws AuthError when it is unknown.
    ServiceChannel(service::Service& svc, std::string_view token);

    void update_location(const geo::GeoPoint& p) override;
    std::vector<service::NearbyEntry> nearby(double radius_m) override;
    service::NearbyEntry profile(UserId target) override;
    void like_page(PageId page) override;
    double now_s() override;
    void wait_until(double t_s) override;

    service::SessionId session() const { return session_; }

private:
    service::Service& svc_;
    service::SessionId session_;
};

enum class ProbeStrategy { Ring, Adaptive, FixedPoints };

const char* to_string(ProbeStrategy s);
std::optional<ProbeStrategy> parse_probe_strategy(std::string_view s);

struct ProbePlan {
    ProbeStrategy strategy = ProbeStrategy::Ring;
    int count = 16;
    double ring_radius_m = 1000.0;
    /// Ring centre in the attacker frame. Empty: the attacker's anchor.
    std::optional<geo::EnuPoint> center;
    /// FixedPoints only; count is ignored and points.size() used instead.
    std::vector<geo::EnuPoint> points;
    double phase_rad = 0.0; // angle of the first ring point, from east

    static ProbePlan ring(int count, double radius_m);
    static ProbePlan fixed(std::vector<geo::EnuPoint> points);
};

/// Throws ValidationError for non-finite or non-positive parameters.
/// Fewer than three probes is not a validation error; localize reports it
/// as UnderdeterminedError.
void validate(const ProbePlan& plan);

/// Probe positions of a ring (or fixed) plan around `center`. Ring points
/// are equally spaced in angle. Adaptive plans expand to their first stage.
std::vector<geo::EnuPoint> probe_points(const ProbePlan& plan, const geo::EnuPoint& center);

struct Fix {
    double t_s = 0.0;
    mlat::PositionEstimate estimate;
};

struct Gap {
    double t_s = 0.0;
    std::string error;
};

struct Poi {
    geo::EnuPoint center;
    double dwell_s = 0.0;
    double t_start_s = 0.0;
    double t_end_s = 0.0;
    int fixes = 0;
};

struct TrackRecord {
    UserId target;
    std::vector<Fix> estimates; // strictly increasing t_s
    std::vector<Gap> gaps;
    std::vector<Poi> pois;
};

struct TrackOptions {
    /// Re-centre the probe ring on the previous fix when the plan has no
    /// explicit centre.
    bool follow = true;
};

class Attacker {
public:
    /// `frame` is the origin of the attacker's local frame; `anchor` is
    /// where the attacker account starts (frame coordinates).
    Attacker(Channel& channel, geo::GeoPoint frame, geo::EnuPoint anchor);

    const geo::GeoPoint& frame() const { return frame_; }
    const geo::EnuPoint& anchor() const { return anchor_; }
    void set_anchor(const geo::EnuPoint& p);

    /// Move to the anchor and list who is around.
    std::vector<service::NearbyEntry> discover(double radius_m);

    /// Probe according to `plan`, then multilaterate.
    /// Throws UnderdeterminedError for fewer than three probes (before any
    /// move), PolicyError when the service does not disclose distances,
    /// and propagates service and solver errors.
    mlat::PositionEstimate localize(UserId target, const ProbePlan& plan, const mlat::SolverConfig& cfg);

    /// A fix every interval_s of simulated time over duration_s, starting
    /// now. Failed fixes from service rate limits, missing profiles or
    /// degenerate geometry become gaps; policy and plan errors propagate.
    TrackRecord track(UserId target, double interval_s, double duration_s, const ProbePlan& plan,
                      const mlat::SolverConfig& cfg, const TrackOptions& opts = {});

    /// Samples gathered by the most recent localize call.
    const std::vector<mlat::DistanceSample>& last_samples() const { return last_samples_; }
    report::AttackTrace& trace() { return trace_; }
    const report::AttackTrace& trace() const { return trace_; }

private:
    std::vector<mlat::DistanceSample> probe(UserId target, const std::vector<geo::EnuPoint>& points,
                                            std::vector<std::size_t>& probe_events);
    geo::GeoPoint to_geo(const geo::EnuPoint& p) const;

    Channel& channel_;
    geo::GeoPoint frame_;
    geo::EnuPoint anchor_;
    report::AttackTrace trace_;
    std::vector<mlat::DistanceSample> last_samples_;
};

/// Stay-point detection. Fixes are cut into maximal consecutive windows
/// whose members all lie within radius_m of the window centroid; every
/// window spanning at least min_dwell_s becomes one POI at its centroid.
/// Throws ValidationError for an empty track or non-positive radius.
std::vector<Poi> extract_pois(const TrackRecord& track, double radius_m = 200.0, double min_dwell_s = 1800.0);

/// CSV with header `t_s,est_x_m,est_y_m,residual_m`.
void write_track_csv(std::ostream& out, const TrackRecord& track);

} // namespace proxsim::attacker
