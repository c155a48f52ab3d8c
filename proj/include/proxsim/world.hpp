#pragma once

// Synthetic ground truth for the proximity service: users, their pages,
// mobility, birthdates, and the disclosure policy the service enforces.

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "proxsim/geo.hpp"
#include "proxsim/ids.hpp"
#include "proxsim/rng.hpp"

namespace proxsim::world {

using Date = std::chrono::sys_days;

Date make_date(int year, unsigned month, unsigned day);
/// ISO 8601 `YYYY-MM-DD`.
std::string format_date(Date d);
/// Throws ValidationError on anything but a valid `YYYY-MM-DD`.
Date parse_date(std::string_view s);
int year_of(Date d);

// ---------------------------------------------------------------------------
// Disclosure policy

enum class BirthdateMode { Exact, Fuzzy15d, Hidden };
enum class InterestsMode { Pages, Categories, Hidden };

struct DisclosurePolicy {
    bool share_distance = true;
    double distance_quantum_m = 0.0;
    bool share_first_name = true;
    BirthdateMode birthdate_mode = BirthdateMode::Fuzzy15d;
    InterestsMode interests_mode = InterestsMode::Pages;
    bool share_social_id = false;

    friend bool operator==(const DisclosurePolicy&, const DisclosurePolicy&) = default;
};

/// Rows of the application feature matrix. Distance precision is not part
/// of that matrix; every preset leaves distance_quantum_m at 0.
DisclosurePolicy tinder_policy();
DisclosurePolicy happn_policy();
DisclosurePolicy lovoo_policy();
DisclosurePolicy grindr_policy();
DisclosurePolicy badoo_policy();
/// Looks a preset up by lower-case application name.
std::optional<DisclosurePolicy> policy_preset(std::string_view name);

const char* to_string(BirthdateMode m);
const char* to_string(InterestsMode m);
std::optional<BirthdateMode> parse_birthdate_mode(std::string_view s);
std::optional<InterestsMode> parse_interests_mode(std::string_view s);

/// Floor quantization: 0 leaves the distance untouched, otherwise the
/// largest multiple of `quantum_m` not exceeding `true_m`.
double quantize_distance(double true_m, double quantum_m);

/// Fuzzy birthdate: `true_date` shifted by an offset uniform over
/// {-7, ..., +7} days, fixed per (user, seed).
Date fuzz_birthdate(Date true_date, UserId user, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Pages

struct Page {
    PageId id;
    std::string category;
    int popularity_rank = 0; // 1 = most liked
};

class PageCatalog {
public:
    PageCatalog() = default;
    /// Pages ranked 1..size; each gets one of `categories` category names.
    PageCatalog(int size, int categories, std::uint64_t seed);

    const std::vector<Page>& pages() const { return pages_; }
    std::size_t size() const { return pages_.size(); }
    bool contains(PageId id) const { return index_.count(id) != 0; }
    /// Throws NotFoundError for unknown pages.
    const Page& page(PageId id) const;
    const Page& by_rank(int rank) const { return pages_.at(static_cast<std::size_t>(rank - 1)); }
    const std::string& category_of(PageId id) const { return page(id).category; }

private:
    std::vector<Page> pages_;
    std::unordered_map<PageId, std::size_t> index_;
};

/// Category vocabulary used for catalog pages.
std::span<const char* const> category_names();

/// Zipf(s) over ranks 1..n, sampled by inverse CDF.
class ZipfSampler {
public:
    ZipfSampler(int n, double s);
    int operator()(Rng& rng) const;
    double probability(int rank) const;
    int size() const { return static_cast<int>(cdf_.size()); }

private:
    std::vector<double> cdf_;
};

// ---------------------------------------------------------------------------
// Mobility

struct Waypoint {
    double t_s = 0.0;
    geo::GeoPoint position;
};

class Trajectory {
public:
    Trajectory() = default;
    /// Throws ValidationError if empty or timestamps are not strictly increasing.
    explicit Trajectory(std::vector<Waypoint> waypoints);

    static Trajectory stationary(geo::GeoPoint p, double t0_s, double t1_s);

    const std::vector<Waypoint>& waypoints() const { return waypoints_; }
    double start_s() const { return waypoints_.front().t_s; }
    double end_s() const { return waypoints_.back().t_s; }

    /// Piecewise-linear in the local plane between bracketing waypoints.
    /// Throws OutOfSpanError outside [start_s, end_s].
    geo::GeoPoint position_at(double t_s) const;

private:
    std::vector<Waypoint> waypoints_;
};

enum class TrajectoryKind { Stationary, Commuter, RandomWalk };

const char* to_string(TrajectoryKind k);
std::optional<TrajectoryKind> parse_trajectory_kind(std::string_view s);

struct TrajectoryTemplate {
    TrajectoryKind kind = TrajectoryKind::Stationary;
    // commuter: home dwell, commute, work dwell, commute back, repeat
    double home_dwell_s = 8 * 3600.0;
    double work_dwell_s = 8 * 3600.0;
    double commute_s = 3600.0;
    double commute_distance_m = 5000.0;
    // random walk: one leg of walk_step_m in a random direction per walk_step_s
    double walk_step_m = 300.0;
    double walk_step_s = 600.0;
};

struct BoundingBox {
    double lat_min = 41.35, lon_min = 2.08, lat_max = 41.45, lon_max = 2.23; // Barcelona
    geo::GeoPoint center() const { return {(lat_min + lat_max) / 2, (lon_min + lon_max) / 2}; }
    bool contains(const geo::GeoPoint& p) const {
        return p.lat_deg >= lat_min && p.lat_deg <= lat_max && p.lon_deg >= lon_min && p.lon_deg <= lon_max;
    }
};

/// Build a trajectory from a template, anchored at `home` and spanning
/// [0, span_s].
Trajectory make_trajectory(const TrajectoryTemplate& tpl, geo::GeoPoint home, double span_s,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Users and population

struct SimUser {
    UserId user_id;
    SocialId social_id;
    PhotoId photo_id;
    std::string token;
    std::string first_name;
    Date true_birthdate{};
    Trajectory trajectory;
    std::set<PageId> likes;
};

struct WorldConfig {
    BoundingBox bbox;
    int n_users = 250;
    int catalog_size = 1000;
    int categories = 16;
    double zipf_s = 1.0;
    double like_mean = 0.6;
    int like_max = 200;
    int birth_year_min = 1965;
    int birth_year_max = 2004;
    double span_s = 86400.0;
    TrajectoryTemplate trajectory;
    std::uint64_t seed = 0;
};

struct Population {
    PageCatalog catalog;
    std::vector<SimUser> users;
    geo::GeoPoint ref; // local frame origin for the scenario
    double span_s = 0.0;
    std::uint64_t seed = 0;
};

/// Throws ValidationError for out-of-range parameters.
void validate(const WorldConfig& cfg);

/// Users placed uniformly in the bounding box; like counts follow a
/// geometric law with mean like_mean, truncated at like_max and the
/// catalog size; likes are drawn without replacement from Zipf(zipf_s)
/// over popularity ranks. Fully determined by cfg (including its seed).
Population generate_population(const WorldConfig& cfg);
Population generate_population(int n, int catalog_size, double zipf_s, std::uint64_t seed);

/// Pool of first names users are drawn from.
std::span<const char* const> first_names();

// ---------------------------------------------------------------------------
// World: the single owner of mutable ground truth

class World {
public:
    explicit World(Population pop);

    const Population& population() const { return pop_; }
    const PageCatalog& catalog() const { return pop_.catalog; }
    std::span<const SimUser> users() const { return pop_.users; }
    const geo::GeoPoint& ref() const { return pop_.ref; }

    double now_s() const { return now_s_; }
    /// Throws ValidationError when moving backwards or past the span.
    void advance_to(double t_s);

    /// Throws NotFoundError for unknown users.
    const SimUser& user(UserId id) const;
    const SimUser* find_by_token(std::string_view token) const;

    /// Register a new user (e.g. an attacker account). user_id, social_id,
    /// photo_id and token are assigned by the world. Invalidates references
    /// previously returned by user()/users().
    const SimUser& add_user(std::string first_name, Date birthdate, std::set<PageId> likes,
                            Trajectory trajectory);
    /// Throws NotFoundError for unknown users or pages.
    void like_page(UserId user, PageId page);

    geo::GeoPoint position_at(UserId id, double t_s) const;
    /// Fuzzy birthdate as disclosed under BirthdateMode::Fuzzy15d.
    Date fuzzy_birthdate(UserId id) const;

private:
    Population pop_;
    std::unordered_map<UserId, std::size_t> by_id_;
    std::unordered_map<std::string, std::size_t> by_token_;
    double now_s_ = 0.0;
};

} // namespace proxsim::world
