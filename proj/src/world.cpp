#include "proxsim/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "proxsim/error.hpp"
#include "proxsim/text.hpp"

namespace proxsim::world {
namespace {

// Stream labels for derive_seed.
enum : std::uint64_t {
    kStreamCatalog = 0x636174,
    kStreamUser = 0x757372,
    kStreamTrajectory = 0x74726a,
    kStreamSocial = 0x736f63,
    kStreamPhoto = 0x70686f,
    kStreamToken = 0x746f6b,
    kStreamFuzz = 0x66757a,
};

constexpr std::array<const char*, 16> kCategories = {
    "Music",  "Sports", "Movies",  "Television", "Food",     "Travel", "Fashion", "Games",
    "Books",  "Tech",   "Science", "Politics",   "Art",      "Fitness", "Animals", "Comedy",
};

constexpr std::array<const char*, 60> kFirstNames = {
    "Maria",  "David",   "Laura",  "Marc",    "Anna",    "Jordi",  "Marta",   "Javier",
    "Julia",  "Pau",     "Carla",  "Alex",    "Sara",    "Daniel", "Paula",   "Carlos",
    "Elena",  "Sergi",   "Lucia",  "Pablo",   "Claudia", "Albert", "Andrea",  "Joan",
    "Nuria",  "Miguel",  "Irene",  "Oriol",   "Silvia",  "Xavier", "Cristina", "Victor",
    "Raquel", "Adria",   "Ester",  "Manuel",  "Alba",    "Ramon",  "Judith",  "Hugo",
    "Monica", "Roger",   "Sonia",  "Ivan",    "Eva",     "Arnau",  "Lidia",   "Enric",
    "Rosa",   "Gerard",  "Olga",   "Ferran",  "Berta",   "Ruben",  "Noelia",  "Biel",
    "Aina",   "Jaume",   "Mireia", "John",
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// Dates

Date make_date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) throw ValidationError("invalid calendar date");
    return Date{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date parse_date(std::string_view s) {
    s = text::trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw ValidationError("date must be YYYY-MM-DD, got '" + std::string(s) + "'");
    }
    const auto y = text::parse_int(s.substr(0, 4));
    const auto m = text::parse_int(s.substr(5, 2));
    const auto d = text::parse_int(s.substr(8, 2));
    if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1 || *d > 31) {
        throw ValidationError("date must be YYYY-MM-DD, got '" + std::string(s) + "'");
    }
    return make_date(static_cast<int>(*y), static_cast<unsigned>(*m), static_cast<unsigned>(*d));
}

int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

// ---------------------------------------------------------------------------
// Policy

DisclosurePolicy tinder_policy() {
    return DisclosurePolicy{true, 0.0, true, BirthdateMode::Fuzzy15d, InterestsMode::Pages, false};
}
DisclosurePolicy happn_policy() {
    return DisclosurePolicy{true, 0.0, true, BirthdateMode::Hidden, InterestsMode::Pages, true};
}
DisclosurePolicy lovoo_policy() {
    return DisclosurePolicy{true, 0.0, true, BirthdateMode::Hidden, InterestsMode::Pages, false};
}
DisclosurePolicy grindr_policy() {
    return DisclosurePolicy{false, 0.0, false, BirthdateMode::Hidden, InterestsMode::Pages, false};
}
DisclosurePolicy badoo_policy() {
    return DisclosurePolicy{true, 0.0, true, BirthdateMode::Hidden, InterestsMode::Pages, false};
}

std::optional<DisclosurePolicy> policy_preset(std::string_view name) {
    if (name == "tinder") return tinder_policy();
    if (name == "happn") return happn_policy();
    if (name == "lovoo") return lovoo_policy();
    if (name == "grindr") return grindr_policy();
    if (name == "badoo") return badoo_policy();
    return std::nullopt;
}

const char* to_string(BirthdateMode m) {
    switch (m) {
    case BirthdateMode::Exact: return "exact";
    case BirthdateMode::Fuzzy15d: return "fuzzy_15d";
    case BirthdateMode::Hidden: return "hidden";
    }
    return "?";
}

const char* to_string(InterestsMode m) {
    switch (m) {
    case InterestsMode::Pages: return "pages";
    case InterestsMode::Categories: return "categories";
    case InterestsMode::Hidden: return "hidden";
    }
    return "?";
}

std::optional<BirthdateMode> parse_birthdate_mode(std::string_view s) {
    if (s == "exact") return BirthdateMode::Exact;
    if (s == "fuzzy_15d") return BirthdateMode::Fuzzy15d;
    if (s == "hidden") return BirthdateMode::Hidden;
    return std::nullopt;
}

std::optional<InterestsMode> parse_interests_mode(std::string_view s) {
    if (s == "pages") return InterestsMode::Pages;
    if (s == "categories") return InterestsMode::Categories;
    if (s == "hidden") return InterestsMode::Hidden;
    return std::nullopt;
}

double quantize_distance(double true_m, double quantum_m) {
    if (!(true_m >= 0.0)) throw ValidationError("distance must be >= 0");
    if (!(quantum_m >= 0.0)) throw ValidationError("quantum must be >= 0");
    if (quantum_m == 0.0) return true_m;
    double q = std::floor(true_m / quantum_m) * quantum_m;
    // The division can round across a bucket edge; restore q <= d < q + quantum.
    if (q > true_m) q -= quantum_m;
    if (q + quantum_m <= true_m) q += quantum_m;
    return q;
}

Date fuzz_birthdate(Date true_date, UserId user, std::uint64_t seed) {
    Rng rng(derive_seed(seed, {kStreamFuzz, user.value}));
    return true_date + std::chrono::days{rng.between(-7, 7)};
}

// ---------------------------------------------------------------------------
// Pages

std::span<const char* const> category_names() { return kCategories; }
std::span<const char* const> first_names() { return kFirstNames; }

PageCatalog::PageCatalog(int size, int categories, std::uint64_t seed) {
    if (size < 1) throw ValidationError("catalog size must be >= 1");
    if (categories < 1 || categories > static_cast<int>(kCategories.size())) {
        throw ValidationError("category count must be in [1, " + std::to_string(kCategories.size()) + "]");
    }
    Rng rng(derive_seed(seed, {kStreamCatalog}));
    pages_.reserve(static_cast<std::size_t>(size));
    for (int rank = 1; rank <= size; ++rank) {
        const auto cat = kCategories[rng.below(static_cast<std::uint64_t>(categories))];
        pages_.push_back(Page{PageId{static_cast<std::uint64_t>(rank)}, cat, rank});
        index_.emplace(pages_.back().id, pages_.size() - 1);
    }
}

const Page& PageCatalog::page(PageId id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw NotFoundError("unknown page " + std::to_string(id.value));
    return pages_[it->second];
}

ZipfSampler::ZipfSampler(int n, double s) {
    if (n < 1) throw ValidationError("Zipf support must be >= 1");
    if (!(s > 0.0)) throw ValidationError("Zipf exponent must be > 0");
    cdf_.resize(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
        acc += std::pow(static_cast<double>(k), -s);
        cdf_[static_cast<std::size_t>(k - 1)] = acc;
    }
    for (auto& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
}

int ZipfSampler::operator()(Rng& rng) const {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), size() - 1)) + 1;
}

double ZipfSampler::probability(int rank) const {
    const auto i = static_cast<std::size_t>(rank - 1);
    return i == 0 ? cdf_[0] : cdf_[i] - cdf_[i - 1];
}

// ---------------------------------------------------------------------------
// Trajectories

Trajectory::Trajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
    if (waypoints_.empty()) throw ValidationError("trajectory needs at least one waypoint");
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        geo::validate(waypoints_[i].position);
        if (i > 0 && !(waypoints_[i].t_s > waypoints_[i - 1].t_s)) {
            throw ValidationError("trajectory timestamps must be strictly increasing");
        }
    }
}

Trajectory Trajectory::stationary(geo::GeoPoint p, double t0_s, double t1_s) {
    if (t1_s > t0_s) return Trajectory({{t0_s, p}, {t1_s, p}});
    return Trajectory({{t0_s, p}});
}

geo::GeoPoint Trajectory::position_at(double t_s) const {
    if (waypoints_.empty()) throw OutOfSpanError("empty trajectory");
    if (!(t_s >= start_s() && t_s <= end_s())) {
        throw OutOfSpanError("t = " + text::fmt_double(t_s) + " s outside trajectory span [" +
                             text::fmt_double(start_s()) + ", " + text::fmt_double(end_s()) + "]");
    }
    auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t_s,
                               [](double t, const Waypoint& w) { return t < w.t_s; });
    const auto& a = *(it - 1);
    if (a.t_s == t_s || it == waypoints_.end()) return a.position;
    const auto& b = *it;
    if (a.position == b.position) return a.position;
    const double f = (t_s - a.t_s) / (b.t_s - a.t_s);
    const auto seg = geo::to_enu(b.position, a.position);
    return geo::from_enu(geo::EnuPoint{f * seg.x_m, f * seg.y_m, a.position});
}

const char* to_string(TrajectoryKind k) {
    switch (k) {
    case TrajectoryKind::Stationary: return "stationary";
    case TrajectoryKind::Commuter: return "commuter";
    case TrajectoryKind::RandomWalk: return "random_walk";
    }
    return "?";
}

std::optional<TrajectoryKind> parse_trajectory_kind(std::string_view s) {
    if (s == "stationary") return TrajectoryKind::Stationary;
    if (s == "commuter") return TrajectoryKind::Commuter;
    if (s == "random_walk") return TrajectoryKind::RandomWalk;
    return std::nullopt;
}

Trajectory make_trajectory(const TrajectoryTemplate& tpl, geo::GeoPoint home, double span_s,
                           std::uint64_t seed) {
    if (!(span_s > 0.0)) throw ValidationError("trajectory span must be > 0");
    Rng rng(seed);
    switch (tpl.kind) {
    case TrajectoryKind::Stationary:
        return Trajectory::stationary(home, 0.0, span_s);

    case TrajectoryKind::Commuter: {
        if (!(tpl.home_dwell_s > 0 && tpl.work_dwell_s > 0 && tpl.commute_s > 0)) {
            throw ValidationError("commuter durations must be > 0");
        }
        const double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const geo::GeoPoint work = geo::from_enu(geo::EnuPoint{
            tpl.commute_distance_m * std::sin(bearing), tpl.commute_distance_m * std::cos(bearing), home});
        // (duration of the leg ending at the next waypoint, place at its end)
        const std::array<std::pair<double, geo::GeoPoint>, 4> cycle = {{
            {tpl.home_dwell_s, home},
            {tpl.commute_s, work},
            {tpl.work_dwell_s, work},
            {tpl.commute_s, home},
        }};
        std::vector<Waypoint> w{{0.0, home}};
        double t = 0.0;
        for (std::size_t leg = 0; t < span_s; ++leg) {
            const auto& [dt, place] = cycle[leg % cycle.size()];
            if (t + dt >= span_s) {
                // Clip the final leg at the span end.
                const auto& prev = w.back().position;
                const double f = (span_s - t) / dt;
                const auto seg = geo::to_enu(place, prev);
                w.push_back({span_s, geo::from_enu(geo::EnuPoint{f * seg.x_m, f * seg.y_m, prev})});
                break;
            }
            t += dt;
            w.push_back({t, place});
        }
        return Trajectory(std::move(w));
    }

    case TrajectoryKind::RandomWalk: {
        if (!(tpl.walk_step_s > 0 && tpl.walk_step_m >= 0)) {
            throw ValidationError("random walk step must be > 0");
        }
        std::vector<Waypoint> w{{0.0, home}};
        double t = 0.0;
        while (t < span_s) {
            const double dt = std::min(tpl.walk_step_s, span_s - t);
            const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double len = tpl.walk_step_m * dt / tpl.walk_step_s;
            t += dt;
            w.push_back({t, geo::from_enu(geo::EnuPoint{len * std::sin(dir), len * std::cos(dir),
                                                        w.back().position})});
        }
        return Trajectory(std::move(w));
    }
    }
    throw ValidationError("unknown trajectory kind");
}

// ---------------------------------------------------------------------------
// Population

void validate(const WorldConfig& cfg) {
    const auto& b = cfg.bbox;
    geo::validate({b.lat_min, b.lon_min});
    geo::validate({b.lat_max, b.lon_max});
    if (!(b.lat_min < b.lat_max && b.lon_min < b.lon_max)) {
        throw ValidationError("bounding box must have min < max");
    }
    if (geo::haversine_m({b.lat_min, b.lon_min}, {b.lat_max, b.lon_max}) >= geo::kMaxLocalRangeM) {
        throw ValidationError("bounding box diagonal must stay below 100 km");
    }
    if (cfg.n_users < 1) throw ValidationError("n_users must be >= 1");
    if (cfg.catalog_size < 1) throw ValidationError("catalog_size must be >= 1");
    if (!(cfg.zipf_s > 0.0)) throw ValidationError("zipf_s must be > 0");
    if (!(cfg.like_mean >= 0.0)) throw ValidationError("like_mean must be >= 0");
    if (cfg.like_max < 0) throw ValidationError("like_max must be >= 0");
    if (cfg.birth_year_min > cfg.birth_year_max) throw ValidationError("birth year range is empty");
    if (!(cfg.span_s > 0.0)) throw ValidationError("span_s must be > 0");
}

Population generate_population(const WorldConfig& cfg) {
    validate(cfg);
    Population pop;
    pop.seed = cfg.seed;
    pop.span_s = cfg.span_s;
    pop.ref = cfg.bbox.center();
    pop.catalog = PageCatalog(cfg.catalog_size, cfg.categories, cfg.seed);

    const ZipfSampler pages(cfg.catalog_size, cfg.zipf_s);
    const ZipfSampler names(static_cast<int>(kFirstNames.size()), 1.0);
    const Date first_day = make_date(cfg.birth_year_min, 1, 1);
    const Date last_day = make_date(cfg.birth_year_max, 12, 31);
    const auto day_span = (last_day - first_day).count();
    const std::uint64_t like_cap =
        static_cast<std::uint64_t>(std::min(cfg.like_max, cfg.catalog_size));
    const double p_stop = 1.0 / (1.0 + cfg.like_mean);

    std::set<SocialId> socials;
    pop.users.reserve(static_cast<std::size_t>(cfg.n_users));
    for (int i = 0; i < cfg.n_users; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        Rng rng(derive_seed(cfg.seed, {kStreamUser, idx}));
        SimUser u;
        u.user_id = UserId{idx + 1};
        u.first_name = kFirstNames[static_cast<std::size_t>(names(rng) - 1)];
        u.true_birthdate = first_day + std::chrono::days{rng.between(0, day_span)};
        const geo::GeoPoint home{rng.uniform(cfg.bbox.lat_min, cfg.bbox.lat_max),
                                 rng.uniform(cfg.bbox.lon_min, cfg.bbox.lon_max)};
        const auto want = std::min<std::uint64_t>(rng.geometric(p_stop), like_cap);
        while (u.likes.size() < want) u.likes.insert(PageId{static_cast<std::uint64_t>(pages(rng))});
        u.trajectory = make_trajectory(cfg.trajectory, home, cfg.span_s,
                                       derive_seed(cfg.seed, {kStreamTrajectory, idx}));

        std::uint64_t salt = 0;
        do {
            const auto raw = derive_seed(cfg.seed, {kStreamSocial, idx, salt++});
            u.social_id = SocialId{100000000000000ULL + raw % 900000000000000ULL};
        } while (!socials.insert(u.social_id).second);
        u.photo_id = PhotoId{derive_seed(cfg.seed, {kStreamPhoto, idx})};
        u.token = "tok-" + hex64(derive_seed(cfg.seed, {kStreamToken, idx}));
        pop.users.push_back(std::move(u));
    }
    return pop;
}

Population generate_population(int n, int catalog_size, double zipf_s, std::uint64_t seed) {
    WorldConfig cfg;
    cfg.n_users = n;
    cfg.catalog_size = catalog_size;
    cfg.zipf_s = zipf_s;
    cfg.seed = seed;
    return generate_population(cfg);
}

// ---------------------------------------------------------------------------
// World

World::World(Population pop) : pop_(std::move(pop)) {
    for (std::size_t i = 0; i < pop_.users.size(); ++i) {
        const auto& u = pop_.users[i];
        if (!by_id_.emplace(u.user_id, i).second) throw ValidationError("duplicate user id");
        if (!by_token_.emplace(u.token, i).second) throw ValidationError("duplicate token");
        for (auto p : u.likes) {
            if (!pop_.catalog.contains(p)) throw ValidationError("user likes a page outside the catalog");
        }
    }
}

void World::advance_to(double t_s) {
    if (t_s < now_s_) throw ValidationError("simulation time cannot move backwards");
    if (t_s > pop_.span_s) throw ValidationError("simulation time beyond scenario span");
    now_s_ = t_s;
}

const SimUser& World::user(UserId id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) throw NotFoundError("unknown user " + std::to_string(id.value));
    return pop_.users[it->second];
}

const SimUser* World::find_by_token(std::string_view token) const {
    const auto it = by_token_.find(std::string(token));
    return it == by_token_.end() ? nullptr : &pop_.users[it->second];
}

const SimUser& World::add_user(std::string first_name, Date birthdate, std::set<PageId> likes,
                               Trajectory trajectory) {
    for (auto p : likes) {
        if (!pop_.catalog.contains(p)) throw NotFoundError("unknown page " + std::to_string(p.value));
    }
    const auto idx = static_cast<std::uint64_t>(pop_.users.size());
    SimUser u;
    u.user_id = UserId{idx + 1};
    u.first_name = std::move(first_name);
    u.true_birthdate = birthdate;
    u.likes = std::move(likes);
    u.trajectory = std::move(trajectory);
    std::uint64_t salt = 0;
    auto social_taken = [&](SocialId s) {
        return std::any_of(pop_.users.begin(), pop_.users.end(),
                           [s](const SimUser& o) { return o.social_id == s; });
    };
    do {
        const auto raw = derive_seed(pop_.seed, {kStreamSocial, idx, salt++});
        u.social_id = SocialId{100000000000000ULL + raw % 900000000000000ULL};
    } while (social_taken(u.social_id));
    u.photo_id = PhotoId{derive_seed(pop_.seed, {kStreamPhoto, idx})};
    u.token = "tok-" + hex64(derive_seed(pop_.seed, {kStreamToken, idx}));
    pop_.users.push_back(std::move(u));
    by_id_.emplace(pop_.users.back().user_id, pop_.users.size() - 1);
    by_token_.emplace(pop_.users.back().token, pop_.users.size() - 1);
    return pop_.users.back();
}

void World::like_page(UserId user_id, PageId page) {
    const auto it = by_id_.find(user_id);
    if (it == by_id_.end()) throw NotFoundError("unknown user " + std::to_string(user_id.value));
    if (!pop_.catalog.contains(page)) throw NotFoundError("unknown page " + std::to_string(page.value));
    pop_.users[it->second].likes.insert(page);
}

geo::GeoPoint World::position_at(UserId id, double t_s) const {
    return user(id).trajectory.position_at(t_s);
}

Date World::fuzzy_birthdate(UserId id) const {
    return fuzz_birthdate(user(id).true_birthdate, id, pop_.seed);
}

} // namespace proxsim::world
