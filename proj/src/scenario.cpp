#include "proxsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "proxsim/error.hpp"
#include "proxsim/report.hpp"
#include "proxsim/rng.hpp"
#include "proxsim/socialgraph.hpp"
#include "proxsim/text.hpp"

namespace proxsim::scenario {

namespace fs = std::filesystem;

namespace {

// Policy keys default to the preset's value.
constexpr const char* kFromPreset = "(preset)";

enum : std::uint64_t {
    kStreamTrials = 0x747269,
    kStreamSolver = 0x736f6c,
    kStreamPhase = 0x706861,
};

} // namespace

const std::vector<KeyInfo>& scenario_keys() {
    static const std::vector<KeyInfo> keys{
        {"seed", "", "master seed; required"},
        {"attack", "localize", "localize | track | identify"},
        {"out_dir", "out", "output directory"},
        {"world.n_users", "250", "population size"},
        {"world.catalog_size", "1000", "pages on the social platform"},
        {"world.categories", "16", "page categories, 1..16"},
        {"world.zipf_s", "1", "Zipf exponent of page popularity"},
        {"world.like_mean", "0.6", "mean likes per user (geometric)"},
        {"world.like_max", "200", "cap on likes per user"},
        {"world.birth_year_min", "1965", "earliest birth year"},
        {"world.birth_year_max", "2004", "latest birth year"},
        {"world.span_s", "86400", "simulated time span"},
        {"world.bbox", "41.35,2.08,41.45,2.23", "lat_min,lon_min,lat_max,lon_max"},
        {"world.trajectory", "stationary", "stationary | commuter | random_walk"},
        {"world.home_dwell_s", "28800", "commuter: time at home"},
        {"world.work_dwell_s", "28800", "commuter: time at work"},
        {"world.commute_s", "3600", "commuter: travel time"},
        {"world.commute_distance_m", "5000", "commuter: home-work distance"},
        {"world.walk_step_m", "300", "random walk: leg length"},
        {"world.walk_step_s", "600", "random walk: leg duration"},
        {"policy.preset", "tinder", "tinder | happn | lovoo | grindr | badoo"},
        {"policy.share_distance", kFromPreset, "true | false"},
        {"policy.distance_quantum_m", kFromPreset, "distance rounding step, 0 = exact"},
        {"policy.share_first_name", kFromPreset, "true | false"},
        {"policy.birthdate_mode", kFromPreset, "exact | fuzzy_15d | hidden"},
        {"policy.interests_mode", kFromPreset, "pages | categories | hidden"},
        {"policy.share_social_id", kFromPreset, "true | false"},
        {"service.teleport_limit_m", "inf", "largest accepted location jump"},
        {"service.teleport_cooldown_s", "0", "time after which any jump is accepted, 0 = never"},
        {"solver.norm", "l1", "l1 | l2"},
        {"solver.max_iterations", "600", "poll budget per solve"},
        {"solver.step_init_m", "500", "initial pattern-search step"},
        {"solver.tol_m", "0.01", "stop when the step falls below this"},
        {"solver.restarts", "4", "extra lattice-seeded descents"},
        {"attack.trials", "100", "localize: number of targets"},
        {"attack.probe_strategy", "ring", "ring | adaptive"},
        {"attack.probe_count", "16", "probes per fix"},
        {"attack.ring_radius_m", "1000", "probe ring radius"},
        {"attack.prior_m", "500", "attacker starts within this distance of the target"},
        {"attack.interval_s", "3600", "track: time between fixes"},
        {"attack.duration_s", "61200", "track: tracking span"},
        {"attack.poi_radius_m", "200", "track: stay-point radius"},
        {"attack.poi_min_dwell_s", "1800", "track: minimum stay"},
        {"attack.runs", "100", "identify: number of victims"},
        {"attack.batch_size", "10", "identify: pages liked per round"},
        {"attack.max_rounds", "10", "identify: refinement rounds"},
        {"attack.attacker_likes_top", "10", "identify: attacker starts liking the top-k pages"},
        {"report.runtime_grid", "false", "also time the solver over a grid (wall clock)"},
        {"report.runtime_samples", "10,100,1000", "runtime grid: sample counts"},
        {"report.runtime_iterations", "10,100,1000", "runtime grid: iteration budgets"},
    };
    return keys;
}

namespace {

const KeyInfo* key_info(const std::string& key) {
    for (const auto& k : scenario_keys()) {
        if (k.key == key) return &k;
    }
    return nullptr;
}

} // namespace

RawConfig RawConfig::parse(std::istream& in, const std::string& name) {
    RawConfig cfg;
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const auto body = text::trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto where = name + ":" + std::to_string(lineno);
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key(text::trim(body.substr(0, eq)));
        const std::string value(text::trim(body.substr(eq + 1)));
        if (key.empty()) throw ConfigError(where + ": missing key");
        if (!key_info(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        if (seen.count(key)) {
            throw ConfigError(where + ": duplicate key '" + key + "' (first set on line " +
                              std::to_string(seen[key]) + ")");
        }
        seen[key] = lineno;
        cfg.entries_[key] = Entry{value, where};
    }
    return cfg;
}

RawConfig RawConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scenario file " + path.string());
    return parse(in, path.string());
}

void RawConfig::set(const std::string& assignment, const std::string& origin) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected key=value, got '" + assignment + "'");
    set(std::string(text::trim(std::string_view(assignment).substr(0, eq))),
        std::string(text::trim(std::string_view(assignment).substr(eq + 1))), origin);
}

void RawConfig::set(const std::string& key, const std::string& value, const std::string& origin) {
    if (!key_info(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
    entries_[key] = Entry{value, origin};
}

std::optional<RawConfig::Entry> RawConfig::find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

const char* to_string(AttackKind a) {
    switch (a) {
    case AttackKind::Localize: return "localize";
    case AttackKind::Track: return "track";
    case AttackKind::Identify: return "identify";
    }
    return "?";
}

namespace {

// Typed access with diagnostics naming the key and where its value came from.
class Reader {
public:
    explicit Reader(const RawConfig& raw) : raw_(raw) {}

    std::optional<std::string> explicit_value(const std::string& key) const {
        const auto e = raw_.find(key);
        return e ? std::optional<std::string>(e->value) : std::nullopt;
    }

    std::string str(const std::string& key) {
        const auto e = raw_.find(key);
        std::string v;
        if (e) {
            v = e->value;
        } else {
            const auto* info = key_info(key);
            if (info->default_value.empty()) throw ConfigError("field '" + key + "' is required");
            v = info->default_value;
        }
        return v;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const auto e = raw_.find(key);
        const std::string where = e ? e->origin + ": " : std::string();
        throw ConfigError(where + "field '" + key + "': " + what);
    }

    double num(const std::string& key, double lo = -INFINITY, double hi = INFINITY, bool finite = true) {
        const auto s = str(key);
        const auto v = text::parse_double(s);
        if (!v || std::isnan(*v)) fail(key, "expected a number, got '" + s + "'");
        if (finite && !std::isfinite(*v)) fail(key, "must be finite");
        if (*v < lo || *v > hi) {
            fail(key, "must be in [" + text::fmt_double(lo) + ", " + text::fmt_double(hi) + "], got " + s);
        }
        resolved[key] = text::fmt_double(*v);
        return *v;
    }

    long long integer(const std::string& key, long long lo, long long hi) {
        const auto s = str(key);
        const auto v = text::parse_int(s);
        if (!v) fail(key, "expected an integer, got '" + s + "'");
        if (*v < lo || *v > hi) {
            fail(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + s);
        }
        resolved[key] = std::to_string(*v);
        return *v;
    }

    std::uint64_t seed(const std::string& key) {
        const auto s = str(key);
        std::uint64_t v = 0;
        const auto t = text::trim(s);
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
            fail(key, "expected a non-negative integer, got '" + s + "'");
        }
        resolved[key] = std::to_string(v);
        return v;
    }

    bool boolean(const std::string& key) {
        const auto s = str(key);
        bool v = false;
        if (s == "true" || s == "1" || s == "yes") v = true;
        else if (s == "false" || s == "0" || s == "no") v = false;
        else fail(key, "expected true or false, got '" + s + "'");
        resolved[key] = v ? "true" : "false";
        return v;
    }

    template <class T, class Parse>
    T choice(const std::string& key, Parse parse, const char* allowed) {
        const auto s = str(key);
        const auto v = parse(s);
        if (!v) fail(key, std::string("expected one of ") + allowed + ", got '" + s + "'");
        resolved[key] = s;
        return *v;
    }

    std::vector<int> int_list(const std::string& key, int lo) {
        const auto s = str(key);
        std::vector<int> out;
        for (auto part : text::split(s, ',')) {
            const auto v = text::parse_int(part);
            if (!v || *v < lo || *v > 1000000) fail(key, "expected a list of integers >= " + std::to_string(lo));
            out.push_back(static_cast<int>(*v));
        }
        resolved[key] = s;
        return out;
    }

    std::map<std::string, std::string> resolved;

private:
    const RawConfig& raw_;
};

std::optional<bool> parse_bool(std::string_view s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    return std::nullopt;
}

} // namespace

Scenario resolve(const RawConfig& raw) {
    Reader r(raw);
    Scenario sc;
    sc.seed = r.seed("seed");
    sc.attack = r.choice<AttackKind>(
        "attack",
        [](std::string_view s) -> std::optional<AttackKind> {
            if (s == "localize") return AttackKind::Localize;
            if (s == "track") return AttackKind::Track;
            if (s == "identify") return AttackKind::Identify;
            return std::nullopt;
        },
        "localize, track, identify");
    sc.out_dir = r.str("out_dir");
    if (sc.out_dir.empty()) r.fail("out_dir", "must not be empty");
    r.resolved["out_dir"] = sc.out_dir.string();

    auto& w = sc.world;
    w.seed = sc.seed;
    w.n_users = static_cast<int>(r.integer("world.n_users", 1, 10000000));
    w.catalog_size = static_cast<int>(r.integer("world.catalog_size", 1, 10000000));
    w.categories = static_cast<int>(r.integer("world.categories", 1, 16));
    w.zipf_s = r.num("world.zipf_s", 1e-9, 100.0);
    w.like_mean = r.num("world.like_mean", 0.0, 1e6);
    w.like_max = static_cast<int>(r.integer("world.like_max", 0, 10000000));
    w.birth_year_min = static_cast<int>(r.integer("world.birth_year_min", 1900, 2100));
    w.birth_year_max = static_cast<int>(r.integer("world.birth_year_max", 1900, 2100));
    if (w.birth_year_max < w.birth_year_min) r.fail("world.birth_year_max", "must be >= world.birth_year_min");
    w.span_s = r.num("world.span_s", 1e-9, 1e9);
    {
        const auto s = r.str("world.bbox");
        const auto parts = text::split(s, ',');
        std::vector<double> v;
        for (auto p : parts) {
            const auto d = text::parse_double(p);
            if (!d || !std::isfinite(*d)) r.fail("world.bbox", "expected lat_min,lon_min,lat_max,lon_max");
            v.push_back(*d);
        }
        if (v.size() != 4) r.fail("world.bbox", "expected four numbers");
        w.bbox = world::BoundingBox{v[0], v[1], v[2], v[3]};
        r.resolved["world.bbox"] = s;
    }
    w.trajectory.kind = r.choice<world::TrajectoryKind>(
        "world.trajectory", [](std::string_view s) { return world::parse_trajectory_kind(s); },
        "stationary, commuter, random_walk");
    w.trajectory.home_dwell_s = r.num("world.home_dwell_s", 1e-9, 1e9);
    w.trajectory.work_dwell_s = r.num("world.work_dwell_s", 1e-9, 1e9);
    w.trajectory.commute_s = r.num("world.commute_s", 1e-9, 1e9);
    w.trajectory.commute_distance_m = r.num("world.commute_distance_m", 0.0, 50000.0);
    w.trajectory.walk_step_m = r.num("world.walk_step_m", 1e-9, 50000.0);
    w.trajectory.walk_step_s = r.num("world.walk_step_s", 1e-9, 1e9);
    try {
        world::validate(w);
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("world: ") + e.what());
    }

    const auto preset_name = r.str("policy.preset");
    const auto preset = world::policy_preset(preset_name);
    if (!preset) r.fail("policy.preset", "unknown preset '" + preset_name + "'");
    r.resolved["policy.preset"] = preset_name;
    auto policy = *preset;
    const auto policy_bool = [&](const std::string& key, bool& field) {
        if (const auto v = r.explicit_value(key)) {
            const auto b = parse_bool(*v);
            if (!b) r.fail(key, "expected true or false, got '" + *v + "'");
            field = *b;
        }
        r.resolved[key] = field ? "true" : "false";
    };
    policy_bool("policy.share_distance", policy.share_distance);
    policy_bool("policy.share_first_name", policy.share_first_name);
    policy_bool("policy.share_social_id", policy.share_social_id);
    if (r.explicit_value("policy.distance_quantum_m")) {
        policy.distance_quantum_m = r.num("policy.distance_quantum_m", 0.0, 1e7);
    } else {
        r.resolved["policy.distance_quantum_m"] = text::fmt_double(policy.distance_quantum_m);
    }
    if (r.explicit_value("policy.birthdate_mode")) {
        policy.birthdate_mode = r.choice<world::BirthdateMode>(
            "policy.birthdate_mode", [](std::string_view s) { return world::parse_birthdate_mode(s); },
            "exact, fuzzy_15d, hidden");
    } else {
        r.resolved["policy.birthdate_mode"] = world::to_string(policy.birthdate_mode);
    }
    if (r.explicit_value("policy.interests_mode")) {
        policy.interests_mode = r.choice<world::InterestsMode>(
            "policy.interests_mode", [](std::string_view s) { return world::parse_interests_mode(s); },
            "pages, categories, hidden");
    } else {
        r.resolved["policy.interests_mode"] = world::to_string(policy.interests_mode);
    }
    sc.service.policy = policy;
    sc.service.teleport_limit_m = r.num("service.teleport_limit_m", 1e-9, INFINITY, false);
    sc.service.teleport_cooldown_s = r.num("service.teleport_cooldown_s", 0.0, 1e9);

    sc.solver.norm = r.choice<mlat::Norm>(
        "solver.norm",
        [](std::string_view s) -> std::optional<mlat::Norm> {
            if (s == "l1") return mlat::Norm::L1;
            if (s == "l2") return mlat::Norm::L2;
            return std::nullopt;
        },
        "l1, l2");
    sc.solver.max_iterations = static_cast<int>(r.integer("solver.max_iterations", 1, 100000000));
    sc.solver.step_init_m = r.num("solver.step_init_m", 1e-9, 1e7);
    sc.solver.tol_m = r.num("solver.tol_m", 1e-12, 1e7);
    sc.solver.restarts = static_cast<int>(r.integer("solver.restarts", 0, 1000));
    sc.solver.seed = sc.seed;

    sc.trials = static_cast<int>(r.integer("attack.trials", 1, 10000000));
    sc.plan.strategy = r.choice<attacker::ProbeStrategy>(
        "attack.probe_strategy",
        [](std::string_view s) -> std::optional<attacker::ProbeStrategy> {
            const auto v = attacker::parse_probe_strategy(s);
            if (v == attacker::ProbeStrategy::FixedPoints) return std::nullopt;
            return v;
        },
        "ring, adaptive");
    sc.plan.count = static_cast<int>(r.integer("attack.probe_count", 3, 100000));
    sc.plan.ring_radius_m = r.num("attack.ring_radius_m", 1e-6, 50000.0);
    sc.prior_m = r.num("attack.prior_m", 0.0, 50000.0);
    sc.interval_s = r.num("attack.interval_s", 1e-6, 1e9);
    sc.duration_s = r.num("attack.duration_s", 0.0, 1e9);
    sc.poi_radius_m = r.num("attack.poi_radius_m", 1e-6, 1e6);
    sc.poi_min_dwell_s = r.num("attack.poi_min_dwell_s", 0.0, 1e9);
    sc.runs = static_cast<int>(r.integer("attack.runs", 1, 10000000));
    sc.batch_size = static_cast<int>(r.integer("attack.batch_size", 1, 100000));
    sc.max_rounds = static_cast<int>(r.integer("attack.max_rounds", 1, 100000));
    sc.attacker_likes_top = static_cast<int>(r.integer("attack.attacker_likes_top", 0, 10000000));
    if (sc.attacker_likes_top > w.catalog_size) {
        r.fail("attack.attacker_likes_top", "must not exceed world.catalog_size");
    }
    if (sc.attack == AttackKind::Track && sc.duration_s > w.span_s) {
        r.fail("attack.duration_s", "must not exceed world.span_s");
    }

    sc.runtime_grid = r.boolean("report.runtime_grid");
    sc.runtime_samples = r.int_list("report.runtime_samples", 3);
    sc.runtime_iterations = r.int_list("report.runtime_iterations", 1);

    sc.resolved = std::move(r.resolved);
    return sc;
}

const std::vector<std::string>& sweepable_keys() {
    static const std::vector<std::string> keys{"policy.distance_quantum_m", "attack.probe_count", "attack.batch_size",
                                               "policy.interests_mode"};
    return keys;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return NAN;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return NAN;
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
    return v[std::min(idx, v.size() - 1)];
}

double dist(const geo::EnuPoint& a, const geo::EnuPoint& b) { return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m); }

class Output {
public:
    explicit Output(const fs::path& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out << content;
        if (!out.flush()) throw IoError("write to " + path.string() + " failed");
        files.push_back(path);
    }

    const fs::path& dir() const { return dir_; }
    std::vector<fs::path> files;

private:
    fs::path dir_;
};

struct Summary {
    std::map<std::string, std::string> values;
    std::vector<std::string> order;

    void add(const std::string& k, const std::string& v) {
        if (!values.count(k)) order.push_back(k);
        values[k] = v;
    }
    void add(const std::string& k, double v) { add(k, std::isfinite(v) ? text::fmt_double(v) : std::string("nan")); }
};

// Attacker anchor: uniformly inside a disc of radius prior_m around the target.
geo::EnuPoint prior_point(Rng& rng, const geo::EnuPoint& truth, double prior_m) {
    const double off = prior_m * std::sqrt(rng.uniform01());
    const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {truth.x_m + off * std::cos(dir), truth.y_m + off * std::sin(dir), truth.ref};
}

UserId pick_user(Rng& rng, const world::Population& pop) {
    return pop.users[rng.below(pop.users.size())].user_id;
}

double discover_radius(double prior_m) { return prior_m * 1.01 + 1.0; }

void run_localize(const Scenario& sc, world::World& w, service::Service& svc, report::AttackTrace& trace,
                  report::Artifacts& art, Output& out, Summary& sum) {
    const auto tok = svc.register_account("Eve", world::make_date(1990, 1, 1), {},
                                          world::Trajectory::stationary(w.ref(), 0.0, w.population().span_s));
    attacker::ServiceChannel ch(svc, tok);
    attacker::Attacker atk(ch, w.ref(), {0.0, 0.0, w.ref()});
    Rng rng(derive_seed(sc.seed, {kStreamTrials}));

    std::ostringstream csv;
    csv << "trial,target_id,est_x_m,est_y_m,true_x_m,true_y_m,error_m,residual\n";
    std::vector<double> errors;
    for (int t = 0; t < sc.trials; ++t) {
        const auto target = pick_user(rng, w.population());
        // Ground truth is used only to place the attacker's prior and to score.
        const auto truth = geo::to_enu(w.position_at(target, w.now_s()), w.ref());
        atk.set_anchor(prior_point(rng, truth, sc.prior_m));
        atk.discover(discover_radius(sc.prior_m));
        auto plan = sc.plan;
        plan.phase_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
        auto cfg = sc.solver;
        cfg.seed = derive_seed(sc.seed, {kStreamSolver, static_cast<std::uint64_t>(t)});
        const auto est = atk.localize(target, plan, cfg);
        const double err = dist(est.p_hat, truth);
        errors.push_back(err);
        csv << t << ',' << target.value << ',' << text::fmt_double(est.p_hat.x_m) << ','
            << text::fmt_double(est.p_hat.y_m) << ',' << text::fmt_double(truth.x_m) << ','
            << text::fmt_double(truth.y_m) << ',' << text::fmt_double(err) << ',' << text::fmt_double(est.residual)
            << '\n';
        if (t == 0) art.probe_map = report::ProbeMap{atk.last_samples(), est.p_hat, truth};
    }
    out.write("localize.csv", csv.str());
    for (const auto& e : atk.trace().events()) trace.append(e);
    sum.add("trials", std::to_string(sc.trials));
    sum.add("median_error_m", median_of(errors));
    sum.add("p90_error_m", quantile(errors, 0.9));
    sum.add("max_error_m", *std::max_element(errors.begin(), errors.end()));
}

void run_track(const Scenario& sc, world::World& w, service::Service& svc, report::AttackTrace& trace,
               report::Artifacts& art, Output& out, Summary& sum) {
    const auto tok = svc.register_account("Eve", world::make_date(1990, 1, 1), {},
                                          world::Trajectory::stationary(w.ref(), 0.0, w.population().span_s));
    attacker::ServiceChannel ch(svc, tok);
    attacker::Attacker atk(ch, w.ref(), {0.0, 0.0, w.ref()});
    Rng rng(derive_seed(sc.seed, {kStreamTrials}));

    const auto target = pick_user(rng, w.population());
    const auto truth0 = geo::to_enu(w.position_at(target, w.now_s()), w.ref());
    atk.set_anchor(prior_point(rng, truth0, sc.prior_m));
    atk.discover(discover_radius(sc.prior_m));
    auto plan = sc.plan;
    plan.phase_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
    auto rec = atk.track(target, sc.interval_s, sc.duration_s, plan, sc.solver);
    if (!rec.estimates.empty()) rec.pois = attacker::extract_pois(rec, sc.poi_radius_m, sc.poi_min_dwell_s);

    std::ostringstream track_csv;
    attacker::write_track_csv(track_csv, rec);
    out.write("track.csv", track_csv.str());

    std::ostringstream eval;
    eval << "t_s,true_x_m,true_y_m,error_m\n";
    std::vector<double> errors;
    for (const auto& f : rec.estimates) {
        const auto truth = geo::to_enu(w.position_at(target, f.t_s), w.ref());
        errors.push_back(dist(f.estimate.p_hat, truth));
        eval << text::fmt_double(f.t_s) << ',' << text::fmt_double(truth.x_m) << ',' << text::fmt_double(truth.y_m)
             << ',' << text::fmt_double(errors.back()) << '\n';
    }
    out.write("track_truth.csv", eval.str());

    std::ostringstream pois;
    pois << "x_m,y_m,dwell_s,t_start_s,t_end_s,fixes\n";
    for (const auto& p : rec.pois) {
        pois << text::fmt_double(p.center.x_m) << ',' << text::fmt_double(p.center.y_m) << ','
             << text::fmt_double(p.dwell_s) << ',' << text::fmt_double(p.t_start_s) << ','
             << text::fmt_double(p.t_end_s) << ',' << p.fixes << '\n';
    }
    out.write("pois.csv", pois.str());

    std::ostringstream gaps;
    gaps << "t_s,error\n";
    for (const auto& g : rec.gaps) gaps << text::fmt_double(g.t_s) << ",\"" << g.error << "\"\n";
    out.write("gaps.csv", gaps.str());

    if (!rec.estimates.empty()) {
        const auto& last = rec.estimates.back();
        art.probe_map = report::ProbeMap{atk.last_samples(), last.estimate.p_hat,
                                         geo::to_enu(w.position_at(target, last.t_s), w.ref())};
    }
    for (const auto& e : atk.trace().events()) trace.append(e);
    sum.add("target_id", std::to_string(target.value));
    sum.add("fixes", std::to_string(rec.estimates.size()));
    sum.add("gaps", std::to_string(rec.gaps.size()));
    sum.add("pois", std::to_string(rec.pois.size()));
    sum.add("median_error_m", median_of(errors));
}

void run_identify(const Scenario& sc, world::World& w, service::Service& svc, report::AttackTrace& trace,
                  report::Artifacts& art, Output& out, Summary& sum) {
    const socialgraph::SocialGraph graph(w.users());
    std::set<PageId> top;
    for (int r = 1; r <= sc.attacker_likes_top; ++r) top.insert(w.catalog().by_rank(r).id);

    socialgraph::IdentifyConfig cfg;
    cfg.batch_size = sc.batch_size;
    cfg.max_rounds = sc.max_rounds;

    std::vector<socialgraph::IdentifyRow> rows;
    int identified = 0, wrong = 0;
    std::vector<double> final_pools;
    for (int run = 0; run < sc.runs; ++run) {
        const auto run_seed = derive_seed(sc.seed, {kStreamTrials, static_cast<std::uint64_t>(run)});
        Rng rng(run_seed);
        const auto victim = pick_user(rng, w.population());
        // A fresh attacker account per run keeps runs independent.
        const auto tok = svc.register_account("Eve", world::make_date(1990, 1, 1), top,
                                              world::Trajectory::stationary(w.ref(), 0.0, w.population().span_s));
        attacker::ServiceChannel ch(svc, tok);
        cfg.exclude.insert(svc.inspect([&](const world::World& ww) { return ww.find_by_token(tok)->social_id; }));
        ch.update_location(w.ref());
        ch.nearby(2.0 * geo::kMaxLocalRangeM);
        const auto view = ch.profile(victim);
        const auto res = socialgraph::identify(ch, victim, view, graph, cfg, &trace);

        const auto truth = w.user(victim).social_id;
        const bool ok = res.social_id && *res.social_id == truth;
        identified += ok ? 1 : 0;
        wrong += (res.social_id && !ok) ? 1 : 0;
        rows.push_back({run_seed, res.rounds_used, res.pool_sizes.back(), ok});
        final_pools.push_back(static_cast<double>(res.pool_sizes.back()));
        art.pool_sizes.push_back(res.pool_sizes);
    }
    std::ostringstream csv;
    socialgraph::write_identify_csv(csv, rows);
    out.write("identify.csv", csv.str());
    sum.add("runs", std::to_string(sc.runs));
    sum.add("identified", std::to_string(identified));
    sum.add("misidentified", std::to_string(wrong));
    sum.add("identification_rate", static_cast<double>(identified) / sc.runs);
    sum.add("median_final_pool", median_of(final_pools));
}

std::string summary_csv(const Summary& s) {
    std::ostringstream out;
    out << "metric,value\n";
    for (const auto& k : s.order) out << k << ',' << s.values.at(k) << '\n';
    return out.str();
}

} // namespace

RunResult run(const Scenario& sc) {
    world::World w(world::generate_population(sc.world));
    service::Service svc(w, sc.service);
    report::AttackTrace trace;
    report::Artifacts art;
    Output out(sc.out_dir);
    Summary sum;
    sum.add("attack", to_string(sc.attack));

    switch (sc.attack) {
    case AttackKind::Localize: run_localize(sc, w, svc, trace, art, out, sum); break;
    case AttackKind::Track: run_track(sc, w, svc, trace, art, out, sum); break;
    case AttackKind::Identify: run_identify(sc, w, svc, trace, art, out, sum); break;
    }
    if (sc.runtime_grid) art.runtime = mlat::runtime_profile(sc.runtime_samples, sc.runtime_iterations, sc.solver);

    // Writing the results out is itself a dissemination step.
    report::TraceEvent exported;
    exported.kind = report::EventKind::Export;
    exported.t_s = trace.last_t();
    exported.detail = sc.out_dir.string();
    trace.append(exported);
    const auto violations = report::classify(trace);
    art.violations = violations;
    for (const auto& [cat, n] : violations.category_events) sum.add(std::string("events_") + report::to_string(cat), std::to_string(n));

    for (const auto& p : report::emit(art, sc.out_dir)) out.files.push_back(p);
    out.write("summary.csv", summary_csv(sum));

    nlohmann::ordered_json manifest;
    manifest["attack"] = to_string(sc.attack);
    manifest["seed"] = sc.seed;
    nlohmann::ordered_json config;
    for (const auto& [k, v] : sc.resolved) {
        if (k != "out_dir") config[k] = v;
    }
    manifest["config"] = config;
    nlohmann::ordered_json summary;
    for (const auto& k : sum.order) summary[k] = sum.values.at(k);
    manifest["summary"] = summary;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& f : out.files) files.push_back(f.filename().string());
    files.push_back("manifest.json");
    manifest["files"] = files;
    manifest["unexercised_activities"] = nlohmann::ordered_json::array();
    for (const auto& l : violations.unexercised) {
        manifest["unexercised_activities"].push_back(std::string(report::to_string(l.category)) + "/" + l.activity);
    }
    manifest["nondeterministic_files"] = sc.runtime_grid ? nlohmann::ordered_json::array({"runtime.csv", "runtime.svg"})
                                                         : nlohmann::ordered_json::array();
    out.write("manifest.json", manifest.dump(2) + "\n");

    return RunResult{sum.values, sum.order, out.files};
}

std::string canonical_sweep_key(const std::string& key) {
    static const std::map<std::string, std::string> aliases{{"quantum_m", "policy.distance_quantum_m"},
                                                            {"probe_count", "attack.probe_count"},
                                                            {"batch_size", "attack.batch_size"},
                                                            {"interests_mode", "policy.interests_mode"}};
    const auto it = aliases.find(key);
    return it == aliases.end() ? key : it->second;
}

fs::path sweep(const RawConfig& base, const std::string& param, const std::vector<std::string>& values,
               const fs::path& out_dir) {
    const auto key = canonical_sweep_key(param);
    const auto& keys = sweepable_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        std::string allowed;
        for (const auto& k : keys) allowed += (allowed.empty() ? "" : ", ") + k;
        throw ConfigError("parameter '" + param + "' cannot be swept; sweepable: " + allowed);
    }
    if (values.empty()) throw ConfigError("sweep needs at least one value");

    // Resolve every value first so a bad one fails before any run.
    std::vector<Scenario> scenarios;
    for (const auto& v : values) {
        RawConfig raw = base;
        raw.set(key, v, "--values");
        auto sc = resolve(raw);
        sc.out_dir = out_dir / (key + "=" + v);
        scenarios.push_back(std::move(sc));
    }

    std::vector<RunResult> results;
    for (const auto& sc : scenarios) results.push_back(run(sc));

    std::vector<std::string> columns;
    for (const auto& r : results) {
        for (const auto& c : r.summary_order) {
            if (std::find(columns.begin(), columns.end(), c) == columns.end()) columns.push_back(c);
        }
    }
    std::ostringstream csv;
    csv << "param,value";
    for (const auto& c : columns) csv << ',' << c;
    csv << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) {
        csv << key << ',' << values[i];
        for (const auto& c : columns) {
            const auto it = results[i].summary.find(c);
            csv << ',' << (it == results[i].summary.end() ? "" : it->second);
        }
        csv << '\n';
    }
    Output out(out_dir);
    out.write("sweep.csv", csv.str());

    if (key == "policy.distance_quantum_m" && scenarios.front().attack == AttackKind::Localize) {
        report::Artifacts art;
        for (std::size_t i = 0; i < values.size(); ++i) {
            art.error_vs_quantum.push_back({scenarios[i].service.policy.distance_quantum_m,
                                            *text::parse_double(results[i].summary.at("median_error_m")),
                                            scenarios[i].trials});
        }
        report::emit(art, out_dir);
    }
    return out_dir / "sweep.csv";
}

} // namespace proxsim::scenario
