#pragma once

// Scenario files and the experiment pipelines behind the command line.
//
// A scenario is a `key = value` file; `#` starts a comment. Every key has a
// documented default except `seed`, which is required. See
// scenario_keys() for the full list.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proxsim/attacker.hpp"
#include "proxsim/mlat.hpp"
#include "proxsim/service.hpp"
#include "proxsim/world.hpp"

namespace proxsim::scenario {

struct KeyInfo {
    std::string key;
    std::string default_value; // empty = required
    std::string help;
};

const std::vector<KeyInfo>& scenario_keys();

/// Raw key/value pairs with where each came from, for diagnostics.
class RawConfig {
public:
    struct Entry {
        std::string value;
        std::string origin; // "file:line", "--set" or "default"
    };

    /// Throws ConfigError naming file and line for syntax errors, unknown
    /// keys and duplicates.
    static RawConfig parse(std::istream& in, const std::string& name);
    static RawConfig load(const std::filesystem::path& path);

    /// `key=value`; throws ConfigError for unknown keys or bad syntax.
    void set(const std::string& assignment, const std::string& origin = "--set");
    void set(const std::string& key, const std::string& value, const std::string& origin);

    const std::map<std::string, Entry>& entries() const { return entries_; }
    std::optional<Entry> find(const std::string& key) const;

private:
    std::map<std::string, Entry> entries_;
};

enum class AttackKind { Localize, Track, Identify };

const char* to_string(AttackKind a);

struct Scenario {
    std::uint64_t seed = 0;
    AttackKind attack = AttackKind::Localize;
    std::filesystem::path out_dir;
    world::WorldConfig world;
    service::ServiceConfig service;
    mlat::SolverConfig solver;

    // localize / track
    int trials = 1;
    attacker::ProbePlan plan;
    double prior_m = 500.0;
    double interval_s = 3600.0;
    double duration_s = 61200.0;
    double poi_radius_m = 200.0;
    double poi_min_dwell_s = 1800.0;

    // identify
    int runs = 1;
    int batch_size = 10;
    int max_rounds = 10;
    int attacker_likes_top = 10;

    // solver runtime grid (wall-clock, not reproducible)
    bool runtime_grid = false;
    std::vector<int> runtime_samples;
    std::vector<int> runtime_iterations;

    /// Every key with its resolved value, in key order.
    std::map<std::string, std::string> resolved;
};

/// Applies defaults and checks every field. Throws ConfigError whose
/// message names the key (and its origin) at fault.
Scenario resolve(const RawConfig& raw);

/// Output directory override read by the command line, if set.
inline constexpr const char* kOutDirEnv = "PROXSIM_OUT_DIR";

/// Keys accepted by sweep.
const std::vector<std::string>& sweepable_keys();
/// Maps the short names quantum_m, probe_count, batch_size and
/// interests_mode to their full keys; other names pass through.
std::string canonical_sweep_key(const std::string& key);

struct RunResult {
    std::map<std::string, std::string> summary; // metric -> value
    std::vector<std::string> summary_order;
    std::vector<std::filesystem::path> files;
};

/// Runs the scenario and writes its artifacts, summary.csv and
/// manifest.json into sc.out_dir. Throws proxsim::Error subclasses on
/// pipeline failures.
RunResult run(const Scenario& sc);

/// One run per value of `key`, each in out_dir/<key>=<value>/, then
/// out_dir/sweep.csv with a row per value. Throws ConfigError when the key
/// is not sweepable or a value is invalid.
std::filesystem::path sweep(const RawConfig& base, const std::string& key, const std::vector<std::string>& values,
                            const std::filesystem::path& out_dir);

} // namespace proxsim::scenario
