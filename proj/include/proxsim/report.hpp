#pragma once

// Privacy-violation classification of attack traces and the CSV/SVG
// artifacts of an experiment run.
//
// Artifacts written by emit() (each only when its input is present):
//   runtime.csv           samples,iterations,seconds_per_solve
//   runtime.svg           one polyline per iteration budget, id "iters-<n>"
//   probes.csv            observer_x_m,observer_y_m,reported_m,t_s,quantum_m
//   probe_map.svg         circle per sample id "sample-<i>", "estimate", "truth"
//   pool_sizes.csv        run,round,pool_size
//   pool_sizes.svg        polyline per run id "run-<i>", "median" curve
//   error_vs_quantum.csv  quantum_m,median_error_m,trials (ascending quantum)
//   error_vs_quantum.svg  polyline id "median-error", points "q-<quantum>"
//   violations.csv        category,activity,events
// Every SVG is 800x600 with ids "title", "axes" and "data" on the root's
// groups.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proxsim/geo.hpp"
#include "proxsim/mlat.hpp"
#include "proxsim/trace.hpp"

namespace proxsim::report {

enum class Category { Collection, Processing, Dissemination, Invasion };

const char* to_string(Category c);

struct Label {
    Category category = Category::Collection;
    std::string activity;

    friend auto operator<=>(const Label&, const Label&) = default;
};

/// The closed vocabulary: every category with its activities.
const std::vector<std::pair<Category, std::vector<std::string>>>& taxonomy();
bool in_taxonomy(const Label& l);

struct Mapping {
    std::map<EventKind, std::vector<Label>> by_kind;
    /// Added to every localize_result of a target localized at least
    /// intrusion_min_fixes times.
    Label intrusion{Category::Invasion, "Intrusion"};
    int intrusion_min_fixes = 2;
};

/// probe, profile_poll -> Collection/Surveillance; localize_result,
/// identify_round -> Processing/Identification and Processing/Aggregation;
/// export -> Dissemination/Increased accessibility; repeated localization
/// of one target -> Invasion/Intrusion.
Mapping default_mapping();

/// Throws ValidationError for labels outside the vocabulary or an event
/// kind without a label.
void validate(const Mapping& m);

struct ViolationReport {
    std::vector<std::vector<Label>> event_labels; // parallel to trace events
    std::map<Category, int> category_events;      // events carrying >= 1 label of the category
    std::map<Label, int> activity_events;
    /// Activities of the vocabulary no event exercised.
    std::vector<Label> unexercised;
};

ViolationReport classify(const AttackTrace& trace, const Mapping& mapping = default_mapping());

struct ProbeMap {
    std::vector<mlat::DistanceSample> samples;
    geo::EnuPoint estimate;
    std::optional<geo::EnuPoint> truth;
};

struct ErrorPoint {
    double quantum_m = 0.0;
    double median_error_m = 0.0;
    int trials = 0;
};

struct Artifacts {
    std::vector<mlat::TimingCell> runtime;
    std::optional<ProbeMap> probe_map;
    std::vector<std::vector<std::size_t>> pool_sizes; // one entry per identify run
    std::vector<ErrorPoint> error_vs_quantum;
    std::optional<ViolationReport> violations;
};

/// Writes the artifacts into out_dir (created if missing) and returns the
/// paths written, in a fixed order. Throws IoError when a file cannot be
/// written.
std::vector<std::filesystem::path> emit(const Artifacts& a, const std::filesystem::path& out_dir);

} // namespace proxsim::report
