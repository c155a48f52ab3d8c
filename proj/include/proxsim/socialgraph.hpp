#pragma once

// Search over the simulated social platform and the identification attack
// that narrows a candidate pool by liking pages and watching the victim's
// "in common" list grow.

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "proxsim/attacker.hpp"
#include "proxsim/ids.hpp"
#include "proxsim/trace.hpp"
#include "proxsim/world.hpp"

namespace proxsim::socialgraph {

struct GraphQuery {
    std::optional<std::string> name; // exact, case-insensitive
    /// Candidate birth years; empty = any. A single year is the usual case,
    /// two when a fuzzed birthdate straddles New Year.
    std::set<int> birth_years;
    std::set<PageId> liked_pages; // all must be liked

    bool empty() const { return !name && birth_years.empty() && liked_pages.empty(); }
};

/// Profiles as the social platform sees them. Built once from a snapshot;
/// later changes to the world are not reflected.
class SocialGraph {
public:
    explicit SocialGraph(std::span<const world::SimUser> users);

    /// Social ids of every profile matching all set fields. The empty query
    /// matches everyone.
    std::set<SocialId> forward_search(const GraphQuery& q) const;
    /// Union of the likes of forward_search(q), minus q.liked_pages.
    std::set<PageId> reverse_search(const GraphQuery& q) const;

    std::size_t size() const { return profiles_.size(); }
    const std::set<PageId>& likes_of(SocialId id) const;

private:
    struct Profile {
        SocialId social_id;
        std::string name_key;
        int birth_year = 0;
        std::set<PageId> likes;
    };
    std::vector<std::size_t> matches(const GraphQuery& q) const;

    std::vector<Profile> profiles_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
    std::unordered_map<PageId, std::vector<std::size_t>> by_page_;
    std::unordered_map<SocialId, std::size_t> by_id_;
};

/// Linear-scan versions, kept as the reference semantics.
std::set<SocialId> forward_search(std::span<const world::SimUser> users, const GraphQuery& q);
std::set<PageId> reverse_search(std::span<const world::SimUser> users, const GraphQuery& q);

/// Birth years compatible with a birthdate fuzzed by up to `days` days.
std::set<int> birth_year_window(world::Date fuzzy, int days = 7);

struct CandidatePool {
    int round = 0;
    std::set<SocialId> candidates;
    std::set<PageId> attacker_likes; // pages liked by the attack so far
};

struct IdentifyConfig {
    int max_rounds = 10;
    int batch_size = 10;
    /// Profiles never counted as candidates (the attacker's own account).
    std::set<SocialId> exclude;
    /// Keep every round's pool in IdentificationResult::history.
    bool record_pools = false;
};

enum class StopReason { Identified, Stalled, MaxRounds, EmptyPool };

const char* to_string(StopReason r);

struct IdentificationResult {
    std::optional<SocialId> social_id;
    std::vector<std::size_t> pool_sizes; // index = round, round 0 first
    int rounds_used = 0;                 // refinement rounds after round 0
    StopReason stop = StopReason::MaxRounds;
    std::vector<CandidatePool> history;
};

/// Round 0 searches by name, the birth-year window of the fuzzy birthdate
/// and the known common pages. Each later round likes the batch of
/// untried pages (from reverse search over the pool) that split the pool
/// most evenly, re-reads the victim's profile and searches again with the
/// enlarged common set. Stops on a single candidate, on a stall (no
/// splitting page left) or after max_rounds refinement rounds.
///
/// Throws InsufficientSelectorsError when the view has neither a name nor
/// page-level common likes.
IdentificationResult identify(attacker::Channel& channel, UserId victim, const service::NearbyEntry& victim_view,
                              const SocialGraph& graph, const IdentifyConfig& cfg,
                              report::AttackTrace* trace = nullptr);

/// CSV with header `seed,rounds_used,final_pool,identified`.
struct IdentifyRow {
    std::uint64_t seed = 0;
    int rounds_used = 0;
    std::size_t final_pool = 0;
    bool identified = false;
};
void write_identify_csv(std::ostream& out, std::span<const IdentifyRow> rows);

} // namespace proxsim::socialgraph
