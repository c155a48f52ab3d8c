#include "proxsim/socialgraph.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

#include "proxsim/error.hpp"

namespace proxsim::socialgraph {
namespace {

std::string name_key(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool matches_user(const world::SimUser& u, const GraphQuery& q) {
    if (q.name && name_key(*q.name) != name_key(u.first_name)) return false;
    if (!q.birth_years.empty() && !q.birth_years.count(world::year_of(u.true_birthdate))) return false;
    return std::includes(u.likes.begin(), u.likes.end(), q.liked_pages.begin(), q.liked_pages.end());
}

} // namespace

SocialGraph::SocialGraph(std::span<const world::SimUser> users) {
    profiles_.reserve(users.size());
    for (const auto& u : users) {
        const auto idx = profiles_.size();
        if (!by_id_.emplace(u.social_id, idx).second) throw ValidationError("duplicate social id");
        profiles_.push_back(Profile{u.social_id, name_key(u.first_name), world::year_of(u.true_birthdate), u.likes});
        by_name_[profiles_.back().name_key].push_back(idx);
        for (auto p : u.likes) by_page_[p].push_back(idx);
    }
}

const std::set<PageId>& SocialGraph::likes_of(SocialId id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) throw NotFoundError("unknown social id " + std::to_string(id.value));
    return profiles_[it->second].likes;
}

std::vector<std::size_t> SocialGraph::matches(const GraphQuery& q) const {
    // Seed from the shortest posting list, then filter.
    static const std::vector<std::size_t> none;
    const std::vector<std::size_t>* seed = nullptr;
    if (q.name) {
        const auto it = by_name_.find(name_key(*q.name));
        seed = it == by_name_.end() ? &none : &it->second;
    }
    for (auto p : q.liked_pages) {
        const auto it = by_page_.find(p);
        const auto* list = it == by_page_.end() ? &none : &it->second;
        if (seed == nullptr || list->size() < seed->size()) seed = list;
    }
    const auto keep = [&](std::size_t i) {
        const auto& pr = profiles_[i];
        if (q.name && name_key(*q.name) != pr.name_key) return false;
        if (!q.birth_years.empty() && !q.birth_years.count(pr.birth_year)) return false;
        return std::includes(pr.likes.begin(), pr.likes.end(), q.liked_pages.begin(), q.liked_pages.end());
    };
    std::vector<std::size_t> out;
    if (seed == nullptr) {
        for (std::size_t i = 0; i < profiles_.size(); ++i) {
            if (keep(i)) out.push_back(i);
        }
    } else {
        for (auto i : *seed) {
            if (keep(i)) out.push_back(i);
        }
    }
    return out;
}

std::set<SocialId> SocialGraph::forward_search(const GraphQuery& q) const {
    std::set<SocialId> out;
    for (auto i : matches(q)) out.insert(profiles_[i].social_id);
    return out;
}

std::set<PageId> SocialGraph::reverse_search(const GraphQuery& q) const {
    std::set<PageId> out;
    for (auto i : matches(q)) out.insert(profiles_[i].likes.begin(), profiles_[i].likes.end());
    for (auto p : q.liked_pages) out.erase(p);
    return out;
}

std::set<SocialId> forward_search(std::span<const world::SimUser> users, const GraphQuery& q) {
    std::set<SocialId> out;
    for (const auto& u : users) {
        if (matches_user(u, q)) out.insert(u.social_id);
    }
    return out;
}

std::set<PageId> reverse_search(std::span<const world::SimUser> users, const GraphQuery& q) {
    std::set<PageId> out;
    for (const auto& u : users) {
        if (matches_user(u, q)) out.insert(u.likes.begin(), u.likes.end());
    }
    for (auto p : q.liked_pages) out.erase(p);
    return out;
}

std::set<int> birth_year_window(world::Date fuzzy, int days) {
    return {world::year_of(fuzzy - std::chrono::days{days}), world::year_of(fuzzy + std::chrono::days{days})};
}

const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::Identified: return "identified";
    case StopReason::Stalled: return "stalled";
    case StopReason::MaxRounds: return "max_rounds";
    case StopReason::EmptyPool: return "empty_pool";
    }
    return "?";
}

namespace {

std::set<SocialId> without(std::set<SocialId> pool, const std::set<SocialId>& exclude) {
    for (auto id : exclude) pool.erase(id);
    return pool;
}

// Untried pages liked by some but not all of the pool, most even split first.
std::vector<PageId> splitting_batch(const SocialGraph& graph, const std::set<SocialId>& pool,
                                    const std::set<PageId>& tried, int batch_size) {
    std::unordered_map<PageId, std::size_t> counts;
    for (auto id : pool) {
        for (auto p : graph.likes_of(id)) {
            if (!tried.count(p)) ++counts[p];
        }
    }
    std::vector<std::pair<std::size_t, PageId>> scored;
    for (auto [p, c] : counts) {
        const auto score = std::min(c, pool.size() - c);
        if (score > 0) scored.emplace_back(score, p);
    }
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    std::vector<PageId> out;
    for (std::size_t i = 0; i < scored.size() && static_cast<int>(i) < batch_size; ++i) out.push_back(scored[i].second);
    return out;
}

} // namespace

IdentificationResult identify(attacker::Channel& channel, UserId victim, const service::NearbyEntry& victim_view,
                              const SocialGraph& graph, const IdentifyConfig& cfg, report::AttackTrace* trace) {
    if (cfg.max_rounds < 1) throw ValidationError("max_rounds must be >= 1");
    if (cfg.batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!victim_view.first_name && !victim_view.common_pages) {
        throw InsufficientSelectorsError("victim view has neither a name nor page-level common likes");
    }

    GraphQuery q;
    q.name = victim_view.first_name;
    if (victim_view.fuzzy_birthdate) q.birth_years = birth_year_window(*victim_view.fuzzy_birthdate);
    if (victim_view.common_pages) q.liked_pages = *victim_view.common_pages;

    IdentificationResult res;
    std::set<PageId> tried = q.liked_pages;
    std::set<PageId> liked_by_attack;
    auto pool = without(graph.forward_search(q), cfg.exclude);

    const auto record = [&](int round) {
        res.pool_sizes.push_back(pool.size());
        if (cfg.record_pools) res.history.push_back(CandidatePool{round, pool, liked_by_attack});
        if (trace) {
            trace->append({report::EventKind::IdentifyRound, std::max(trace->last_t(), channel.now_s()), victim.value,
                           0.0, 0.0, static_cast<double>(pool.size()), {}, {}});
        }
    };
    record(0);

    for (int round = 1;; ++round) {
        if (pool.size() == 1) {
            res.social_id = *pool.begin();
            res.stop = StopReason::Identified;
            break;
        }
        if (pool.empty()) {
            res.stop = StopReason::EmptyPool;
            break;
        }
        if (round > cfg.max_rounds) {
            res.stop = StopReason::MaxRounds;
            break;
        }
        // Under the categories mode the common list carries no page ids,
        // so liking pages cannot narrow the search.
        const auto batch =
            victim_view.common_pages ? splitting_batch(graph, pool, tried, cfg.batch_size) : std::vector<PageId>{};
        if (batch.empty()) {
            res.stop = StopReason::Stalled;
            break;
        }
        for (auto p : batch) {
            channel.like_page(p);
            tried.insert(p);
            liked_by_attack.insert(p);
        }
        const auto view = channel.profile(victim);
        if (trace) {
            trace->append({report::EventKind::ProfilePoll, std::max(trace->last_t(), channel.now_s()), victim.value,
                           0.0, 0.0, static_cast<double>(view.common_pages ? view.common_pages->size() : 0), {},
                           {}});
        }
        if (view.common_pages) q.liked_pages.insert(view.common_pages->begin(), view.common_pages->end());
        pool = without(graph.forward_search(q), cfg.exclude);
        res.rounds_used = round;
        record(round);
    }
    return res;
}

void write_identify_csv(std::ostream& out, std::span<const IdentifyRow> rows) {
    out << "seed,rounds_used,final_pool,identified\n";
    for (const auto& r : rows) {
        out << r.seed << ',' << r.rounds_used << ',' << r.final_pool << ',' << (r.identified ? 1 : 0) << '\n';
    }
}

} // namespace proxsim::socialgraph
