#include "proxsim/service.hpp"

#include <algorithm>
#include <iterator>
#include <cmath>

#include "proxsim/error.hpp"
#include "proxsim/text.hpp"

namespace proxsim::service {

Service::Service(world::World& world, ServiceConfig cfg) : world_(world), cfg_(std::move(cfg)) {
    if (!(cfg_.policy.distance_quantum_m >= 0.0)) throw ValidationError("distance quantum must be >= 0");
    if (!(cfg_.teleport_limit_m > 0.0)) throw ValidationError("teleport limit must be > 0");
    if (!(cfg_.teleport_cooldown_s >= 0.0)) throw ValidationError("teleport cooldown must be >= 0");
}

SessionId Service::login(std::string_view token) {
    std::lock_guard lock(mu_);
    const auto* user = world_.find_by_token(token);
    if (user == nullptr) throw AuthError("unknown token");
    const SessionId id{next_session_++};
    sessions_.emplace(id, Session{user->user_id, {}});
    return id;
}

Service::Session& Service::session_locked(SessionId s) {
    const auto it = sessions_.find(s);
    if (it == sessions_.end()) throw AuthError("unknown session");
    return it->second;
}

UserId Service::user_of(SessionId s) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(s);
    if (it == sessions_.end()) throw AuthError("unknown session");
    return it->second.user;
}

geo::GeoPoint Service::visible_position_locked(UserId u) const {
    const auto it = reported_.find(u);
    if (it != reported_.end()) return it->second.position;
    return world_.position_at(u, world_.now_s());
}

double Service::last_active_locked(UserId u) const {
    const auto it = reported_.find(u);
    return it != reported_.end() ? it->second.updated_t : world_.now_s();
}

void Service::update_location(SessionId s, const geo::GeoPoint& p) {
    std::lock_guard lock(mu_);
    const UserId user = session_locked(s).user;
    geo::validate(p);
    if (std::isfinite(cfg_.teleport_limit_m)) {
        const double jump = geo::haversine_m(visible_position_locked(user), p);
        const auto it = reported_.find(user);
        const bool cooled = cfg_.teleport_cooldown_s > 0.0 &&
                            (it == reported_.end() ||
                             world_.now_s() - it->second.updated_t >= cfg_.teleport_cooldown_s);
        if (jump > cfg_.teleport_limit_m && !cooled) {
            throw RateError("move of " + text::fmt_fixed(jump, 1) + " m exceeds the " +
                            text::fmt_fixed(cfg_.teleport_limit_m, 1) + " m limit");
        }
    }
    reported_[user] = Presence{p, world_.now_s()};
}

NearbyEntry Service::render_locked(const world::SimUser& requester, const world::SimUser& target,
                                   double true_distance_m) const {
    const auto& policy = cfg_.policy;
    NearbyEntry e;
    e.user_id = target.user_id;
    if (policy.share_first_name) e.first_name = target.first_name;
    if (policy.share_distance) {
        e.distance_m = world::quantize_distance(true_distance_m, policy.distance_quantum_m);
    }
    switch (policy.birthdate_mode) {
    case world::BirthdateMode::Exact: e.fuzzy_birthdate = target.true_birthdate; break;
    case world::BirthdateMode::Fuzzy15d: e.fuzzy_birthdate = world_.fuzzy_birthdate(target.user_id); break;
    case world::BirthdateMode::Hidden: break;
    }
    if (policy.interests_mode != world::InterestsMode::Hidden) {
        std::set<PageId> common;
        std::set_intersection(requester.likes.begin(), requester.likes.end(), target.likes.begin(),
                              target.likes.end(), std::inserter(common, common.end()));
        if (policy.interests_mode == world::InterestsMode::Pages) {
            e.common_pages = std::move(common);
        } else {
            std::set<std::string> cats;
            for (auto p : common) cats.insert(world_.catalog().category_of(p));
            e.common_categories = std::move(cats);
        }
    }
    if (policy.share_social_id) e.social_id = target.social_id;
    e.last_active_t = last_active_locked(target.user_id);
    return e;
}

std::vector<NearbyEntry> Service::nearby(SessionId s, double radius_m) {
    std::lock_guard lock(mu_);
    Session& session = session_locked(s);
    if (!(radius_m > 0.0)) throw BadRequestError("radius_m must be > 0");
    const auto& requester = world_.user(session.user);
    const auto here = visible_position_locked(session.user);

    struct Hit {
        double sort_key;
        NearbyEntry entry;
    };
    std::vector<Hit> hits;
    for (const auto& target : world_.users()) {
        if (target.user_id == session.user) continue;
        const double d = geo::haversine_m(here, visible_position_locked(target.user_id));
        if (d > radius_m) continue;
        auto entry = render_locked(requester, target, d);
        const double key = entry.distance_m.value_or(0.0);
        hits.push_back(Hit{key, std::move(entry)});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.sort_key < b.sort_key || (a.sort_key == b.sort_key && a.entry.user_id < b.entry.user_id);
    });
    std::vector<NearbyEntry> out;
    out.reserve(hits.size());
    for (auto& h : hits) {
        session.discovered.insert(h.entry.user_id);
        out.push_back(std::move(h.entry));
    }
    return out;
}

NearbyEntry Service::profile(SessionId s, UserId target) {
    std::lock_guard lock(mu_);
    Session& session = session_locked(s);
    if (!session.discovered.count(target)) {
        throw NotFoundError("user " + std::to_string(target.value) + " not discovered by this session");
    }
    const auto& requester = world_.user(session.user);
    const auto& t = world_.user(target);
    const double d = geo::haversine_m(visible_position_locked(session.user), visible_position_locked(target));
    return render_locked(requester, t, d);
}

void Service::like_page(SessionId s, PageId page) {
    std::lock_guard lock(mu_);
    world_.like_page(session_locked(s).user, page);
}

std::string Service::register_account(std::string first_name, world::Date birthdate,
                                      std::set<PageId> likes, world::Trajectory trajectory) {
    std::lock_guard lock(mu_);
    for (auto p : likes) {
        if (!world_.catalog().contains(p)) throw NotFoundError("unknown page " + std::to_string(p.value));
    }
    return world_.add_user(std::move(first_name), birthdate, std::move(likes), std::move(trajectory)).token;
}

void Service::advance_to(double t_s) {
    std::lock_guard lock(mu_);
    world_.advance_to(t_s);
}

double Service::now_s() const {
    std::lock_guard lock(mu_);
    return world_.now_s();
}

} // namespace proxsim::service
