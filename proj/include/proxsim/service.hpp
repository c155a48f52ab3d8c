#pragma once

// The simulated proximity application. All reads and writes of the world go
// through one mutex, so every call is linearizable with respect to
// update_location regardless of how many clients are connected.

#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "proxsim/geo.hpp"
#include "proxsim/ids.hpp"
#include "proxsim/world.hpp"

namespace proxsim::service {

using SessionId = Id<struct SessionIdTag>;

/// A user as the requester sees them, after the disclosure policy.
/// Fields the policy disables are left empty.
struct NearbyEntry {
    UserId user_id;
    std::optional<std::string> first_name;
    std::optional<double> distance_m;
    /// Exact or fuzzed depending on BirthdateMode; empty when hidden.
    std::optional<world::Date> fuzzy_birthdate;
    /// Set under InterestsMode::Pages.
    std::optional<std::set<PageId>> common_pages;
    /// Set under InterestsMode::Categories.
    std::optional<std::set<std::string>> common_categories;
    std::optional<SocialId> social_id;
    double last_active_t = 0.0;

    friend bool operator==(const NearbyEntry&, const NearbyEntry&) = default;
};

struct ServiceConfig {
    world::DisclosurePolicy policy;
    /// Largest accepted jump of a client-reported position. Infinite = no limit.
    double teleport_limit_m = std::numeric_limits<double>::infinity();
    /// After this much sim time since the last accepted update, any jump is
    /// accepted. 0 = no cooldown.
    double teleport_cooldown_s = 0.0;
};

class Service {
public:
    Service(world::World& world, ServiceConfig cfg);

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Throws AuthError for unknown tokens.
    SessionId login(std::string_view token);

    /// Throws AuthError (bad session), ValidationError (bad point) or
    /// RateError (teleport limit). A rejected move changes nothing.
    void update_location(SessionId s, const geo::GeoPoint& p);

    /// Every other user within `radius_m` of the requester, ordered by
    /// disclosed distance then user id (user id only when distance is not
    /// disclosed). Marks them discovered for this session.
    /// Throws BadRequestError when radius_m <= 0.
    std::vector<NearbyEntry> nearby(SessionId s, double radius_m);

    /// Fresh view of a user this session has discovered. Throws
    /// NotFoundError for unknown or never-discovered users.
    NearbyEntry profile(SessionId s, UserId target);

    /// The session's account likes a page on the linked social platform;
    /// the service picks the change up on the next render.
    void like_page(SessionId s, PageId page);

    UserId user_of(SessionId s) const;

    /// Create a new account (e.g. an attacker's) and return its login token.
    std::string register_account(std::string first_name, world::Date birthdate, std::set<PageId> likes,
                                 world::Trajectory trajectory);

    // Simulation control; not reachable from clients.
    void advance_to(double t_s);
    double now_s() const;
    const ServiceConfig& config() const { return cfg_; }

    /// Run `fn` with shared read access to the world.
    template <class Fn>
    decltype(auto) inspect(Fn&& fn) const {
        std::lock_guard lock(mu_);
        return fn(static_cast<const world::World&>(world_));
    }

private:
    struct Session {
        UserId user;
        std::set<UserId> discovered;
    };
    struct Presence {
        geo::GeoPoint position;
        double updated_t = 0.0;
    };

    Session& session_locked(SessionId s);
    geo::GeoPoint visible_position_locked(UserId u) const;
    double last_active_locked(UserId u) const;
    NearbyEntry render_locked(const world::SimUser& requester, const world::SimUser& target,
                              double true_distance_m) const;

    mutable std::mutex mu_;
    world::World& world_;
    ServiceConfig cfg_;
    std::map<SessionId, Session> sessions_;
    std::unordered_map<UserId, Presence> reported_;
    std::uint64_t next_session_ = 1;
};

} // namespace proxsim::service
