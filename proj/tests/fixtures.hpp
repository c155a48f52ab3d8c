#pragma once

// Small worlds for service-level tests.

#include <cmath>
#include <set>
#include <string>

#include "proxsim/geo.hpp"
#include "proxsim/rng.hpp"
#include <memory>

#include "proxsim/attacker.hpp"
#include "proxsim/service.hpp"
#include "proxsim/world.hpp"

namespace fixtures {

using namespace proxsim;

inline world::Population empty_population(std::uint64_t seed = 1, int catalog = 200) {
    world::Population pop;
    pop.catalog = world::PageCatalog(catalog, 16, seed);
    pop.ref = world::BoundingBox{}.center();
    pop.span_s = 86400.0;
    pop.seed = seed;
    return pop;
}

inline world::Population random_population(int n, std::uint64_t seed, int catalog = 200, double like_mean = 4.0) {
    world::WorldConfig cfg;
    cfg.n_users = n;
    cfg.catalog_size = catalog;
    cfg.like_mean = like_mean;
    cfg.seed = seed;
    return world::generate_population(cfg);
}

/// Point `east_m`/`north_m` away from `ref` in its local frame.
inline geo::GeoPoint offset(const geo::GeoPoint& ref, double east_m, double north_m) {
    return geo::from_enu(geo::EnuPoint{east_m, north_m, ref});
}

/// Adds a stationary user and returns its token.
inline std::string add_static(world::World& w, const geo::GeoPoint& p, std::set<PageId> likes = {},
                              std::string name = "Alex") {
    return w
        .add_user(std::move(name), world::make_date(1990, 6, 15), std::move(likes),
                  world::Trajectory::stationary(p, 0.0, w.population().span_s))
        .token;
}

/// One target and one attacker account in an otherwise empty city.
struct Scene {
    std::unique_ptr<world::World> world;
    std::unique_ptr<service::Service> svc;
    UserId target;
    std::string attacker_token;

    Scene(world::Trajectory target_path, world::DisclosurePolicy policy, std::set<PageId> target_likes = {},
          service::ServiceConfig base = {}) {
        world = std::make_unique<world::World>(empty_population());
        target = world->add_user("Vic", world::make_date(1990, 6, 15), std::move(target_likes), std::move(target_path))
                     .user_id;
        attacker_token = add_static(*world, world->ref(), {}, "Eve");
        base.policy = policy;
        svc = std::make_unique<service::Service>(*world, base);
    }

    /// Where the target really is, in the frame of world->ref().
    geo::EnuPoint truth(double t_s) const { return geo::to_enu(world->position_at(target, t_s), world->ref()); }
};

} // namespace fixtures
