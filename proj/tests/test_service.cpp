#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "proxsim/error.hpp"
#include "proxsim/service.hpp"

using namespace proxsim;
using namespace proxsim::service;
using fixtures::add_static;
using fixtures::offset;

namespace {

ServiceConfig with_policy(world::DisclosurePolicy p) {
    ServiceConfig cfg;
    cfg.policy = p;
    return cfg;
}

world::DisclosurePolicy random_policy(Rng& rng) {
    world::DisclosurePolicy p;
    p.share_distance = rng.bernoulli(0.5);
    const double quanta[] = {0.0, 1.0, 10.0, 100.0, 1000.0};
    p.distance_quantum_m = quanta[rng.below(5)];
    p.share_first_name = rng.bernoulli(0.5);
    p.birthdate_mode = static_cast<world::BirthdateMode>(rng.below(3));
    p.interests_mode = static_cast<world::InterestsMode>(rng.below(3));
    p.share_social_id = rng.bernoulli(0.5);
    return p;
}

} // namespace

TEST_CASE("login") {
    world::World w(fixtures::empty_population());
    const auto tok = add_static(w, w.ref());
    Service svc(w, {});
    const auto s = svc.login(tok);
    CHECK(svc.user_of(s) == w.find_by_token(tok)->user_id);
    CHECK_THROWS_AS(svc.login("nope"), AuthError);
    CHECK_THROWS_AS(svc.nearby(SessionId{999}, 100.0), AuthError);
}

TEST_CASE("nearby: radius covering everyone returns all other users") {
    world::World w(fixtures::random_population(50, 3));
    const auto me = add_static(w, w.ref());
    Service svc(w, {});
    const auto s = svc.login(me);
    CHECK(svc.nearby(s, 200000.0).size() == 50);
    CHECK_THROWS_AS(svc.nearby(s, 0.0), BadRequestError);
    CHECK_THROWS_AS(svc.nearby(s, -1.0), BadRequestError);
}

TEST_CASE("nearby: hidden distance is never disclosed and order falls back to user id") {
    world::World w(fixtures::random_population(30, 4));
    const auto me = add_static(w, w.ref());
    Service svc(w, with_policy(world::grindr_policy()));
    const auto res = svc.nearby(svc.login(me), 200000.0);
    REQUIRE(res.size() == 30);
    for (std::size_t i = 0; i < res.size(); ++i) {
        CHECK_FALSE(res[i].distance_m.has_value());
        CHECK_FALSE(res[i].first_name.has_value());
        if (i > 0) CHECK(res[i - 1].user_id < res[i].user_id);
    }
}

TEST_CASE("nearby equals brute force over ground truth") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const int n = 1 + static_cast<int>(rng.below(200));
        world::World w(fixtures::random_population(n, seed));
        const auto me = add_static(w, offset(w.ref(), rng.uniform(-3000, 3000), rng.uniform(-3000, 3000)));
        Service svc(w, {});
        const auto s = svc.login(me);
        const double radius = rng.uniform(100.0, 8000.0);
        const auto got = svc.nearby(s, radius);

        const auto me_user = *w.find_by_token(me);
        const auto here = w.position_at(me_user.user_id, 0.0);
        std::vector<std::pair<double, UserId>> want;
        for (const auto& u : w.users()) {
            if (u.user_id == me_user.user_id) continue;
            const double d = geo::haversine_m(here, w.position_at(u.user_id, 0.0));
            if (d <= radius) want.emplace_back(d, u.user_id);
        }
        std::sort(want.begin(), want.end());
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].user_id == want[i].second);
            CHECK(*got[i].distance_m == want[i].first);
        }
    }
}

TEST_CASE("update_location: teleport limit") {
    world::World w(fixtures::empty_population());
    const auto tok = add_static(w, w.ref());
    const auto other = add_static(w, w.ref());

    SUBCASE("no limit accepts a 500 m move") {
        Service svc(w, {});
        const auto s = svc.login(tok);
        svc.update_location(s, offset(w.ref(), 500.0, 0.0));
        const auto o = svc.login(other);
        const auto res = svc.nearby(o, 10000.0);
        REQUIRE(res.size() == 1);
        CHECK(*res[0].distance_m == doctest::Approx(500.0).epsilon(1e-6));
    }
    SUBCASE("a 50 km jump is rejected under a 10 km limit and nothing moves") {
        ServiceConfig cfg;
        cfg.teleport_limit_m = 10000.0;
        Service svc(w, cfg);
        const auto s = svc.login(tok);
        CHECK_THROWS_AS(svc.update_location(s, offset(w.ref(), 50000.0, 0.0)), RateError);
        const auto o = svc.login(other);
        const auto res = svc.nearby(o, 10000.0);
        REQUIRE(res.size() == 1);
        CHECK(*res[0].distance_m == doctest::Approx(0.0).epsilon(1e-9));
        svc.update_location(s, offset(w.ref(), 9000.0, 0.0));
    }
    SUBCASE("cooldown re-enables long jumps") {
        ServiceConfig cfg;
        cfg.teleport_limit_m = 10000.0;
        cfg.teleport_cooldown_s = 3600.0;
        Service svc(w, cfg);
        const auto s = svc.login(tok);
        svc.update_location(s, offset(w.ref(), 100.0, 0.0));
        CHECK_THROWS_AS(svc.update_location(s, offset(w.ref(), 50000.0, 0.0)), RateError);
        svc.advance_to(3600.0);
        svc.update_location(s, offset(w.ref(), 50000.0, 0.0));
    }
    SUBCASE("invalid coordinates") {
        Service svc(w, {});
        CHECK_THROWS_AS(svc.update_location(svc.login(tok), geo::GeoPoint{91.0, 0.0}), ValidationError);
    }
}

TEST_CASE("profile reflects the target's current state") {
    world::World w(fixtures::empty_population());
    const auto a = add_static(w, w.ref());
    const auto b = add_static(w, offset(w.ref(), 300.0, 0.0));
    Service svc(w, {});
    const auto sa = svc.login(a);
    const auto sb = svc.login(b);
    const auto tb = svc.user_of(sb);

    CHECK_THROWS_AS(svc.profile(sa, tb), NotFoundError);
    CHECK_THROWS_AS(svc.profile(sa, UserId{987654}), NotFoundError);
    REQUIRE(svc.nearby(sa, 1000.0).size() == 1);
    CHECK(*svc.profile(sa, tb).distance_m == doctest::Approx(300.0).epsilon(1e-6));

    svc.advance_to(60.0);
    svc.update_location(sb, offset(w.ref(), 0.0, 700.0));
    const auto p = svc.profile(sa, tb);
    CHECK(*p.distance_m == doctest::Approx(700.0).epsilon(1e-6));
    CHECK(p.last_active_t == 60.0);
}

TEST_CASE("interests: pages versus categories") {
    world::World w(fixtures::empty_population(7, 100));
    const auto& cat = w.catalog();
    const auto a = add_static(w, w.ref(), {PageId{1}, PageId{2}, PageId{3}});
    const auto b = add_static(w, w.ref(), {PageId{2}, PageId{3}, PageId{4}});

    auto policy = world::tinder_policy();
    {
        Service svc(w, with_policy(policy));
        const auto res = svc.nearby(svc.login(a), 10.0);
        REQUIRE(res.size() == 1);
        CHECK(*res[0].common_pages == std::set<PageId>{PageId{2}, PageId{3}});
        CHECK_FALSE(res[0].common_categories.has_value());
    }
    policy.interests_mode = world::InterestsMode::Categories;
    {
        Service svc(w, with_policy(policy));
        const auto res = svc.nearby(svc.login(a), 10.0);
        REQUIRE(res.size() == 1);
        CHECK_FALSE(res[0].common_pages.has_value());
        const std::set<std::string> want{cat.category_of(PageId{2}), cat.category_of(PageId{3})};
        CHECK(*res[0].common_categories == want);
    }
    (void)b;
}

TEST_CASE("like_page is visible on the next render") {
    world::World w(fixtures::empty_population());
    const auto a = add_static(w, w.ref(), {PageId{5}});
    const auto b = add_static(w, w.ref());
    Service svc(w, {});
    const auto sa = svc.login(a);
    const auto sb = svc.login(b);
    const auto tb = svc.user_of(sb);
    svc.nearby(sa, 10.0);
    CHECK(svc.profile(sa, tb).common_pages->empty());
    svc.like_page(sb, PageId{5});
    CHECK(*svc.profile(sa, tb).common_pages == std::set<PageId>{PageId{5}});
    CHECK_THROWS_AS(svc.like_page(sb, PageId{100000}), NotFoundError);
}

TEST_CASE("register_account") {
    world::World w(fixtures::random_population(5, 9));
    Service svc(w, {});
    const auto tok = svc.register_account("Eve", world::make_date(1991, 1, 1), {PageId{1}},
                                          world::Trajectory::stationary(w.ref(), 0.0, 86400.0));
    const auto s = svc.login(tok);
    CHECK(svc.nearby(s, 1e5).size() == 5);
    CHECK_THROWS_AS(svc.register_account("X", world::make_date(1991, 1, 1), {PageId{99999}},
                                         world::Trajectory::stationary(w.ref(), 0.0, 86400.0)),
                    NotFoundError);
}

TEST_CASE("policy soundness under random policies") {
    // A field is present exactly when the policy enables it, and a disclosed
    // distance d satisfies d <= true < d + q.
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        world::World w(fixtures::random_population(20, 1000 + trial));
        const auto me = add_static(w, offset(w.ref(), rng.uniform(-2000, 2000), rng.uniform(-2000, 2000)),
                                   {PageId{1}, PageId{2}});
        const auto policy = random_policy(rng);
        Service svc(w, with_policy(policy));
        const auto s = svc.login(me);
        const auto here = w.position_at(svc.user_of(s), 0.0);
        for (const auto& e : svc.nearby(s, 1e5)) {
            const auto& truth = w.user(e.user_id);
            CHECK(e.distance_m.has_value() == policy.share_distance);
            CHECK(e.first_name.has_value() == policy.share_first_name);
            CHECK(e.fuzzy_birthdate.has_value() == (policy.birthdate_mode != world::BirthdateMode::Hidden));
            CHECK(e.common_pages.has_value() == (policy.interests_mode == world::InterestsMode::Pages));
            CHECK(e.common_categories.has_value() == (policy.interests_mode == world::InterestsMode::Categories));
            CHECK(e.social_id.has_value() == policy.share_social_id);
            if (e.distance_m) {
                const double d = geo::haversine_m(here, w.position_at(e.user_id, 0.0));
                if (policy.distance_quantum_m == 0.0) {
                    CHECK(*e.distance_m == d);
                } else {
                    CHECK(*e.distance_m <= d);
                    CHECK(d < *e.distance_m + policy.distance_quantum_m);
                }
            }
            if (e.fuzzy_birthdate && policy.birthdate_mode == world::BirthdateMode::Fuzzy15d) {
                const auto gap = (*e.fuzzy_birthdate - truth.true_birthdate).count();
                CHECK(std::abs(gap) <= 7);
            }
            if (e.first_name) CHECK(*e.first_name == truth.first_name);
        }
    }
}
