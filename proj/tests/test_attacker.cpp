#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "proxsim/attacker.hpp"
#include "proxsim/error.hpp"

using namespace proxsim;
using namespace proxsim::attacker;
using fixtures::offset;
using fixtures::Scene;

namespace {

world::DisclosurePolicy quantized(double q) {
    auto p = world::tinder_policy();
    p.distance_quantum_m = q;
    return p;
}

double dist(const geo::EnuPoint& a, const geo::EnuPoint& b) { return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m); }

// Target somewhere in a 3 km field; attacker anchor within `prior_m` of it.
struct Placed {
    geo::EnuPoint target;
    geo::EnuPoint anchor;
};

Placed place(Rng& rng, double prior_m) {
    const double tx = rng.uniform(-1500.0, 1500.0), ty = rng.uniform(-1500.0, 1500.0);
    const double off = prior_m * std::sqrt(rng.uniform01());
    const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {{tx, ty, {}}, {tx + off * std::cos(dir), ty + off * std::sin(dir), {}}};
}

world::Trajectory stationary_at(const geo::EnuPoint& p) {
    const auto ref = world::BoundingBox{}.center();
    return world::Trajectory::stationary(offset(ref, p.x_m, p.y_m), 0.0, 86400.0);
}

world::Trajectory commuter(std::uint64_t seed) {
    world::TrajectoryTemplate tpl;
    tpl.kind = world::TrajectoryKind::Commuter;
    return world::make_trajectory(tpl, world::BoundingBox{}.center(), 86400.0, seed);
}

} // namespace

TEST_CASE("localize: exact distances, 4 probes") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pl = place(rng, 500.0);
        Scene sc(stationary_at(pl.target), quantized(0.0));
        ServiceChannel ch(*sc.svc, sc.attacker_token);
        Attacker atk(ch, sc.world->ref(), pl.anchor);
        REQUIRE_FALSE(atk.discover(1e5).empty());
        auto plan = ProbePlan::ring(4, 1000.0);
        plan.phase_rad = rng.uniform(0.0, 1.0);
        const auto est = atk.localize(sc.target, plan, {});
        CHECK(dist(est.p_hat, sc.truth(0.0)) < 0.5);
        CHECK(atk.last_samples().size() == 4);
    }
}

TEST_CASE("localize: 16 probes at 100 m quantum, median error within 50 m") {
    Rng rng(12);
    std::vector<double> err;
    for (int trial = 0; trial < 100; ++trial) {
        const auto pl = place(rng, 500.0);
        Scene sc(stationary_at(pl.target), quantized(100.0));
        ServiceChannel ch(*sc.svc, sc.attacker_token);
        Attacker atk(ch, sc.world->ref(), pl.anchor);
        atk.discover(1e5);
        auto plan = ProbePlan::ring(16, 1000.0);
        plan.phase_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
        mlat::SolverConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(trial);
        err.push_back(dist(atk.localize(sc.target, plan, cfg).p_hat, sc.truth(0.0)));
    }
    MESSAGE("median error " << oracle::median(err) << " m");
    CHECK(oracle::median(err) <= 50.0);
}

TEST_CASE("localize: samples come only from what the service disclosed") {
    Scene sc(stationary_at({300.0, -200.0, {}}), quantized(100.0));
    ServiceChannel ch(*sc.svc, sc.attacker_token);
    Attacker atk(ch, sc.world->ref(), {0.0, 0.0, {}});
    atk.discover(1e5);
    atk.localize(sc.target, ProbePlan::ring(8, 800.0), {});
    for (const auto& s : atk.last_samples()) {
        const double truth = geo::haversine_m(geo::from_enu(s.observer), sc.world->position_at(sc.target, 0.0));
        CHECK(s.reported_m == world::quantize_distance(truth, 100.0));
        CHECK(std::fmod(s.reported_m, 100.0) == 0.0);
    }
}

TEST_CASE("localize: preconditions and policy") {
    Scene sc(stationary_at({0.0, 0.0, {}}), world::tinder_policy());
    ServiceChannel ch(*sc.svc, sc.attacker_token);
    Attacker atk(ch, sc.world->ref(), {100.0, 0.0, {}});

    CHECK_THROWS_AS(atk.localize(sc.target, ProbePlan::ring(16, 1000.0), {}), NotFoundError);
    atk.discover(1e5);
    CHECK_THROWS_AS(atk.localize(sc.target, ProbePlan::ring(2, 1000.0), {}), UnderdeterminedError);
    CHECK_THROWS_AS(atk.localize(sc.target, ProbePlan::ring(4, -1.0), {}), ValidationError);
    CHECK_THROWS_AS(atk.localize(sc.target, ProbePlan::fixed({{0, 0, {}}, {100, 0, {}}, {200, 0, {}}}), {}),
                    DegenerateGeometryError);

    Scene g(stationary_at({0.0, 0.0, {}}), world::grindr_policy());
    ServiceChannel gch(*g.svc, g.attacker_token);
    Attacker gatk(gch, g.world->ref(), {100.0, 0.0, {}});
    gatk.discover(1e5);
    CHECK_THROWS_AS(gatk.localize(g.target, ProbePlan::ring(16, 1000.0), {}), PolicyError);
}

TEST_CASE("localize: adaptive and fixed plans") {
    Scene sc(stationary_at({420.0, 130.0, {}}), quantized(0.0));
    ServiceChannel ch(*sc.svc, sc.attacker_token);
    Attacker atk(ch, sc.world->ref(), {0.0, 0.0, {}});
    atk.discover(1e5);
    auto plan = ProbePlan::ring(12, 1500.0);
    plan.strategy = ProbeStrategy::Adaptive;
    CHECK(dist(atk.localize(sc.target, plan, {}).p_hat, sc.truth(0.0)) < 0.5);
    CHECK(atk.last_samples().size() == 12);

    const auto fixed = ProbePlan::fixed({{0, 0, {}}, {1000, 0, {}}, {0, 1000, {}}, {-700, -700, {}}});
    CHECK(dist(atk.localize(sc.target, fixed, {}).p_hat, sc.truth(0.0)) < 0.5);
}

TEST_CASE("probe_points: ring spacing") {
    const auto pts = probe_points(ProbePlan::ring(8, 500.0), geo::EnuPoint{10.0, 20.0, {}});
    REQUIRE(pts.size() == 8);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        CHECK(std::hypot(pts[k].x_m - 10.0, pts[k].y_m - 20.0) == doctest::Approx(500.0));
        const auto& n = pts[(k + 1) % pts.size()];
        CHECK(std::hypot(n.x_m - pts[k].x_m, n.y_m - pts[k].y_m) ==
              doctest::Approx(2 * 500.0 * std::sin(std::numbers::pi / 8)));
    }
}

TEST_CASE("trace records probes, polls and results") {
    Scene sc(stationary_at({0.0, 0.0, {}}), world::tinder_policy());
    ServiceChannel ch(*sc.svc, sc.attacker_token);
    Attacker atk(ch, sc.world->ref(), {100.0, 0.0, {}});
    atk.discover(1e5);
    atk.localize(sc.target, ProbePlan::ring(5, 1000.0), {});
    const auto& ev = atk.trace().events();
    REQUIRE(ev.size() == 11);
    CHECK(ev.back().kind == report::EventKind::LocalizeResult);
    CHECK(ev.back().refs.size() == 5);
    CHECK(std::count_if(ev.begin(), ev.end(), [](auto& e) { return e.kind == report::EventKind::ProfilePoll; }) == 5);
}

TEST_CASE("track: stationary target") {
    Scene sc(stationary_at({250.0, 250.0, {}}), quantized(100.0));
    ServiceChannel ch(*sc.svc, sc.attacker_token);
    Attacker atk(ch, sc.world->ref(), {0.0, 0.0, {}});
    atk.discover(1e5);
    const auto rec = atk.track(sc.target, 600.0, 5400.0, ProbePlan::ring(16, 1000.0), {});
    REQUIRE(rec.estimates.size() == 10);
    CHECK(rec.gaps.empty());
    double mx = 0, my = 0, worst = 0;
    for (const auto& f : rec.estimates) {
        mx += f.estimate.p_hat.x_m / 10;
        my += f.estimate.p_hat.y_m / 10;
        worst = std::max(worst, dist(f.estimate.p_hat, sc.truth(f.t_s)));
    }
    for (std::size_t k = 1; k < rec.estimates.size(); ++k) CHECK(rec.estimates[k - 1].t_s < rec.estimates[k].t_s);
    // Each fix is within `worst` of the truth, so within 2*worst of the mean.
    for (const auto& f : rec.estimates) CHECK(std::hypot(f.estimate.p_hat.x_m - mx, f.estimate.p_hat.y_m - my) <= 2 * worst);

    const auto pois = extract_pois(rec);
    REQUIRE(pois.size() == 1);
    CHECK(pois[0].center.x_m == doctest::Approx(mx));
    CHECK(pois[0].center.y_m == doctest::Approx(my));
    CHECK(pois[0].dwell_s == 5400.0);

    std::ostringstream csv;
    write_track_csv(csv, rec);
    const auto text = csv.str();
    CHECK(text.rfind("t_s,est_x_m,est_y_m,residual_m\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 11);
}

TEST_CASE("track: duration shorter than interval gives a single fix") {
    Scene sc(stationary_at({0.0, 0.0, {}}), world::tinder_policy());
    ServiceChannel ch(*sc.svc, sc.attacker_token);
    Attacker atk(ch, sc.world->ref(), {100.0, 0.0, {}});
    atk.discover(1e5);
    CHECK(atk.track(sc.target, 3600.0, 60.0, ProbePlan::ring(8, 1000.0), {}).estimates.size() == 1);
    CHECK_THROWS_AS(atk.track(sc.target, 0.0, 60.0, ProbePlan::ring(8, 1000.0), {}), ValidationError);
}

TEST_CASE("track: rate-limited fixes become gaps") {
    service::ServiceConfig base;
    base.teleport_limit_m = 1200.0;
    Scene sc(stationary_at({0.0, 0.0, {}}), world::tinder_policy(), {}, base);
    ServiceChannel ch(*sc.svc, sc.attacker_token);
    Attacker atk(ch, sc.world->ref(), {0.0, 0.0, {}});
    atk.discover(1e5);
    // A 4-point ring of radius 1 km: adjacent probes are 1414 m apart.
    const auto rec = atk.track(sc.target, 600.0, 1200.0, ProbePlan::ring(4, 1000.0), {});
    CHECK(rec.estimates.empty());
    REQUIRE(rec.gaps.size() == 3);
    CHECK(rec.gaps[0].error.rfind("rate", 0) == 0);
}

TEST_CASE("track: commuter shows home and work stays") {
    Scene sc(commuter(5), quantized(100.0));
    ServiceChannel ch(*sc.svc, sc.attacker_token);
    Attacker atk(ch, sc.world->ref(), {150.0, -100.0, {}});
    atk.discover(1e5);
    const auto rec = atk.track(sc.target, 3600.0, 17 * 3600.0, ProbePlan::ring(16, 1000.0), {});
    REQUIRE(rec.estimates.size() == 18);

    // Ground truth stays: fixes where the true position equals home or work.
    const auto home = sc.truth(0.0), work = sc.truth(12 * 3600.0);
    CHECK(dist(home, work) == doctest::Approx(5000.0).epsilon(1e-3));
    int at_home = 0, at_work = 0;
    for (const auto& f : rec.estimates) {
        const auto t = sc.truth(f.t_s);
        if (dist(t, home) < 1.0) {
            ++at_home;
            CHECK(dist(f.estimate.p_hat, home) < 200.0);
        }
        if (dist(t, work) < 1.0) {
            ++at_work;
            CHECK(dist(f.estimate.p_hat, work) < 200.0);
        }
    }
    CHECK(at_home == 9);
    CHECK(at_work == 9);

    const auto pois = extract_pois(rec, 200.0, 2 * 3600.0);
    REQUIRE(pois.size() == 2);
    CHECK(dist(pois[0].center, home) < 200.0);
    CHECK(dist(pois[1].center, work) < 200.0);
}

TEST_CASE("extract_pois: moving target has no stay") {
    TrackRecord rec;
    for (int k = 0; k < 20; ++k) {
        rec.estimates.push_back(Fix{k * 600.0, mlat::PositionEstimate{{k * 300.0, 0.0, {}}, 0.0, 0, 0}});
    }
    CHECK(extract_pois(rec, 200.0, 1800.0).empty());
    CHECK_THROWS_AS(extract_pois(TrackRecord{}, 200.0, 1800.0), ValidationError);
}

TEST_CASE("extract_pois: monotone in dwell, and in radius between jitter and stay separation") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        // Stays at sites 5 km apart with 0-60 m jitter, random lengths.
        TrackRecord rec;
        double t = 0.0;
        const int stays = 1 + static_cast<int>(rng.below(5));
        for (int s = 0; s < stays; ++s) {
            const int n = 1 + static_cast<int>(rng.below(12));
            for (int k = 0; k < n; ++k) {
                const double r = rng.uniform(0.0, 60.0), a = rng.uniform(0.0, 2 * std::numbers::pi);
                rec.estimates.push_back(
                    Fix{t, mlat::PositionEstimate{{s * 5000.0 + r * std::cos(a), r * std::sin(a), {}}, 0.0, 0, 0}});
                t += rng.uniform(300.0, 3600.0);
            }
        }
        std::size_t prev = SIZE_MAX;
        for (double dwell : {0.0, 600.0, 1800.0, 3600.0, 7200.0, 14400.0, 1e9}) {
            const auto n = extract_pois(rec, 200.0, dwell).size();
            CHECK(n <= prev);
            prev = n;
        }
        std::size_t last = 0;
        for (double radius : {150.0, 200.0, 500.0, 1000.0, 2000.0}) {
            const auto n = extract_pois(rec, radius, 1800.0).size();
            CHECK(n >= last);
            last = n;
        }
    }
}

TEST_CASE("attacker code has no path to ground truth") {
    // The only world access a client has is the Channel. Check the
    // implementation does not reach around it.
    for (const char* file : {"/src/attacker.cpp", "/include/proxsim/attacker.hpp"}) {
        std::ifstream in(std::string(PROXSIM_SOURCE_DIR) + file);
        REQUIRE(in.good());
        std::stringstream ss;
        ss << in.rdbuf();
        const auto src = ss.str();
        for (const char* banned : {"inspect(", "position_at", "World", "true_birthdate", "trajectory", "world_"}) {
            INFO(file << " mentions " << banned);
            CHECK(src.find(banned) == std::string::npos);
        }
    }
}
