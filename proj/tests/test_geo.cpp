#include <cmath>
#include <numbers>

#include "doctest.h"
#include "proxsim/error.hpp"
#include "proxsim/geo.hpp"
#include "proxsim/rng.hpp"

using namespace proxsim;
using geo::GeoPoint;

namespace {

// Independent great-circle oracle: spherical law of cosines.
double law_of_cosines_m(GeoPoint a, GeoPoint b) {
    const double k = std::numbers::pi / 180.0;
    const double c = std::sin(a.lat_deg * k) * std::sin(b.lat_deg * k) +
                     std::cos(a.lat_deg * k) * std::cos(b.lat_deg * k) *
                         std::cos((b.lon_deg - a.lon_deg) * k);
    return geo::kEarthRadiusM * std::acos(std::min(1.0, std::max(-1.0, c)));
}

// Uniform point within `radius_m` of `ref`, built with the independent
// destination formula rather than from_enu.
GeoPoint random_near(Rng& rng, GeoPoint ref, double radius_m) {
    const double d = radius_m * std::sqrt(rng.uniform01()) / geo::kEarthRadiusM;
    const double brg = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double k = std::numbers::pi / 180.0;
    const double p0 = ref.lat_deg * k;
    const double p = std::asin(std::sin(p0) * std::cos(d) + std::cos(p0) * std::sin(d) * std::cos(brg));
    const double l = ref.lon_deg * k + std::atan2(std::sin(brg) * std::sin(d) * std::cos(p0),
                                                  std::cos(d) - std::sin(p0) * std::sin(p));
    return GeoPoint::make(p / k, l / k);
}

const GeoPoint kBarcelona{41.3851, 2.1734};

} // namespace

TEST_CASE("GeoPoint validation and longitude wrapping") {
    CHECK(GeoPoint::make(10.0, 180.0).lon_deg == doctest::Approx(-180.0));
    CHECK(GeoPoint::make(10.0, 190.0).lon_deg == doctest::Approx(-170.0));
    CHECK(GeoPoint::make(10.0, -540.0).lon_deg == doctest::Approx(-180.0));
    CHECK_THROWS_AS(GeoPoint::make(90.5, 0.0), ValidationError);
    CHECK_THROWS_AS(GeoPoint::make(NAN, 0.0), ValidationError);
    CHECK_THROWS_AS(geo::validate(GeoPoint{0.0, 180.0}), ValidationError);
    CHECK_NOTHROW(geo::validate(GeoPoint{-90.0, -180.0}));
}

TEST_CASE("to_enu examples") {
    const auto origin = geo::to_enu(kBarcelona, kBarcelona);
    CHECK(origin.x_m == 0.0);
    CHECK(origin.y_m == 0.0);

    const GeoPoint north{kBarcelona.lat_deg + 0.001, kBarcelona.lon_deg};
    const auto n = geo::to_enu(north, kBarcelona);
    CHECK(n.x_m == 0.0);
    CHECK(n.y_m == doctest::Approx(111.19).epsilon(1e-4));
    // haversine oracle on the same pair
    CHECK(n.y_m == doctest::Approx(geo::haversine_m(north, kBarcelona)).epsilon(1e-9));

    const GeoPoint east{kBarcelona.lat_deg + 0.01, kBarcelona.lon_deg + 0.02};
    const GeoPoint west{kBarcelona.lat_deg + 0.01, kBarcelona.lon_deg - 0.02};
    const auto e = geo::to_enu(east, kBarcelona);
    const auto w = geo::to_enu(west, kBarcelona);
    CHECK(e.x_m > 0.0);
    CHECK(w.x_m == doctest::Approx(-e.x_m).epsilon(1e-9));
    CHECK(w.y_m == doctest::Approx(e.y_m).epsilon(1e-9));
}

TEST_CASE("to_enu errors") {
    CHECK_THROWS_AS(geo::to_enu(GeoPoint{91.0, 0.0}, kBarcelona), ValidationError);
    CHECK_THROWS_AS(geo::to_enu(GeoPoint{40.4168, -3.7038}, kBarcelona), RegimeError);
}

TEST_CASE("from_enu examples") {
    CHECK(geo::from_enu(geo::EnuPoint{0.0, 0.0, kBarcelona}) == kBarcelona);
    const auto p = geo::from_enu(geo::EnuPoint{0.0, 111.19508023353292, kBarcelona});
    CHECK(p.lat_deg == doctest::Approx(kBarcelona.lat_deg + 0.001).epsilon(1e-12));
    CHECK(p.lon_deg == doctest::Approx(kBarcelona.lon_deg).epsilon(1e-12));
    CHECK_THROWS_AS(geo::from_enu(geo::EnuPoint{INFINITY, 0.0, kBarcelona}), ValidationError);
}

TEST_CASE("haversine examples") {
    CHECK(geo::haversine_m(kBarcelona, kBarcelona) == 0.0);
    const GeoPoint madrid{40.4168, -3.7038};
    const double d = geo::haversine_m(kBarcelona, madrid);
    CHECK(d == doctest::Approx(law_of_cosines_m(kBarcelona, madrid)).epsilon(1e-7));
    CHECK(d == doctest::Approx(504600.0).epsilon(0.005));
    CHECK(geo::haversine_m(madrid, kBarcelona) == d);
}

TEST_CASE("property: round trip within 0.01 m over 10^4 points within 50 km") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const GeoPoint ref = GeoPoint::make(rng.uniform(-70.0, 70.0), rng.uniform(-180.0, 180.0));
        const GeoPoint p = random_near(rng, ref, 50'000.0);
        const GeoPoint back = geo::from_enu(geo::to_enu(p, ref));
        REQUIRE(geo::haversine_m(p, back) < 0.01);
    }
}

TEST_CASE("property: planar distance tracks great-circle distance within 0.1% inside 20 km") {
    Rng rng(11);
    for (const GeoPoint ref : {kBarcelona, GeoPoint{0.0, 0.0}, GeoPoint{64.1, -21.9}}) {
        for (int i = 0; i < 3000; ++i) {
            const GeoPoint a = random_near(rng, ref, 20'000.0);
            const GeoPoint b = random_near(rng, ref, 20'000.0);
            const double truth = geo::haversine_m(a, b);
            if (truth < 1.0) continue;
            const double planar = geo::planar_distance_m(geo::to_enu(a, ref), geo::to_enu(b, ref));
            REQUIRE(std::abs(planar - truth) / truth < 1e-3);
        }
    }
}

TEST_CASE("property: haversine metric axioms") {
    Rng rng(13);
    for (int i = 0; i < 5000; ++i) {
        const GeoPoint a = GeoPoint::make(rng.uniform(-89.0, 89.0), rng.uniform(-180.0, 180.0));
        const GeoPoint b = GeoPoint::make(rng.uniform(-89.0, 89.0), rng.uniform(-180.0, 180.0));
        const GeoPoint c = GeoPoint::make(rng.uniform(-89.0, 89.0), rng.uniform(-180.0, 180.0));
        const double ab = geo::haversine_m(a, b);
        REQUIRE(ab >= 0.0);
        REQUIRE(ab == geo::haversine_m(b, a));
        REQUIRE(geo::haversine_m(a, a) == 0.0);
        REQUIRE(ab <= geo::haversine_m(a, c) + geo::haversine_m(c, b) + 1e-6);
    }
}

TEST_CASE("antimeridian crossing stays local") {
    const GeoPoint ref{10.0, 179.999};
    const GeoPoint p = GeoPoint::make(10.0, -179.999);
    const auto e = geo::to_enu(p, ref);
    CHECK(e.x_m > 0.0);
    CHECK(e.x_m == doctest::Approx(geo::haversine_m(p, ref)).epsilon(1e-6));
    CHECK(geo::haversine_m(geo::from_enu(e), p) < 0.01);
}
