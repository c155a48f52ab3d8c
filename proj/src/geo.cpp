#include "proxsim/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "proxsim/error.hpp"

namespace proxsim::geo {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double normalize_lon_rad(double lon) {
    lon = std::fmod(lon + std::numbers::pi, 2.0 * std::numbers::pi);
    if (lon < 0.0) lon += 2.0 * std::numbers::pi;
    return lon - std::numbers::pi;
}

// Central angle between two points, haversine form (stable at small angles).
double central_angle(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = a.lat_deg * kDegToRad;
    const double phi2 = b.lat_deg * kDegToRad;
    const double dphi = phi2 - phi1;
    const double dlam = normalize_lon_rad((b.lon_deg - a.lon_deg) * kDegToRad);
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlam / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::min(1.0, std::max(0.0, h));
    return 2.0 * std::asin(std::sqrt(h));
}

} // namespace

double normalize_lon_deg(double lon_deg) {
    double lon = std::fmod(lon_deg + 180.0, 360.0);
    if (lon < 0.0) lon += 360.0;
    lon -= 180.0;
    // fmod of a value just below a multiple of 360 can round up to +180.
    if (lon >= 180.0) lon -= 360.0;
    return lon;
}

void validate(const GeoPoint& p) {
    if (!std::isfinite(p.lat_deg) || !std::isfinite(p.lon_deg)) {
        throw ValidationError("non-finite coordinate");
    }
    if (p.lat_deg < -90.0 || p.lat_deg > 90.0) {
        std::ostringstream os;
        os << "latitude " << p.lat_deg << " outside [-90, 90]";
        throw ValidationError(os.str());
    }
    if (p.lon_deg < -180.0 || p.lon_deg >= 180.0) {
        std::ostringstream os;
        os << "longitude " << p.lon_deg << " outside [-180, 180)";
        throw ValidationError(os.str());
    }
}

GeoPoint GeoPoint::make(double lat_deg, double lon_deg) {
    if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg)) {
        throw ValidationError("non-finite coordinate");
    }
    GeoPoint p{lat_deg, normalize_lon_deg(lon_deg)};
    validate(p);
    return p;
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
    // Canonical argument order makes the result bit-for-bit symmetric.
    const bool swap = b.lat_deg < a.lat_deg || (b.lat_deg == a.lat_deg && b.lon_deg < a.lon_deg);
    return kEarthRadiusM * (swap ? central_angle(b, a) : central_angle(a, b));
}

EnuPoint to_enu(const GeoPoint& p, const GeoPoint& ref) {
    validate(p);
    validate(ref);
    const double c = central_angle(ref, p);
    const double range = kEarthRadiusM * c;
    if (range >= kMaxLocalRangeM) {
        std::ostringstream os;
        os << "point is " << range << " m from the frame reference (limit "
           << kMaxLocalRangeM << " m)";
        throw RegimeError(os.str());
    }
    if (c == 0.0) return EnuPoint{0.0, 0.0, ref};

    const double phi0 = ref.lat_deg * kDegToRad;
    const double phi = p.lat_deg * kDegToRad;
    const double dlam = normalize_lon_rad((p.lon_deg - ref.lon_deg) * kDegToRad);
    const double azimuth =
        std::atan2(std::sin(dlam) * std::cos(phi),
                   std::cos(phi0) * std::sin(phi) - std::sin(phi0) * std::cos(phi) * std::cos(dlam));
    return EnuPoint{range * std::sin(azimuth), range * std::cos(azimuth), ref};
}

GeoPoint from_enu(const EnuPoint& p) {
    if (!std::isfinite(p.x_m) || !std::isfinite(p.y_m)) {
        throw ValidationError("non-finite planar coordinate");
    }
    validate(p.ref);
    const double rho = std::hypot(p.x_m, p.y_m);
    if (rho == 0.0) return p.ref;

    const double c = rho / kEarthRadiusM;
    const double azimuth = std::atan2(p.x_m, p.y_m);
    const double phi0 = p.ref.lat_deg * kDegToRad;
    const double sin_phi =
        std::sin(phi0) * std::cos(c) + std::cos(phi0) * std::sin(c) * std::cos(azimuth);
    const double phi = std::asin(std::min(1.0, std::max(-1.0, sin_phi)));
    const double dlam = std::atan2(std::sin(azimuth) * std::sin(c) * std::cos(phi0),
                                   std::cos(c) - std::sin(phi0) * sin_phi);
    return GeoPoint{phi * kRadToDeg, normalize_lon_deg(p.ref.lon_deg + dlam * kRadToDeg)};
}

double planar_distance_m(const EnuPoint& a, const EnuPoint& b) {
    return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

} // namespace proxsim::geo
