#pragma once

// Geodetic <-> local plane conversion on a spherical Earth.
//
// The local frame is an azimuthal equidistant projection centred on a
// reference point: distances and bearings from the reference are exact,
// and pairwise distances between points within 20 km of it are distorted
// by less than 1e-5 relative. x grows east, y grows north.

namespace proxsim::geo {

/// Mean Earth radius in metres.
inline constexpr double kEarthRadiusM = 6371008.8;
/// Beyond this great-circle distance from the reference, to_enu refuses.
inline constexpr double kMaxLocalRangeM = 100'000.0;

struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;

    /// Validated constructor: latitude must lie in [-90, 90], longitude is
    /// wrapped into [-180, 180). Throws ValidationError on non-finite input
    /// or latitude out of range.
    static GeoPoint make(double lat_deg, double lon_deg);

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct EnuPoint {
    double x_m = 0.0;
    double y_m = 0.0;
    GeoPoint ref{};

    friend bool operator==(const EnuPoint&, const EnuPoint&) = default;
};

double normalize_lon_deg(double lon_deg);

/// Throws ValidationError unless `p` satisfies the GeoPoint invariants.
void validate(const GeoPoint& p);

/// Great-circle distance in metres.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

/// Project `p` into the local frame centred on `ref`.
/// Throws ValidationError for invalid points, RegimeError beyond 100 km.
EnuPoint to_enu(const GeoPoint& p, const GeoPoint& ref);

/// Inverse of to_enu. Throws ValidationError for non-finite offsets.
GeoPoint from_enu(const EnuPoint& p);

/// Planar distance; both points are assumed to share a reference.
double planar_distance_m(const EnuPoint& a, const EnuPoint& b);

} // namespace proxsim::geo
