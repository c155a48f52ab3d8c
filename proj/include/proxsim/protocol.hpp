#pragma once

// Newline-delimited JSON protocol of the proximity service.
//
//   request:  {"op":"login"|"nearby"|"update_location"|"profile",
//              "token":..., "radius_m":..., "lat":..., "lon":..., "user_id":...}
//   response: {"ok":true, ...payload} | {"ok":false, "error":"auth|not_found|rate|bad_request"}
//
// A connection is bound to the session its last successful login created.
// Payloads: login -> {"user_id"}, nearby -> {"users":[entry...]},
// profile -> {"user":entry}, update_location -> {}.
//
// Entry fields: user_id, first_name, distance_m, fuzzy_birthdate
// ("YYYY-MM-DD"), common_likes (page ids, or category names under the
// categories interests mode), social_id, last_active_t. Fields disabled by
// the policy are omitted.

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "proxsim/service.hpp"

namespace proxsim::protocol {

using json = nlohmann::json;

json to_json(const service::NearbyEntry& e);
/// Throws BadRequestError on a structurally invalid entry.
service::NearbyEntry entry_from_json(const json& j);

json ok_response(json payload = json::object());
json error_response(const std::string& code, const std::string& message);

/// Protocol state of one client connection.
class Connection {
public:
    explicit Connection(service::Service& svc) : svc_(svc) {}

    /// Handles one request line and returns the response line (no newline).
    /// Never throws for client errors; malformed input yields bad_request.
    std::string handle_line(std::string_view line);
    json handle(const json& request);

    std::optional<service::SessionId> session() const { return session_; }

private:
    service::Service& svc_;
    std::optional<service::SessionId> session_;
};

} // namespace proxsim::protocol
