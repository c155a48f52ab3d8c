#include "proxsim/protocol.hpp"

#include "proxsim/error.hpp"

namespace proxsim::protocol {
namespace {

const json& require(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) throw BadRequestError(std::string("missing field '") + key + "'");
    return *it;
}

double require_number(const json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number()) throw BadRequestError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t require_id(const json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw BadRequestError(std::string("field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

} // namespace

json to_json(const service::NearbyEntry& e) {
    json j = json::object();
    j["user_id"] = e.user_id.value;
    if (e.first_name) j["first_name"] = *e.first_name;
    if (e.distance_m) j["distance_m"] = *e.distance_m;
    if (e.fuzzy_birthdate) j["fuzzy_birthdate"] = world::format_date(*e.fuzzy_birthdate);
    if (e.common_pages) {
        json arr = json::array();
        for (auto p : *e.common_pages) arr.push_back(p.value);
        j["common_likes"] = std::move(arr);
    } else if (e.common_categories) {
        j["common_likes"] = *e.common_categories;
    }
    if (e.social_id) j["social_id"] = e.social_id->value;
    j["last_active_t"] = e.last_active_t;
    return j;
}

service::NearbyEntry entry_from_json(const json& j) {
    if (!j.is_object()) throw BadRequestError("entry must be an object");
    service::NearbyEntry e;
    e.user_id = UserId{require_id(j, "user_id")};
    if (j.contains("first_name")) e.first_name = j.at("first_name").get<std::string>();
    if (j.contains("distance_m")) e.distance_m = require_number(j, "distance_m");
    if (j.contains("fuzzy_birthdate")) {
        e.fuzzy_birthdate = world::parse_date(j.at("fuzzy_birthdate").get<std::string>());
    }
    if (j.contains("common_likes")) {
        const auto& arr = j.at("common_likes");
        if (!arr.is_array()) throw BadRequestError("common_likes must be an array");
        // An empty list is ambiguous on the wire; it decodes as pages.
        if (arr.empty() || arr.front().is_number()) {
            std::set<PageId> pages;
            for (const auto& v : arr) pages.insert(PageId{v.get<std::uint64_t>()});
            e.common_pages = std::move(pages);
        } else {
            std::set<std::string> cats;
            for (const auto& v : arr) cats.insert(v.get<std::string>());
            e.common_categories = std::move(cats);
        }
    }
    if (j.contains("social_id")) e.social_id = SocialId{require_id(j, "social_id")};
    e.last_active_t = require_number(j, "last_active_t");
    return e;
}

json ok_response(json payload) {
    json j = json::object();
    j["ok"] = true;
    for (auto& [k, v] : payload.items()) j[k] = v;
    return j;
}

json error_response(const std::string& code, const std::string& message) {
    return json{{"ok", false}, {"error", code}, {"message", message}};
}

json Connection::handle(const json& request) {
    try {
        if (!request.is_object()) throw BadRequestError("request must be a JSON object");
        const auto& op_field = require(request, "op");
        if (!op_field.is_string()) throw BadRequestError("field 'op' must be a string");
        const auto op = op_field.get<std::string>();

        if (op == "login") {
            const auto& tok = require(request, "token");
            if (!tok.is_string()) throw BadRequestError("field 'token' must be a string");
            const auto s = svc_.login(tok.get<std::string>());
            session_ = s;
            return ok_response({{"user_id", svc_.user_of(s).value}});
        }
        if (op != "nearby" && op != "update_location" && op != "profile") {
            throw BadRequestError("unknown op '" + op + "'");
        }
        if (!session_) throw AuthError("login required");

        if (op == "nearby") {
            const double radius = require_number(request, "radius_m");
            json users = json::array();
            for (const auto& e : svc_.nearby(*session_, radius)) users.push_back(to_json(e));
            return ok_response({{"users", std::move(users)}});
        }
        if (op == "update_location") {
            const double lat = require_number(request, "lat");
            const double lon = require_number(request, "lon");
            svc_.update_location(*session_, geo::GeoPoint{lat, lon});
            return ok_response();
        }
        // profile
        const UserId target{require_id(request, "user_id")};
        return ok_response({{"user", to_json(svc_.profile(*session_, target))}});
    } catch (const AuthError& e) {
        return error_response("auth", e.what());
    } catch (const NotFoundError& e) {
        return error_response("not_found", e.what());
    } catch (const RateError& e) {
        return error_response("rate", e.what());
    } catch (const Error& e) {
        return error_response("bad_request", e.what());
    } catch (const json::exception& e) {
        return error_response("bad_request", e.what());
    }
}

std::string Connection::handle_line(std::string_view line) {
    json request;
    try {
        request = json::parse(line);
    } catch (const json::parse_error& e) {
        return error_response("bad_request", "malformed JSON").dump();
    }
    return handle(request).dump();
}

} // namespace proxsim::protocol
