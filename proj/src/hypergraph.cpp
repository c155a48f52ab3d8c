#include "proxsim/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "proxsim/error.hpp"

namespace proxsim::hypergraph {

const char* to_string(EventKind k) {
    switch (k) {
    case EventKind::LocationUpdate: return "location_update";
    case EventKind::Like: return "like";
    case EventKind::AppInteraction: return "app_interaction";
    }
    return "?";
}

EventNode location_event(EventId id, IdentityId who, geo::GeoPoint p, double t_s) {
    return EventNode{id, who, EventKind::LocationUpdate, LocationPayload{p}, t_s};
}

EventNode like_event(EventId id, IdentityId who, PageId page, double t_s) {
    return EventNode{id, who, EventKind::Like, LikePayload{page}, t_s};
}

EventNode interaction_event(EventId id, IdentityId who, std::string data, double t_s) {
    return EventNode{id, who, EventKind::AppInteraction, InteractionPayload{std::move(data)}, t_s};
}

void validate(const Selector& s) {
    if (const auto* w = std::get_if<WithinRadius>(&s.predicate)) {
        geo::validate(w->center);
        if (!(w->r_m > 0.0) || !std::isfinite(w->r_m)) throw ValidationError("selector radius must be > 0");
        if (std::isnan(w->t0_s) || std::isnan(w->t1_s) || w->t1_s < w->t0_s) {
            throw ValidationError("selector time window must satisfy t0 <= t1");
        }
    }
}

void validate(const EventNode& e) {
    const bool ok = (e.kind == EventKind::LocationUpdate && std::holds_alternative<LocationPayload>(e.payload)) ||
                    (e.kind == EventKind::Like && std::holds_alternative<LikePayload>(e.payload)) ||
                    (e.kind == EventKind::AppInteraction && std::holds_alternative<InteractionPayload>(e.payload));
    if (!ok) throw ValidationError("event payload does not match its kind");
    if (!std::isfinite(e.t_s)) throw ValidationError("event time must be finite");
    if (const auto* l = std::get_if<LocationPayload>(&e.payload)) geo::validate(l->position);
}

bool satisfies(const Selector& s, const EventNode& e) {
    if (const auto* w = std::get_if<WithinRadius>(&s.predicate)) {
        const auto* l = std::get_if<LocationPayload>(&e.payload);
        return l != nullptr && e.t_s >= w->t0_s && e.t_s <= w->t1_s &&
               geo::haversine_m(w->center, l->position) <= w->r_m;
    }
    if (const auto* lp = std::get_if<LikesPage>(&s.predicate)) {
        const auto* l = std::get_if<LikePayload>(&e.payload);
        return l != nullptr && l->page == lp->page;
    }
    return e.identity == std::get<IsIdentity>(s.predicate).identity;
}

void Hypergraph::ingest(const EventNode& e) {
    if (nodes_.count(e.event_id)) throw DuplicateIdError("event " + std::to_string(e.event_id.value) + " exists");
    validate(e);
    nodes_.emplace(e.event_id, e);
    order_.push_back(e.event_id);
    for (const auto& [id, sel] : selectors_) {
        if (satisfies(sel, e)) edges_[id].insert(e.event_id);
    }
}

void Hypergraph::define_selector(const Selector& s) {
    if (selectors_.count(s.selector_id)) {
        throw DuplicateIdError("selector " + std::to_string(s.selector_id.value) + " exists");
    }
    validate(s);
    selectors_.emplace(s.selector_id, s);
    std::set<EventId> members;
    for (const auto& [id, node] : nodes_) {
        if (satisfies(s, node)) members.insert(id);
    }
    if (!members.empty()) edges_.emplace(s.selector_id, std::move(members));
}

std::set<IdentityId> Hypergraph::query(std::span<const SelectorId> selectors, Combine combine) const {
    if (selectors.empty()) throw ValidationError("query needs at least one selector");
    for (auto id : selectors) {
        if (!selectors_.count(id)) throw UnknownSelectorError("unknown selector " + std::to_string(id.value));
    }
    const auto project = [&](SelectorId id) {
        std::set<IdentityId> out;
        const auto it = edges_.find(id);
        if (it == edges_.end()) return out;
        for (auto ev : it->second) out.insert(nodes_.at(ev).identity);
        return out;
    };
    auto acc = project(selectors[0]);
    for (std::size_t i = 1; i < selectors.size(); ++i) {
        const auto next = project(selectors[i]);
        std::set<IdentityId> merged;
        if (combine == Combine::And) {
            std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(),
                                  std::inserter(merged, merged.end()));
        } else {
            std::set_union(acc.begin(), acc.end(), next.begin(), next.end(), std::inserter(merged, merged.end()));
        }
        acc = std::move(merged);
    }
    return acc;
}

const EventNode& Hypergraph::node(EventId id) const {
    const auto it = nodes_.find(id);
    if (it == nodes_.end()) throw NotFoundError("unknown event " + std::to_string(id.value));
    return it->second;
}

std::set<SelectorId> Hypergraph::pending() const {
    std::set<SelectorId> out;
    for (const auto& [id, s] : selectors_) {
        if (!edges_.count(id)) out.insert(id);
    }
    return out;
}

const Selector& Hypergraph::selector(SelectorId id) const {
    const auto it = selectors_.find(id);
    if (it == selectors_.end()) throw UnknownSelectorError("unknown selector " + std::to_string(id.value));
    return it->second;
}

const EventNode* Hypergraph::root() const { return order_.empty() ? nullptr : &nodes_.at(order_.front()); }

void Hypergraph::check_invariants() const {
    for (const auto& [id, members] : edges_) {
        if (members.empty()) throw std::logic_error("empty hyperedge in E");
        const auto& sel = selectors_.at(id);
        for (auto ev : members) {
            const auto it = nodes_.find(ev);
            if (it == nodes_.end()) throw std::logic_error("hyperedge member outside X");
            if (!satisfies(sel, it->second)) throw std::logic_error("hyperedge member fails its selector");
        }
    }
    for (const auto& [id, sel] : selectors_) {
        const auto it = edges_.find(id);
        for (const auto& [ev, node] : nodes_) {
            if (satisfies(sel, node) && (it == edges_.end() || !it->second.count(ev))) {
                throw std::logic_error("matching event missing from its hyperedge");
            }
        }
    }
}

void Hypergraph::export_jsonl(std::ostream& out) const {
    using nlohmann::json;
    for (auto id : order_) {
        const auto& e = nodes_.at(id);
        json j{{"type", "event"}, {"event_id", e.event_id.value}, {"identity_id", e.identity.value},
               {"kind", to_string(e.kind)}, {"t", e.t_s}};
        if (const auto* l = std::get_if<LocationPayload>(&e.payload)) {
            j["lat"] = l->position.lat_deg;
            j["lon"] = l->position.lon_deg;
        } else if (const auto* p = std::get_if<LikePayload>(&e.payload)) {
            j["page_id"] = p->page.value;
        } else {
            j["data"] = std::get<InteractionPayload>(e.payload).data;
        }
        out << j.dump() << '\n';
    }
    for (const auto& [id, sel] : selectors_) {
        json j{{"type", "edge"}, {"selector_id", id.value}};
        if (const auto* w = std::get_if<WithinRadius>(&sel.predicate)) {
            j["selector"] = {{"within_radius",
                              {{"lat", w->center.lat_deg}, {"lon", w->center.lon_deg}, {"r_m", w->r_m},
                               {"t0", w->t0_s}, {"t1", w->t1_s}}}};
        } else if (const auto* l = std::get_if<LikesPage>(&sel.predicate)) {
            j["selector"] = {{"likes_page", l->page.value}};
        } else {
            j["selector"] = {{"identity", std::get<IsIdentity>(sel.predicate).identity.value}};
        }
        json members = json::array();
        const auto it = edges_.find(id);
        if (it != edges_.end()) {
            for (auto ev : it->second) members.push_back(ev.value);
        }
        j["members"] = std::move(members);
        j["pending"] = it == edges_.end();
        out << j.dump() << '\n';
    }
}

std::vector<EventNode> footprint(const world::Population& pop, std::span<const double> times) {
    std::vector<EventNode> out;
    std::uint64_t next = 1;
    for (const auto& u : pop.users) {
        const IdentityId who{u.user_id.value};
        for (double t : times) out.push_back(location_event(EventId{next++}, who, u.trajectory.position_at(t), t));
        for (auto p : u.likes) out.push_back(like_event(EventId{next++}, who, p, 0.0));
    }
    return out;
}

} // namespace proxsim::hypergraph
