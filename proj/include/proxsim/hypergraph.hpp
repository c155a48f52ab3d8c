#pragma once

// User footprint as a hypergraph: events are nodes, selectors define the
// hyperedges. A selector that matches nothing yet is kept pending, outside
// the edge set, until some event satisfies it.

#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "proxsim/geo.hpp"
#include "proxsim/ids.hpp"
#include "proxsim/world.hpp"

namespace proxsim::hypergraph {

enum class EventKind { LocationUpdate, Like, AppInteraction };

const char* to_string(EventKind k);

struct LocationPayload {
    geo::GeoPoint position;
};
struct LikePayload {
    PageId page;
};
struct InteractionPayload {
    std::string data; // opaque
};
using Payload = std::variant<LocationPayload, LikePayload, InteractionPayload>;

struct EventNode {
    EventId event_id;
    IdentityId identity;
    EventKind kind = EventKind::LocationUpdate;
    Payload payload;
    double t_s = 0.0;
};

EventNode location_event(EventId id, IdentityId who, geo::GeoPoint p, double t_s);
EventNode like_event(EventId id, IdentityId who, PageId page, double t_s);
EventNode interaction_event(EventId id, IdentityId who, std::string data, double t_s);

/// Events at distance <= r_m from center with t0_s <= t <= t1_s.
struct WithinRadius {
    geo::GeoPoint center;
    double r_m = 0.0;
    double t0_s = 0.0;
    double t1_s = 0.0;
};
struct LikesPage {
    PageId page;
};
struct IsIdentity {
    IdentityId identity;
};

struct Selector {
    SelectorId selector_id;
    std::variant<WithinRadius, LikesPage, IsIdentity> predicate;
};

/// Throws ValidationError for bad parameters (r_m <= 0, t1 < t0, ...).
void validate(const Selector& s);
void validate(const EventNode& e);

bool satisfies(const Selector& s, const EventNode& e);

enum class Combine { And, Or };

class Hypergraph {
public:
    /// Adds the event to X and to every edge whose selector it satisfies.
    /// Throws DuplicateIdError (graph unchanged) or ValidationError.
    void ingest(const EventNode& e);

    /// Creates the edge of all existing events satisfying the selector.
    /// With no match yet the selector is pending and not part of E.
    /// Throws DuplicateIdError or ValidationError.
    void define_selector(const Selector& s);

    /// Identities in the intersection (And) or union (Or) of the identity
    /// projections of the named selectors' edges. A pending selector
    /// projects to the empty set. Throws UnknownSelectorError, or
    /// ValidationError for an empty list.
    std::set<IdentityId> query(std::span<const SelectorId> selectors, Combine combine) const;

    std::size_t node_count() const { return nodes_.size(); }
    const EventNode& node(EventId id) const;
    /// E: only non-empty edges.
    const std::map<SelectorId, std::set<EventId>>& edges() const { return edges_; }
    std::set<SelectorId> pending() const;
    const Selector& selector(SelectorId id) const;
    /// Earliest ingested event, if any.
    const EventNode* root() const;

    /// Immutable copy for concurrent readers.
    std::shared_ptr<const Hypergraph> snapshot() const { return std::make_shared<const Hypergraph>(*this); }

    /// Throws std::logic_error when E contains an empty or non-matching
    /// edge, or an edge misses a matching event.
    void check_invariants() const;

    /// One JSON object per line: events in insertion order, then edges
    /// (pending selectors included with "pending":true).
    void export_jsonl(std::ostream& out) const;

private:
    std::map<EventId, EventNode> nodes_;
    std::vector<EventId> order_;
    std::map<SelectorId, Selector> selectors_;
    std::map<SelectorId, std::set<EventId>> edges_;
};

/// Events a population leaves behind: a location update per user at each
/// of `times`, and a like event at t = 0 per liked page. Identity ids are
/// user ids; event ids are assigned from 1 in that order.
std::vector<EventNode> footprint(const world::Population& pop, std::span<const double> times);

} // namespace proxsim::hypergraph
