#include <sstream>

#include "doctest.h"
#include "hg_oracle.hpp"
#include "json.hpp"
#include "proxsim/error.hpp"
#include "proxsim/hypergraph.hpp"

using namespace proxsim;
using namespace proxsim::hypergraph;

namespace {

const geo::GeoPoint kCentre{41.40, 2.15};

geo::GeoPoint north_of(const geo::GeoPoint& p, double m) {
    return geo::from_enu(geo::EnuPoint{0.0, m, p});
}

} // namespace

TEST_CASE("ingest") {
    Hypergraph g;
    g.define_selector({SelectorId{1}, LikesPage{PageId{7}}});
    g.define_selector({SelectorId{2}, IsIdentity{IdentityId{3}}});
    CHECK(g.edges().empty());
    CHECK(g.pending() == std::set<SelectorId>{SelectorId{1}, SelectorId{2}});

    g.ingest(location_event(EventId{1}, IdentityId{5}, kCentre, 0.0));
    CHECK(g.node_count() == 1);
    CHECK(g.edges().empty());
    CHECK(g.root()->event_id == EventId{1});

    g.ingest(like_event(EventId{2}, IdentityId{5}, PageId{7}, 1.0));
    REQUIRE(g.edges().count(SelectorId{1}));
    CHECK(g.edges().at(SelectorId{1}) == std::set<EventId>{EventId{2}});
    CHECK(g.pending() == std::set<SelectorId>{SelectorId{2}});

    CHECK_THROWS_AS(g.ingest(like_event(EventId{2}, IdentityId{9}, PageId{8}, 2.0)), DuplicateIdError);
    CHECK(g.node_count() == 2);
    CHECK(g.node(EventId{2}).identity == IdentityId{5});

    EventNode bad = like_event(EventId{3}, IdentityId{1}, PageId{1}, 0.0);
    bad.kind = EventKind::LocationUpdate;
    CHECK_THROWS_AS(g.ingest(bad), ValidationError);
    CHECK(g.node_count() == 2);
    g.check_invariants();
}

TEST_CASE("define_selector") {
    Hypergraph g;
    g.ingest(location_event(EventId{1}, IdentityId{1}, north_of(kCentre, 499.0), 10.0));
    g.ingest(location_event(EventId{2}, IdentityId{2}, north_of(kCentre, 501.0), 10.0));
    g.ingest(location_event(EventId{3}, IdentityId{3}, north_of(kCentre, 100.0), 99.0));
    g.ingest(interaction_event(EventId{4}, IdentityId{1}, "open", 11.0));

    g.define_selector({SelectorId{1}, WithinRadius{kCentre, 500.0, 0.0, 1000.0}});
    CHECK(g.edges().at(SelectorId{1}) == std::set<EventId>{EventId{1}, EventId{3}});
    g.define_selector({SelectorId{2}, WithinRadius{kCentre, 500.0, 0.0, 50.0}});
    CHECK(g.edges().at(SelectorId{2}) == std::set<EventId>{EventId{1}});

    g.define_selector({SelectorId{3}, LikesPage{PageId{42}}});
    CHECK(g.pending().count(SelectorId{3}));
    CHECK_FALSE(g.edges().count(SelectorId{3}));

    g.define_selector({SelectorId{4}, IsIdentity{IdentityId{1}}});
    CHECK(g.edges().at(SelectorId{4}) == std::set<EventId>{EventId{1}, EventId{4}});

    CHECK_THROWS_AS(g.define_selector({SelectorId{4}, IsIdentity{IdentityId{2}}}), DuplicateIdError);
    CHECK_THROWS_AS(g.define_selector({SelectorId{5}, WithinRadius{kCentre, 0.0, 0.0, 1.0}}), ValidationError);
    CHECK_THROWS_AS(g.define_selector({SelectorId{6}, WithinRadius{kCentre, 10.0, 5.0, 1.0}}), ValidationError);
    g.check_invariants();
}

TEST_CASE("query examples") {
    Hypergraph g;
    g.ingest(location_event(EventId{1}, IdentityId{1}, kCentre, 0.0));
    g.ingest(like_event(EventId{2}, IdentityId{1}, PageId{7}, 0.0));
    g.ingest(like_event(EventId{3}, IdentityId{2}, PageId{7}, 0.0));
    g.ingest(location_event(EventId{4}, IdentityId{3}, north_of(kCentre, 5000.0), 0.0));
    g.define_selector({SelectorId{1}, WithinRadius{kCentre, 500.0, 0.0, 100.0}});
    g.define_selector({SelectorId{2}, LikesPage{PageId{7}}});
    g.define_selector({SelectorId{3}, IsIdentity{IdentityId{3}}});
    g.define_selector({SelectorId{4}, LikesPage{PageId{8}}});

    const std::vector<SelectorId> both{SelectorId{1}, SelectorId{2}};
    CHECK(g.query(both, Combine::And) == std::set<IdentityId>{IdentityId{1}});
    CHECK(g.query(both, Combine::Or) == std::set<IdentityId>{IdentityId{1}, IdentityId{2}});
    const std::vector<SelectorId> one{SelectorId{2}};
    CHECK(g.query(one, Combine::Or) == std::set<IdentityId>{IdentityId{1}, IdentityId{2}});
    const std::vector<SelectorId> disjoint{SelectorId{1}, SelectorId{3}};
    CHECK(g.query(disjoint, Combine::And).empty());
    const std::vector<SelectorId> pending{SelectorId{4}};
    CHECK(g.query(pending, Combine::Or).empty());

    const std::vector<SelectorId> unknown{SelectorId{1}, SelectorId{99}};
    CHECK_THROWS_AS(g.query(unknown, Combine::And), UnknownSelectorError);
    CHECK_THROWS_AS(g.query(std::vector<SelectorId>{}, Combine::And), ValidationError);

    const auto snap = g.snapshot();
    g.ingest(like_event(EventId{5}, IdentityId{4}, PageId{8}, 1.0));
    CHECK(snap->query(pending, Combine::Or).empty());
    CHECK(g.query(pending, Combine::Or) == std::set<IdentityId>{IdentityId{4}});
}

TEST_CASE("export is one JSON object per line") {
    Hypergraph g;
    g.ingest(location_event(EventId{1}, IdentityId{1}, kCentre, 0.0));
    g.ingest(like_event(EventId{2}, IdentityId{1}, PageId{7}, 0.0));
    g.define_selector({SelectorId{1}, LikesPage{PageId{7}}});
    g.define_selector({SelectorId{2}, LikesPage{PageId{9}}});
    std::ostringstream out;
    g.export_jsonl(out);
    std::istringstream in(out.str());
    std::vector<nlohmann::json> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
    REQUIRE(lines.size() == 4);
    CHECK(lines[0]["kind"] == "location_update");
    CHECK(lines[1]["page_id"] == 7);
    CHECK(lines[2]["members"] == nlohmann::json::array({2}));
    CHECK(lines[3]["pending"] == true);
}

TEST_CASE("queries equal brute force on random populations") {
    int non_empty = 0;
    for (std::uint64_t seed = 1; seed <= 150; ++seed) {
        const auto c = hg_oracle::random_case(seed);
        const auto want = hg_oracle::brute_force(c);
        non_empty += want.empty() ? 0 : 1;
        const auto sel = hg_oracle::ids(c);
        for (bool selectors_first : {false, true}) {
            const auto g = hg_oracle::build(c, selectors_first);
            CHECK(g.query(sel, c.combine) == want);
            g.check_invariants();
            const auto a = g.query(sel, Combine::And), o = g.query(sel, Combine::Or);
            CHECK(std::includes(o.begin(), o.end(), a.begin(), a.end()));
        }
    }
    MESSAGE(non_empty << "/150 cases have a non-empty answer");
    CHECK(non_empty >= 75);
}

TEST_CASE("edge membership is rebuilt exactly from the predicates") {
    for (std::uint64_t seed = 200; seed < 260; ++seed) {
        const auto c = hg_oracle::random_case(seed);
        const auto g = hg_oracle::build(c, true);
        for (const auto& s : c.selectors) {
            std::set<EventId> want;
            for (const auto& e : hypergraph::footprint(c.pop, c.times)) {
                if (satisfies(s, e)) want.insert(e.event_id);
            }
            const auto it = g.edges().find(s.selector_id);
            CHECK((it == g.edges().end() ? std::set<EventId>{} : it->second) == want);
            CHECK((it == g.edges().end()) == want.empty());
        }
    }
}
