#include <algorithm>
#include <set>

#include "ccards/core_model.hpp"
#include "ccards/error.hpp"
#include "doctest.h"

using namespace ccards;

namespace {

std::set<int> deck_values(const DeckSet& decks, int agent) {
  std::set<int> out;
  for (CardId c : decks.deck(agent)) out.insert(c.value);
  return out;
}

bool has_pair(const Topology& t, int observer, int observed) {
  const auto pairs = t.pairs();
  return std::find(pairs.begin(), pairs.end(), AgentPair{observer, observed}) != pairs.end();
}

}  // namespace

TEST_SUITE("core_model") {

TEST_CASE("two agent decks") {
  const DeckSet decks = build_decks(2);
  CHECK(decks.n() == 2);
  CHECK(decks.common_card() == CardId{3});
  CHECK(deck_values(decks, 0) == std::set<int>{2, 3});
  CHECK(deck_values(decks, 1) == std::set<int>{1, 3});
}

TEST_CASE("build_decks rejects fewer than two agents") {
  for (int n : {-3, 0, 1}) {
    try {
      build_decks(n);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_size);
    }
  }
}

TEST_CASE("five decks pairwise share four cards") {
  const DeckSet decks = build_decks(5);
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) {
      const auto da = deck_values(decks, a);
      const auto db = deck_values(decks, b);
      int shared = 0;
      for (int v : da) shared += static_cast<int>(db.count(v));
      CHECK(shared == 4);
    }
  }
}

TEST_CASE("ten decks card multiplicity") {
  const DeckSet decks = build_decks(10);
  for (int card = 1; card <= 11; ++card) {
    int holders = 0;
    for (int a = 0; a < 10; ++a) holders += decks.contains(a, CardId{card});
    CHECK(holders == (card == 11 ? 10 : 9));
  }
}

TEST_CASE("deck invariants for every size up to 64") {
  for (int n = 2; n <= 64; ++n) {
    const DeckSet decks = build_decks(n);
    REQUIRE(decks.card_count() == n + 1);
    std::vector<int> multiplicity(static_cast<std::size_t>(n) + 2, 0);
    for (int a = 0; a < n; ++a) {
      const auto deck = decks.deck(a);
      REQUIRE(deck.size() == static_cast<std::size_t>(n));
      CHECK(std::is_sorted(deck.begin(), deck.end()));
      CHECK_FALSE(decks.contains(a, CardId{a + 1}));
      CHECK(decks.contains(a, decks.common_card()));
      for (int p = 0; p < n; ++p) {
        const CardId card = deck[p];
        CHECK(decks.card_at(a, p) == card);
        CHECK(decks.position(a, card) == p);
        ++multiplicity[card.value];
      }
      for (int b = a + 1; b < n; ++b) {
        const auto other = decks.deck(b);
        std::vector<CardId> both;
        std::set_intersection(deck.begin(), deck.end(), other.begin(), other.end(),
                              std::back_inserter(both));
        CHECK(both.size() == static_cast<std::size_t>(n - 1));
      }
    }
    for (int card = 1; card <= n; ++card) CHECK(multiplicity[card] == n - 1);
    CHECK(multiplicity[n + 1] == n);
  }
}

TEST_CASE("position lookups outside the deck are empty") {
  const DeckSet decks = build_decks(4);
  CHECK_FALSE(decks.position(2, CardId{3}).has_value());
  CHECK_FALSE(decks.position(0, CardId{0}).has_value());
  CHECK_FALSE(decks.position(0, CardId{6}).has_value());
  CHECK_THROWS_AS(decks.deck(4), Error);
  CHECK_THROWS_AS(decks.deck(-1), Error);
}

TEST_CASE("init_state is all zero at tau 0") {
  for (int n : {2, 10}) {
    const DeckSet decks = build_decks(n);
    const GroupState state = init_state(decks);
    CHECK(state.tau() == 0);
    CHECK(state.n() == n);
    for (int a = 0; a < n; ++a) {
      REQUIRE(state.table(a).size() == static_cast<std::size_t>(n));
      for (Confidence v : state.table(a)) CHECK(v == 0);
    }
    CHECK(init_state(decks) == state);
  }
}

TEST_CASE("confidence lookup by card") {
  const DeckSet decks = build_decks(3);
  GroupState state = init_state(decks);
  state.table(1)[2] = 7;  // agent 1 holds {1, 3, 4}
  CHECK(state.confidence(decks, 1, CardId{4}) == 7);
  CHECK(state.confidence(decks, 1, CardId{1}) == 0);
  try {
    (void)state.confidence(decks, 1, CardId{2});
    FAIL("expected foreign_card");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::foreign_card);
  }
}

TEST_CASE("complete topology") {
  const Topology t = make_topology(TopologyKind::complete, 5);
  CHECK(t.pairs().size() == 20);
  for (const auto& p : t.pairs()) CHECK(p.observer != p.observed);
}

TEST_CASE("cycle topology") {
  const Topology t = make_topology(TopologyKind::cycle, 5);
  CHECK(t.pairs().size() == 10);
  // agent 1 of the ring is index 0 here, adjacent to indices 1 and 4
  for (int other = 1; other < 5; ++other) {
    const bool adjacent = other == 1 || other == 4;
    CHECK(has_pair(t, 0, other) == adjacent);
    CHECK(has_pair(t, other, 0) == adjacent);
  }
  CHECK(make_topology(TopologyKind::cycle, 3).pairs().size() == 6);
  const auto ring3 = make_topology(TopologyKind::cycle, 3).pairs();
  const auto full3 = make_topology(TopologyKind::complete, 3).pairs();
  CHECK(std::equal(ring3.begin(), ring3.end(), full3.begin(), full3.end()));
}

TEST_CASE("cycle needs three agents") {
  try {
    make_topology(TopologyKind::cycle, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_topology);
  }
  CHECK_THROWS_AS(make_topology(TopologyKind::custom, 4), Error);
}

TEST_CASE("custom topology validation") {
  CHECK(Topology::custom(3, {{0, 1}, {1, 2}, {2, 0}}).pairs().size() == 3);
  auto kind_of = [](int n, std::vector<AgentPair> pairs) {
    try {
      Topology::custom(n, std::move(pairs));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::file_error;  // stands for "no error"
  };
  CHECK(kind_of(3, {{0, 0}, {1, 2}}) == ErrorKind::invalid_topology);
  CHECK(kind_of(3, {{0, 1}, {1, 3}}) == ErrorKind::invalid_topology);
  CHECK(kind_of(3, {{0, 1}, {1, 0}}) == ErrorKind::invalid_topology);  // agent 2 isolated
  CHECK(kind_of(3, {{0, 1}, {0, 1}, {1, 2}}) == ErrorKind::invalid_topology);
}

TEST_CASE("topology names") {
  CHECK(to_string(TopologyKind::complete) == "complete");
  CHECK(to_string(TopologyKind::cycle) == "cycle");
  CHECK(parse_topology_kind("cycle") == TopologyKind::cycle);
  CHECK_THROWS_AS(parse_topology_kind("ring"), Error);
}

}
