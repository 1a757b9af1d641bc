#include "ccards/core_model.hpp"

#include <algorithm>
#include <string>

#include "ccards/error.hpp"

namespace ccards {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_size: return "invalid-size";
    case ErrorKind::invalid_topology: return "invalid-topology";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::foreign_card: return "foreign-card";
    case ErrorKind::enumeration_too_large: return "enumeration-too-large";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::file_error: return "file-error";
    case ErrorKind::parse_error: return "parse-error";
  }
  return "unknown";
}

std::span<const CardId> DeckSet::deck(int agent) const {
  if (agent < 0 || agent >= n_) {
    throw Error(ErrorKind::invalid_argument, "agent index out of range");
  }
  return {cards_.data() + static_cast<std::size_t>(agent) * n_,
          static_cast<std::size_t>(n_)};
}

DeckSet build_decks(int n) {
  if (n < 2) {
    throw Error(ErrorKind::invalid_size,
                "group size N must be at least 2, got " + std::to_string(n));
  }
  std::vector<CardId> cards;
  cards.reserve(static_cast<std::size_t>(n) * n);
  for (int agent = 0; agent < n; ++agent) {
    for (int card = 1; card <= n + 1; ++card) {
      if (card != agent + 1) cards.push_back(CardId{card});
    }
  }
  return DeckSet(n, std::move(cards));
}

std::string_view to_string(TopologyKind kind) noexcept {
  switch (kind) {
    case TopologyKind::complete: return "complete";
    case TopologyKind::cycle: return "cycle";
    case TopologyKind::custom: return "custom";
  }
  return "unknown";
}

TopologyKind parse_topology_kind(std::string_view text) {
  if (text == "complete") return TopologyKind::complete;
  if (text == "cycle") return TopologyKind::cycle;
  if (text == "custom") return TopologyKind::custom;
  throw Error(ErrorKind::invalid_topology,
              "unknown topology '" + std::string(text) + "'");
}

Topology::Topology(TopologyKind kind, int n, std::vector<AgentPair> pairs)
    : kind_(kind), n_(n), pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
}

Topology Topology::custom(int n, std::vector<AgentPair> pairs) {
  if (n < 2) throw Error(ErrorKind::invalid_topology, "topology needs n >= 2");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (const auto& p : pairs) {
    if (p.observer < 0 || p.observer >= n || p.observed < 0 || p.observed >= n) {
      throw Error(ErrorKind::invalid_topology, "pair index out of range");
    }
    if (p.observer == p.observed) {
      throw Error(ErrorKind::invalid_topology, "self pair in topology");
    }
    seen[p.observer] = true;
    seen[p.observed] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorKind::invalid_topology, "topology leaves an agent isolated");
  }
  std::sort(pairs.begin(), pairs.end());
  if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) {
    throw Error(ErrorKind::invalid_topology, "duplicate pair in topology");
  }
  return Topology(TopologyKind::custom, n, std::move(pairs));
}

Topology make_topology(TopologyKind kind, int n) {
  std::vector<AgentPair> pairs;
  switch (kind) {
    case TopologyKind::complete:
      if (n < 2) throw Error(ErrorKind::invalid_topology, "complete topology needs n >= 2");
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j) pairs.push_back({i, j});
        }
      }
      break;
    case TopologyKind::cycle:
      if (n < 3) throw Error(ErrorKind::invalid_topology, "cycle topology needs n >= 3");
      for (int i = 0; i < n; ++i) {
        pairs.push_back({i, (i + 1) % n});
        pairs.push_back({i, (i + n - 1) % n});
      }
      break;
    case TopologyKind::custom:
      throw Error(ErrorKind::invalid_topology,
                  "custom topologies are built from an explicit pair list");
  }
  return Topology(kind, n, std::move(pairs));
}

GroupState::GroupState(int n)
    : n_(n), values_(static_cast<std::size_t>(n) * n, 0) {}

Confidence GroupState::confidence(const DeckSet& decks, int agent, CardId card) const {
  const auto pos = decks.position(agent, card);
  if (!pos) {
    throw Error(ErrorKind::foreign_card,
                "card " + std::to_string(card.value) + " is not in deck of agent " +
                    std::to_string(agent));
  }
  return table(agent)[*pos];
}

GroupState init_state(const DeckSet& decks) { return GroupState(decks.n()); }

}  // namespace ccards
