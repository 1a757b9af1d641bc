#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ccards {

/// Card label in [1, N+1]. Card N+1 is the common card.
struct CardId {
  std::int32_t value = 0;
  auto operator<=>(const CardId&) const = default;
};

using Confidence = std::int32_t;

/// The N decks of the common-card task. Agents are indexed 0..N-1 and agent
/// `a` holds every card except card a+1, in ascending card order.
class DeckSet {
 public:
  int n() const noexcept { return n_; }
  int card_count() const noexcept { return n_ + 1; }
  CardId common_card() const noexcept { return CardId{n_ + 1}; }

  std::span<const CardId> deck(int agent) const;

  CardId card_at(int agent, int position) const noexcept {
    return cards_[static_cast<std::size_t>(agent) * n_ + position];
  }

  /// Card id -> deck position. Empty when the card is not in the deck.
  std::optional<int> position(int agent, CardId card) const noexcept {
    const int omitted = agent + 1;
    if (card.value < 1 || card.value > n_ + 1 || card.value == omitted) {
      return std::nullopt;
    }
    return card.value < omitted ? card.value - 1 : card.value - 2;
  }

  bool contains(int agent, CardId card) const noexcept {
    return position(agent, card).has_value();
  }

 private:
  friend DeckSet build_decks(int n);
  DeckSet(int n, std::vector<CardId> cards) : n_(n), cards_(std::move(cards)) {}

  int n_;
  std::vector<CardId> cards_;
};

/// Canonical construction: deck i = {1..N+1} \ {i}. Throws invalid_size for n < 2.
DeckSet build_decks(int n);

enum class TopologyKind { complete, cycle, custom };

std::string_view to_string(TopologyKind kind) noexcept;
TopologyKind parse_topology_kind(std::string_view text);

struct AgentPair {
  int observer = 0;
  int observed = 0;
  auto operator<=>(const AgentPair&) const = default;
};

/// Ordered (observer, observed) pairs allowed to interact.
class Topology {
 public:
  /// Validates: no self pairs, indices in range, no duplicates, no isolated
  /// agent. Pairs are stored sorted.
  static Topology custom(int n, std::vector<AgentPair> pairs);

  TopologyKind kind() const noexcept { return kind_; }
  int n() const noexcept { return n_; }
  std::span<const AgentPair> pairs() const noexcept { return pairs_; }

  bool operator==(const Topology&) const = default;

 private:
  friend Topology make_topology(TopologyKind kind, int n);
  Topology(TopologyKind kind, int n, std::vector<AgentPair> pairs);

  TopologyKind kind_;
  int n_;
  std::vector<AgentPair> pairs_;
};

/// complete: all N(N-1) ordered pairs. cycle: both directions between ring
/// neighbours (requires n >= 3).
Topology make_topology(TopologyKind kind, int n);

/// Per-agent confidence tables indexed by deck position, plus the round
/// counter.
class GroupState {
 public:
  explicit GroupState(int n);

  int n() const noexcept { return n_; }
  std::int64_t tau() const noexcept { return tau_; }
  void advance_tau() noexcept { ++tau_; }

  std::span<const Confidence> table(int agent) const noexcept {
    return {values_.data() + static_cast<std::size_t>(agent) * n_,
            static_cast<std::size_t>(n_)};
  }
  std::span<Confidence> table(int agent) noexcept {
    return {values_.data() + static_cast<std::size_t>(agent) * n_,
            static_cast<std::size_t>(n_)};
  }

  Confidence confidence(const DeckSet& decks, int agent, CardId card) const;

  bool operator==(const GroupState&) const = default;

 private:
  int n_;
  std::int64_t tau_ = 0;
  std::vector<Confidence> values_;
};

GroupState init_state(const DeckSet& decks);

}  // namespace ccards
