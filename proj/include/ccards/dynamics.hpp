#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ccards/config.hpp"
#include "ccards/core_model.hpp"
#include "ccards/rng.hpp"
#include "ccards/samplers.hpp"

namespace ccards {

/// Immutable per-ensemble setup shared by all runs.
struct Problem {
  DeckSet decks;
  Topology topology;
  DisplayStrategy strategy;

  static Problem from_config(const SimConfig& config);
};

struct InteractionRecord {
  int observer = 0;
  int observed = 0;
  int increments = 0;  // cards of the sample the observer also holds
};

/// Per-run working memory for the interaction loop. Under the top-C and Gibbs
/// strategies it also carries a DisplayCache that mirrors the state, so it
/// must be built for the state it will step and see every update to it.
class InteractionScratch {
 public:
  InteractionScratch(const Problem& problem, const GroupState& state);

  SubsetSampler sampler;
  std::vector<int> sample;
  std::optional<DisplayCache> cache;
};

/// Draws one ordered pair uniformly from the topology, lets the observed
/// agent display a sample, and credits the observer's shared cards.
InteractionRecord interaction_step(GroupState& state, const Problem& problem, Rng& rng,
                                   InteractionScratch& scratch);

/// N interaction steps, then tau += 1.
void advance_round(GroupState& state, const Problem& problem, Rng& rng,
                   InteractionScratch& scratch);

/// Arg-max card of the agent's table, ties broken uniformly at random.
CardId agent_choice(const GroupState& state, const DeckSet& decks, int agent, Rng& decision_rng);

struct Decision {
  CardId group_choice;
  int individual_errors = 0;
};

/// Every agent votes once; the plurality card wins, ties broken uniformly.
/// The same votes give the number of agents whose choice is wrong.
Decision evaluate_decision(const GroupState& state, const DeckSet& decks, Rng& decision_rng);

CardId group_decision(const GroupState& state, const DeckSet& decks, Rng& decision_rng);

struct CheckpointRecord {
  std::int64_t tau = 0;
  CardId group_choice;
  bool group_correct = false;
  int individual_errors = 0;

  bool operator==(const CheckpointRecord&) const = default;
};

struct RunOutcome {
  std::vector<CheckpointRecord> records;
  bool operator==(const RunOutcome&) const = default;
};

/// One run's state plus its two random streams. Decisions draw only from the
/// decision stream, so querying them never alters the trajectory.
class Simulation {
 public:
  Simulation(const Problem& problem, std::uint64_t run_seed);

  void advance_round();
  CheckpointRecord evaluate();

  const GroupState& state() const noexcept { return state_; }

 private:
  const Problem& problem_;
  GroupState state_;
  Rng dynamics_rng_;
  Rng decision_rng_;
  InteractionScratch scratch_;
};

RunOutcome run_single(const Problem& problem, const SimConfig& config, std::uint64_t run_seed);
RunOutcome run_single(const SimConfig& config, std::uint64_t run_seed);

}  // namespace ccards
