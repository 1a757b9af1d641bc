#include "ccards/dynamics.hpp"

#include "ccards/error.hpp"

namespace ccards {

Problem Problem::from_config(const SimConfig& config) {
  config.validate();
  return Problem{build_decks(config.n), make_topology(config.topology, config.n),
                 config.display()};
}

InteractionScratch::InteractionScratch(const Problem& problem, const GroupState& state) {
  sample.reserve(static_cast<std::size_t>(problem.decks.n()));
  const auto& strategy = problem.strategy;
  if (strategy.kind != StrategyKind::uniform && strategy.sample_size < problem.decks.n() &&
      !(strategy.kind == StrategyKind::gibbs && strategy.beta == 0.0)) {
    cache.emplace(state.n(), state.n(), strategy);
  }
}

InteractionRecord interaction_step(GroupState& state, const Problem& problem, Rng& rng,
                                   InteractionScratch& scratch) {
  const auto pairs = problem.topology.pairs();
  const AgentPair pair = pairs[rng.below(pairs.size())];
  const int observed = pair.observed;
  const int observer = pair.observer;

  auto& sample = scratch.sample;
  if (scratch.cache) {
    scratch.cache->draw(rng, observed, state.table(observed), scratch.sampler, sample);
  } else {
    scratch.sampler.draw_unchecked(rng, problem.strategy, state.table(observed), sample);
  }

  // Canonical labels: agent a lacks card a+1, so position p of agent a's deck
  // holds card p+1 for p < a and p+2 otherwise.
  auto table = state.table(observer);
  const int missing = observer + 1;
  int increments = 0;
  for (int pos : sample) {
    const int card = pos < observed ? pos + 1 : pos + 2;
    if (card == missing) continue;
    const int target = card < missing ? card - 1 : card - 2;
    ++table[target];
    if (scratch.cache) scratch.cache->increment(observer, target, table[target]);
    ++increments;
  }
  return {observer, observed, increments};
}

void advance_round(GroupState& state, const Problem& problem, Rng& rng,
                   InteractionScratch& scratch) {
  for (int step = 0; step < state.n(); ++step) interaction_step(state, problem, rng, scratch);
  state.advance_tau();
}

namespace {

int choose_position(std::span<const Confidence> table, Rng& rng) {
  Confidence best = table[0];
  int ties = 0;
  for (Confidence v : table) {
    if (v > best) {
      best = v;
      ties = 1;
    } else if (v == best) {
      ++ties;
    }
  }
  int pick = ties == 1 ? 0 : static_cast<int>(rng.below(static_cast<std::uint64_t>(ties)));
  for (int pos = 0; pos < static_cast<int>(table.size()); ++pos) {
    if (table[pos] == best && pick-- == 0) return pos;
  }
  return 0;  // unreachable
}

}  // namespace

CardId agent_choice(const GroupState& state, const DeckSet& decks, int agent, Rng& decision_rng) {
  if (agent < 0 || agent >= state.n()) {
    throw Error(ErrorKind::invalid_argument, "agent index out of range");
  }
  return decks.card_at(agent, choose_position(state.table(agent), decision_rng));
}

Decision evaluate_decision(const GroupState& state, const DeckSet& decks, Rng& decision_rng) {
  const int n = state.n();
  std::vector<int> votes(static_cast<std::size_t>(decks.card_count()) + 1, 0);
  Decision decision;
  for (int agent = 0; agent < n; ++agent) {
    const CardId card = agent_choice(state, decks, agent, decision_rng);
    ++votes[card.value];
    if (card != decks.common_card()) ++decision.individual_errors;
  }
  int best = 0;
  int ties = 0;
  for (int card = 1; card <= decks.card_count(); ++card) {
    if (votes[card] > best) {
      best = votes[card];
      ties = 1;
    } else if (votes[card] == best) {
      ++ties;
    }
  }
  int pick = ties == 1 ? 0 : static_cast<int>(decision_rng.below(static_cast<std::uint64_t>(ties)));
  for (int card = 1; card <= decks.card_count(); ++card) {
    if (votes[card] == best && pick-- == 0) {
      decision.group_choice = CardId{card};
      break;
    }
  }
  return decision;
}

CardId group_decision(const GroupState& state, const DeckSet& decks, Rng& decision_rng) {
  return evaluate_decision(state, decks, decision_rng).group_choice;
}

Simulation::Simulation(const Problem& problem, std::uint64_t run_seed)
    : problem_(problem),
      state_(init_state(problem.decks)),
      dynamics_rng_(derive_seed(run_seed, 0, static_cast<std::uint64_t>(Stream::dynamics))),
      decision_rng_(derive_seed(run_seed, 0, static_cast<std::uint64_t>(Stream::decisions))),
      scratch_(problem, state_) {}

void Simulation::advance_round() {
  ccards::advance_round(state_, problem_, dynamics_rng_, scratch_);
}

CheckpointRecord Simulation::evaluate() {
  const Decision d = evaluate_decision(state_, problem_.decks, decision_rng_);
  return {state_.tau(), d.group_choice, d.group_choice == problem_.decks.common_card(),
          d.individual_errors};
}

RunOutcome run_single(const Problem& problem, const SimConfig& config, std::uint64_t run_seed) {
  Simulation sim(problem, run_seed);
  RunOutcome outcome;
  outcome.records.reserve(config.checkpoints.size());
  // Rounds after the last checkpoint cannot change the outcome, so they are
  // not simulated.
  for (std::int64_t checkpoint : config.checkpoints) {
    while (sim.state().tau() < checkpoint) sim.advance_round();
    outcome.records.push_back(sim.evaluate());
  }
  return outcome;
}

RunOutcome run_single(const SimConfig& config, std::uint64_t run_seed) {
  const Problem problem = Problem::from_config(config);
  return run_single(problem, config, run_seed);
}

}  // namespace ccards
