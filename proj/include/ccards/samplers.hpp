#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ccards/core_model.hpp"
#include "ccards/rng.hpp"

namespace ccards {

enum class StrategyKind { uniform, top_c, gibbs };

std::string_view to_string(StrategyKind kind) noexcept;
StrategyKind parse_strategy_kind(std::string_view text);

/// How an observed agent picks the C cards it displays.
/// uniform is beta = 0, top_c is the beta -> infinity limit.
struct DisplayStrategy {
  StrategyKind kind = StrategyKind::uniform;
  int sample_size = 1;
  double beta = 0.0;
};

inline constexpr std::size_t kDefaultEnumerationCap = 200'000;

/// Gibbs weights further than this many nats from the C-th largest log-weight
/// are treated as certainly in (above) or certainly out (below). The neglected
/// probability is at most N * exp(-60) per draw.
inline constexpr double kCertaintyMargin = 60.0;

/// One agent's confidences keyed by its deck.
struct AgentTableView {
  std::span<const CardId> deck;
  std::span<const Confidence> values;
};

struct CardSample {
  std::vector<CardId> cards;  // ascending
  bool operator==(const CardSample&) const = default;
};

/// Exact Gibbs distribution over all C-subsets of deck positions.
struct SubsetDistribution {
  std::vector<std::vector<int>> subsets;  // deck positions, lexicographic order
  std::vector<double> probabilities;
  double log_normalization = 0.0;  // log Z of exp(-beta E), unshifted
};

/// -(sum of confidences over the sample). Throws foreign_card for a card
/// missing from the table's deck.
std::int64_t sample_energy(std::span<const CardId> sample, const AgentTableView& table);

/// e_k of the weights. e_0 = 1. Throws invalid_argument for k outside [0, |w|].
double elementary_symmetric(std::span<const double> weights, int k);

SubsetDistribution enumerate_distribution(std::span<const Confidence> confidences, int c,
                                          double beta,
                                          std::size_t cap = kDefaultEnumerationCap);

/// Reusable scratch space for drawing samples as deck positions. Not shared
/// between threads; one per simulation run.
class SubsetSampler {
 public:
  /// Positions written to `out` (resized to c) are in no particular order.
  void uniform(Rng& rng, int n, int c, std::vector<int>& out);
  void top_c(Rng& rng, std::span<const Confidence> confidences, int c, std::vector<int>& out);
  void gibbs(Rng& rng, std::span<const Confidence> confidences, int c, double beta,
             std::vector<int>& out);

  void draw(Rng& rng, const DisplayStrategy& strategy, std::span<const Confidence> confidences,
            std::vector<int>& out);

  /// As above without argument checks; strategy must already be validated.
  void draw_unchecked(Rng& rng, const DisplayStrategy& strategy,
                      std::span<const Confidence> confidences, std::vector<int>& out);

  /// Whether the last Gibbs draw was certain (no random numbers used), and the
  /// C-th largest confidence it was measured from.
  bool last_gibbs_certain() const noexcept { return last_certain_; }
  Confidence last_gibbs_pivot() const noexcept { return last_pivot_; }

 private:
  void uniform_unchecked(Rng& rng, int n, int c, std::vector<int>& out);
  void top_c_unchecked(Rng& rng, std::span<const Confidence> confidences, int c,
                       std::vector<int>& out);
  void gibbs_unchecked(Rng& rng, std::span<const Confidence> confidences, int c, double beta,
                       std::vector<int>& out);
  void ensure_permutation(int n);
  void rebuild_weight_table(double beta);
  double weight(int offset) const;
  void draw_linear(Rng& rng, int k, int* out);
  void draw_log(Rng& rng, int start, int k, int* out);

  std::vector<int> permutation_;
  std::vector<Confidence> scratch_values_;
  std::vector<int> middle_positions_;
  std::vector<double> middle_weights_;
  int middle_count_ = 0;
  bool last_certain_ = false;
  Confidence last_pivot_ = 0;
  std::vector<double> table_;
  double table_beta_ = -1.0;
  int table_radius_ = 0;
  std::vector<double> exp_table_;
};

/// Cached display sets for every agent under unit increments, for the top-C
/// and Gibbs strategies. A set is cached when the draw is certain: under top-C
/// when the boundary is strict (ties are kept and resampled each draw), under
/// Gibbs when every outside card is kCertaintyMargin nats below the C-th
/// largest. A set stays valid while no outside card reaches its bound and is
/// otherwise recomputed on the next draw. Draws consume the random stream
/// exactly as SubsetSampler does on a certain draw (not at all), so Gibbs
/// trajectories are unchanged by the cache. Must see every increment applied
/// to the tables it serves.
class DisplayCache {
 public:
  DisplayCache() = default;
  DisplayCache(int agents, int deck_size, const DisplayStrategy& strategy);

  /// Forgets all cached sets (tables may have changed arbitrarily).
  void clear() noexcept;

  /// Call after values[position] was raised to `raised`.
  void increment(int agent, int position, Confidence raised) noexcept {
    Entry& entry = entries_[agent];
    if (entry.valid && !member_[offset(agent) + position] && raised >= entry.bound) {
      entry.valid = false;
    }
  }

  /// Same distribution as sampler.draw on `values`, the agent's table.
  void draw(Rng& rng, int agent, std::span<const Confidence> values, SubsetSampler& sampler,
            std::vector<int>& out);

  const DisplayStrategy& strategy() const noexcept { return strategy_; }

 private:
  struct Entry {
    Confidence bound = 0;  // an outside card reaching this invalidates the set
    int above = 0;         // members certain to be drawn
    int tied = 0;          // top-C candidates tied at the boundary
    bool valid = false;
  };

  std::size_t offset(int agent) const noexcept { return static_cast<std::size_t>(agent) * n_; }
  void refresh_top_c(int agent, std::span<const Confidence> values);
  void store_certain(int agent, std::span<const int> positions, Confidence bound);

  int agents_ = 0;
  int n_ = 0;
  DisplayStrategy strategy_;
  std::vector<int> members_;          // per agent: certain members, then ties
  std::vector<std::uint8_t> member_;  // per position: among the certain members
  std::vector<Entry> entries_;
  std::vector<Confidence> scratch_;
};

CardSample sample_subset_uniform(Rng& rng, std::span<const CardId> deck, int c);
CardSample sample_subset_top_c(Rng& rng, const AgentTableView& table, int c);
CardSample sample_subset_gibbs(Rng& rng, const AgentTableView& table, int c, double beta);

}  // namespace ccards
