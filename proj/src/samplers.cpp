#include "ccards/samplers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "ccards/error.hpp"

namespace ccards {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Largest log of an intermediate e_k we allow in the linear-domain table.
constexpr double kLinearLogLimit = 690.0;

// Beyond this radius the exp lookup table would be too large to be worth it.
constexpr int kMaxTableRadius = 1 << 16;

void check_sample_size(int n, int c) {
  if (c < 1 || c > n) {
    throw Error(ErrorKind::invalid_size, "C must be in [1, N]; got C=" + std::to_string(c) +
                                             ", N=" + std::to_string(n));
  }
}

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::invalid_argument, "beta must be finite and non-negative");
  }
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

CardSample to_cards(std::span<const CardId> deck, const std::vector<int>& positions) {
  CardSample sample;
  sample.cards.reserve(positions.size());
  for (int p : positions) sample.cards.push_back(deck[p]);
  std::sort(sample.cards.begin(), sample.cards.end());
  return sample;
}

}  // namespace

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::uniform: return "uniform";
    case StrategyKind::top_c: return "topc";
    case StrategyKind::gibbs: return "gibbs";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(std::string_view text) {
  if (text == "uniform") return StrategyKind::uniform;
  if (text == "topc") return StrategyKind::top_c;
  if (text == "gibbs") return StrategyKind::gibbs;
  throw Error(ErrorKind::invalid_argument, "unknown strategy '" + std::string(text) +
                                               "' (expected uniform, topc or gibbs)");
}

std::int64_t sample_energy(std::span<const CardId> sample, const AgentTableView& table) {
  std::int64_t energy = 0;
  for (CardId card : sample) {
    const auto it = std::find(table.deck.begin(), table.deck.end(), card);
    if (it == table.deck.end()) {
      throw Error(ErrorKind::foreign_card,
                  "card " + std::to_string(card.value) + " is not in the observed deck");
    }
    energy -= table.values[static_cast<std::size_t>(it - table.deck.begin())];
  }
  return energy;
}

double elementary_symmetric(std::span<const double> weights, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > weights.size()) {
    throw Error(ErrorKind::invalid_argument, "elementary_symmetric: k out of range");
  }
  // e[j] holds e_j over the weights seen so far; update high j first.
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const int top = std::min<int>(k, static_cast<int>(i) + 1);
    for (int j = top; j >= 1; --j) e[j] += weights[i] * e[j - 1];
  }
  return e[k];
}

SubsetDistribution enumerate_distribution(std::span<const Confidence> confidences, int c,
                                          double beta, std::size_t cap) {
  const int n = static_cast<int>(confidences.size());
  check_sample_size(n, c);
  check_beta(beta);

  // binomial(n, c) with early exit once past the cap
  std::size_t count = 1;
  for (int i = 1; i <= c; ++i) {
    count = count * static_cast<std::size_t>(n - c + i) / static_cast<std::size_t>(i);
    if (count > cap) {
      throw Error(ErrorKind::enumeration_too_large,
                  "binomial(" + std::to_string(n) + ", " + std::to_string(c) +
                      ") exceeds the enumeration cap " + std::to_string(cap));
    }
  }

  SubsetDistribution dist;
  dist.subsets.reserve(count);
  std::vector<double> log_weights;
  log_weights.reserve(count);

  std::vector<int> combo(static_cast<std::size_t>(c));
  std::iota(combo.begin(), combo.end(), 0);
  while (true) {
    std::int64_t sum = 0;
    for (int p : combo) sum += confidences[p];
    dist.subsets.push_back(combo);
    log_weights.push_back(beta * static_cast<double>(sum));

    int i = c - 1;
    while (i >= 0 && combo[i] == n - c + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < c; ++j) combo[j] = combo[j - 1] + 1;
  }

  const double shift = *std::max_element(log_weights.begin(), log_weights.end());
  double z = 0.0;
  dist.probabilities.resize(log_weights.size());
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    dist.probabilities[i] = std::exp(log_weights[i] - shift);
    z += dist.probabilities[i];
  }
  for (double& p : dist.probabilities) p /= z;
  dist.log_normalization = shift + std::log(z);
  return dist;
}

void SubsetSampler::ensure_permutation(int n) {
  if (static_cast<int>(permutation_.size()) != n) {
    permutation_.resize(static_cast<std::size_t>(n));
    std::iota(permutation_.begin(), permutation_.end(), 0);
  }
}

void SubsetSampler::uniform(Rng& rng, int n, int c, std::vector<int>& out) {
  check_sample_size(n, c);
  uniform_unchecked(rng, n, c, out);
}

void SubsetSampler::uniform_unchecked(Rng& rng, int n, int c, std::vector<int>& out) {
  out.resize(static_cast<std::size_t>(c));
  if (c == n) {
    std::iota(out.begin(), out.end(), 0);
    return;
  }
  // Partial Fisher-Yates. The permutation is not reset between calls: a
  // uniform partial shuffle of any permutation yields a uniform subset.
  ensure_permutation(n);
  for (int t = 0; t < c; ++t) {
    const int r = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - t)));
    std::swap(permutation_[t], permutation_[r]);
    out[t] = permutation_[t];
  }
}

void SubsetSampler::top_c(Rng& rng, std::span<const Confidence> confidences, int c,
                          std::vector<int>& out) {
  check_sample_size(static_cast<int>(confidences.size()), c);
  top_c_unchecked(rng, confidences, c, out);
}

void SubsetSampler::top_c_unchecked(Rng& rng, std::span<const Confidence> confidences, int c,
                                    std::vector<int>& out) {
  const int n = static_cast<int>(confidences.size());
  out.clear();
  if (c == n) {
    out.resize(static_cast<std::size_t>(n));
    std::iota(out.begin(), out.end(), 0);
    return;
  }
  scratch_values_.assign(confidences.begin(), confidences.end());
  std::nth_element(scratch_values_.begin(), scratch_values_.begin() + (c - 1),
                   scratch_values_.end(), std::greater<>());
  const Confidence pivot = scratch_values_[c - 1];

  auto& ties = middle_positions_;
  ties.clear();
  for (int i = 0; i < n; ++i) {
    if (confidences[i] > pivot) {
      out.push_back(i);
    } else if (confidences[i] == pivot) {
      ties.push_back(i);
    }
  }
  // Uniform choice among the cards tied at the rank-C boundary.
  const int need = c - static_cast<int>(out.size());
  const int tied = static_cast<int>(ties.size());
  if (need == tied) {
    out.insert(out.end(), ties.begin(), ties.end());
    return;
  }
  for (int t = 0; t < need; ++t) {
    const int r = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(tied - t)));
    std::swap(ties[t], ties[r]);
    out.push_back(ties[t]);
  }
}

void SubsetSampler::rebuild_weight_table(double beta) {
  table_beta_ = beta;
  const double radius = std::floor(kCertaintyMargin / beta);
  if (radius > kMaxTableRadius) {
    table_radius_ = -1;
    exp_table_.clear();
    return;
  }
  table_radius_ = static_cast<int>(radius);
  exp_table_.resize(2 * static_cast<std::size_t>(table_radius_) + 1);
  for (int d = -table_radius_; d <= table_radius_; ++d) {
    exp_table_[static_cast<std::size_t>(d + table_radius_)] = std::exp(beta * d);
  }
}

double SubsetSampler::weight(int offset) const {
  if (table_radius_ >= 0 && offset >= -table_radius_ && offset <= table_radius_) {
    return exp_table_[static_cast<std::size_t>(offset + table_radius_)];
  }
  return std::exp(table_beta_ * offset);
}

void SubsetSampler::gibbs(Rng& rng, std::span<const Confidence> confidences, int c, double beta,
                          std::vector<int>& out) {
  check_sample_size(static_cast<int>(confidences.size()), c);
  check_beta(beta);
  gibbs_unchecked(rng, confidences, c, beta, out);
}

namespace {

// Value of rank c (1-based) in descending order. Short decks are
// insertion-sorted on the stack.
Confidence rank_value(std::span<const Confidence> values, int c, std::vector<Confidence>& scratch) {
  const int n = static_cast<int>(values.size());
  if (n <= 16) {
    std::array<Confidence, 16> sorted;
    for (int i = 0; i < n; ++i) {
      const Confidence v = values[i];
      int j = i;
      for (; j > 0 && sorted[j - 1] < v; --j) sorted[j] = sorted[j - 1];
      sorted[j] = v;
    }
    return sorted[c - 1];
  }
  scratch.assign(values.begin(), values.end());
  std::nth_element(scratch.begin(), scratch.begin() + (c - 1), scratch.end(), std::greater<>());
  return scratch[c - 1];
}

}  // namespace

void SubsetSampler::gibbs_unchecked(Rng& rng, std::span<const Confidence> confidences, int c,
                                    double beta, std::vector<int>& out) {
  const int n = static_cast<int>(confidences.size());
  last_certain_ = false;
  if (c == n || beta == 0.0) {
    uniform_unchecked(rng, n, c, out);
    return;
  }
  if (beta != table_beta_) rebuild_weight_table(beta);

  // Log-weights are measured from the C-th largest confidence. Anything more
  // than kCertaintyMargin above it is always drawn; anything that far below
  // never is. The rest goes through the exact sequential sampler.
  const Confidence pivot = rank_value(confidences, c, scratch_values_);

  out.resize(static_cast<std::size_t>(c));
  middle_positions_.resize(static_cast<std::size_t>(n));
  middle_weights_.resize(static_cast<std::size_t>(n));
  int forced = 0;
  int m = 0;
  double log_bound = 0.0;
  for (int i = 0; i < n; ++i) {
    const int offset = confidences[i] - pivot;
    const double log_w = beta * offset;
    if (log_w > kCertaintyMargin) {
      out[forced++] = i;
    } else if (log_w >= -kCertaintyMargin) {
      middle_positions_[m] = i;
      middle_weights_[m] = weight(offset);
      ++m;
      if (log_w > 0.0) log_bound += log_w;
    }
  }
  middle_count_ = m;
  const int k = c - forced;
  if (m == k) {
    std::copy_n(middle_positions_.begin(), m, out.begin() + forced);
    last_certain_ = true;
    last_pivot_ = pivot;
    return;
  }
  // e_j <= binomial(m, j) * prod(weights > 1) <= 2^m * exp(log_bound)
  log_bound += m * std::numbers::ln2;
  if (log_bound < kLinearLogLimit) {
    draw_linear(rng, k, out.data() + forced);
  } else {
    draw_log(rng, 0, k, out.data() + forced);
  }
}

// Conditional Poisson sampling: E(i, j) = e_j(w_i, ..., w_{m-1}) and item i is
// taken with probability w_i E(i+1, j-1) / E(i, j).
void SubsetSampler::draw_linear(Rng& rng, int k, int* out) {
  const int m = middle_count_;
  const int stride = k + 1;
  table_.resize(static_cast<std::size_t>(m + 1) * stride);
  double* e = table_.data();
  const double* w = middle_weights_.data();

  double* last = e + static_cast<std::size_t>(m) * stride;
  last[0] = 1.0;
  for (int j = 1; j <= k; ++j) last[j] = 0.0;
  for (int i = m - 1; i >= 0; --i) {
    double* row = e + static_cast<std::size_t>(i) * stride;
    const double* next = row + stride;
    row[0] = 1.0;
    for (int j = 1; j <= k; ++j) row[j] = next[j] + w[i] * next[j - 1];
  }

  int remaining = k;
  for (int i = 0; i < m && remaining > 0; ++i) {
    if (m - i == remaining) {
      std::copy_n(middle_positions_.begin() + i, remaining, out);
      return;
    }
    const double* row = e + static_cast<std::size_t>(i) * stride;
    const double denom = row[remaining];
    const double numer = w[i] * row[stride + remaining - 1];
    if (!(denom > 0.0) || !std::isfinite(denom) || !std::isfinite(numer)) {
      // Underflow in a suffix that only tiny weights can reach.
      draw_log(rng, i, remaining, out);
      return;
    }
    if (rng.uniform() * denom < numer) {
      *out++ = middle_positions_[i];
      --remaining;
    }
  }
}

void SubsetSampler::draw_log(Rng& rng, int start, int k, int* out) {
  const int m = middle_count_;
  const int len = m - start;
  const std::size_t stride = static_cast<std::size_t>(k) + 1;
  table_.assign((static_cast<std::size_t>(len) + 1) * stride, kNegInf);
  auto le = [&](int i, int j) -> double& {
    return table_[static_cast<std::size_t>(i - start) * stride + j];
  };
  auto log_w = [&](int i) { return std::log(middle_weights_[i]); };

  le(m, 0) = 0.0;
  for (int i = m - 1; i >= start; --i) {
    const double lw = log_w(i);
    le(i, 0) = 0.0;
    const int top = std::min(k, m - i);
    for (int j = 1; j <= top; ++j) le(i, j) = log_add(le(i + 1, j), lw + le(i + 1, j - 1));
  }

  int remaining = k;
  for (int i = start; i < m && remaining > 0; ++i) {
    if (m - i == remaining) {
      std::copy_n(middle_positions_.begin() + i, remaining, out);
      return;
    }
    const double p = std::exp(log_w(i) + le(i + 1, remaining - 1) - le(i, remaining));
    if (rng.uniform() < p) {
      *out++ = middle_positions_[i];
      --remaining;
    }
  }
}

void SubsetSampler::draw(Rng& rng, const DisplayStrategy& strategy,
                         std::span<const Confidence> confidences, std::vector<int>& out) {
  check_sample_size(static_cast<int>(confidences.size()), strategy.sample_size);
  if (strategy.kind == StrategyKind::gibbs) check_beta(strategy.beta);
  draw_unchecked(rng, strategy, confidences, out);
}

void SubsetSampler::draw_unchecked(Rng& rng, const DisplayStrategy& strategy,
                                   std::span<const Confidence> confidences,
                                   std::vector<int>& out) {
  switch (strategy.kind) {
    case StrategyKind::uniform:
      uniform_unchecked(rng, static_cast<int>(confidences.size()), strategy.sample_size, out);
      return;
    case StrategyKind::top_c:
      top_c_unchecked(rng, confidences, strategy.sample_size, out);
      return;
    case StrategyKind::gibbs:
      gibbs_unchecked(rng, confidences, strategy.sample_size, strategy.beta, out);
      return;
  }
}

DisplayCache::DisplayCache(int agents, int deck_size, const DisplayStrategy& strategy)
    : agents_(agents),
      n_(deck_size),
      strategy_(strategy),
      members_(static_cast<std::size_t>(agents) * deck_size),
      member_(members_.size(), 0),
      entries_(static_cast<std::size_t>(agents)) {}

void DisplayCache::clear() noexcept {
  for (auto& entry : entries_) entry.valid = false;
}

void DisplayCache::store_certain(int agent, std::span<const int> positions, Confidence bound) {
  const std::size_t base = offset(agent);
  std::fill_n(member_.begin() + static_cast<std::ptrdiff_t>(base), n_, std::uint8_t{0});
  Entry& entry = entries_[agent];
  entry.above = 0;
  entry.tied = 0;
  for (int pos : positions) {
    member_[base + pos] = 1;
    members_[base + entry.above++] = pos;
  }
  entry.bound = bound;
  entry.valid = true;
}

void DisplayCache::refresh_top_c(int agent, std::span<const Confidence> values) {
  const int c = strategy_.sample_size;
  const std::size_t base = offset(agent);
  scratch_.assign(values.begin(), values.end());
  std::nth_element(scratch_.begin(), scratch_.begin() + (c - 1), scratch_.end(),
                   std::greater<>());
  const Confidence bound = scratch_[c - 1];

  Entry& entry = entries_[agent];
  entry.bound = bound;
  entry.above = 0;
  entry.tied = 0;
  int* members = members_.data() + base;
  std::uint8_t* member = member_.data() + base;
  for (int i = 0; i < n_; ++i) {
    member[i] = values[i] > bound;
    if (member[i]) members[entry.above++] = i;
  }
  for (int i = 0; i < n_; ++i) {
    if (values[i] == bound) members[entry.above + entry.tied++] = i;
  }
  if (entry.above + entry.tied == c) {
    // No choice left at the boundary: the ties are members too.
    for (int t = entry.above; t < c; ++t) member[members[t]] = 1;
    entry.above = c;
    entry.tied = 0;
  }
  entry.valid = true;
}

void DisplayCache::draw(Rng& rng, int agent, std::span<const Confidence> values,
                        SubsetSampler& sampler, std::vector<int>& out) {
  const int c = strategy_.sample_size;
  Entry& entry = entries_[agent];
  if (!entry.valid) {
    if (strategy_.kind == StrategyKind::top_c) {
      refresh_top_c(agent, values);
    } else {
      sampler.draw_unchecked(rng, strategy_, values, out);
      if (strategy_.kind == StrategyKind::gibbs && sampler.last_gibbs_certain()) {
        // Smallest confidence the Gibbs sampler would no longer rule out.
        const Confidence pivot = sampler.last_gibbs_pivot();
        const double reach = kCertaintyMargin / strategy_.beta;
        if (reach < 1e8) {
          auto bound = static_cast<Confidence>(pivot - static_cast<Confidence>(reach) - 2);
          while (!(strategy_.beta * (bound - pivot) >= -kCertaintyMargin)) ++bound;
          store_certain(agent, out, bound);
        }
      }
      return;
    }
  }
  int* members = members_.data() + offset(agent);
  out.resize(static_cast<std::size_t>(c));
  std::copy_n(members, entry.above, out.begin());
  if (entry.above == c) return;
  int* ties = members + entry.above;
  const int need = c - entry.above;
  for (int t = 0; t < need; ++t) {
    const int r = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(entry.tied - t)));
    std::swap(ties[t], ties[r]);
    out[entry.above + t] = ties[t];
  }
}

CardSample sample_subset_uniform(Rng& rng, std::span<const CardId> deck, int c) {
  SubsetSampler sampler;
  std::vector<int> positions;
  sampler.uniform(rng, static_cast<int>(deck.size()), c, positions);
  return to_cards(deck, positions);
}

CardSample sample_subset_top_c(Rng& rng, const AgentTableView& table, int c) {
  SubsetSampler sampler;
  std::vector<int> positions;
  sampler.top_c(rng, table.values, c, positions);
  return to_cards(table.deck, positions);
}

CardSample sample_subset_gibbs(Rng& rng, const AgentTableView& table, int c, double beta) {
  SubsetSampler sampler;
  std::vector<int> positions;
  sampler.gibbs(rng, table.values, c, beta, positions);
  return to_cards(table.deck, positions);
}

}  // namespace ccards
