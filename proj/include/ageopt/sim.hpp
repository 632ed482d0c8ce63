#pragma once

#include "ageopt/common.hpp"
#include "ageopt/joac.hpp"
#include "ageopt/mdp.hpp"
#include "ageopt/mobility.hpp"

#include <cstdint>
#include <vector>

// Monte Carlo replay of threshold policies and brute-force searches used as oracles.
namespace ageopt::sim {

struct SimResult {
  long cycles = 0;
  long slots = 0;
  /// counts(i, z): items collected at i and uploaded at z.
  Matrix counts;
  /// Row-normalized counts; rows of origins never sampled are zero.
  Matrix empirical_y;
  /// aoi_hist[i][t]: items collected at i and uploaded at age t (index 0 unused).
  std::vector<std::vector<long>> aoi_hist;
  /// Long-run reward per slot, U(x) - p(l) a, and its batch-means standard error.
  double mean_reward = 0.0;
  double reward_se = 0.0;
  double mean_aoi = 0.0;
  /// Share of uploads at each location.
  Vector upload_share;

  long origin_count(int i) const;
  /// Empirical P(Delta_i > d).
  double ccdf(int origin, int d) const;
};

struct SimOptions {
  long cycles = 100'000;
  long warmup_cycles = 100;
  int batches = 20;
};

/// Device follows the mobility chain; after each upload it collects fresh data at its next
/// location. Prices and utility come from `instance`.
SimResult simulate_policy(const mdp::AgingMdpInstance& instance, const Thresholds& tau,
                          const SimOptions& options, Rng& rng);

/// Same replay over recorded trajectories. `cell_ids[k]` is the trace label of model location k;
/// unknown cells split a trajectory. Throws EmptyTrace when nothing can be replayed.
SimResult simulate_from_trace(const std::vector<mobility::Trajectory>& trajectories,
                              const std::vector<long>& cell_ids,
                              const mdp::AgingMdpInstance& instance, const Thresholds& tau,
                              long warmup_cycles = 0);

struct ThresholdSearchResult {
  Thresholds best;
  double objective = 0.0;
  long evaluated = 0;
  long feasible = 0;
};

inline constexpr long kMaxSearchSpace = 1'000'000;

/// Minimum-cost feasible vector in {0..t_max}^L; ties go to the lexicographically smallest.
/// Throws SearchSpaceTooLarge above kMaxSearchSpace vectors; `feasible == 0` when none exists.
ThresholdSearchResult exhaustive_threshold_search(const joac::JoacInstance& instance, int t_max);

/// Reward-maximizing per-location thresholds in {0..M}^L (ties: lexicographically smallest).
ThresholdSearchResult threshold_reward_search(const mdp::AgingMdpInstance& instance);

struct EnumerationResult {
  mdp::DeterministicPolicy policy{1, 1};
  double reward = 0.0;
  long evaluated = 0;
};

/// Best of all 2^(M L) deterministic stationary policies, each scored by the best average reward
/// among the closed classes of its induced chain. Requires M L <= 20.
EnumerationResult exhaustive_policy_enumeration(const mdp::AgingMdpInstance& instance);

}  // namespace ageopt::sim
