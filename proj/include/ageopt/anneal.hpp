#pragma once

#include "ageopt/common.hpp"
#include "ageopt/joac.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Metropolis-Hastings over threshold vectors in {0..t_max}^L and the annealing optimizer built on it.
namespace ageopt::anneal {

enum class Schedule { log, power };

struct AnnealConfig {
  /// Cooling constant; <= 0 selects (N F / kappa) max_j C_j.
  double a_hat = 0.0;
  Schedule schedule = Schedule::log;
  double power_exponent = 2.8;
  /// Stop after this many consecutive slots in which the current cost did not move.
  int stop_unchanged_slots = 200;
  double stop_temperature = 1e-6;
  long iteration_cap = 1'000'000;
  std::uint64_t seed = 1;
  /// Threshold range; < 0 selects joac::t_max(instance).
  int t_max = -1;
  /// Full recomputation of the incremental state every this many iterations.
  int audit_every = 1000;
  /// Keep every stride-th iteration in the trace (improvements and the last slot are always kept);
  /// 0 disables the trace.
  int trace_stride = 100;
};

double temperature(const AnnealConfig& config, double a_hat, long t);

struct TraceRecord {
  long t = 0;
  double temperature = 0.0;
  int location = -1;
  int value = 0;
  bool feasible = false;
  bool accepted = false;
  double delta = 0.0;
  double local_delta = 0.0;
  double current = 0.0;
  double best = 0.0;
  Thresholds best_tau;
};

struct AnnealTrace {
  std::vector<TraceRecord> records;
};

enum class StopReason { unchanged, temperature, iteration_cap };
const char* to_string(StopReason reason);

struct AnnealResult {
  Thresholds best;
  double best_objective = 0.0;
  AnnealTrace trace;
  StopReason stop = StopReason::iteration_cap;
  bool iteration_cap_reached() const { return stop == StopReason::iteration_cap; }
  long iterations = 0;
  long accepted = 0;
  long infeasible_proposals = 0;
  /// Slots where the delta summed over the neighborhood differed from the exact delta.
  long local_delta_mismatches = 0;
  double max_audit_drift = 0.0;
  int t_max = 0;
  double a_hat = 0.0;
};

/// First slot at which the best cost is <= target; -1 if never.
long slots_to_reach(const AnnealResult& result, double target);

struct NeighborhoodGraph {
  std::vector<std::vector<int>> adjacency;

  int size() const { return static_cast<int>(adjacency.size()); }
  bool adjacent(int i, int j) const;
  int max_degree() const;
  long edge_count() const;
};

/// Locations i ~ j iff data collected at one is uploaded at the other with positive probability
/// under the all-tau_max vector. `transitions` need not be irreducible.
NeighborhoodGraph neighborhood_graph(const Matrix& transitions, int tau_max);
NeighborhoodGraph neighborhood_graph(const joac::JoacInstance& instance, int tau_max);

struct Proposal {
  int location;
  int value;
};

/// Uniform over the L * t_max single-coordinate changes of `current`.
Proposal proposal_uniform(const Thresholds& current, int t_max, Rng& rng);

/// New value for a fixed location, uniform over {0..t_max} minus the current one.
int propose_value(int current, int t_max, Rng& rng);

bool acceptance(double delta, double temperature, Rng& rng);

/// Mixed-radix index of a vector in {0..t_max}^L (location 0 is the least significant digit).
long encode(const Thresholds& tau, int t_max);
Thresholds decode(long index, int locations, int t_max);

struct MhResult {
  std::vector<long> visits;  // indexed by encode()
  long steps = 0;
  long accepted = 0;
  long infeasible_proposals = 0;
  Thresholds last;

  std::vector<double> occupancy() const;
};

/// Fixed-temperature chain restricted to the feasible set. Throws InfeasibleStart.
MhResult mh_chain_fixed_T(const joac::JoacInstance& instance, double temperature, long steps,
                          Rng& rng, int t_max, const Thresholds& start);

/// Exact transition matrix of the fixed-temperature chain over all (t_max + 1)^L vectors.
/// Infeasible vectors receive no probability; their rows are pure self-loops.
Matrix mh_kernel(const joac::JoacInstance& instance, double temperature, int t_max);

/// Boltzmann-Gibbs weights exp(-W / T) / Z over feasible vectors, zero elsewhere.
Vector boltzmann(const joac::JoacInstance& instance, double temperature, int t_max);

/// One selection/test/decision step at a fixed location against `state`.
struct LocalStep {
  joac::ThresholdEvaluator::Assessment assessment;
  double local_delta = 0.0;
  bool accepted = false;
};
LocalStep local_step(const joac::ThresholdEvaluator& state, const NeighborhoodGraph& graph,
                     int location, int t_max, double temperature, Rng& rng);

/// Annealing from `initial` (zero vector by default). Throws InfeasibleStart.
AnnealResult sa_optimize(const joac::JoacInstance& instance, const AnnealConfig& config,
                         const std::optional<Thresholds>& initial = std::nullopt);

}  // namespace ageopt::anneal
