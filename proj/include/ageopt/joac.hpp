#pragma once

#include "ageopt/aoi.hpp"
#include "ageopt/common.hpp"
#include "ageopt/mdp.hpp"
#include "ageopt/mobility.hpp"

#include <optional>
#include <vector>

// Service-provider side: cost of a threshold vector, its SLA and capacity feasibility, the
// threshold range, and recovery of prices that induce given thresholds.
namespace ageopt::joac {

struct JoacInstance {
  mobility::MobilityModel model;
  std::vector<double> costs;       // C_j per unit of data
  std::vector<double> capacities;  // B_j, data per second
  double devices = 1.0;            // N
  double mean_size = 1.0;          // F
  double slot_seconds = 1.0;       // kappa
  int latency_target = 1;          // d, in slots
  std::vector<double> epsilon;     // per origin; a single entry is broadcast
  int max_age = 2;                 // M
  std::vector<double> utility;     // U(1..M)
  /// Optional operating cap on the threshold range (used in place of the computed t_max bound).
  std::optional<int> t_max_cap;
  /// Also cap the threshold range at d + 3.
  bool cap_at_latency_plus_3 = false;

  /// Throws InvalidArgument on any violated invariant. Broadcasts a scalar epsilon.
  void validate();

  int locations() const { return model.size(); }
  double eps(int origin) const { return epsilon.size() == 1 ? epsilon[0] : epsilon[origin]; }
  /// N F / kappa.
  double demand_scale() const { return devices * mean_size / slot_seconds; }
  Vector demand() const { return model.stationary() * demand_scale(); }
};

struct AoiViolation {
  int origin;
  double tail;     // P(Delta_i > d)
  double epsilon;
};

struct CapacityViolation {
  int location;
  double rate;     // Y_j
  double capacity; // B_j
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<AoiViolation> aoi_violations;
  std::vector<CapacityViolation> capacity_violations;
};

struct Evaluation {
  double objective = 0.0;
  Vector upload;  // Y
  Vector tails;   // P(Delta_i > d)
  FeasibilityReport report;
};

/// Slack applied to both constraint comparisons, absorbing floating-point drift.
inline constexpr double kFeasibilitySlack = 1e-12;

Evaluation evaluate(const JoacInstance& instance, const Thresholds& tau);
double objective(const JoacInstance& instance, const Thresholds& tau);
FeasibilityReport feasible(const JoacInstance& instance, const Thresholds& tau);

/// Largest t such that, for every origin i, thresholds (t at i, 0 elsewhere) keep
/// P(Delta_i > d) < eps_i; capped at M - 1 and the configured operating caps.
int t_max(const JoacInstance& instance);

/// Default cooling constant a_hat = (N F / kappa) max_j C_j; no achievable cost exceeds it.
double default_a_hat(const JoacInstance& instance);

struct CalibrationResult {
  std::vector<double> prices;
  Thresholds achieved;
  std::vector<bool> verified;
  int sweeps = 0;
  bool ok() const;
};

/// Per-location monotone price search (grid, then bisection, repeated until the MDP solved at the
/// returned prices reproduces `target`). Never throws on mismatch; see calibrate_prices().
CalibrationResult calibrate_prices_report(const JoacInstance& instance, const Thresholds& target);

/// As calibrate_prices_report(), but throws Uncalibratable listing nearest achieved thresholds.
CalibrationResult calibrate_prices(const JoacInstance& instance, const Thresholds& target);

/// The per-device MDP of an instance at given prices.
mdp::AgingMdpInstance mdp_at(const JoacInstance& instance, std::vector<double> prices);

/// Incremental evaluation of single-coordinate threshold changes. Only origins that can reach the
/// changed location while still holding data are recomputed.
class ThresholdEvaluator {
 public:
  ThresholdEvaluator(const JoacInstance& instance, Thresholds tau);

  struct Assessment {
    int location = -1;
    int value = 0;
    double delta = 0.0;  // W(tau') - W(tau)
    bool feasible = false;
    std::vector<int> origins;
    std::vector<aoi::OriginFlow> flows;
    Vector upload;       // Y(tau')
  };

  const Thresholds& thresholds() const { return tau_; }
  double objective() const { return objective_; }
  const Vector& upload() const { return upload_; }
  bool feasible() const { return feasible_; }
  const JoacInstance& instance() const { return *instance_; }

  /// Pure; safe to call concurrently.
  Assessment assess(int location, int value) const;
  void apply(const Assessment& a);
  /// Full recomputation at an arbitrary vector.
  void reset(Thresholds tau);
  /// Full recomputation at the current vector; returns the objective drift that was removed.
  double audit();

 private:
  void recompute();
  bool globally_feasible(const Vector& upload, const Vector& tails) const;

  const JoacInstance* instance_;
  Thresholds tau_;
  Matrix rows_;   // y(i, .)
  Vector tails_;
  Vector demand_;
  Vector upload_;
  Vector cost_;
  double objective_ = 0.0;
  bool feasible_ = false;
};

}  // namespace ageopt::joac
