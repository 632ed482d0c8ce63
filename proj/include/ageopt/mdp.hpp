#pragma once

#include "ageopt/common.hpp"
#include "ageopt/mobility.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Per-device aging control: average-reward MDP over (age, location) states with reward
// U(x) - p(l) * a, where a = 1 uploads (age resets to 1) and a = 0 defers (age grows, capped at M).
namespace ageopt::mdp {

/// Sorted distinct prices P_1 < ... < P_K and the rank of each location's price.
struct PriceLadder {
  std::vector<double> levels;
  std::vector<int> rank;

  int size() const { return static_cast<int>(levels.size()); }
};

/// Exact-equality ladder: near-equal prices are kept distinct.
PriceLadder make_ladder(const std::vector<double>& prices);

class AgingMdpInstance {
 public:
  /// `utility[x - 1]` is U(x) for x = 1..M. Throws InvalidArgument when U is increasing anywhere,
  /// or a price is negative or non-finite.
  AgingMdpInstance(mobility::MobilityModel model, int max_age, std::vector<double> utility,
                   std::vector<double> prices);

  const mobility::MobilityModel& model() const { return model_; }
  int locations() const { return model_.size(); }
  int max_age() const { return max_age_; }
  double utility(int age) const { return utility_[age - 1]; }
  const std::vector<double>& utility() const { return utility_; }
  double price(int l) const { return prices_[l]; }
  const std::vector<double>& prices() const { return prices_; }
  const PriceLadder& ladder() const { return ladder_; }

  /// Copy with a different price vector.
  AgingMdpInstance with_prices(std::vector<double> prices) const;

 private:
  mobility::MobilityModel model_;
  int max_age_;
  std::vector<double> utility_;
  std::vector<double> prices_;
  PriceLadder ladder_;
};

/// U(x) = max(M - x, 0).
std::vector<double> linear_utility(int max_age);

/// mu(x, l) in {0 defer, 1 upload}, x = 1..M.
class DeterministicPolicy {
 public:
  DeterministicPolicy(int max_age, int locations)
      : max_age_(max_age), locations_(locations),
        upload_(static_cast<std::size_t>(max_age) * locations, 0) {}

  int max_age() const { return max_age_; }
  int locations() const { return locations_; }
  bool uploads(int age, int l) const { return upload_[index(age, l)] != 0; }
  void set(int age, int l, bool upload) { upload_[index(age, l)] = upload ? 1 : 0; }

  /// Policy with mu(x, l) = 1 iff x > tau[l].
  static DeterministicPolicy from_thresholds(int max_age, const Thresholds& tau);
  /// Bit k of `code` is the action of state index k (age-major, see index()).
  static DeterministicPolicy from_code(int max_age, int locations, std::uint64_t code);

  bool operator==(const DeterministicPolicy&) const = default;

 private:
  std::size_t index(int age, int l) const {
    return static_cast<std::size_t>(age - 1) * locations_ + l;
  }
  int max_age_;
  int locations_;
  std::vector<std::uint8_t> upload_;
};

struct ThresholdPolicy {
  /// tau_l in {0..M}; M means "never upload at l".
  Thresholds per_location;
  /// tau^(j) per price level, present when locations sharing a price share a threshold and the
  /// ladder is non-decreasing.
  std::optional<std::vector<int>> per_price;
};

struct StructureReport {
  /// (age, location) states where the policy uploads although the age does not exceed the
  /// location's threshold.
  std::vector<std::pair<int, int>> violations;
  /// Pairs of locations with identical transition rows whose thresholds are not ordered like
  /// their prices.
  std::vector<std::pair<int, int>> price_order_violations;
  /// Threshold orderings against price that involve different transition rows; informative only.
  std::vector<std::pair<int, int>> observations;

  bool ok() const { return violations.empty() && price_order_violations.empty(); }
};

class StructureViolation : public Error {
 public:
  explicit StructureViolation(StructureReport report);
  const StructureReport& report() const { return report_; }

 private:
  StructureReport report_;
};

struct SolverOptions {
  double tolerance = 1e-9;
  long max_iterations = 1'000'000;
  /// Weight of the Bellman update in each sweep; values below one make the iteration aperiodic
  /// without changing the gain or the relative values.
  double damping = 0.5;
  /// Delta H within this band of zero (scaled by the reward magnitude) counts as a tie -> upload.
  double tie_tolerance = 1e-8;
};

struct MdpSolution {
  /// value(x - 1, l) = V(x, l), anchored so that V(1, 0) = 0.
  Matrix value;
  double gain = 0.0;
  DeterministicPolicy policy{1, 1};
  /// Upload advantage Delta H(x, l) = H(x, l, 1) - H(x, l, 0).
  Matrix advantage;
  double residual = 0.0;
  long iterations = 0;
  std::optional<ThresholdPolicy> thresholds;
  StructureReport structure;
};

/// Relative value iteration. Throws NoConvergence when the iteration cap is hit.
MdpSolution solve_average_reward(const AgingMdpInstance& instance, const SolverOptions& options = {});

/// Per-location thresholds of a solved policy. Throws StructureViolation when the greedy policy is
/// not of threshold form.
ThresholdPolicy extract_thresholds(const MdpSolution& solution, const AgingMdpInstance& instance);

/// Non-throwing structure check of any deterministic policy.
StructureReport check_structure(const DeterministicPolicy& policy, const AgingMdpInstance& instance,
                                Thresholds* thresholds = nullptr);

/// Max over states of |max_a H(x, l, a) - V(x, l) - gain|.
double bellman_residual(const AgingMdpInstance& instance, const Matrix& value, double gain);

/// Transition matrix and reward vector of the (age, location) chain induced by a policy.
/// State index = (x - 1) * L + l.
struct ProductChain {
  Matrix transitions;
  Vector reward;
  Vector initial;  // fresh data at a stationary location: (1, l) with probability pi_l
};
ProductChain product_chain(const AgingMdpInstance& instance, const DeterministicPolicy& policy);

/// Exact long-run average reward of the induced chain from the fresh-data start.
double average_reward(const AgingMdpInstance& instance, const DeterministicPolicy& policy);
double average_reward(const AgingMdpInstance& instance, const ThresholdPolicy& policy);

/// Prices at which uploads happen with positive long-run probability under `policy`.
std::vector<double> prices_in_use(const AgingMdpInstance& instance, const DeterministicPolicy& policy);

/// Closed-form upload-set predicates for the multi-threshold policy.
struct UploadSetPrediction {
  /// Predicted set of prices used with positive probability, ascending: empty under the
  /// never-upload predicate, otherwise the ladder prefix up to the first level whose upper prices
  /// are all idle.
  std::vector<double> predicted;
  /// S(i) at location l: s_value[i][l] for ladder index i (0-based) and location l.
  std::vector<std::vector<double>> s_value;
  /// K_{l P_i}: probability of moving from l into a location priced at most P_i.
  std::vector<std::vector<double>> k_value;
  /// Kbar_{l P_i} = K_{l P_i} - K_{l P_{i-1}}.
  std::vector<std::vector<double>> k_bar;
  /// (p_i) predicate per ladder index: S(i) < p(l) for every l priced above P_i.
  std::vector<bool> upper_prices_idle;
  /// Upload-gain inequality per ladder index, true when it holds at some location priced P_i.
  /// Informative only; it does not enter `predicted`.
  std::vector<bool> gain_condition;
  /// Never-upload predicate: sum_x (U(x) - U(M)) < p(l) for every l, with P_1 > 0.
  bool never_upload = false;
  /// Size k of the predicted prefix {P_1..P_k}; 0 under the never-upload predicate.
  int certified_prefix = 0;
};

UploadSetPrediction upload_set_conditions(const AgingMdpInstance& instance);

}  // namespace ageopt::mdp
