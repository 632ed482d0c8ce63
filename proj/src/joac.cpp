#include "ageopt/joac.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ageopt::joac {

void JoacInstance::validate() {
  const int L = locations();
  require(static_cast<int>(costs.size()) == L, "one cost per location required");
  require(static_cast<int>(capacities.size()) == L, "one capacity per location required");
  for (double c : costs) require(std::isfinite(c) && c >= 0.0, "costs must be finite and >= 0");
  for (double b : capacities) require(b > 0.0, "capacities must be positive");
  require(devices >= 1.0, "device count must be at least 1");
  require(mean_size > 0.0 && slot_seconds > 0.0, "data size and slot duration must be positive");
  require(max_age >= 2, "max age must be at least 2");
  require(latency_target >= 1 && latency_target < max_age, "latency target must satisfy 1 <= d < M");
  require(epsilon.size() == 1 || static_cast<int>(epsilon.size()) == L,
          "epsilon must be a scalar or one value per location");
  for (double e : epsilon) require(e > 0.0 && e < 1.0, "epsilon must lie in (0, 1)");
  if (epsilon.size() == 1 && L > 1) epsilon.assign(L, epsilon[0]);
  if (utility.empty()) utility = mdp::linear_utility(max_age);
  require(static_cast<int>(utility.size()) == max_age, "utility must have one entry per age");
  if (t_max_cap) require(*t_max_cap >= 0, "threshold cap must be non-negative");
}

namespace {

bool within(double value, double bound) {
  return value <= bound + kFeasibilitySlack * std::max(1.0, std::abs(bound));
}

}  // namespace

Evaluation evaluate(const JoacInstance& instance, const Thresholds& tau) {
  const int L = instance.locations();
  require(static_cast<int>(tau.size()) == L, "threshold vector length mismatch");
  std::vector<aoi::OriginFlow> flows(L);
  parallel_for(L, 64, [&](int i) {
    flows[i] = aoi::origin_flow(instance.model, tau, i, instance.latency_target);
  });
  const Vector demand = instance.demand();
  Evaluation ev;
  ev.upload = Vector::Zero(L);
  ev.tails = Vector(L);
  for (int i = 0; i < L; ++i) {
    ev.upload += demand(i) * flows[i].y_row;
    ev.tails(i) = flows[i].tail;
  }
  for (int j = 0; j < L; ++j) ev.objective += instance.costs[j] * ev.upload(j);
  for (int i = 0; i < L; ++i)
    if (!within(ev.tails(i), instance.eps(i)))
      ev.report.aoi_violations.push_back({i, ev.tails(i), instance.eps(i)});
  for (int j = 0; j < L; ++j)
    if (!within(ev.upload(j), instance.capacities[j]))
      ev.report.capacity_violations.push_back({j, ev.upload(j), instance.capacities[j]});
  ev.report.feasible = ev.report.aoi_violations.empty() && ev.report.capacity_violations.empty();
  return ev;
}

double objective(const JoacInstance& instance, const Thresholds& tau) {
  return evaluate(instance, tau).objective;
}

FeasibilityReport feasible(const JoacInstance& instance, const Thresholds& tau) {
  return evaluate(instance, tau).report;
}

int t_max(const JoacInstance& instance) {
  const int L = instance.locations();
  int cap = instance.max_age - 1;
  if (instance.cap_at_latency_plus_3) cap = std::min(cap, instance.latency_target + 3);
  if (instance.t_max_cap) cap = std::min(cap, *instance.t_max_cap);
  int best = 0;
  for (int t = 1; t <= cap; ++t) {
    bool ok = true;
    for (int i = 0; i < L && ok; ++i) {
      Thresholds tau(L, 0);
      tau[i] = t;
      ok = aoi::origin_flow(instance.model, tau, i, instance.latency_target).tail < instance.eps(i);
    }
    if (!ok) break;
    best = t;
  }
  return best;
}

double default_a_hat(const JoacInstance& instance) {
  return instance.demand_scale() * *std::max_element(instance.costs.begin(), instance.costs.end());
}

mdp::AgingMdpInstance mdp_at(const JoacInstance& instance, std::vector<double> prices) {
  return mdp::AgingMdpInstance(instance.model, instance.max_age, instance.utility, std::move(prices));
}

// ---------------------------------------------------------------------------------------------
// Price calibration

bool CalibrationResult::ok() const {
  return std::all_of(verified.begin(), verified.end(), [](bool v) { return v; });
}

namespace {

constexpr int kGridPoints = 64;
constexpr int kBisections = 40;
constexpr int kMaxSweeps = 12;

class ThresholdProbe {
 public:
  ThresholdProbe(const JoacInstance& instance) : instance_(instance) {
    options_.tolerance = 1e-10;
  }

  Thresholds at(const std::vector<double>& prices) const {
    const mdp::AgingMdpInstance m = mdp_at(instance_, prices);
    const mdp::MdpSolution sol = mdp::solve_average_reward(m, options_);
    Thresholds tau;
    mdp::check_structure(sol.policy, m, &tau);
    return tau;
  }

 private:
  const JoacInstance& instance_;
  mdp::SolverOptions options_;
};

}  // namespace

CalibrationResult calibrate_prices_report(const JoacInstance& instance, const Thresholds& target) {
  const int L = instance.locations();
  const int M = instance.max_age;
  require(static_cast<int>(target.size()) == L, "threshold vector length mismatch");
  for (int t : target) require(t >= 0 && t <= M, "target thresholds must lie in 0..M");

  // Above sum_x (U(x) - U(M)) an upload can never pay for itself.
  double top = 1.0;
  for (double u : instance.utility) top += u - instance.utility.back();
  std::vector<double> grid(kGridPoints);
  grid[0] = 0.0;
  for (int k = 1; k < kGridPoints; ++k)
    grid[k] = top * std::pow(10.0, -6.0 * (kGridPoints - 1 - k) / (kGridPoints - 2));

  const ThresholdProbe probe(instance);
  CalibrationResult out;
  out.prices.assign(L, 0.0);

  auto own = [&](int l, double p) {
    std::vector<double> prices = out.prices;
    prices[l] = p;
    return probe.at(prices)[l];
  };
  // Smallest grid index with own(l, grid[k]) >= want; kGridPoints when none.
  auto first_at_least = [&](int l, int want) {
    int lo = 0, hi = kGridPoints;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (own(l, grid[mid]) >= want) hi = mid;
      else lo = mid + 1;
    }
    return lo;
  };
  // Boundary between own < want (at a) and own >= want (at b).
  auto bisect = [&](int l, double a, double b, int want) {
    for (int it = 0; it < kBisections; ++it) {
      const double mid = 0.5 * (a + b);
      if (own(l, mid) >= want) b = mid;
      else a = mid;
    }
    return b;
  };

  for (out.sweeps = 1; out.sweeps <= kMaxSweeps; ++out.sweeps) {
    bool changed = false;
    for (int l = 0; l < L; ++l) {
      double price = 0.0;
      if (target[l] > 0) {
        const int k = first_at_least(l, target[l]);
        if (k == kGridPoints) {
          price = grid.back();
        } else {
          const double lower = k == 0 ? 0.0 : bisect(l, grid[k - 1], grid[k], target[l]);
          if (own(l, lower) == target[l]) {
            const int k2 = first_at_least(l, target[l] + 1);
            const double upper = k2 == kGridPoints ? grid.back()
                                 : k2 == 0        ? 0.0
                                                  : bisect(l, grid[k2 - 1], grid[k2], target[l] + 1);
            price = upper > lower ? 0.5 * (lower + upper) : lower;
            if (own(l, price) != target[l]) price = lower;
          } else {
            price = lower;
          }
        }
      }
      if (price != out.prices[l]) changed = true;
      out.prices[l] = price;
    }
    out.achieved = probe.at(out.prices);
    if (out.achieved == target || !changed) break;
  }
  if (out.sweeps > kMaxSweeps) out.sweeps = kMaxSweeps;
  out.verified.resize(L);
  for (int l = 0; l < L; ++l) out.verified[l] = out.achieved[l] == target[l];
  return out;
}

CalibrationResult calibrate_prices(const JoacInstance& instance, const Thresholds& target) {
  CalibrationResult r = calibrate_prices_report(instance, target);
  if (!r.ok()) {
    std::ostringstream os;
    os << "no price vector reproduces the target thresholds;";
    for (int l = 0; l < static_cast<int>(target.size()); ++l)
      if (!r.verified[l])
        os << " location " << l << " wants " << target[l] << " nearest " << r.achieved[l] << ";";
    fail(ErrorCode::uncalibratable, os.str());
  }
  return r;
}

// ---------------------------------------------------------------------------------------------
// Incremental evaluator

ThresholdEvaluator::ThresholdEvaluator(const JoacInstance& instance, Thresholds tau)
    : instance_(&instance), tau_(std::move(tau)) {
  const int L = instance.locations();
  require(static_cast<int>(tau_.size()) == L, "threshold vector length mismatch");
  demand_ = instance.demand();
  cost_ = Vector::Map(instance.costs.data(), L);
  recompute();
}

void ThresholdEvaluator::reset(Thresholds tau) {
  require(tau.size() == tau_.size(), "threshold vector length mismatch");
  tau_ = std::move(tau);
  recompute();
}

double ThresholdEvaluator::audit() {
  const double before = objective_;
  recompute();
  return std::abs(before - objective_);
}

void ThresholdEvaluator::recompute() {
  const JoacInstance& inst = *instance_;
  const int L = inst.locations();
  std::vector<aoi::OriginFlow> flows(L);
  parallel_for(L, 64, [&](int i) {
    flows[i] = aoi::origin_flow(inst.model, tau_, i, inst.latency_target);
  });
  rows_ = Matrix(L, L);
  tails_ = Vector(L);
  upload_ = Vector::Zero(L);
  for (int i = 0; i < L; ++i) {
    rows_.row(i) = flows[i].y_row.transpose();
    tails_(i) = flows[i].tail;
    upload_ += demand_(i) * flows[i].y_row;
  }
  objective_ = cost_.dot(upload_);
  feasible_ = globally_feasible(upload_, tails_);
}

bool ThresholdEvaluator::globally_feasible(const Vector& upload, const Vector& tails) const {
  const JoacInstance& inst = *instance_;
  for (int i = 0; i < upload.size(); ++i) {
    if (!within(tails(i), inst.eps(i))) return false;
    if (!within(upload(i), inst.capacities[i])) return false;
  }
  return true;
}

ThresholdEvaluator::Assessment ThresholdEvaluator::assess(int location, int value) const {
  const JoacInstance& inst = *instance_;
  const int L = inst.locations();
  Assessment a;
  a.location = location;
  a.value = value;
  Thresholds next = tau_;
  next[location] = value;
  const int reach = std::max(aoi::horizon(tau_), aoi::horizon(next)) - 1;
  const std::vector<int>& hops = inst.model.hop_distances();
  for (int o = 0; o < L; ++o) {
    const int h = hops[static_cast<std::size_t>(o) * L + location];
    if (h >= 0 && h <= reach) a.origins.push_back(o);
  }
  a.flows.resize(a.origins.size());
  for (std::size_t k = 0; k < a.origins.size(); ++k)
    a.flows[k] = aoi::origin_flow(inst.model, next, a.origins[k], inst.latency_target);

  Vector shift = Vector::Zero(L);
  Vector tails = tails_;
  for (std::size_t k = 0; k < a.origins.size(); ++k) {
    const int o = a.origins[k];
    shift += demand_(o) * (a.flows[k].y_row - rows_.row(o).transpose());
    tails(o) = a.flows[k].tail;
  }
  a.upload = upload_ + shift;
  a.delta = cost_.dot(shift);
  a.feasible = globally_feasible(a.upload, tails);
  return a;
}

void ThresholdEvaluator::apply(const Assessment& a) {
  require(a.location >= 0 && a.location < static_cast<int>(tau_.size()), "assessment has no location");
  for (std::size_t k = 0; k < a.origins.size(); ++k) {
    const int o = a.origins[k];
    rows_.row(o) = a.flows[k].y_row.transpose();
    tails_(o) = a.flows[k].tail;
  }
  tau_[a.location] = a.value;
  upload_ = a.upload;
  objective_ += a.delta;
  feasible_ = a.feasible;
}

}  // namespace ageopt::joac
