#include "ageopt/mdp.hpp"

#include "ageopt/chain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ageopt::mdp {

PriceLadder make_ladder(const std::vector<double>& prices) {
  PriceLadder ladder;
  ladder.levels = prices;
  std::sort(ladder.levels.begin(), ladder.levels.end());
  ladder.levels.erase(std::unique(ladder.levels.begin(), ladder.levels.end()), ladder.levels.end());
  ladder.rank.reserve(prices.size());
  for (double p : prices) {
    const auto it = std::lower_bound(ladder.levels.begin(), ladder.levels.end(), p);
    ladder.rank.push_back(static_cast<int>(it - ladder.levels.begin()));
  }
  return ladder;
}

AgingMdpInstance::AgingMdpInstance(mobility::MobilityModel model, int max_age,
                                   std::vector<double> utility, std::vector<double> prices)
    : model_(std::move(model)), max_age_(max_age), utility_(std::move(utility)),
      prices_(std::move(prices)) {
  require(max_age_ >= 2, "max age must be at least 2");
  require(static_cast<int>(utility_.size()) == max_age_, "utility must have one entry per age");
  for (int x = 0; x < max_age_; ++x) {
    require(std::isfinite(utility_[x]), "utility must be finite");
    if (x > 0) require(utility_[x] <= utility_[x - 1], "utility must be non-increasing in age");
  }
  require(static_cast<int>(prices_.size()) == model_.size(), "one price per location required");
  for (double p : prices_) require(std::isfinite(p) && p >= 0.0, "prices must be finite and >= 0");
  ladder_ = make_ladder(prices_);
}

AgingMdpInstance AgingMdpInstance::with_prices(std::vector<double> prices) const {
  return AgingMdpInstance(model_, max_age_, utility_, std::move(prices));
}

std::vector<double> linear_utility(int max_age) {
  std::vector<double> u(max_age);
  for (int x = 1; x <= max_age; ++x) u[x - 1] = std::max(max_age - x, 0);
  return u;
}

DeterministicPolicy DeterministicPolicy::from_thresholds(int max_age, const Thresholds& tau) {
  DeterministicPolicy policy(max_age, static_cast<int>(tau.size()));
  for (int l = 0; l < policy.locations(); ++l) {
    require(tau[l] >= 0 && tau[l] <= max_age, "threshold outside 0..M");
    for (int x = 1; x <= max_age; ++x) policy.set(x, l, x > tau[l]);
  }
  return policy;
}

DeterministicPolicy DeterministicPolicy::from_code(int max_age, int locations, std::uint64_t code) {
  DeterministicPolicy policy(max_age, locations);
  for (std::size_t k = 0; k < policy.upload_.size(); ++k) policy.upload_[k] = (code >> k) & 1U;
  return policy;
}

namespace {

std::string describe(const StructureReport& report) {
  std::ostringstream os;
  os << "policy is not of multi-threshold form:";
  for (const auto& [x, l] : report.violations) os << " (x=" << x << ",l=" << l << ")";
  for (const auto& [a, b] : report.price_order_violations)
    os << " price-order(" << a << "," << b << ")";
  return os.str();
}

bool same_row(const Matrix& P, int a, int b) {
  return (P.row(a) - P.row(b)).cwiseAbs().maxCoeff() <= 1e-12;
}

// EV(x, l) = sum_l' lambda(l, l') V(x, l').
Matrix expected_next(const Matrix& value, const Matrix& transitions) {
  return value * transitions.transpose();
}

double reward_scale(const AgingMdpInstance& instance) {
  double s = 1.0;
  for (double u : instance.utility()) s = std::max(s, std::abs(u));
  return s;
}

}  // namespace

StructureViolation::StructureViolation(StructureReport report)
    : Error(ErrorCode::structure_violation, describe(report)), report_(std::move(report)) {}

StructureReport check_structure(const DeterministicPolicy& policy, const AgingMdpInstance& instance,
                                Thresholds* thresholds) {
  const int L = instance.locations();
  const int M = instance.max_age();
  StructureReport report;
  Thresholds tau(L, 0);
  for (int l = 0; l < L; ++l) {
    for (int x = M; x >= 1; --x) {
      if (!policy.uploads(x, l)) {
        tau[l] = x;
        break;
      }
    }
    for (int x = 1; x <= tau[l]; ++x)
      if (policy.uploads(x, l)) report.violations.emplace_back(x, l);
  }
  const Matrix& P = instance.model().transitions();
  for (int a = 0; a < L; ++a) {
    for (int b = a + 1; b < L; ++b) {
      const double pa = instance.price(a), pb = instance.price(b);
      const bool misordered = (pa == pb && tau[a] != tau[b]) || (pa < pb && tau[a] > tau[b]) ||
                              (pb < pa && tau[b] > tau[a]);
      if (!misordered) continue;
      if (same_row(P, a, b))
        report.price_order_violations.emplace_back(a, b);
      else
        report.observations.emplace_back(a, b);
    }
  }
  if (thresholds) *thresholds = std::move(tau);
  return report;
}

double bellman_residual(const AgingMdpInstance& instance, const Matrix& value, double gain) {
  const int L = instance.locations();
  const int M = instance.max_age();
  const Matrix ev = expected_next(value, instance.model().transitions());
  double worst = 0.0;
  for (int x = 1; x <= M; ++x) {
    const int next = std::min(x + 1, M);
    for (int l = 0; l < L; ++l) {
      const double upload = instance.utility(x) - instance.price(l) + ev(0, l);
      const double defer = instance.utility(x) + ev(next - 1, l);
      worst = std::max(worst, std::abs(std::max(upload, defer) - value(x - 1, l) - gain));
    }
  }
  return worst;
}

MdpSolution solve_average_reward(const AgingMdpInstance& instance, const SolverOptions& options) {
  require(options.tolerance > 0.0, "solver tolerance must be positive");
  require(options.damping > 0.0 && options.damping < 1.0, "damping must lie in (0, 1)");
  const int L = instance.locations();
  const int M = instance.max_age();
  const Matrix& P = instance.model().transitions();

  Matrix v = Matrix::Zero(M, L);
  Matrix tv(M, L);
  double span = 0.0, mid = 0.0;
  long it = 0;
  for (;;) {
    const Matrix ev = expected_next(v, P);
    for (int x = 1; x <= M; ++x) {
      const int next = std::min(x + 1, M);
      for (int l = 0; l < L; ++l) {
        const double upload = instance.utility(x) - instance.price(l) + ev(0, l);
        const double defer = instance.utility(x) + ev(next - 1, l);
        tv(x - 1, l) = std::max(upload, defer);
      }
    }
    const Matrix diff = tv - v;
    const double hi = diff.maxCoeff(), lo = diff.minCoeff();
    span = hi - lo;
    mid = 0.5 * (hi + lo);
    if (span < options.tolerance) break;
    if (++it >= options.max_iterations)
      fail(ErrorCode::no_convergence,
           "relative value iteration hit the iteration cap; span residual " + std::to_string(span));
    v = (1.0 - options.damping) * v + options.damping * tv;
    v.array() -= v(0, 0);
  }

  MdpSolution sol;
  sol.value = v;
  sol.gain = mid;
  sol.residual = 0.5 * span;
  sol.iterations = it;
  sol.policy = DeterministicPolicy(M, L);
  sol.advantage = Matrix(M, L);
  const Matrix ev = expected_next(v, P);
  const double tie = options.tie_tolerance * reward_scale(instance);
  for (int x = 1; x <= M; ++x) {
    const int next = std::min(x + 1, M);
    for (int l = 0; l < L; ++l) {
      const double delta = -instance.price(l) + ev(0, l) - ev(next - 1, l);
      sol.advantage(x - 1, l) = delta;
      sol.policy.set(x, l, delta >= -tie);
    }
  }
  Thresholds tau;
  sol.structure = check_structure(sol.policy, instance, &tau);
  if (sol.structure.violations.empty()) {
    ThresholdPolicy tp;
    tp.per_location = tau;
    const PriceLadder& ladder = instance.ladder();
    std::vector<int> per_price(ladder.size(), -1);
    bool consistent = true;
    for (int l = 0; l < L && consistent; ++l) {
      int& slot = per_price[ladder.rank[l]];
      if (slot < 0) slot = tau[l];
      consistent = slot == tau[l];
    }
    for (int j = 1; j < ladder.size() && consistent; ++j)
      consistent = per_price[j - 1] <= per_price[j];
    if (consistent) tp.per_price = per_price;
    sol.thresholds = std::move(tp);
  }
  return sol;
}

ThresholdPolicy extract_thresholds(const MdpSolution& solution, const AgingMdpInstance& instance) {
  const StructureReport report = check_structure(solution.policy, instance);
  if (!report.ok() || !solution.thresholds) throw StructureViolation(report);
  return *solution.thresholds;
}

ProductChain product_chain(const AgingMdpInstance& instance, const DeterministicPolicy& policy) {
  const int L = instance.locations();
  const int M = instance.max_age();
  require(policy.locations() == L && policy.max_age() == M, "policy dimensions do not match");
  const int n = M * L;
  ProductChain pc;
  pc.transitions = Matrix::Zero(n, n);
  pc.reward = Vector::Zero(n);
  pc.initial = Vector::Zero(n);
  for (int x = 1; x <= M; ++x) {
    for (int l = 0; l < L; ++l) {
      const int s = (x - 1) * L + l;
      const bool up = policy.uploads(x, l);
      const int nx = up ? 1 : std::min(x + 1, M);
      pc.reward(s) = instance.utility(x) - (up ? instance.price(l) : 0.0);
      for (const auto& arc : instance.model().successors(l))
        pc.transitions(s, (nx - 1) * L + arc.to) += arc.probability;
    }
  }
  for (int l = 0; l < L; ++l) pc.initial(l) = instance.model().stationary()(l);
  return pc;
}

double average_reward(const AgingMdpInstance& instance, const DeterministicPolicy& policy) {
  const ProductChain pc = product_chain(instance, policy);
  return chain::long_run_average(pc.transitions, pc.reward, pc.initial);
}

double average_reward(const AgingMdpInstance& instance, const ThresholdPolicy& policy) {
  require(static_cast<int>(policy.per_location.size()) == instance.locations(),
          "threshold vector length does not match the location count");
  return average_reward(instance,
                        DeterministicPolicy::from_thresholds(instance.max_age(), policy.per_location));
}

std::vector<double> prices_in_use(const AgingMdpInstance& instance, const DeterministicPolicy& policy) {
  const ProductChain pc = product_chain(instance, policy);
  const Vector occ = chain::limiting_occupancy(pc.transitions, pc.initial);
  const int L = instance.locations();
  std::set<double> used;
  for (int x = 1; x <= instance.max_age(); ++x)
    for (int l = 0; l < L; ++l)
      if (policy.uploads(x, l) && occ((x - 1) * L + l) > 1e-12) used.insert(instance.price(l));
  return {used.begin(), used.end()};
}

UploadSetPrediction upload_set_conditions(const AgingMdpInstance& instance) {
  const int L = instance.locations();
  const int M = instance.max_age();
  const PriceLadder& ladder = instance.ladder();
  const int K = ladder.size();
  const Matrix& P = instance.model().transitions();
  const double u1 = instance.utility(1), u2 = instance.utility(2), uM = instance.utility(M);

  double tail = 0.0;  // sum_{x=2}^{M} (U(x) - U(M))
  for (int x = 2; x <= M; ++x) tail += instance.utility(x) - uM;

  UploadSetPrediction out;
  out.s_value.assign(K, std::vector<double>(L));
  out.k_value.assign(K, std::vector<double>(L));
  out.k_bar.assign(K, std::vector<double>(L));
  out.upper_prices_idle.assign(K, true);
  out.gain_condition.assign(K, false);
  for (int i = 0; i < K; ++i) {
    for (int l = 0; l < L; ++l) {
      double k = 0.0;
      for (int m = 0; m < L; ++m)
        if (ladder.rank[m] <= i) k += P(l, m);
      out.k_value[i][l] = k;
      out.k_bar[i][l] = k - (i > 0 ? out.k_value[i - 1][l] : 0.0);
      out.s_value[i][l] = tail * (1.0 - k) + u1 - uM;
    }
    for (int l = 0; l < L; ++l) {
      if (ladder.rank[l] > i && !(out.s_value[i][l] < instance.price(l)))
        out.upper_prices_idle[i] = false;
      if (ladder.rank[l] == i) {
        const double kb = out.k_bar[i][l];
        if (u1 - (kb * u2 + (1.0 - kb) * uM) > ladder.levels[i]) out.gain_condition[i] = true;
      }
    }
  }

  const double full = tail + (u1 - uM);
  out.never_upload = ladder.levels[0] > 0.0;
  for (int l = 0; l < L && out.never_upload; ++l)
    out.never_upload = full < instance.price(l);
  if (out.never_upload) {
    out.certified_prefix = 0;
    return out;
  }
  int k = 0;
  while (!out.upper_prices_idle[k]) ++k;  // k = K-1 is vacuous, so this terminates
  out.certified_prefix = k + 1;
  // The gain inequality can contradict the never-upload predicate (a single level with P_1 > 0
  // fails it whenever U(1) - U(2) <= P_1), so it is reported but does not prune the prefix.
  for (int i = 0; i <= k; ++i) out.predicted.push_back(ladder.levels[i]);
  return out;
}

}  // namespace ageopt::mdp
