#include "ageopt/anneal.hpp"

#include <algorithm>
#include <cmath>

namespace ageopt::anneal {

double temperature(const AnnealConfig& config, double a_hat, long t) {
  require(t >= 1, "slots are numbered from 1");
  if (config.schedule == Schedule::log) return a_hat / std::log1p(static_cast<double>(t));
  return a_hat / std::pow(static_cast<double>(t), config.power_exponent);
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::unchanged: return "unchanged";
    case StopReason::temperature: return "temperature";
    case StopReason::iteration_cap: return "iteration_cap";
  }
  return "?";
}

long slots_to_reach(const AnnealResult& result, double target) {
  for (const auto& r : result.trace.records)
    if (r.best <= target) return r.t;
  return -1;
}

// ---------------------------------------------------------------------------------------------

bool NeighborhoodGraph::adjacent(int i, int j) const {
  const auto& a = adjacency[i];
  return std::binary_search(a.begin(), a.end(), j);
}

int NeighborhoodGraph::max_degree() const {
  int d = 0;
  for (const auto& a : adjacency) d = std::max(d, static_cast<int>(a.size()));
  return d;
}

long NeighborhoodGraph::edge_count() const {
  long e = 0;
  for (const auto& a : adjacency) e += static_cast<long>(a.size());
  return e / 2;
}

NeighborhoodGraph neighborhood_graph(const Matrix& transitions, int tau_max) {
  require(transitions.rows() == transitions.cols(), "transition matrix must be square");
  require(tau_max >= 0, "tau_max must be non-negative");
  const int L = static_cast<int>(transitions.rows());
  // Under the all-tau_max vector every item is uploaded after exactly tau_max moves.
  Matrix y = Matrix::Identity(L, L);
  for (int k = 0; k < tau_max; ++k) y = y * transitions;
  NeighborhoodGraph g;
  g.adjacency.resize(L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      if (i != j && (y(i, j) > 1e-12 || y(j, i) > 1e-12)) g.adjacency[i].push_back(j);
  return g;
}

NeighborhoodGraph neighborhood_graph(const joac::JoacInstance& instance, int tau_max) {
  return neighborhood_graph(instance.model.transitions(), tau_max);
}

// ---------------------------------------------------------------------------------------------

int propose_value(int current, int t_max, Rng& rng) {
  require(t_max >= 1, "proposals need t_max >= 1");
  require(current >= 0 && current <= t_max, "current threshold outside 0..t_max");
  int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(t_max)));
  if (v >= current) ++v;
  return v;
}

Proposal proposal_uniform(const Thresholds& current, int t_max, Rng& rng) {
  require(!current.empty(), "empty threshold vector");
  const int l = static_cast<int>(rng.below(current.size()));
  return {l, propose_value(current[l], t_max, rng)};
}

bool acceptance(double delta, double temperature, Rng& rng) {
  require(temperature > 0.0, "temperature must be positive");
  if (delta <= 0.0) return true;
  return rng.uniform() < std::exp(-delta / temperature);
}

long encode(const Thresholds& tau, int t_max) {
  long index = 0;
  for (int l = static_cast<int>(tau.size()) - 1; l >= 0; --l) index = index * (t_max + 1) + tau[l];
  return index;
}

Thresholds decode(long index, int locations, int t_max) {
  Thresholds tau(locations);
  for (int l = 0; l < locations; ++l) {
    tau[l] = static_cast<int>(index % (t_max + 1));
    index /= t_max + 1;
  }
  return tau;
}

namespace {

long space_size(int locations, int t_max) {
  long n = 1;
  for (int l = 0; l < locations; ++l) {
    n *= t_max + 1;
    if (n > 10'000'000) fail(ErrorCode::search_space_too_large, "threshold space too large");
  }
  return n;
}

}  // namespace

std::vector<double> MhResult::occupancy() const {
  std::vector<double> p(visits.size());
  for (std::size_t k = 0; k < visits.size(); ++k)
    p[k] = steps > 0 ? static_cast<double>(visits[k]) / static_cast<double>(steps) : 0.0;
  return p;
}

MhResult mh_chain_fixed_T(const joac::JoacInstance& instance, double temperature, long steps,
                          Rng& rng, int t_max, const Thresholds& start) {
  require(temperature > 0.0, "temperature must be positive");
  const int L = instance.locations();
  joac::ThresholdEvaluator state(instance, start);
  if (!state.feasible()) fail(ErrorCode::infeasible_start, "MH start vector is infeasible");
  MhResult out;
  out.visits.assign(space_size(L, t_max), 0);
  for (long s = 0; s < steps; ++s) {
    const Proposal p = proposal_uniform(state.thresholds(), t_max, rng);
    const auto a = state.assess(p.location, p.value);
    if (!a.feasible) {
      ++out.infeasible_proposals;
    } else if (acceptance(a.delta, temperature, rng)) {
      state.apply(a);
      ++out.accepted;
    }
    ++out.visits[encode(state.thresholds(), t_max)];
    ++out.steps;
  }
  out.last = state.thresholds();
  return out;
}

namespace {

struct Enumerated {
  std::vector<double> cost;
  std::vector<bool> ok;
};

Enumerated enumerate_space(const joac::JoacInstance& instance, int t_max) {
  const int L = instance.locations();
  const long n = space_size(L, t_max);
  Enumerated e;
  e.cost.resize(n);
  e.ok.resize(n);
  std::vector<char> ok(n);
  parallel_for(static_cast<int>(n), 256, [&](int k) {
    const joac::Evaluation ev = joac::evaluate(instance, decode(k, L, t_max));
    e.cost[k] = ev.objective;
    ok[k] = ev.report.feasible;
  });
  for (long k = 0; k < n; ++k) e.ok[k] = ok[k] != 0;
  return e;
}

}  // namespace

Matrix mh_kernel(const joac::JoacInstance& instance, double temperature, int t_max) {
  require(temperature > 0.0, "temperature must be positive");
  require(t_max >= 1, "kernel needs t_max >= 1");
  const int L = instance.locations();
  const Enumerated e = enumerate_space(instance, t_max);
  const long n = static_cast<long>(e.cost.size());
  const double q = 1.0 / (static_cast<double>(L) * t_max);
  Matrix K = Matrix::Zero(n, n);
  for (long s = 0; s < n; ++s) {
    if (!e.ok[s]) {
      K(s, s) = 1.0;
      continue;
    }
    const Thresholds tau = decode(s, L, t_max);
    double out = 0.0;
    for (int l = 0; l < L; ++l) {
      for (int v = 0; v <= t_max; ++v) {
        if (v == tau[l]) continue;
        Thresholds next = tau;
        next[l] = v;
        const long s2 = encode(next, t_max);
        if (!e.ok[s2]) continue;
        const double delta = e.cost[s2] - e.cost[s];
        const double p = q * (delta <= 0.0 ? 1.0 : std::exp(-delta / temperature));
        K(s, s2) = p;
        out += p;
      }
    }
    K(s, s) = 1.0 - out;
  }
  return K;
}

Vector boltzmann(const joac::JoacInstance& instance, double temperature, int t_max) {
  require(temperature > 0.0, "temperature must be positive");
  const Enumerated e = enumerate_space(instance, t_max);
  const long n = static_cast<long>(e.cost.size());
  double lowest = INFINITY;
  for (long s = 0; s < n; ++s)
    if (e.ok[s]) lowest = std::min(lowest, e.cost[s]);
  Vector w = Vector::Zero(n);
  for (long s = 0; s < n; ++s)
    if (e.ok[s]) w(s) = std::exp(-(e.cost[s] - lowest) / temperature);
  const double z = w.sum();
  if (z > 0.0) w /= z;
  return w;
}

// ---------------------------------------------------------------------------------------------

LocalStep local_step(const joac::ThresholdEvaluator& state, const NeighborhoodGraph& graph,
                     int location, int t_max, double temperature, Rng& rng) {
  LocalStep step;
  const int value = propose_value(state.thresholds()[location], t_max, rng);
  step.assessment = state.assess(location, value);
  const auto& costs = state.instance().costs;
  const Vector& before = state.upload();
  const Vector& after = step.assessment.upload;
  step.local_delta = (after(location) - before(location)) * costs[location];
  for (int j : graph.adjacency[location]) step.local_delta += (after(j) - before(j)) * costs[j];
  step.accepted = step.assessment.feasible && acceptance(step.assessment.delta, temperature, rng);
  return step;
}

AnnealResult sa_optimize(const joac::JoacInstance& instance, const AnnealConfig& config,
                         const std::optional<Thresholds>& initial) {
  require(config.stop_temperature > 0.0, "stop temperature must be positive");
  require(config.iteration_cap >= 1, "iteration cap must be at least 1");
  const int L = instance.locations();
  AnnealResult out;
  out.t_max = config.t_max >= 0 ? config.t_max : joac::t_max(instance);
  out.a_hat = config.a_hat > 0.0 ? config.a_hat : joac::default_a_hat(instance);
  require(out.a_hat > 0.0, "cooling constant must be positive (all costs zero?)");

  Thresholds start = initial.value_or(Thresholds(L, 0));
  for (int& v : start) require(v >= 0 && v <= out.t_max, "initial thresholds outside 0..t_max");
  joac::ThresholdEvaluator state(instance, start);
  if (!state.feasible()) fail(ErrorCode::infeasible_start, "initial threshold vector is infeasible");

  out.best = state.thresholds();
  out.best_objective = state.objective();
  if (out.t_max == 0) {
    out.stop = StopReason::unchanged;
    return out;
  }
  const NeighborhoodGraph graph = neighborhood_graph(instance, out.t_max);
  Rng rng = Rng::derive(config.seed, 0x5a);
  const double tol = 1e-12 * std::max(1.0, std::abs(out.a_hat));

  int unchanged = 0;
  for (long t = 1;; ++t) {
    const double T = temperature(config, out.a_hat, t);
    if (T < config.stop_temperature) {
      out.stop = StopReason::temperature;
      break;
    }
    const int location = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
    const LocalStep step = local_step(state, graph, location, out.t_max, T, rng);
    const auto& a = step.assessment;
    if (std::abs(step.local_delta - a.delta) > 1e-9 * std::max(1.0, std::abs(state.objective())))
      ++out.local_delta_mismatches;
    if (!a.feasible) ++out.infeasible_proposals;

    bool improved = false;
    if (step.accepted) {
      state.apply(a);
      ++out.accepted;
      if (state.objective() < out.best_objective - tol) {
        out.best_objective = state.objective();
        out.best = state.thresholds();
        improved = true;
      }
    }
    unchanged = step.accepted && std::abs(a.delta) > tol ? 0 : unchanged + 1;
    if (config.audit_every > 0 && t % config.audit_every == 0)
      out.max_audit_drift = std::max(out.max_audit_drift, state.audit());
    out.iterations = t;

    bool stop = false;
    if (unchanged >= config.stop_unchanged_slots) {
      out.stop = StopReason::unchanged;
      stop = true;
    } else if (t >= config.iteration_cap) {
      out.stop = StopReason::iteration_cap;
      stop = true;
    }
    if (config.trace_stride > 0 && (improved || stop || t == 1 || t % config.trace_stride == 0)) {
      TraceRecord r;
      r.t = t;
      r.temperature = T;
      r.location = location;
      r.value = a.value;
      r.feasible = a.feasible;
      r.accepted = step.accepted;
      r.delta = a.delta;
      r.local_delta = step.local_delta;
      r.current = state.objective();
      r.best = out.best_objective;
      r.best_tau = out.best;
      out.trace.records.push_back(std::move(r));
    }
    if (stop) break;
  }
  // Report the best cost from a full evaluation, not the incremental sum.
  out.best_objective = joac::objective(instance, out.best);
  return out;
}

}  // namespace ageopt::anneal
