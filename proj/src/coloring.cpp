#include "ageopt/coloring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace ageopt::coloring {

int Coloring::used() const { return static_cast<int>(palette().size()); }

std::vector<int> Coloring::palette() const {
  std::vector<int> p = colors;
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

std::vector<int> Coloring::members(int h) const {
  std::vector<int> m;
  for (int v = 0; v < static_cast<int>(colors.size()); ++v)
    if (colors[v] == h) m.push_back(v);
  return m;
}

bool is_feasible(const Graph& graph, const Coloring& coloring) {
  if (static_cast<int>(coloring.colors.size()) != graph.size()) return false;
  for (int v = 0; v < graph.size(); ++v)
    for (int u : graph.adjacency[v])
      if (coloring.colors[u] == coloring.colors[v]) return false;
  return true;
}

Coloring greedy_coloring(const Graph& graph) {
  const int n = graph.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return graph.adjacency[a].size() > graph.adjacency[b].size();
  });
  Coloring c;
  c.colors.assign(n, -1);
  std::vector<char> taken;
  for (int v : order) {
    taken.assign(n + 1, 0);
    for (int u : graph.adjacency[v])
      if (c.colors[u] >= 0) taken[c.colors[u]] = 1;
    int k = 0;
    while (taken[k]) ++k;
    c.colors[v] = k;
  }
  return c;
}

namespace {

bool colorable(const Graph& g, const std::vector<int>& order, std::size_t pos, int k,
               std::vector<int>& colors) {
  if (pos == order.size()) return true;
  const int v = order[pos];
  // Symmetry breaking: never open more than one new color at a time.
  int highest = -1;
  for (std::size_t q = 0; q < pos; ++q) highest = std::max(highest, colors[order[q]]);
  for (int c = 0; c < std::min(k, highest + 2); ++c) {
    bool clash = false;
    for (int u : g.adjacency[v])
      if (colors[u] == c) {
        clash = true;
        break;
      }
    if (clash) continue;
    colors[v] = c;
    if (colorable(g, order, pos + 1, k, colors)) return true;
    colors[v] = -1;
  }
  return false;
}

}  // namespace

int chromatic_number(const Graph& graph) {
  const int n = graph.size();
  require(n <= 12, "exact chromatic number limited to 12 vertices");
  if (n == 0) return 0;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return graph.adjacency[a].size() > graph.adjacency[b].size();
  });
  for (int k = 1; k <= n; ++k) {
    std::vector<int> colors(n, -1);
    if (colorable(graph, order, 0, k, colors)) return k;
  }
  return n;
}

namespace {

bool admissible(const Graph& graph, const Coloring& c, int v, int color) {
  if (color == c.colors[v]) return false;
  for (int u : graph.adjacency[v])
    if (c.colors[u] == color) return false;
  return true;
}

}  // namespace

Coloring sa_coloring_step(const Graph& graph, const Coloring& current, long n, double b, Rng& rng) {
  require(n >= 1, "coloring iterations are numbered from 1");
  require(b > 0.0, "coloring temperature constant must be positive");
  const int L = graph.size();
  if (L < 2) return current;
  // Infeasible candidates are redrawn without advancing n, so the candidate is uniform over the
  // feasible single-vertex recolorings.
  int v = -1, c = -1;
  const int attempts = 64 * L;
  for (int k = 0; k < attempts; ++k) {
    const int cv = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
    int cc = static_cast<int>(rng.below(static_cast<std::uint64_t>(L - 1)));
    if (cc >= current.colors[cv]) ++cc;
    if (admissible(graph, current, cv, cc)) {
      v = cv;
      c = cc;
      break;
    }
  }
  if (v < 0) {
    std::vector<std::pair<int, int>> options;
    for (int cv = 0; cv < L; ++cv)
      for (int cc = 0; cc < L; ++cc)
        if (admissible(graph, current, cv, cc)) options.push_back({cv, cc});
    if (options.empty()) return current;
    std::tie(v, c) = options[rng.below(options.size())];
  }
  Coloring next = current;
  next.colors[v] = c;
  const int beta = next.used() - current.used();
  if (beta <= 0) return next;
  const double temp = b / std::log1p(static_cast<double>(n));
  return rng.uniform() < std::exp(-beta / temp) ? next : current;
}

bool BroadcastCell::publish(const Coloring& c) {
  std::lock_guard lock(mutex_);
  if (best_ && c.used() >= best_->used()) return false;
  best_ = std::make_shared<const Coloring>(c);
  ++version_;
  return true;
}

std::shared_ptr<const Coloring> BroadcastCell::latest() const {
  std::lock_guard lock(mutex_);
  return best_;
}

SaColorer::SaColorer(const Graph& graph, Coloring start, double b, std::uint64_t seed,
                     BroadcastCell* cell)
    : graph_(&graph), current_(std::move(start)), best_(current_), b_(b), rng_(seed), cell_(cell) {
  require(is_feasible(graph, current_), "colorer needs a feasible start");
  if (b_ <= 0.0) b_ = current_.used();
  if (cell_) cell_->publish(best_);
}

void SaColorer::advance(int iterations) {
  for (int k = 0; k < iterations; ++k) {
    current_ = sa_coloring_step(*graph_, current_, ++n_, b_, rng_);
    if (current_.used() < best_.used()) {
      best_ = current_;
      if (cell_) cell_->publish(best_);
    }
  }
}

// ---------------------------------------------------------------------------------------------

AcceleratedResult accelerated_sa(const joac::JoacInstance& instance,
                                 const anneal::AnnealConfig& config, const AcceleratedConfig& accel,
                                 const std::optional<Thresholds>& initial) {
  require(config.stop_temperature > 0.0, "stop temperature must be positive");
  require(config.iteration_cap >= 1, "iteration cap must be at least 1");
  const int L = instance.locations();
  AcceleratedResult out;
  anneal::AnnealResult& res = out.anneal;
  res.t_max = config.t_max >= 0 ? config.t_max : joac::t_max(instance);
  res.a_hat = config.a_hat > 0.0 ? config.a_hat : joac::default_a_hat(instance);
  require(res.a_hat > 0.0, "cooling constant must be positive (all costs zero?)");

  Thresholds start = initial.value_or(Thresholds(L, 0));
  for (int v : start) require(v >= 0 && v <= res.t_max, "initial thresholds outside 0..t_max");
  joac::ThresholdEvaluator state(instance, start);
  if (!state.feasible()) fail(ErrorCode::infeasible_start, "initial threshold vector is infeasible");
  res.best = state.thresholds();
  res.best_objective = state.objective();

  const Graph graph = anneal::neighborhood_graph(instance, res.t_max);
  BroadcastCell cell;
  SaColorer colorer(graph, greedy_coloring(graph), accel.b,
                    Rng::derive(config.seed, 0xc01).next(), &cell);
  std::shared_ptr<const Coloring> held = cell.latest();
  out.coloring_trace.push_back({0, held->used()});
  if (res.t_max == 0) {
    res.stop = anneal::StopReason::unchanged;
    out.final_coloring = *held;
    return out;
  }

  Rng rng = Rng::derive(config.seed, 0xa5);
  const double tol = 1e-12 * std::max(1.0, std::abs(res.a_hat));
  int unchanged = 0;
  for (long t = 1;; ++t) {
    const double T = anneal::temperature(config, res.a_hat, t);
    if (T < config.stop_temperature) {
      res.stop = anneal::StopReason::temperature;
      break;
    }
    colorer.advance(accel.coloring_iterations_per_slot);
    if (auto latest = cell.latest(); latest->used() < held->used()) {
      held = latest;
      out.coloring_trace.push_back({t, held->used()});
    }
    if (!is_feasible(graph, *held)) out.colorings_feasible = false;

    const std::vector<int> palette = held->palette();
    const int h = palette[rng.below(palette.size())];
    const std::vector<int> group = held->members(h);
    std::vector<anneal::LocalStep> steps(group.size());
    parallel_for(static_cast<int>(group.size()), 8, [&](int k) {
      Rng local = Rng::derive(config.seed, static_cast<std::uint64_t>(t),
                              static_cast<std::uint64_t>(group[k]) + 1);
      steps[k] = anneal::local_step(state, graph, group[k], res.t_max, T, local);
    });

    std::vector<std::size_t> accepted;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      if (!steps[k].assessment.feasible) ++res.infeasible_proposals;
      if (std::abs(steps[k].local_delta - steps[k].assessment.delta) >
          1e-9 * std::max(1.0, std::abs(state.objective())))
        ++res.local_delta_mismatches;
      if (steps[k].accepted) accepted.push_back(k);
    }

    const double before = state.objective();
    const Thresholds snapshot = state.thresholds();
    if (accepted.size() == 1) {
      state.apply(steps[accepted[0]].assessment);
    } else if (accepted.size() > 1) {
      Thresholds merged = snapshot;
      for (std::size_t k : accepted) merged[group[k]] = steps[k].assessment.value;
      // Revert in ascending location order until the merged vector is feasible.
      std::size_t next_revert = 0;
      while (!joac::feasible(instance, merged).feasible && next_revert < accepted.size()) {
        const int loc = group[accepted[next_revert++]];
        merged[loc] = snapshot[loc];
        ++out.merge_reverts;
      }
      state.reset(merged);
    }
    res.accepted += static_cast<long>(accepted.size());
    std::vector<int> changed;
    for (int l = 0; l < L; ++l)
      if (state.thresholds()[l] != snapshot[l]) changed.push_back(l);
    if (changed.size() > 1) ++out.parallel_slots;
    for (int l : changed)
      if (held->colors[l] != h) out.single_class_changes = false;
    for (std::size_t a = 0; a < changed.size(); ++a)
      for (std::size_t b = a + 1; b < changed.size(); ++b)
        if (graph.adjacent(changed[a], changed[b])) out.single_class_changes = false;

    bool improved = false;
    if (state.objective() < res.best_objective - tol) {
      res.best_objective = state.objective();
      res.best = state.thresholds();
      improved = true;
    }
    unchanged = std::abs(state.objective() - before) > tol ? 0 : unchanged + 1;
    if (config.audit_every > 0 && t % config.audit_every == 0)
      res.max_audit_drift = std::max(res.max_audit_drift, state.audit());
    res.iterations = t;

    bool stop = false;
    if (unchanged >= config.stop_unchanged_slots) {
      res.stop = anneal::StopReason::unchanged;
      stop = true;
    } else if (t >= config.iteration_cap) {
      res.stop = anneal::StopReason::iteration_cap;
      stop = true;
    }
    if (config.trace_stride > 0 && (improved || stop || t == 1 || t % config.trace_stride == 0)) {
      anneal::TraceRecord r;
      r.t = t;
      r.temperature = T;
      r.location = group.empty() ? -1 : group.front();
      r.value = static_cast<int>(changed.size());
      r.feasible = true;
      r.accepted = !accepted.empty();
      r.delta = state.objective() - before;
      r.current = state.objective();
      r.best = res.best_objective;
      r.best_tau = res.best;
      res.trace.records.push_back(std::move(r));
    }
    if (stop) break;
  }
  res.best_objective = joac::objective(instance, res.best);
  out.final_coloring = *held;
  return out;
}

}  // namespace ageopt::coloring
