#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

namespace oracle {

Dense to_dense(const ageopt::Matrix& m) {
  Dense d(m.rows(), std::vector<double>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

std::vector<double> solve_linear(Dense A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

std::vector<double> stationary(const Dense& P) {
  // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
  const std::size_t n = P.size();
  Dense A(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A[j][i] = P[i][j] - (i == j ? 1.0 : 0.0);
  std::vector<double> b(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) A[n - 1][j] = 1.0;
  b[n - 1] = 1.0;
  return solve_linear(A, b);
}

std::vector<bool> reachable(const Dense& P, const std::vector<int>& from) {
  std::vector<bool> seen(P.size(), false);
  std::vector<int> stack;
  for (int s : from)
    if (!seen[s]) seen[s] = true, stack.push_back(s);
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < P.size(); ++v)
      if (P[u][v] > 0.0 && !seen[v]) seen[v] = true, stack.push_back(static_cast<int>(v));
  }
  return seen;
}

std::vector<std::vector<int>> closed_classes(const Dense& P) {
  const int n = static_cast<int>(P.size());
  std::vector<std::vector<bool>> reach(n);
  for (int i = 0; i < n; ++i) reach[i] = reachable(P, {i});
  std::vector<std::vector<int>> out;
  std::vector<bool> assigned(n, false);
  for (int i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    // i is recurrent iff everything it reaches reaches it back.
    bool closed = true;
    for (int j = 0; j < n && closed; ++j)
      if (reach[i][j] && !reach[j][i]) closed = false;
    if (!closed) continue;
    std::vector<int> cls;
    for (int j = 0; j < n; ++j)
      if (reach[i][j]) cls.push_back(j), assigned[j] = true;
    out.push_back(cls);
  }
  return out;
}

PolicyChain policy_chain(const AgingProblem& p, const std::vector<bool>& upload) {
  const int L = static_cast<int>(p.transitions.size());
  const int M = p.max_age;
  PolicyChain c;
  c.P.assign(M * L, std::vector<double>(M * L, 0.0));
  c.reward.assign(M * L, 0.0);
  for (int x = 1; x <= M; ++x)
    for (int l = 0; l < L; ++l) {
      const int s = (x - 1) * L + l;
      const bool up = upload[s];
      const int nx = up ? 1 : std::min(x + 1, M);
      c.reward[s] = p.utility[x - 1] - (up ? p.prices[l] : 0.0);
      for (int m = 0; m < L; ++m) c.P[s][(nx - 1) * L + m] += p.transitions[l][m];
    }
  return c;
}

namespace {

double class_gain(const PolicyChain& c, const std::vector<int>& cls) {
  Dense sub(cls.size(), std::vector<double>(cls.size()));
  for (std::size_t a = 0; a < cls.size(); ++a)
    for (std::size_t b = 0; b < cls.size(); ++b) sub[a][b] = c.P[cls[a]][cls[b]];
  const auto pi = stationary(sub);
  double g = 0.0;
  for (std::size_t a = 0; a < cls.size(); ++a) g += pi[a] * c.reward[cls[a]];
  return g;
}

}  // namespace

double best_class_gain(const AgingProblem& p, const std::vector<bool>& upload) {
  const PolicyChain c = policy_chain(p, upload);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& cls : closed_classes(c.P)) best = std::max(best, class_gain(c, cls));
  return best;
}

double optimal_gain_by_enumeration(const AgingProblem& p) {
  const int n = p.max_age * static_cast<int>(p.transitions.size());
  if (n > 20) throw std::runtime_error("enumeration too large");
  double best = -std::numeric_limits<double>::infinity();
  std::vector<bool> upload(n);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    for (int k = 0; k < n; ++k) upload[k] = (code >> k) & 1u;
    best = std::max(best, best_class_gain(p, upload));
  }
  return best;
}

std::vector<double> recurrent_upload_prices(const AgingProblem& p, const std::vector<bool>& upload) {
  const int L = static_cast<int>(p.transitions.size());
  const PolicyChain c = policy_chain(p, upload);
  const auto pi = stationary(p.transitions);
  std::vector<int> start;
  for (int l = 0; l < L; ++l)
    if (pi[l] > 0.0) start.push_back(l);  // age 1
  const auto from_start = reachable(c.P, start);
  std::set<double> used;
  for (const auto& cls : closed_classes(c.P)) {
    if (!from_start[cls.front()]) continue;
    for (int s : cls)
      if (upload[s]) used.insert(p.prices[s % L]);
  }
  return {used.begin(), used.end()};
}

Dense upload_distribution_paths(const Dense& P, const Thresholds& tau, int origin) {
  const int L = static_cast<int>(P.size());
  const int H = *std::max_element(tau.begin(), tau.end()) + 1;
  Dense f(L, std::vector<double>(H, 0.0));
  std::function<void(int, int, double)> walk = [&](int z, int t, double prob) {
    if (t > tau[z]) {
      f[z][t - 1] += prob;
      return;
    }
    for (int m = 0; m < L; ++m)
      if (P[z][m] > 0.0) walk(m, t + 1, prob * P[z][m]);
  };
  walk(origin, 1, 1.0);
  return f;
}

namespace {

bool within(double value, double bound) {
  return value <= bound + 1e-12 * std::max(1.0, std::abs(bound));
}

}  // namespace

OffloadValue offload_value(const OffloadProblem& p, const Thresholds& tau) {
  const int L = static_cast<int>(p.transitions.size());
  const auto pi = stationary(p.transitions);
  OffloadValue v;
  v.y.assign(L, std::vector<double>(L, 0.0));
  v.tails.assign(L, 0.0);
  for (int i = 0; i < L; ++i) {
    std::vector<double> mass(L, 0.0);
    mass[i] = 1.0;
    for (int t = 1;; ++t) {
      double left = 0.0;
      for (int z = 0; z < L; ++z) {
        if (t > tau[z]) {
          v.y[i][z] += mass[z];
          if (t > p.latency) v.tails[i] += mass[z];
          mass[z] = 0.0;
        }
        left += mass[z];
      }
      if (left == 0.0) break;
      std::vector<double> next(L, 0.0);
      for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) next[b] += mass[a] * p.transitions[a][b];
      mass = next;
    }
  }
  v.upload.assign(L, 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) v.upload[j] += pi[i] * p.demand_scale * v.y[i][j];
  for (int j = 0; j < L; ++j) v.cost += p.costs[j] * v.upload[j];
  v.feasible = true;
  for (int i = 0; i < L; ++i) v.feasible = v.feasible && within(v.tails[i], p.epsilon);
  for (int j = 0; j < L; ++j) v.feasible = v.feasible && within(v.upload[j], p.capacities[j]);
  return v;
}

namespace {

template <class F>
void for_each_vector(int L, int t_max, F&& body) {
  Thresholds tau(L, 0);
  while (true) {
    body(tau);
    int k = 0;
    while (k < L && tau[k] == t_max) tau[k++] = 0;
    if (k == L) return;
    ++tau[k];
  }
}

}  // namespace

OffloadOptimum offload_minimum(const OffloadProblem& p, int t_max) {
  const int L = static_cast<int>(p.transitions.size());
  OffloadOptimum best;
  best.cost = std::numeric_limits<double>::infinity();
  for_each_vector(L, t_max, [&](const Thresholds& tau) {
    const OffloadValue v = offload_value(p, tau);
    if (!v.feasible) return;
    ++best.feasible;
    if (v.cost < best.cost || (v.cost == best.cost && tau < best.best)) {
      best.cost = v.cost;
      best.best = tau;
    }
  });
  return best;
}

std::vector<double> gibbs(const OffloadProblem& p, double temperature, int t_max) {
  const int L = static_cast<int>(p.transitions.size());
  std::vector<double> w;
  std::vector<bool> ok;
  for_each_vector(L, t_max, [&](const Thresholds& tau) {
    const OffloadValue v = offload_value(p, tau);
    w.push_back(v.cost);
    ok.push_back(v.feasible);
  });
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < w.size(); ++k)
    if (ok[k]) lo = std::min(lo, w[k]);
  double z = 0.0;
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t k = 0; k < w.size(); ++k)
    if (ok[k]) z += out[k] = std::exp(-(w[k] - lo) / temperature);
  for (double& x : out) x /= z;
  return out;
}

int chromatic_number(const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  if (n == 0) return 0;
  std::vector<int> color(n, -1);
  std::function<bool(int, int)> place = [&](int v, int k) {
    if (v == n) return true;
    for (int c = 0; c < k; ++c) {
      bool clash = false;
      for (int u : adjacency[v])
        if (color[u] == c) clash = true;
      if (clash) continue;
      color[v] = c;
      if (place(v + 1, k)) return true;
      color[v] = -1;
    }
    return false;
  };
  for (int k = 1;; ++k) {
    std::fill(color.begin(), color.end(), -1);
    if (place(0, k)) return k;
  }
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

}  // namespace oracle
