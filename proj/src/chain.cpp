#include "ageopt/chain.hpp"

#include <algorithm>
#include <cmath>

namespace ageopt::chain {

std::vector<int> strongly_connected_components(const Adjacency& adj, int* count) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;

  // Iterative Tarjan: frames hold (vertex, next edge position).
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < adj[v].size()) {
        const int w = adj[v][pos++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = next_comp;
        } while (w != v);
        ++next_comp;
      }
      const int finished = v;
      frames.pop_back();
      if (!frames.empty()) {
        const int parent = frames.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  if (count) *count = next_comp;
  return comp;
}

Adjacency support(const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  Adjacency adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (P(i, j) > 0.0) adj[i].push_back(j);
  return adj;
}

std::vector<std::vector<int>> closed_classes(const Matrix& P) {
  const auto adj = support(P);
  int count = 0;
  const auto comp = strongly_connected_components(adj, &count);
  std::vector<char> closed(count, 1);
  for (std::size_t v = 0; v < adj.size(); ++v)
    for (int w : adj[v])
      if (comp[w] != comp[v]) closed[comp[v]] = 0;
  std::vector<std::vector<int>> classes;
  std::vector<int> slot(count, -1);
  for (std::size_t v = 0; v < adj.size(); ++v) {
    const int c = comp[v];
    if (!closed[c]) continue;
    if (slot[c] < 0) {
      slot[c] = static_cast<int>(classes.size());
      classes.emplace_back();
    }
    classes[slot[c]].push_back(static_cast<int>(v));
  }
  return classes;
}

Vector stationary_dense(const Matrix& P) {
  const Eigen::Index n = P.rows();
  Matrix A = P.transpose() - Matrix::Identity(n, n);
  A.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Vector pi = A.partialPivLu().solve(b);
  for (Eigen::Index i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
  return pi / pi.sum();
}

Vector stationary_power(const Matrix& P, double tol, int max_iterations) {
  const Eigen::Index n = P.rows();
  const Matrix lazy_t = 0.5 * (P.transpose() + Matrix::Identity(n, n));
  Vector pi = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < max_iterations; ++it) {
    Vector next = lazy_t * pi;
    next /= next.sum();
    const double change = (next - pi).cwiseAbs().sum();
    pi = std::move(next);
    if (change < tol) break;
  }
  return pi;
}

namespace {

Matrix submatrix(const Matrix& P, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix S(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) S(i, j) = P(rows[i], cols[j]);
  return S;
}

struct Decomposition {
  std::vector<std::vector<int>> classes;
  std::vector<Vector> stationary;  // per class, over class members
  std::vector<double> mass;        // limiting probability of ending in each class
};

Decomposition decompose(const Matrix& P, const Vector* init) {
  Decomposition d;
  d.classes = closed_classes(P);
  const int n = static_cast<int>(P.rows());
  std::vector<int> owner(n, -1);
  for (std::size_t c = 0; c < d.classes.size(); ++c) {
    for (int v : d.classes[c]) owner[v] = static_cast<int>(c);
    const Matrix sub = submatrix(P, d.classes[c], d.classes[c]);
    d.stationary.push_back(d.classes[c].size() == 1 ? Vector::Ones(1) : stationary_dense(sub));
  }
  if (!init) return d;

  d.mass.assign(d.classes.size(), 0.0);
  std::vector<int> transient;
  for (int v = 0; v < n; ++v) {
    if (owner[v] >= 0)
      d.mass[owner[v]] += (*init)(v);
    else
      transient.push_back(v);
  }
  if (!transient.empty()) {
    Vector start(transient.size());
    for (std::size_t i = 0; i < transient.size(); ++i) start(i) = (*init)(transient[i]);
    if (start.cwiseAbs().sum() > 0.0) {
      const Matrix ptt = submatrix(P, transient, transient);
      const Matrix fundamental =
          Matrix::Identity(transient.size(), transient.size()) - ptt;
      // Expected visits to each transient state before absorption.
      const Vector visits = fundamental.transpose().partialPivLu().solve(start);
      for (std::size_t c = 0; c < d.classes.size(); ++c) {
        double into = 0.0;
        for (std::size_t i = 0; i < transient.size(); ++i)
          for (int w : d.classes[c]) into += visits(i) * P(transient[i], w);
        d.mass[c] += into;
      }
    }
  }
  return d;
}

}  // namespace

double long_run_average(const Matrix& P, const Vector& reward, const Vector& init) {
  const auto d = decompose(P, &init);
  double total = 0.0;
  for (std::size_t c = 0; c < d.classes.size(); ++c) {
    double gain = 0.0;
    for (std::size_t k = 0; k < d.classes[c].size(); ++k)
      gain += d.stationary[c](k) * reward(d.classes[c][k]);
    total += d.mass[c] * gain;
  }
  return total;
}

Vector limiting_occupancy(const Matrix& P, const Vector& init) {
  const auto d = decompose(P, &init);
  Vector occ = Vector::Zero(P.rows());
  for (std::size_t c = 0; c < d.classes.size(); ++c)
    for (std::size_t k = 0; k < d.classes[c].size(); ++k)
      occ(d.classes[c][k]) += d.mass[c] * d.stationary[c](k);
  return occ;
}

std::vector<double> class_gains(const Matrix& P, const Vector& reward) {
  const auto d = decompose(P, nullptr);
  std::vector<double> gains;
  for (std::size_t c = 0; c < d.classes.size(); ++c) {
    double gain = 0.0;
    for (std::size_t k = 0; k < d.classes[c].size(); ++k)
      gain += d.stationary[c](k) * reward(d.classes[c][k]);
    gains.push_back(gain);
  }
  return gains;
}

}  // namespace ageopt::chain
