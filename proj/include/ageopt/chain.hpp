#pragma once

#include "ageopt/common.hpp"

#include <vector>

// Finite Markov chain utilities shared by the mobility model, exact policy evaluation and the
// enumeration oracles.
namespace ageopt::chain {

using Adjacency = std::vector<std::vector<int>>;

/// Strongly connected components; returns a component id per vertex (ids in reverse topological
/// order, as produced by Tarjan's algorithm).
std::vector<int> strongly_connected_components(const Adjacency& adj, int* count = nullptr);

/// Support graph of a (sub)stochastic matrix: i -> j iff P(i, j) > 0.
Adjacency support(const Matrix& P);

/// Vertex sets of the closed (recurrent) communicating classes.
std::vector<std::vector<int>> closed_classes(const Matrix& P);

/// Stationary distribution of an irreducible stochastic matrix by dense linear solve.
Vector stationary_dense(const Matrix& P);

/// Stationary distribution by power iteration on the lazy chain (I + P) / 2, which shares the
/// stationary vector of P and is aperiodic.
Vector stationary_power(const Matrix& P, double tol = 1e-10, int max_iterations = 1'000'000);

/// Long-run average reward per step of a finite chain started from `init`, valid for multichain
/// matrices (mass is split over closed classes by absorption probabilities).
double long_run_average(const Matrix& P, const Vector& reward, const Vector& init);

/// Long-run state occupancy of a chain started from `init` (Cesaro limit).
Vector limiting_occupancy(const Matrix& P, const Vector& init);

/// Average reward of every closed class, in the order of closed_classes().
std::vector<double> class_gains(const Matrix& P, const Vector& reward);

}  // namespace ageopt::chain
