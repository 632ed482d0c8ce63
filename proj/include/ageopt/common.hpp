#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ageopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Per-location AoI thresholds: data is uploaded at location l once its age exceeds tau[l].
using Thresholds = std::vector<int>;

enum class ErrorCode {
  invalid_argument,
  io,
  non_stochastic_row,
  reducible,
  empty_trace,
  single_location_trace,
  taboo_covers_all,
  no_convergence,
  structure_violation,
  infeasible_start,
  search_space_too_large,
  uncalibratable,
  empty_run,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

/// Deterministic 64-bit generator. Streams are split from one seed with splitmix64 so every
/// component (and every parallel worker) gets an independent, reproducible sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t x);

  /// Child generator keyed by (seed, stream ids...).
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

  std::uint64_t next();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  // UniformRandomBitGenerator surface, for <random> distributions and std::shuffle.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

 private:
  std::uint64_t state_;
};

/// Runs body(i) for i in [0, n). Work is split over hardware threads only when n is large enough
/// to amortize thread start-up; results must not depend on scheduling.
void parallel_for(int n, int min_parallel, const std::function<void(int)>& body);

}  // namespace ageopt
