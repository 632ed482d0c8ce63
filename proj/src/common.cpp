#include "ageopt/common.hpp"

#include <algorithm>
#include <thread>

namespace ageopt {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io: return "IoError";
    case ErrorCode::non_stochastic_row: return "NonStochasticRow";
    case ErrorCode::reducible: return "Reducible";
    case ErrorCode::empty_trace: return "EmptyTrace";
    case ErrorCode::single_location_trace: return "SingleLocationTrace";
    case ErrorCode::taboo_covers_all: return "TabooCoversAll";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::structure_violation: return "StructureViolation";
    case ErrorCode::infeasible_start: return "InfeasibleStart";
    case ErrorCode::search_space_too_large: return "SearchSpaceTooLarge";
    case ErrorCode::uncalibratable: return "Uncalibratable";
    case ErrorCode::empty_run: return "EmptyRun";
  }
  return "Unknown";
}

std::uint64_t Rng::mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = mix(seed);
  s = mix(s ^ mix(a + 0x1));
  s = mix(s ^ mix(b + 0x2));
  s = mix(s ^ mix(c + 0x3));
  return Rng(s);
}

std::uint64_t Rng::next() {
  // splitmix64 step; passes BigCrush and is trivially splittable.
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Lemire's nearly-divisionless rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

void parallel_for(int n, int min_parallel, const std::function<void(int)>& body) {
  const int workers = static_cast<int>(std::min<unsigned>(std::thread::hardware_concurrency(), 16));
  if (n < min_parallel || workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) body(i);
    });
  }
}

}  // namespace ageopt
