#pragma once

#include "ageopt/common.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ageopt::mobility {

struct Arc {
  int to;
  double probability;
};

/// Row-stochastic, irreducible location chain with its stationary distribution.
/// Immutable after construction.
class MobilityModel {
 public:
  /// Validates and normalizes `transitions`. Throws NonStochasticRow or Reducible.
  static MobilityModel build(Matrix transitions);

  int size() const { return static_cast<int>(transitions_.rows()); }
  const Matrix& transitions() const { return transitions_; }
  const Vector& stationary() const { return stationary_; }
  double operator()(int from, int to) const { return transitions_(from, to); }
  /// Non-zero entries of row `from`.
  const std::vector<Arc>& successors(int from) const { return successors_[from]; }

  /// Row vector times transition matrix, using the sparse rows.
  Vector step(const Vector& mass) const;

  /// Minimum number of moves from each location to each other (-1 if unreachable). Row-major L*L.
  const std::vector<int>& hop_distances() const;

 private:
  MobilityModel() = default;

  Matrix transitions_;
  Vector stationary_;
  std::vector<std::vector<Arc>> successors_;
  std::shared_ptr<const std::vector<int>> hops_;
};

MobilityModel build_model(Matrix transitions);

/// Dense solve threshold: above this many locations, power iteration is used.
inline constexpr int kDenseStationaryLimit = 512;

struct TabooQuery {
  std::vector<int> taboo_set;
  int steps = 1;
};

/// P{l_1..l_{n-1} not in A, l_n = to | l_0 = from}.
double taboo_transition(const MobilityModel& model, const TabooQuery& query, int from, int to);

/// Memoized taboo transition matrices Q_A^{n-1} * Lambda, where Q_A is the transition matrix with
/// the columns of A zeroed. Entry (i, j) of matrix(A, n) is the n-step taboo probability.
/// Not thread-safe; give each worker its own cache.
class TabooPowers {
 public:
  explicit TabooPowers(const MobilityModel& model) : model_(&model) {}

  /// `taboo` is a membership mask of length L.
  const Matrix& matrix(const std::vector<bool>& taboo, int steps);

 private:
  struct Entry {
    Matrix restricted;             // Q_A
    std::vector<Matrix> powers;    // powers[k] = Q_A^k * Lambda
  };
  const MobilityModel* model_;
  std::map<std::vector<bool>, Entry> cache_;
};

// ---------------------------------------------------------------------------------------------
// Trace ingestion

struct TraceRecord {
  double time = 0.0;
  std::string device;
  long cell = 0;
};

struct PositionRecord {
  double time = 0.0;
  std::string device;
  double x = 0.0;
  double y = 0.0;
};

struct CellCenter {
  long cell = 0;
  double x = 0.0;
  double y = 0.0;
};

enum class ResampleFill { hold_last, nearest };

struct ResampleOptions {
  double step = 2.0;
  ResampleFill fill = ResampleFill::hold_last;
};

/// Per-device cell sequence on a regular time grid.
struct Trajectory {
  std::string device;
  std::vector<long> cells;
};

/// Groups records by device (stable device order of first appearance), sorts by time and
/// resamples each device on ticks t0, t0 + step, ...
std::vector<Trajectory> resample(const std::vector<TraceRecord>& records,
                                 const ResampleOptions& options);

struct EstimatedModel {
  MobilityModel model;
  /// cell_ids[k] = original cell label of model location k.
  std::vector<long> cell_ids;
  /// Cells that appeared in the trace but were dropped (no outgoing transitions).
  std::vector<long> dropped;
  long transitions_counted = 0;

  int index_of(long cell) const;
};

EstimatedModel estimate_from_trace(const std::vector<TraceRecord>& records,
                                   const ResampleOptions& options);

/// Maps raw (x, y) positions to the nearest cell center.
std::vector<TraceRecord> assign_cells(const std::vector<PositionRecord>& positions,
                                      const std::vector<CellCenter>& centers);

std::vector<TraceRecord> read_trace(std::istream& in);
std::vector<PositionRecord> read_position_trace(std::istream& in);
std::vector<CellCenter> read_cell_centers(std::istream& in);
void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

/// Model file: first line `L`, then L rows of L delimited probabilities.
void write_model(std::ostream& out, const MobilityModel& model);
MobilityModel read_model(std::istream& in);

/// Location path l_0 = start, l_1, ..., l_steps.
std::vector<int> sample_path(const MobilityModel& model, int start, long steps, Rng& rng);

/// Next location drawn from row `from`.
int sample_next(const MobilityModel& model, int from, Rng& rng);

}  // namespace ageopt::mobility
