#pragma once

#include "ageopt/anneal.hpp"
#include "ageopt/common.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

// Coloring of the location neighborhood graph, and annealing that updates a whole color class of
// mutually non-adjacent locations per slot.
namespace ageopt::coloring {

using Graph = anneal::NeighborhoodGraph;

struct Coloring {
  std::vector<int> colors;

  /// |phi(c)|: number of distinct colors.
  int used() const;
  /// Distinct color ids, ascending.
  std::vector<int> palette() const;
  /// Vertices of color h, ascending.
  std::vector<int> members(int h) const;
};

bool is_feasible(const Graph& graph, const Coloring& coloring);

/// First-fit in order of decreasing degree (ties by index).
Coloring greedy_coloring(const Graph& graph);

/// Exact chromatic number by backtracking; graphs with at most 12 vertices.
int chromatic_number(const Graph& graph);

/// One iteration of the annealing colorer at iteration n >= 1 with colors 0..L-1.
/// The candidate recolors one vertex to a different color and is uniform over the feasible such
/// candidates (infeasible draws are redrawn); the coloring is unchanged when none exists.
Coloring sa_coloring_step(const Graph& graph, const Coloring& current, long n, double b, Rng& rng);

/// Latest best coloring, written by the coloring task and read by the optimizer.
class BroadcastCell {
 public:
  /// Stores `c` if it uses strictly fewer colors than the held one (or none is held).
  bool publish(const Coloring& c);
  std::shared_ptr<const Coloring> latest() const;
  long version() const { return version_.load(); }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Coloring> best_;
  std::atomic<long> version_{0};
};

/// Annealing colorer with its own iteration clock; broadcasts on every strict improvement.
/// `b <= 0` uses the number of colors in `start` (L for a one-color-per-vertex start).
class SaColorer {
 public:
  SaColorer(const Graph& graph, Coloring start, double b, std::uint64_t seed, BroadcastCell* cell);

  void advance(int iterations);
  const Coloring& current() const { return current_; }
  const Coloring& best() const { return best_; }
  long iterations() const { return n_; }

 private:
  const Graph* graph_;
  Coloring current_;
  Coloring best_;
  double b_;
  Rng rng_;
  BroadcastCell* cell_;
  long n_ = 0;
};

struct AcceleratedConfig {
  int coloring_iterations_per_slot = 10;
  /// Coloring temperature constant; <= 0 selects the color count of the greedy start.
  double b = 0.0;
};

struct ColoringEvent {
  long slot;
  int colors;
};

struct AcceleratedResult {
  anneal::AnnealResult anneal;
  std::vector<ColoringEvent> coloring_trace;
  Coloring final_coloring;
  long merge_reverts = 0;
  /// Slots in which more than one location changed.
  long parallel_slots = 0;
  bool colorings_feasible = true;
  /// Every slot changed only locations of one color class.
  bool single_class_changes = true;
};

AcceleratedResult accelerated_sa(const joac::JoacInstance& instance,
                                 const anneal::AnnealConfig& config,
                                 const AcceleratedConfig& accel = {},
                                 const std::optional<Thresholds>& initial = std::nullopt);

}  // namespace ageopt::coloring
