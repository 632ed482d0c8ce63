#pragma once

#include "ageopt/anneal.hpp"
#include "ageopt/coloring.hpp"
#include "ageopt/common.hpp"
#include "ageopt/io.hpp"
#include "ageopt/joac.hpp"
#include "ageopt/mdp.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// Aggregated result tables for a run directory.
namespace ageopt::report {

struct CostRow {
  int latency = 0;
  int t_max = 0;
  double cost = 0.0;
  double flat_cost = 0.0;
  /// Share of uploaded traffic per cost group (groups = distinct costs, ascending).
  std::vector<double> share;
  Thresholds tau;
  std::string method;  // "exhaustive" or "anneal"
};

struct CostSweepOptions {
  int latency_from = 1;
  int latency_to = -1;  // < 0: M - 1
  long exhaustive_limit = 100'000;
  anneal::AnnealConfig anneal;
};

/// Optimal cost for each latency target; each step starts from the previous optimum, which stays
/// feasible as d grows, so the column is non-increasing.
std::vector<CostRow> cost_vs_latency(const joac::JoacInstance& base, const CostSweepOptions& options);

/// Distinct costs, ascending.
std::vector<double> cost_groups(const joac::JoacInstance& instance);
std::vector<double> traffic_share(const joac::JoacInstance& instance, const Vector& upload);

struct SweepRow {
  double price = 0.0;
  double gain = 0.0;    // optimal average reward
  double reward = 0.0;  // exact reward of the extracted policy
  Thresholds tau;
};

/// Optimal reward as every location at price level `level` is moved to each value in `values`.
std::vector<SweepRow> price_sweep(const mdp::AgingMdpInstance& base, int level,
                                  const std::vector<double>& values);

/// Default sweep: second price level (first when only one) over 13 points between its neighbors.
std::vector<SweepRow> default_price_sweep(const mdp::AgingMdpInstance& base, int* level = nullptr);

void write_trace(std::ostream& out, const anneal::AnnealTrace& trace);
void write_coloring_trace(std::ostream& out, const std::vector<coloring::ColoringEvent>& events);

struct CurvePoint {
  long slot;
  double best;
};
std::vector<CurvePoint> read_curve(const std::filesystem::path& trace_csv);

struct ReportOptions {
  std::uint64_t seed = 1;
  CostSweepOptions costs;
};

/// Writes cost_vs_d.csv, traffic_share.csv, aoi_ccdf.csv, price_sweep.csv, convergence.csv and
/// report.json into `out_dir` (tables whose inputs are absent are skipped). Throws EmptyRun.
io::Json build_report(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir,
                      const ReportOptions& options);

}  // namespace ageopt::report
