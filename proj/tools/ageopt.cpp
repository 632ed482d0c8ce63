// Command-line driver: estimate, solve, optimize, simulate, report.
// Exit status: 0 on success, 2 on usage errors, 10 + ErrorCode for library errors, 1 otherwise.

#include "ageopt/anneal.hpp"
#include "ageopt/aoi.hpp"
#include "ageopt/coloring.hpp"
#include "ageopt/io.hpp"
#include "ageopt/joac.hpp"
#include "ageopt/mdp.hpp"
#include "ageopt/mobility.hpp"
#include "ageopt/report.hpp"
#include "ageopt/sim.hpp"
#include "ageopt/text.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace ageopt;
using io::Json;

namespace {

struct Common {
  std::string instance;
  std::string out;
  std::uint64_t seed = 1;
  std::optional<int> latency;
  std::optional<double> epsilon;
  std::optional<int> t_max;
};

io::Instance open_instance(const Common& c) {
  io::Instance inst = io::load_instance(c.instance);
  if (c.latency) inst.doc["latency_target"] = *c.latency;
  if (c.epsilon) inst.doc["epsilon"] = *c.epsilon;
  if (c.t_max) inst.doc["t_max"] = *c.t_max;
  return inst;
}

std::string thresholds_csv(const Thresholds& tau) {
  std::ostringstream os;
  io::write_thresholds(os, tau);
  return os.str();
}

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------------------------------------

struct EstimateArgs {
  std::string trace, centers, out;
  double step = 2.0;
  std::string fill = "hold";
};

int cmd_estimate(const EstimateArgs& a) {
  std::ifstream in(a.trace);
  if (!in) fail(ErrorCode::io, "cannot open " + a.trace);
  std::vector<mobility::TraceRecord> records;
  if (a.centers.empty()) {
    records = mobility::read_trace(in);
  } else {
    std::ifstream cin(a.centers);
    if (!cin) fail(ErrorCode::io, "cannot open " + a.centers);
    records = mobility::assign_cells(mobility::read_position_trace(in), mobility::read_cell_centers(cin));
  }
  mobility::ResampleOptions opt;
  opt.step = a.step;
  opt.fill = a.fill == "nearest" ? mobility::ResampleFill::nearest : mobility::ResampleFill::hold_last;
  const mobility::EstimatedModel est = mobility::estimate_from_trace(records, opt);

  fs::create_directories(a.out);
  std::ostringstream model;
  mobility::write_model(model, est.model);
  io::write_file(fs::path(a.out) / "model.txt", model.str());
  std::string map = "location,cell\n";
  for (std::size_t k = 0; k < est.cell_ids.size(); ++k)
    map += std::to_string(k) + ',' + std::to_string(est.cell_ids[k]) + '\n';
  io::write_file(fs::path(a.out) / "cell_map.csv", map);
  Json j;
  j["locations"] = est.model.size();
  j["dropped_cells"] = est.dropped;
  j["transitions_counted"] = est.transitions_counted;
  j["resample_step"] = a.step;
  j["fill"] = a.fill == "nearest" ? "nearest" : "hold_last";
  j["stationary"] = to_vector(est.model.stationary());
  io::write_file(fs::path(a.out) / "estimate.json", io::dump(j));
  std::cout << "estimated " << est.model.size() << " locations from " << est.transitions_counted
            << " transitions\n";
  return 0;
}

// ---------------------------------------------------------------------------------------------

int cmd_solve(const Common& c, double tol) {
  const io::Instance instance = open_instance(c);
  const mdp::AgingMdpInstance m = instance.aging();
  mdp::SolverOptions opt;
  opt.tolerance = tol;
  const mdp::MdpSolution sol = mdp::solve_average_reward(m, opt);
  const fs::path out(c.out);
  io::copy_instance(instance, out);

  Thresholds tau;
  const mdp::StructureReport rep = mdp::check_structure(sol.policy, m, &tau);
  io::write_file(out / "thresholds.csv", thresholds_csv(tau));
  std::string values = "age,location,value,advantage,upload\n";
  for (int x = 1; x <= m.max_age(); ++x)
    for (int l = 0; l < m.locations(); ++l)
      values += std::to_string(x) + ',' + std::to_string(l) + ',' +
                io::csv_row({sol.value(x - 1, l), sol.advantage(x - 1, l)}) + ',' +
                (sol.policy.uploads(x, l) ? "1" : "0") + '\n';
  io::write_file(out / "values.csv", values);

  const mdp::UploadSetPrediction pred = mdp::upload_set_conditions(m);
  Json j;
  j["gain"] = sol.gain;
  j["average_reward"] = mdp::average_reward(m, sol.policy);
  j["residual"] = sol.residual;
  j["iterations"] = sol.iterations;
  j["thresholds"] = tau;
  j["threshold_form"] = rep.violations.empty();
  j["price_order_violations"] = rep.price_order_violations.size();
  j["price_order_observations"] = rep.observations.size();
  if (sol.thresholds && sol.thresholds->per_price) j["per_price_thresholds"] = *sol.thresholds->per_price;
  j["price_levels"] = m.ladder().levels;
  j["prices_in_use"] = mdp::prices_in_use(m, sol.policy);
  j["predicted_upload_prices"] = pred.predicted;
  j["never_upload_predicate"] = pred.never_upload;
  j["certified_prefix"] = pred.certified_prefix;
  j["upper_prices_idle"] = pred.upper_prices_idle;
  j["gain_condition"] = pred.gain_condition;
  io::write_file(out / "solve.json", io::dump(j));
  std::cout << "gain " << text::format(sol.gain) << ", thresholds";
  for (int t : tau) std::cout << ' ' << t;
  std::cout << '\n';
  return rep.violations.empty() ? 0 : 10 + static_cast<int>(ErrorCode::structure_violation);
}

// ---------------------------------------------------------------------------------------------

struct OptimizeArgs {
  std::string schedule = "log";
  double a_hat = 0.0;
  long iterations = 100'000;
  int trace_stride = 100;
  int unchanged = 200;
  bool accelerated = false;
  bool calibrate = false;
};

int cmd_optimize(const Common& c, const OptimizeArgs& a) {
  const io::Instance instance = open_instance(c);
  const joac::JoacInstance inst = instance.joac();
  anneal::AnnealConfig cfg;
  cfg.seed = c.seed;
  cfg.a_hat = a.a_hat;
  cfg.schedule = a.schedule == "power" ? anneal::Schedule::power : anneal::Schedule::log;
  cfg.iteration_cap = a.iterations;
  cfg.trace_stride = a.trace_stride;
  cfg.stop_unchanged_slots = a.unchanged;

  const fs::path out(c.out);
  io::copy_instance(instance, out);
  Json j;
  anneal::AnnealResult res;
  if (a.accelerated) {
    const coloring::AcceleratedResult acc = coloring::accelerated_sa(inst, cfg);
    res = acc.anneal;
    std::ostringstream tr, col, colors;
    report::write_trace(tr, res.trace);
    report::write_coloring_trace(col, acc.coloring_trace);
    colors << "location,color\n";
    for (std::size_t l = 0; l < acc.final_coloring.colors.size(); ++l)
      colors << l << ',' << acc.final_coloring.colors[l] << '\n';
    io::write_file(out / "accelerated_trace.csv", tr.str());
    io::write_file(out / "coloring_trace.csv", col.str());
    io::write_file(out / "coloring.csv", colors.str());
    j["algorithm"] = "accelerated";
    j["colors"] = acc.final_coloring.used();
    j["merge_reverts"] = acc.merge_reverts;
    j["parallel_slots"] = acc.parallel_slots;
    j["colorings_feasible"] = acc.colorings_feasible;
    j["single_class_changes"] = acc.single_class_changes;
  } else {
    res = anneal::sa_optimize(inst, cfg);
    std::ostringstream tr;
    report::write_trace(tr, res.trace);
    io::write_file(out / "anneal_trace.csv", tr.str());
    j["algorithm"] = "plain";
  }
  io::write_file(out / "thresholds.csv", thresholds_csv(res.best));
  const joac::Evaluation ev = joac::evaluate(inst, res.best);
  j["seed"] = c.seed;
  j["schedule"] = a.schedule;
  j["a_hat"] = res.a_hat;
  j["t_max"] = res.t_max;
  j["best_thresholds"] = res.best;
  j["best_cost"] = res.best_objective;
  j["flat_cost"] = joac::objective(inst, Thresholds(inst.locations(), 0));
  j["feasible"] = ev.report.feasible;
  j["upload_rates"] = to_vector(ev.upload);
  j["iterations"] = res.iterations;
  j["stop"] = anneal::to_string(res.stop);
  j["iteration_cap_reached"] = res.iteration_cap_reached();
  j["accepted"] = res.accepted;
  j["infeasible_proposals"] = res.infeasible_proposals;
  j["local_delta_mismatches"] = res.local_delta_mismatches;
  j["max_audit_drift"] = res.max_audit_drift;
  if (a.calibrate) {
    const joac::CalibrationResult cal = joac::calibrate_prices_report(inst, res.best);
    j["calibrated_prices"] = cal.prices;
    j["calibration_verified"] = cal.ok();
    j["calibration_achieved"] = cal.achieved;
  }
  io::write_file(out / "optimize.json", io::dump(j));
  std::cout << "best cost " << text::format(res.best_objective) << " after " << res.iterations
            << " slots (" << anneal::to_string(res.stop) << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------------------------

struct SimulateArgs {
  std::string thresholds;
  std::string trace;
  long cycles = 100'000;
  double step = 2.0;
};

int cmd_simulate(const Common& c, const SimulateArgs& a) {
  const io::Instance instance = open_instance(c);
  const mdp::AgingMdpInstance m =
      instance.has_prices() ? instance.aging()
                            : instance.aging(std::vector<double>(instance.model.size(), 0.0));
  const Thresholds tau = io::read_thresholds(a.thresholds);
  require(static_cast<int>(tau.size()) == m.locations(), "threshold file does not match the model");

  sim::SimResult r;
  if (a.trace.empty()) {
    Rng rng = Rng::derive(c.seed, 0x51);
    sim::SimOptions opt;
    opt.cycles = a.cycles;
    r = sim::simulate_policy(m, tau, opt, rng);
  } else {
    std::ifstream in(a.trace);
    if (!in) fail(ErrorCode::io, "cannot open " + a.trace);
    mobility::ResampleOptions ro;
    ro.step = a.step;
    const auto records = mobility::read_trace(in);
    if (records.empty()) fail(ErrorCode::empty_trace, "trace has no records");
    const auto trajectories = mobility::resample(records, ro);
    std::vector<long> cells;
    const fs::path map = instance.source.parent_path() / "cell_map.csv";
    if (fs::exists(map)) {
      std::ifstream mi(map);
      std::string line;
      std::getline(mi, line);
      while (std::getline(mi, line))
        if (!text::skip_line(line)) cells.push_back(text::to_long(text::split_fields(line).at(1), "cell map"));
    } else {
      for (int k = 0; k < m.locations(); ++k) cells.push_back(k);
    }
    r = sim::simulate_from_trace(trajectories, cells, m, tau);
  }

  const fs::path out(c.out);
  io::copy_instance(instance, out);
  io::write_file(out / "thresholds.csv", thresholds_csv(tau));
  std::string y = "origin,location,empirical,analytic\n";
  const aoi::UploadAnalytics an = aoi::analyze(m.model(), tau);
  double worst = 0.0;
  for (int i = 0; i < m.locations(); ++i)
    for (int z = 0; z < m.locations(); ++z) {
      y += std::to_string(i) + ',' + std::to_string(z) + ',' +
           io::csv_row({r.empirical_y(i, z), an.y()(i, z)}) + '\n';
      if (r.origin_count(i) > 0) worst = std::max(worst, std::abs(r.empirical_y(i, z) - an.y()(i, z)));
    }
  io::write_file(out / "sim_y.csv", y);
  std::string hist = "origin,age,count\n";
  for (int i = 0; i < m.locations(); ++i)
    for (std::size_t t = 1; t < r.aoi_hist[i].size(); ++t)
      hist += std::to_string(i) + ',' + std::to_string(t) + ',' + std::to_string(r.aoi_hist[i][t]) + '\n';
  io::write_file(out / "sim_aoi.csv", hist);

  Json j;
  j["source"] = a.trace.empty() ? "model" : "trace";
  j["seed"] = c.seed;
  j["cycles"] = r.cycles;
  j["slots"] = r.slots;
  j["mean_reward"] = r.mean_reward;
  j["reward_se"] = r.reward_se;
  j["analytic_reward"] = mdp::average_reward(m, mdp::ThresholdPolicy{tau, std::nullopt});
  j["mean_aoi"] = r.mean_aoi;
  j["max_y_error"] = worst;
  j["upload_share"] = to_vector(r.upload_share);
  io::write_file(out / "simulate.json", io::dump(j));
  std::cout << "simulated " << r.cycles << " cycles, mean reward " << text::format(r.mean_reward)
            << " +- " << text::format(r.reward_se) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------------------------

int cmd_report(const std::string& run, const std::string& out, std::uint64_t seed) {
  report::ReportOptions opt;
  opt.seed = seed;
  const fs::path target = out.empty() ? fs::path(run) / "report" : fs::path(out);
  const Json summary = report::build_report(run, target, opt);
  std::cout << "wrote";
  for (const auto& t : summary["tables"]) std::cout << ' ' << t.get<std::string>();
  std::cout << " to " << target.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information upload control and offloading optimizer"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool instance_required) {
    auto* opt = sub->add_option("--instance", common.instance, "Instance JSON file");
    if (instance_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "Output directory")->required();
    sub->add_option("--seed", common.seed, "Random seed");
    sub->add_option("--d", common.latency, "Latency target override (slots)");
    sub->add_option("--epsilon", common.epsilon, "AoI tolerance override");
    sub->add_option("--t-max", common.t_max, "Threshold range cap");
  };

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate a mobility model from a trace");
  estimate->add_option("--trace", est.trace, "Trace file: time, device, cell")->required()->check(CLI::ExistingFile);
  estimate->add_option("--centers", est.centers, "Cell centers; the trace then holds time, device, x, y")
      ->check(CLI::ExistingFile);
  estimate->add_option("--resample-step", est.step, "Resampling interval in seconds");
  estimate->add_option("--fill", est.fill, "Between-record fill: hold or nearest")
      ->check(CLI::IsMember({"hold", "nearest"}));
  estimate->add_option("--out", est.out, "Output directory")->required();

  double tol = 1e-9;
  auto* solve = app.add_subcommand("solve", "Solve the aging-control MDP at the instance prices");
  add_common(solve, true);
  solve->add_option("--tol", tol, "Solver tolerance");

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Anneal per-location thresholds");
  add_common(optimize, true);
  optimize->add_option("--schedule", opt.schedule, "Cooling schedule: log or power")
      ->check(CLI::IsMember({"log", "power"}));
  optimize->add_option("--a-hat", opt.a_hat, "Cooling constant (default N F / kappa max C)");
  optimize->add_option("--iterations", opt.iterations, "Slot cap");
  optimize->add_option("--unchanged", opt.unchanged, "Stop after this many slots without cost change");
  optimize->add_option("--trace-stride", opt.trace_stride, "Keep every n-th slot in the trace");
  optimize->add_flag("--accelerated", opt.accelerated, "Color-parallel annealing");
  optimize->add_flag("--calibrate", opt.calibrate, "Also search prices inducing the result");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo replay of a threshold policy");
  add_common(simulate, true);
  simulate->add_option("--thresholds", sa.thresholds, "Thresholds CSV")->required()->check(CLI::ExistingFile);
  simulate->add_option("--cycles", sa.cycles, "Collect-upload cycles");
  simulate->add_option("--trace", sa.trace, "Replay a recorded trace instead of the model")
      ->check(CLI::ExistingFile);
  simulate->add_option("--resample-step", sa.step, "Resampling interval for --trace");

  std::string run, report_out;
  std::uint64_t report_seed = 1;
  auto* rep = app.add_subcommand("report", "Aggregate tables for a run directory");
  rep->add_option("--run", run, "Run directory")->required();
  rep->add_option("--out", report_out, "Output directory (default RUN/report)");
  rep->add_option("--seed", report_seed, "Seed for annealed table entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*estimate) return cmd_estimate(est);
    if (*solve) return cmd_solve(common, tol);
    if (*optimize) return cmd_optimize(common, opt);
    if (*simulate) return cmd_simulate(common, sa);
    if (*rep) return cmd_report(run, report_out, report_seed);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 10 + static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
