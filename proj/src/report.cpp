#include "ageopt/report.hpp"

#include "ageopt/aoi.hpp"
#include "ageopt/sim.hpp"
#include "ageopt/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ageopt::report {

namespace fs = std::filesystem;

std::vector<double> cost_groups(const joac::JoacInstance& instance) {
  std::vector<double> g = instance.costs;
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

std::vector<double> traffic_share(const joac::JoacInstance& instance, const Vector& upload) {
  const std::vector<double> groups = cost_groups(instance);
  std::vector<double> share(groups.size(), 0.0);
  const double total = upload.sum();
  for (int j = 0; j < instance.locations(); ++j) {
    const auto it = std::lower_bound(groups.begin(), groups.end(), instance.costs[j]);
    share[it - groups.begin()] += upload(j);
  }
  if (total > 0.0)
    for (double& s : share) s /= total;
  return share;
}

std::vector<CostRow> cost_vs_latency(const joac::JoacInstance& base, const CostSweepOptions& options) {
  const int L = base.locations();
  const int last = options.latency_to < 0 ? base.max_age - 1 : options.latency_to;
  require(options.latency_from >= 1 && last < base.max_age && options.latency_from <= last,
          "latency range must satisfy 1 <= from <= to < M");
  const Thresholds zero(L, 0);
  std::vector<CostRow> rows;
  Thresholds previous = zero;
  for (int d = options.latency_from; d <= last; ++d) {
    joac::JoacInstance inst = base;
    inst.latency_target = d;
    CostRow row;
    row.latency = d;
    row.t_max = joac::t_max(inst);
    row.flat_cost = joac::objective(inst, zero);

    double space = 1.0;
    for (int l = 0; l < L; ++l) space *= row.t_max + 1;
    Thresholds start = previous;
    for (int& v : start) v = std::min(v, row.t_max);
    if (!joac::feasible(inst, start).feasible) start = zero;

    if (space <= static_cast<double>(options.exhaustive_limit)) {
      const sim::ThresholdSearchResult r = sim::exhaustive_threshold_search(inst, row.t_max);
      row.tau = r.feasible > 0 ? r.best : zero;
      row.method = "exhaustive";
    } else {
      anneal::AnnealConfig cfg = options.anneal;
      cfg.t_max = row.t_max;
      cfg.seed = Rng::derive(options.anneal.seed, static_cast<std::uint64_t>(d)).next();
      cfg.trace_stride = 0;
      row.tau = anneal::sa_optimize(inst, cfg, start).best;
      row.method = "anneal";
    }
    // Never report worse than the warm start.
    if (joac::feasible(inst, start).feasible &&
        joac::objective(inst, start) < joac::objective(inst, row.tau))
      row.tau = start;
    const joac::Evaluation ev = joac::evaluate(inst, row.tau);
    row.cost = ev.objective;
    row.share = traffic_share(inst, ev.upload);
    previous = row.tau;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> price_sweep(const mdp::AgingMdpInstance& base, int level,
                                  const std::vector<double>& values) {
  const mdp::PriceLadder& ladder = base.ladder();
  require(level >= 0 && level < ladder.size(), "price level out of range");
  std::vector<SweepRow> rows(values.size());
  parallel_for(static_cast<int>(values.size()), 4, [&](int k) {
    std::vector<double> prices = base.prices();
    for (int l = 0; l < base.locations(); ++l)
      if (ladder.rank[l] == level) prices[l] = values[k];
    const mdp::AgingMdpInstance inst = base.with_prices(prices);
    const mdp::MdpSolution sol = mdp::solve_average_reward(inst);
    rows[k].price = values[k];
    rows[k].gain = sol.gain;
    rows[k].reward = mdp::average_reward(inst, sol.policy);
    mdp::check_structure(sol.policy, inst, &rows[k].tau);
  });
  return rows;
}

std::vector<SweepRow> default_price_sweep(const mdp::AgingMdpInstance& base, int* level_out) {
  const mdp::PriceLadder& ladder = base.ladder();
  const int level = ladder.size() >= 2 ? 1 : 0;
  double top = 1.0;
  for (int x = 1; x <= base.max_age(); ++x) top += base.utility(x) - base.utility(base.max_age());
  const double lo = level > 0 ? ladder.levels[level - 1] : 0.0;
  const double hi = level + 1 < ladder.size() ? ladder.levels[level + 1] : std::max(top, ladder.levels[level]);
  std::vector<double> values;
  for (int k = 0; k <= 12; ++k) values.push_back(lo + (hi - lo) * k / 12.0);
  if (level_out) *level_out = level;
  return price_sweep(base, level, values);
}

void write_trace(std::ostream& out, const anneal::AnnealTrace& trace) {
  out << "slot,temperature,location,value,feasible,accepted,delta,local_delta,current,best\n";
  for (const auto& r : trace.records) {
    out << r.t << ',' << text::format(r.temperature) << ',' << r.location << ',' << r.value << ','
        << r.feasible << ',' << r.accepted << ',' << text::format(r.delta) << ','
        << text::format(r.local_delta) << ',' << text::format(r.current) << ','
        << text::format(r.best) << '\n';
  }
}

void write_coloring_trace(std::ostream& out, const std::vector<coloring::ColoringEvent>& events) {
  out << "slot,colors\n";
  for (const auto& e : events) out << e.slot << ',' << e.colors << '\n';
}

std::vector<CurvePoint> read_curve(const fs::path& trace_csv) {
  std::ifstream in(trace_csv);
  if (!in) fail(ErrorCode::io, "cannot open " + trace_csv.string());
  std::string line;
  std::getline(in, line);
  const auto header = text::split_fields(line);
  const auto slot_col = std::find(header.begin(), header.end(), "slot") - header.begin();
  const auto best_col = std::find(header.begin(), header.end(), "best") - header.begin();
  if (slot_col >= static_cast<long>(header.size()) || best_col >= static_cast<long>(header.size()))
    fail(ErrorCode::io, trace_csv.string() + ": missing slot/best columns");
  std::vector<CurvePoint> curve;
  while (std::getline(in, line)) {
    if (text::skip_line(line)) continue;
    const auto f = text::split_fields(line);
    if (static_cast<long>(f.size()) <= std::max(slot_col, best_col))
      fail(ErrorCode::io, trace_csv.string() + ": short row");
    curve.push_back({text::to_long(f[slot_col], "trace"), text::to_double(f[best_col], "trace")});
  }
  return curve;
}

namespace {

void write_table(const fs::path& path, const std::string& header,
                 const std::vector<std::string>& rows) {
  std::string s = header + "\n";
  for (const auto& r : rows) s += r + "\n";
  io::write_file(path, s);
}

std::string join(const Thresholds& tau) {
  std::string s;
  for (std::size_t k = 0; k < tau.size(); ++k) s += (k ? " " : "") + std::to_string(tau[k]);
  return s;
}

}  // namespace

io::Json build_report(const fs::path& run_dir, const fs::path& out_dir, const ReportOptions& options) {
  if (!fs::is_directory(run_dir) || fs::is_empty(run_dir))
    fail(ErrorCode::empty_run, "run directory is missing or empty: " + run_dir.string());
  if (!fs::exists(run_dir / "instance.json"))
    fail(ErrorCode::empty_run, "run directory has no instance.json: " + run_dir.string());
  fs::create_directories(out_dir);
  const io::Instance instance = io::load_instance(run_dir / "instance.json");
  io::Json summary;
  summary["run"] = run_dir.filename().string();
  std::vector<std::string> tables;

  const fs::path thresholds_path = run_dir / "thresholds.csv";
  const bool have_thresholds = fs::exists(thresholds_path);

  if (instance.has_costs()) {
    const joac::JoacInstance inst = instance.joac();
    CostSweepOptions costs = options.costs;
    costs.anneal.seed = options.seed;
    const std::vector<CostRow> rows = cost_vs_latency(inst, costs);
    const std::vector<double> groups = cost_groups(inst);

    std::vector<std::string> cost_lines, share_lines;
    for (const auto& r : rows) {
      const double reduction = r.flat_cost > 0.0 ? 1.0 - r.cost / r.flat_cost : 0.0;
      cost_lines.push_back(std::to_string(r.latency) + ',' + std::to_string(r.t_max) + ',' +
                           io::csv_row({r.cost, r.flat_cost, reduction}) + ',' + r.method + ',' +
                           join(r.tau));
      share_lines.push_back(std::to_string(r.latency) + ',' + io::csv_row(r.share));
    }
    const Thresholds zero(inst.locations(), 0);
    const joac::Evaluation flat = joac::evaluate(inst, zero);
    share_lines.insert(share_lines.begin(), "flat," + io::csv_row(traffic_share(inst, flat.upload)));
    write_table(out_dir / "cost_vs_d.csv", "d,t_max,cost,flat_cost,reduction,method,thresholds",
                cost_lines);
    std::string share_header = "d";
    for (double g : groups) share_header += ",cost_" + text::format(g);
    write_table(out_dir / "traffic_share.csv", share_header, share_lines);
    tables.push_back("cost_vs_d.csv");
    tables.push_back("traffic_share.csv");

    bool monotone = true;
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (rows[k].cost > rows[k - 1].cost * (1.0 + 1e-12) + 1e-15) monotone = false;
    summary["cost_vs_d_non_increasing"] = monotone;
    summary["flat_cost"] = flat.objective;
    if (!rows.empty()) {
      summary["cost_at_largest_d"] = rows.back().cost;
      summary["reduction_at_largest_d"] =
          flat.objective > 0.0 ? 1.0 - rows.back().cost / flat.objective : 0.0;
    }

    // CCDF at the run's thresholds, or at the optimum for the instance's own latency target.
    Thresholds tau = zero;
    std::string source = "zero";
    if (have_thresholds) {
      tau = io::read_thresholds(thresholds_path);
      source = "thresholds.csv";
    } else {
      for (const auto& r : rows)
        if (r.latency == inst.latency_target) {
          tau = r.tau;
          source = "cost_vs_d";
        }
    }
    const aoi::UploadAnalytics a = aoi::analyze(inst.model, tau);
    std::vector<std::string> ccdf_lines;
    for (int i = 0; i < inst.locations(); ++i)
      for (int d = 0; d <= a.horizon(); ++d)
        ccdf_lines.push_back(std::to_string(i) + ',' + std::to_string(d) + ',' +
                             io::csv_row({aoi::aoi_ccdf(a, i, d)}));
    write_table(out_dir / "aoi_ccdf.csv", "origin,d,ccdf", ccdf_lines);
    tables.push_back("aoi_ccdf.csv");
    summary["ccdf_thresholds"] = source;
    std::vector<double> means(a.mean_aoi().data(), a.mean_aoi().data() + a.mean_aoi().size());
    summary["mean_aoi"] = means;
    summary["offloading_exceptions"] = aoi::offloading_exceptions(inst.model, tau);
  }

  if (instance.has_prices()) {
    const mdp::AgingMdpInstance aging = instance.aging();
    int level = 0;
    const std::vector<SweepRow> sweep = default_price_sweep(aging, &level);
    std::vector<std::string> lines;
    bool monotone = true;
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      lines.push_back(io::csv_row({sweep[k].price, sweep[k].gain, sweep[k].reward}) + ',' +
                      join(sweep[k].tau));
      if (k > 0 && sweep[k].gain > sweep[k - 1].gain + 1e-8) monotone = false;
    }
    write_table(out_dir / "price_sweep.csv", "price,gain,reward,thresholds", lines);
    tables.push_back("price_sweep.csv");
    summary["price_sweep_level"] = level;
    summary["price_sweep_non_increasing"] = monotone;
  }

  std::vector<std::string> curve_lines;
  for (const char* name : {"anneal_trace.csv", "accelerated_trace.csv"}) {
    if (!fs::exists(run_dir / name)) continue;
    const std::string algo = std::string(name) == "anneal_trace.csv" ? "plain" : "accelerated";
    for (const CurvePoint& p : read_curve(run_dir / name))
      curve_lines.push_back(algo + ',' + std::to_string(p.slot) + ',' + io::csv_row({p.best}));
  }
  if (!curve_lines.empty()) {
    write_table(out_dir / "convergence.csv", "algorithm,slot,best", curve_lines);
    tables.push_back("convergence.csv");
  }
  if (tables.empty())
    fail(ErrorCode::empty_run, "instance has neither costs nor prices; nothing to report");
  summary["tables"] = tables;
  io::write_file(out_dir / "report.json", io::dump(summary));
  return summary;
}

}  // namespace ageopt::report
