#include "ageopt/mobility.hpp"

#include "ageopt/chain.hpp"
#include "ageopt/text.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace ageopt::mobility {

namespace {

constexpr double kRowTolerance = 1e-6;

std::vector<int> all_hop_distances(const std::vector<std::vector<Arc>>& successors) {
  const int n = static_cast<int>(successors.size());
  std::vector<int> dist(static_cast<std::size_t>(n) * n, -1);
  std::vector<int> queue(n);
  for (int s = 0; s < n; ++s) {
    int* row = dist.data() + static_cast<std::size_t>(s) * n;
    int head = 0, tail = 0;
    row[s] = 0;
    queue[tail++] = s;
    while (head < tail) {
      const int v = queue[head++];
      for (const auto& arc : successors[v]) {
        if (row[arc.to] < 0) {
          row[arc.to] = row[v] + 1;
          queue[tail++] = arc.to;
        }
      }
    }
  }
  return dist;
}

}  // namespace

MobilityModel MobilityModel::build(Matrix transitions) {
  if (transitions.rows() == 0 || transitions.rows() != transitions.cols())
    fail(ErrorCode::invalid_argument, "transition matrix must be square and non-empty");
  const int n = static_cast<int>(transitions.rows());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = transitions(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kRowTolerance) {
        std::ostringstream msg;
        msg << "row " << i << " has invalid entry " << v << " at column " << j;
        fail(ErrorCode::non_stochastic_row, msg.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      std::ostringstream msg;
      msg << "row " << i << " sums to " << sum;
      fail(ErrorCode::non_stochastic_row, msg.str());
    }
    transitions.row(i) /= sum;
  }

  int components = 0;
  chain::strongly_connected_components(chain::support(transitions), &components);
  if (components != 1) {
    fail(ErrorCode::reducible,
         "mobility chain has " + std::to_string(components) + " communicating classes");
  }

  MobilityModel m;
  m.transitions_ = std::move(transitions);
  m.stationary_ = n <= kDenseStationaryLimit ? chain::stationary_dense(m.transitions_)
                                             : chain::stationary_power(m.transitions_);
  m.successors_.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.transitions_(i, j) > 0.0) m.successors_[i].push_back({j, m.transitions_(i, j)});
  m.hops_ = std::make_shared<const std::vector<int>>(all_hop_distances(m.successors_));
  return m;
}

MobilityModel build_model(Matrix transitions) { return MobilityModel::build(std::move(transitions)); }

Vector MobilityModel::step(const Vector& mass) const {
  Vector next = Vector::Zero(size());
  for (int i = 0; i < size(); ++i) {
    const double m = mass(i);
    if (m == 0.0) continue;
    for (const auto& arc : successors_[i]) next(arc.to) += m * arc.probability;
  }
  return next;
}

const std::vector<int>& MobilityModel::hop_distances() const { return *hops_; }

// ---------------------------------------------------------------------------------------------

namespace {

std::vector<bool> taboo_mask(const MobilityModel& model, const std::vector<int>& taboo_set) {
  std::vector<bool> mask(model.size(), false);
  for (int a : taboo_set) {
    require(a >= 0 && a < model.size(), "taboo location out of range");
    mask[a] = true;
  }
  if (std::all_of(mask.begin(), mask.end(), [](bool b) { return b; }))
    fail(ErrorCode::taboo_covers_all, "taboo set covers every location");
  return mask;
}

}  // namespace

double taboo_transition(const MobilityModel& model, const TabooQuery& query, int from, int to) {
  require(query.steps >= 1, "taboo query needs at least one step");
  require(from >= 0 && from < model.size() && to >= 0 && to < model.size(),
          "taboo query location out of range");
  const auto mask = taboo_mask(model, query.taboo_set);
  TabooPowers powers(model);
  return powers.matrix(mask, query.steps)(from, to);
}

const Matrix& TabooPowers::matrix(const std::vector<bool>& taboo, int steps) {
  require(steps >= 1, "taboo power needs at least one step");
  require(static_cast<int>(taboo.size()) == model_->size(), "taboo mask has wrong length");
  auto [it, inserted] = cache_.try_emplace(taboo);
  Entry& entry = it->second;
  if (inserted) {
    entry.restricted = model_->transitions();
    for (int j = 0; j < model_->size(); ++j)
      if (taboo[j]) entry.restricted.col(j).setZero();
    entry.powers.push_back(model_->transitions());
  }
  while (static_cast<int>(entry.powers.size()) < steps)
    entry.powers.push_back(entry.restricted * entry.powers.back());
  return entry.powers[steps - 1];
}

// ---------------------------------------------------------------------------------------------
// Trace ingestion

std::vector<Trajectory> resample(const std::vector<TraceRecord>& records,
                                 const ResampleOptions& options) {
  require(options.step > 0.0, "resample step must be positive");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const TraceRecord*>> by_device;
  for (const auto& r : records) {
    auto [it, inserted] = by_device.try_emplace(r.device);
    if (inserted) order.push_back(r.device);
    it->second.push_back(&r);
  }

  std::vector<Trajectory> out;
  out.reserve(order.size());
  for (const auto& device : order) {
    auto& recs = by_device[device];
    std::stable_sort(recs.begin(), recs.end(),
                     [](const TraceRecord* a, const TraceRecord* b) { return a->time < b->time; });
    Trajectory traj{device, {}};
    const double t0 = recs.front()->time;
    const double t_end = recs.back()->time;
    std::size_t cursor = 0;
    // Tick k sits at t0 + k * step; a small slack absorbs floating error in the timestamps.
    const double slack = 1e-9 * options.step;
    for (long k = 0;; ++k) {
      const double tick = t0 + static_cast<double>(k) * options.step;
      if (tick > t_end + slack) break;
      while (cursor + 1 < recs.size() && recs[cursor + 1]->time <= tick + slack) ++cursor;
      std::size_t pick = cursor;
      if (options.fill == ResampleFill::nearest && cursor + 1 < recs.size()) {
        const double before = tick - recs[cursor]->time;
        const double after = recs[cursor + 1]->time - tick;
        if (after < before) pick = cursor + 1;
      }
      traj.cells.push_back(recs[pick]->cell);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

int EstimatedModel::index_of(long cell) const {
  const auto it = std::lower_bound(cell_ids.begin(), cell_ids.end(), cell);
  if (it == cell_ids.end() || *it != cell) return -1;
  return static_cast<int>(it - cell_ids.begin());
}

EstimatedModel estimate_from_trace(const std::vector<TraceRecord>& records,
                                   const ResampleOptions& options) {
  if (records.empty()) fail(ErrorCode::empty_trace, "trace has no records");
  const auto trajectories = resample(records, options);

  std::map<long, std::map<long, long>> counts;
  std::vector<long> seen;
  long transitions = 0;
  for (const auto& traj : trajectories) {
    for (long c : traj.cells) seen.push_back(c);
    for (std::size_t k = 1; k < traj.cells.size(); ++k) {
      ++counts[traj.cells[k - 1]][traj.cells[k]];
      ++transitions;
    }
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());

  // Keep only cells with outgoing transitions, repeating until every kept cell still has one.
  std::vector<long> kept = seen;
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<long> next;
    for (long c : kept) {
      long out = 0;
      if (auto it = counts.find(c); it != counts.end())
        for (const auto& [to, n] : it->second)
          if (std::binary_search(kept.begin(), kept.end(), to)) out += n;
      if (out > 0)
        next.push_back(c);
      else
        changed = true;
    }
    kept = std::move(next);
  }
  if (kept.size() < 2) {
    fail(ErrorCode::single_location_trace,
         "trace exposes fewer than two locations with observable transitions");
  }

  const int n = static_cast<int>(kept.size());
  Matrix P = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = counts[kept[i]];
    double total = 0.0;
    for (const auto& [to, c] : row) {
      const auto it = std::lower_bound(kept.begin(), kept.end(), to);
      if (it == kept.end() || *it != to) continue;
      P(i, it - kept.begin()) += static_cast<double>(c);
      total += static_cast<double>(c);
    }
    P.row(i) /= total;
  }

  std::vector<long> dropped;
  std::set_difference(seen.begin(), seen.end(), kept.begin(), kept.end(),
                      std::back_inserter(dropped));
  return EstimatedModel{MobilityModel::build(std::move(P)), std::move(kept), std::move(dropped),
                        transitions};
}

std::vector<TraceRecord> assign_cells(const std::vector<PositionRecord>& positions,
                                      const std::vector<CellCenter>& centers) {
  require(!centers.empty(), "no cell centers given");
  std::vector<TraceRecord> out;
  out.reserve(positions.size());
  for (const auto& p : positions) {
    double best = std::numeric_limits<double>::infinity();
    long cell = centers.front().cell;
    for (const auto& c : centers) {
      const double d = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
      if (d < best) {
        best = d;
        cell = c.cell;
      }
    }
    out.push_back({p.time, p.device, cell});
  }
  return out;
}

namespace {

// Reads data lines, tolerating one header line (first data line whose first field is not numeric).
template <class Fn>
void for_each_row(std::istream& in, std::size_t min_fields, const char* what, Fn&& fn) {
  std::string line;
  long line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skip_line(line)) continue;
    auto fields = text::split_fields(line);
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(fields.empty() ? "" : fields[0].c_str(), &end);
      if (fields.empty() || *end != '\0') continue;
    }
    if (fields.size() < min_fields) {
      fail(ErrorCode::io, std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                              std::to_string(min_fields) + " fields");
    }
    fn(fields, std::string(what) + " line " + std::to_string(line_no));
  }
}

}  // namespace

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  for_each_row(in, 3, "trace", [&](const auto& f, const std::string& ctx) {
    out.push_back({text::to_double(f[0], ctx), f[1], text::to_long(f[2], ctx)});
  });
  return out;
}

std::vector<PositionRecord> read_position_trace(std::istream& in) {
  std::vector<PositionRecord> out;
  for_each_row(in, 4, "position trace", [&](const auto& f, const std::string& ctx) {
    out.push_back({text::to_double(f[0], ctx), f[1], text::to_double(f[2], ctx),
                   text::to_double(f[3], ctx)});
  });
  return out;
}

std::vector<CellCenter> read_cell_centers(std::istream& in) {
  std::vector<CellCenter> out;
  for_each_row(in, 3, "cell centers", [&](const auto& f, const std::string& ctx) {
    out.push_back({text::to_long(f[0], ctx), text::to_double(f[1], ctx),
                   text::to_double(f[2], ctx)});
  });
  return out;
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << "timestamp_seconds,device_id,cell_id\n";
  for (const auto& r : records) out << text::format(r.time) << ',' << r.device << ',' << r.cell << '\n';
}

void write_model(std::ostream& out, const MobilityModel& model) {
  const int n = model.size();
  out << n << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      out << text::format(model(i, j));
    }
    out << '\n';
  }
}

MobilityModel read_model(std::istream& in) {
  std::string line;
  long n = -1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (text::skip_line(line)) continue;
    const auto fields = text::split_fields(line);
    if (n < 0) {
      if (fields.size() != 1) fail(ErrorCode::io, "model header must be a single integer L");
      n = text::to_long(fields[0], "model header");
      if (n < 1) fail(ErrorCode::io, "model header must be positive");
      continue;
    }
    for (const auto& f : fields) values.push_back(text::to_double(f, "model row"));
  }
  if (n < 0) fail(ErrorCode::io, "empty model file");
  if (static_cast<long>(values.size()) != n * n)
    fail(ErrorCode::io, "model has " + std::to_string(values.size()) + " entries, expected " +
                            std::to_string(n * n));
  Matrix P(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) P(i, j) = values[static_cast<std::size_t>(i * n + j)];
  return MobilityModel::build(std::move(P));
}

int sample_next(const MobilityModel& model, int from, Rng& rng) {
  const auto& arcs = model.successors(from);
  double u = rng.uniform();
  for (const auto& arc : arcs) {
    if (u < arc.probability) return arc.to;
    u -= arc.probability;
  }
  return arcs.back().to;
}

std::vector<int> sample_path(const MobilityModel& model, int start, long steps, Rng& rng) {
  require(start >= 0 && start < model.size(), "start location out of range");
  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back(start);
  for (long k = 0; k < steps; ++k) path.push_back(sample_next(model, path.back(), rng));
  return path;
}

}  // namespace ageopt::mobility
