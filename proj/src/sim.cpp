#include "ageopt/sim.hpp"

#include "ageopt/anneal.hpp"
#include "ageopt/chain.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace ageopt::sim {

long SimResult::origin_count(int i) const {
  long n = 0;
  for (long c : aoi_hist[i]) n += c;
  return n;
}

double SimResult::ccdf(int origin, int d) const {
  const auto& h = aoi_hist[origin];
  long total = 0, tail = 0;
  for (std::size_t t = 0; t < h.size(); ++t) {
    total += h[t];
    if (static_cast<int>(t) > d) tail += h[t];
  }
  return total > 0 ? static_cast<double>(tail) / static_cast<double>(total) : 0.0;
}

namespace {

// Accumulates completed collect-upload cycles.
class Recorder {
 public:
  Recorder(const mdp::AgingMdpInstance& instance, int horizon, long warmup, long cycles, int batches)
      : instance_(instance), warmup_(warmup), batch_len_(std::max(1L, cycles / std::max(1, batches))) {
    const int L = instance.locations();
    out_.counts = Matrix::Zero(L, L);
    out_.aoi_hist.assign(L, std::vector<long>(horizon + 1, 0));
    out_.upload_share = Vector::Zero(L);
  }

  void slot(int age, int l, bool upload) {
    if (seen_ < warmup_) return;
    const double r = instance_.utility(std::min(age, instance_.max_age())) -
                     (upload ? instance_.price(l) : 0.0);
    batch_reward_ += r;
    ++batch_slots_;
    total_reward_ += r;
    ++out_.slots;
  }

  void upload(int origin, int z, int age) {
    if (seen_++ < warmup_) return;
    out_.counts(origin, z) += 1.0;
    auto& h = out_.aoi_hist[origin];
    if (age >= static_cast<int>(h.size())) h.resize(age + 1, 0);
    ++h[age];
    out_.upload_share(z) += 1.0;
    age_sum_ += age;
    ++out_.cycles;
    if (++batch_cycles_ == batch_len_) close_batch();
  }

  SimResult finish() {
    if (batch_cycles_ > 0 && batch_cycles_ * 2 >= batch_len_) close_batch();
    const int L = instance_.locations();
    out_.empirical_y = Matrix::Zero(L, L);
    for (int i = 0; i < L; ++i) {
      const double n = out_.counts.row(i).sum();
      if (n > 0) out_.empirical_y.row(i) = out_.counts.row(i) / n;
    }
    if (out_.cycles > 0) {
      out_.upload_share /= static_cast<double>(out_.cycles);
      out_.mean_aoi = age_sum_ / static_cast<double>(out_.cycles);
    }
    if (out_.slots > 0) out_.mean_reward = total_reward_ / static_cast<double>(out_.slots);
    const int b = static_cast<int>(batch_means_.size());
    if (b > 1) {
      double m = 0.0, s = 0.0;
      for (double v : batch_means_) m += v;
      m /= b;
      for (double v : batch_means_) s += (v - m) * (v - m);
      out_.reward_se = std::sqrt(s / (b - 1) / b);
    }
    return std::move(out_);
  }

 private:
  void close_batch() {
    if (batch_slots_ > 0) batch_means_.push_back(batch_reward_ / static_cast<double>(batch_slots_));
    batch_reward_ = 0.0;
    batch_slots_ = 0;
    batch_cycles_ = 0;
  }

  const mdp::AgingMdpInstance& instance_;
  long warmup_;
  long batch_len_;
  long seen_ = 0;
  SimResult out_;
  double total_reward_ = 0.0;
  double age_sum_ = 0.0;
  double batch_reward_ = 0.0;
  long batch_slots_ = 0;
  long batch_cycles_ = 0;
  std::vector<double> batch_means_;
};

void check(const mdp::AgingMdpInstance& instance, const Thresholds& tau) {
  require(static_cast<int>(tau.size()) == instance.locations(), "threshold vector length mismatch");
  for (int v : tau) require(v >= 0 && v <= instance.max_age(), "thresholds must lie in 0..M");
}

}  // namespace

SimResult simulate_policy(const mdp::AgingMdpInstance& instance, const Thresholds& tau,
                          const SimOptions& options, Rng& rng) {
  check(instance, tau);
  require(options.cycles >= 1, "at least one cycle required");
  require(*std::min_element(tau.begin(), tau.end()) < instance.max_age(),
          "no location ever uploads; cycles would never complete");
  const mobility::MobilityModel& model = instance.model();
  const int M = instance.max_age();
  const int H = std::max(*std::max_element(tau.begin(), tau.end()) + 1, M);
  Recorder rec(instance, H, options.warmup_cycles, options.cycles, options.batches);

  // Start at a stationary location with fresh data.
  const Vector& pi = model.stationary();
  double u = rng.uniform(), acc = 0.0;
  int l = model.size() - 1;
  for (int k = 0; k < model.size(); ++k) {
    acc += pi(k);
    if (u < acc) {
      l = k;
      break;
    }
  }
  const long total = options.cycles + options.warmup_cycles;
  long done = 0;
  while (done < total) {
    const int origin = l;
    int age = 1;
    for (;;) {
      const bool up = age > tau[l];
      rec.slot(age, l, up);
      if (up) {
        rec.upload(origin, l, age);
        ++done;
        l = mobility::sample_next(model, l, rng);
        break;
      }
      age = std::min(age + 1, M);
      l = mobility::sample_next(model, l, rng);
    }
  }
  return rec.finish();
}

SimResult simulate_from_trace(const std::vector<mobility::Trajectory>& trajectories,
                              const std::vector<long>& cell_ids,
                              const mdp::AgingMdpInstance& instance, const Thresholds& tau,
                              long warmup_cycles) {
  check(instance, tau);
  std::unordered_map<long, int> index;
  for (int k = 0; k < static_cast<int>(cell_ids.size()); ++k) index.emplace(cell_ids[k], k);
  long positions = 0;
  for (const auto& tr : trajectories) positions += static_cast<long>(tr.cells.size());
  if (positions == 0) fail(ErrorCode::empty_trace, "trace has no positions to replay");

  const int H = std::max(*std::max_element(tau.begin(), tau.end()) + 1, instance.max_age());
  Recorder rec(instance, H, warmup_cycles, std::max(1L, positions), 20);
  bool any = false;
  for (const auto& tr : trajectories) {
    int origin = -1, age = 0;
    for (long cell : tr.cells) {
      const auto it = index.find(cell);
      if (it == index.end()) {
        origin = -1;  // unknown cell: drop the item in flight
        continue;
      }
      const int l = it->second;
      if (origin < 0) {
        origin = l;
        age = 1;
      }
      const bool up = age > tau[l];
      rec.slot(age, l, up);
      any = true;
      if (up) {
        rec.upload(origin, l, age);
        origin = -1;
      } else {
        age = std::min(age + 1, instance.max_age());
      }
    }
  }
  if (!any) fail(ErrorCode::empty_trace, "no trace cell maps to a model location");
  return rec.finish();
}

// ---------------------------------------------------------------------------------------------

namespace {

long checked_space(int locations, int values) {
  long n = 1;
  for (int l = 0; l < locations; ++l) {
    n *= values;
    if (n > kMaxSearchSpace)
      fail(ErrorCode::search_space_too_large,
           "exhaustive search over more than " + std::to_string(kMaxSearchSpace) + " vectors");
  }
  return n;
}

struct Candidate {
  bool ok = false;
  double value = 0.0;
  Thresholds tau;
};

// Keeps the better of two candidates; `lower` selects minimization. Ties go to the lexicographically
// smaller vector.
void merge(Candidate& into, Candidate&& other, bool lower, double tie) {
  if (!other.ok) return;
  if (!into.ok) {
    into = std::move(other);
    return;
  }
  const double d = lower ? other.value - into.value : into.value - other.value;
  if (d < -tie || (std::abs(d) <= tie && other.tau < into.tau)) into = std::move(other);
}

template <class Score>
ThresholdSearchResult search(int locations, int radix, bool lower, double tie, Score score) {
  const long n = checked_space(locations, radix);
  const int chunks = static_cast<int>(std::min<long>(n, 64));
  std::vector<Candidate> best(chunks);
  std::vector<long> feasible(chunks, 0);
  parallel_for(chunks, 2, [&](int c) {
    for (long k = c; k < n; k += chunks) {
      Candidate cand;
      cand.tau = anneal::decode(k, locations, radix - 1);
      cand.ok = score(cand.tau, cand.value);
      if (cand.ok) ++feasible[c];
      merge(best[c], std::move(cand), lower, tie);
    }
  });
  Candidate overall;
  ThresholdSearchResult out;
  for (int c = 0; c < chunks; ++c) {
    merge(overall, std::move(best[c]), lower, tie);
    out.feasible += feasible[c];
  }
  out.evaluated = n;
  out.best = overall.tau;
  out.objective = overall.value;
  return out;
}

}  // namespace

ThresholdSearchResult exhaustive_threshold_search(const joac::JoacInstance& instance, int t_max) {
  require(t_max >= 0, "t_max must be non-negative");
  const double scale = joac::default_a_hat(instance);
  return search(instance.locations(), t_max + 1, true, 1e-12 * std::max(1.0, scale),
                [&](const Thresholds& tau, double& value) {
                  const joac::Evaluation ev = joac::evaluate(instance, tau);
                  value = ev.objective;
                  return ev.report.feasible;
                });
}

ThresholdSearchResult threshold_reward_search(const mdp::AgingMdpInstance& instance) {
  return search(instance.locations(), instance.max_age() + 1, false, 1e-12,
                [&](const Thresholds& tau, double& value) {
                  mdp::ThresholdPolicy p;
                  p.per_location = tau;
                  value = mdp::average_reward(instance, p);
                  return true;
                });
}

EnumerationResult exhaustive_policy_enumeration(const mdp::AgingMdpInstance& instance) {
  const int M = instance.max_age();
  const int L = instance.locations();
  if (M * L > 20)
    fail(ErrorCode::search_space_too_large, "policy enumeration needs M * L <= 20");
  const std::uint64_t n = std::uint64_t{1} << (M * L);
  const int chunks = static_cast<int>(std::min<std::uint64_t>(n, 64));
  std::vector<double> best(chunks, -INFINITY);
  std::vector<std::uint64_t> arg(chunks, 0);
  parallel_for(chunks, 2, [&](int c) {
    for (std::uint64_t code = c; code < n; code += chunks) {
      const auto policy = mdp::DeterministicPolicy::from_code(M, L, code);
      const mdp::ProductChain pc = mdp::product_chain(instance, policy);
      const std::vector<double> gains = chain::class_gains(pc.transitions, pc.reward);
      const double g = *std::max_element(gains.begin(), gains.end());
      if (g > best[c]) {
        best[c] = g;
        arg[c] = code;
      }
    }
  });
  EnumerationResult out;
  out.reward = -INFINITY;
  std::uint64_t code = 0;
  for (int c = 0; c < chunks; ++c) {
    if (best[c] > out.reward || (best[c] == out.reward && arg[c] < code)) {
      out.reward = best[c];
      code = arg[c];
    }
  }
  out.policy = mdp::DeterministicPolicy::from_code(M, L, code);
  out.evaluated = static_cast<long>(n);
  return out;
}

}  // namespace ageopt::sim
