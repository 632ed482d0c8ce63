#include "ageopt/aoi.hpp"

#include <algorithm>

namespace ageopt::aoi {

namespace {

void check_thresholds(const mobility::MobilityModel& model, const Thresholds& tau) {
  require(static_cast<int>(tau.size()) == model.size(), "threshold vector length mismatch");
  for (int v : tau) require(v >= 0, "thresholds must be non-negative");
}

}  // namespace

int horizon(const Thresholds& tau) {
  return tau.empty() ? 1 : *std::max_element(tau.begin(), tau.end()) + 1;
}

Matrix upload_time_distribution(const mobility::MobilityModel& model, const Thresholds& tau,
                                int origin) {
  check_thresholds(model, tau);
  const int L = model.size();
  const int H = horizon(tau);
  Matrix f = Matrix::Zero(L, H);
  Vector mass = Vector::Zero(L);
  mass(origin) = 1.0;
  for (int t = 1; t <= H; ++t) {
    for (int l = 0; l < L; ++l) {
      if (mass(l) != 0.0 && t > tau[l]) {
        f(l, t - 1) = mass(l);
        mass(l) = 0.0;
      }
    }
    if (t < H) mass = model.step(mass);
  }
  return f;
}

Matrix upload_time_distribution_taboo(const mobility::MobilityModel& model, const Thresholds& tau,
                                      int origin, mobility::TabooPowers& powers) {
  check_thresholds(model, tau);
  const int L = model.size();
  const int H = horizon(tau);
  // A_s = {l : tau_l < s}: locations where age s triggers an upload.
  auto upload_set = [&](int s) {
    std::vector<bool> a(L);
    for (int l = 0; l < L; ++l) a[l] = tau[l] < s;
    return a;
  };
  auto mask = [](Vector& v, const std::vector<bool>& a) {
    for (int l = 0; l < v.size(); ++l)
      if (a[l]) v(l) = 0.0;
  };

  Matrix f = Matrix::Zero(L, H);
  if (tau[origin] < 1) {
    f(origin, 0) = 1.0;
    return f;
  }
  for (int t = 2; t <= H; ++t) {
    // Position s of the path (age s + 1) must avoid A_{s+1} for s = 0..t-2.
    Vector v = Vector::Zero(L);
    v(origin) = 1.0;
    int pos = 0;
    while (pos < t - 2) {
      const std::vector<bool> set = upload_set(pos + 2);
      int end = pos + 1;
      while (end + 1 <= t - 2 && upload_set(end + 2) == set) ++end;
      v = (v.transpose() * powers.matrix(set, end - pos)).transpose();
      mask(v, set);
      pos = end;
    }
    const Vector last = model.step(v);
    const std::vector<bool> at = upload_set(t);
    for (int z = 0; z < L; ++z)
      if (at[z]) f(z, t - 1) = last(z);
  }
  return f;
}

double UploadAnalytics::ccdf(int origin, int d) const {
  if (d >= horizon_) return 0.0;
  double s = 0.0;
  for (int t = std::max(d + 1, 1); t <= horizon_; ++t) s += age_mass_(origin, t - 1);
  return std::min(s, 1.0);
}

UploadAnalytics analyze(const mobility::MobilityModel& model, const Thresholds& tau) {
  const int L = model.size();
  require(L <= kMaxDenseLocations,
          "dense upload analytics limited to " + std::to_string(kMaxDenseLocations) + " locations");
  check_thresholds(model, tau);
  UploadAnalytics out;
  out.horizon_ = horizon(tau);
  out.f_.resize(L);
  parallel_for(L, 64, [&](int i) { out.f_[i] = upload_time_distribution(model, tau, i); });
  out.y_ = Matrix(L, L);
  out.age_mass_ = Matrix(L, out.horizon_);
  out.mean_ = Vector(L);
  for (int i = 0; i < L; ++i) {
    out.y_.row(i) = out.f_[i].rowwise().sum().transpose();
    out.age_mass_.row(i) = out.f_[i].colwise().sum();
    double m = 0.0;
    for (int t = 1; t <= out.horizon_; ++t) m += t * out.age_mass_(i, t - 1);
    out.mean_(i) = m;
  }
  return out;
}

Matrix per_device_rates(const UploadAnalytics& analytics) { return analytics.y(); }

AggregateRates aggregate_rates(const Matrix& y, const mobility::MobilityModel& model,
                               double devices, double mean_size, double slot_seconds) {
  require(devices >= 1.0, "device count must be at least 1");
  require(mean_size > 0.0 && slot_seconds > 0.0, "data size and slot duration must be positive");
  require(y.rows() == model.size() && y.cols() == model.size(), "rate matrix dimension mismatch");
  AggregateRates r;
  r.demand = model.stationary() * (devices * mean_size / slot_seconds);
  r.upload = (r.demand.transpose() * y).transpose();
  return r;
}

double aoi_ccdf(const UploadAnalytics& analytics, int origin, int d) {
  require(d >= 0, "latency must be non-negative");
  return analytics.ccdf(origin, d);
}

double expected_aoi(const UploadAnalytics& analytics, int origin) { return analytics.mean_aoi(origin); }

std::vector<int> offloading_exceptions(const mobility::MobilityModel& model, const Thresholds& tau) {
  const Matrix base = analyze(model, tau).y();
  std::vector<int> out;
  for (int l = 0; l < model.size(); ++l) {
    Thresholds raised = tau;
    ++raised[l];
    const Matrix y = analyze(model, raised).y();
    if (y.col(l).sum() > base.col(l).sum() + 1e-12) out.push_back(l);
  }
  return out;
}

OriginFlow origin_flow(const mobility::MobilityModel& model, const Thresholds& tau, int origin,
                       int latency_target) {
  const Matrix f = upload_time_distribution(model, tau, origin);
  OriginFlow out;
  out.y_row = f.rowwise().sum();
  for (int t = latency_target + 1; t <= f.cols(); ++t) out.tail += f.col(t - 1).sum();
  return out;
}

}  // namespace ageopt::aoi
