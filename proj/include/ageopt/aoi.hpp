#pragma once

#include "ageopt/common.hpp"
#include "ageopt/mobility.hpp"

#include <vector>

// Where and when data collected at each origin is uploaded under per-location thresholds.
// Data collected at origin i has age 1 in the collection slot; at age t and location z it is uploaded
// iff t > tau_z. Upload is forced at age max(tau) + 1, so every distribution here has finite support.
namespace ageopt::aoi {

inline constexpr int kMaxDenseLocations = 512;

/// max(tau) + 1: the age by which every item has been uploaded.
int horizon(const Thresholds& tau);

/// f(z, t - 1) = P(upload at location z at age t | collected at origin), t = 1..horizon.
/// Forward propagation of the age-indexed sub-stochastic location chain.
Matrix upload_time_distribution(const mobility::MobilityModel& model, const Thresholds& tau,
                                int origin);

/// Same quantity from products of taboo transition matrices.
Matrix upload_time_distribution_taboo(const mobility::MobilityModel& model, const Thresholds& tau,
                                      int origin, mobility::TabooPowers& powers);

class UploadAnalytics {
 public:
  int locations() const { return static_cast<int>(f_.size()); }
  int horizon() const { return horizon_; }

  double f(int origin, int z, int t) const {
    return t >= 1 && t <= horizon_ ? f_[origin](z, t - 1) : 0.0;
  }
  const Matrix& slice(int origin) const { return f_[origin]; }

  /// y(i, j): probability that data collected at i is uploaded at j.
  const Matrix& y() const { return y_; }
  /// P(Delta_i > d).
  double ccdf(int origin, int d) const;
  /// E[Delta_i].
  double mean_aoi(int origin) const { return mean_(origin); }
  const Vector& mean_aoi() const { return mean_; }

  friend UploadAnalytics analyze(const mobility::MobilityModel&, const Thresholds&);

 private:
  std::vector<Matrix> f_;
  Matrix y_;
  Matrix age_mass_;  // (origin, t - 1)
  Vector mean_;
  int horizon_ = 1;
};

/// All origins, in parallel. Throws InvalidArgument above kMaxDenseLocations locations.
UploadAnalytics analyze(const mobility::MobilityModel& model, const Thresholds& tau);

/// y(i, z) = sum_t f(i, z, t).
Matrix per_device_rates(const UploadAnalytics& analytics);

struct AggregateRates {
  Vector demand;  // D_j = N pi_j F / kappa
  Vector upload;  // Y_j = sum_i D_i y_ij
};

AggregateRates aggregate_rates(const Matrix& y, const mobility::MobilityModel& model,
                               double devices, double mean_size, double slot_seconds);

/// sum_{t > d} sum_z f(origin, z, t).
double aoi_ccdf(const UploadAnalytics& analytics, int origin, int d);

/// sum_t sum_z t f(origin, z, t).
double expected_aoi(const UploadAnalytics& analytics, int origin);

/// Locations l at which raising tau_l by one increases sum_i y(i, l). Diagnostic; the opposite
/// direction is expected but not guaranteed.
std::vector<int> offloading_exceptions(const mobility::MobilityModel& model, const Thresholds& tau);

/// Per-origin summary needed by the optimizer: the y row and P(Delta > d).
struct OriginFlow {
  Vector y_row;
  double tail = 0.0;
};

OriginFlow origin_flow(const mobility::MobilityModel& model, const Thresholds& tau, int origin,
                       int latency_target);

}  // namespace ageopt::aoi
