#pragma once

#include "ageopt/common.hpp"
#include "ageopt/joac.hpp"
#include "ageopt/mdp.hpp"
#include "ageopt/mobility.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

// Instance files and small delimited tables shared by the command-line tool and the report.
namespace ageopt::io {

using Json = nlohmann::json;

/// Parsed instance file. Keys (JSON object):
///   model         path of the mobility model file, relative to the instance file
///   max_age       M
///   utility       "linear" or a list of M values
///   prices        per-location prices (aging-control commands)
///   costs         per-location C_j            capacities  list or scalar B_j
///   devices, mean_size, slot_seconds           N, F, kappa (default 1)
///   latency_target  d                          epsilon     scalar or list
///   t_max         optional cap on the threshold range
///   t_max_rule    optional "d+3"
///   seed          optional default seed
struct Instance {
  std::filesystem::path source;
  Json doc;
  mobility::MobilityModel model;

  mdp::AgingMdpInstance aging() const;
  mdp::AgingMdpInstance aging(std::vector<double> prices) const;
  joac::JoacInstance joac() const;
  bool has_prices() const { return doc.contains("prices"); }
  bool has_costs() const { return doc.contains("costs"); }
};

Instance load_instance(const std::filesystem::path& path);

/// Writes `instance.json` (model key rewritten to "model.txt") and `model.txt` into `dir`.
void copy_instance(const Instance& instance, const std::filesystem::path& dir);

std::vector<double> utility_from(const Json& doc, int max_age);

/// CSV with header `location,threshold`.
void write_thresholds(std::ostream& out, const Thresholds& tau);
Thresholds read_thresholds(std::istream& in);
Thresholds read_thresholds(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Deterministic JSON text (sorted keys, two-space indent, trailing newline).
std::string dump(const Json& doc);

/// Comma-joined row of shortest round-trip numbers.
std::string csv_row(const std::vector<double>& values);

}  // namespace ageopt::io
