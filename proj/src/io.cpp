#include "ageopt/io.hpp"

#include "ageopt/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ageopt::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string csv_row(const std::vector<double>& values) {
  std::string s;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) s += ',';
    s += text::format(values[k]);
  }
  return s;
}

namespace {

std::vector<double> numbers(const Json& v, const std::string& key, int count) {
  if (v.is_number()) return std::vector<double>(std::max(count, 1), v.get<double>());
  if (!v.is_array()) fail(ErrorCode::io, "'" + key + "' must be a number or a list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(ErrorCode::io, "'" + key + "' has a non-numeric entry");
    out.push_back(x.get<double>());
  }
  if (count >= 0 && static_cast<int>(out.size()) != count)
    fail(ErrorCode::io, "'" + key + "' needs " + std::to_string(count) + " entries");
  return out;
}

const Json& field(const Json& doc, const std::string& key) {
  if (!doc.contains(key)) fail(ErrorCode::io, "instance file lacks '" + key + "'");
  return doc.at(key);
}

template <class T>
T value_or(const Json& doc, const std::string& key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::io, "bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

std::vector<double> utility_from(const Json& doc, int max_age) {
  if (!doc.contains("utility") || (doc["utility"].is_string() && doc["utility"] == "linear"))
    return mdp::linear_utility(max_age);
  if (doc["utility"].is_string())
    fail(ErrorCode::io, "unknown utility '" + doc["utility"].get<std::string>() + "'");
  return numbers(doc["utility"], "utility", max_age);
}

Instance load_instance(const fs::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    fail(ErrorCode::io, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::io, path.string() + ": top level must be an object");
  const fs::path model_path = path.parent_path() / field(doc, "model").get<std::string>();
  std::ifstream in(model_path);
  if (!in) fail(ErrorCode::io, "cannot open model file " + model_path.string());
  return Instance{path, std::move(doc), mobility::read_model(in)};
}

mdp::AgingMdpInstance Instance::aging() const {
  return aging(numbers(field(doc, "prices"), "prices", model.size()));
}

mdp::AgingMdpInstance Instance::aging(std::vector<double> prices) const {
  const int M = value_or<int>(doc, "max_age", 0);
  if (M < 2) fail(ErrorCode::io, "instance needs max_age >= 2");
  return mdp::AgingMdpInstance(model, M, utility_from(doc, M), std::move(prices));
}

joac::JoacInstance Instance::joac() const {
  const int L = model.size();
  const int M = value_or<int>(doc, "max_age", 0);
  joac::JoacInstance inst{
      .model = model,
      .costs = numbers(field(doc, "costs"), "costs", L),
      .capacities = doc.contains("capacities") ? numbers(doc["capacities"], "capacities", L)
                                               : std::vector<double>(L, 1e300),
      .devices = value_or<double>(doc, "devices", 1.0),
      .mean_size = value_or<double>(doc, "mean_size", 1.0),
      .slot_seconds = value_or<double>(doc, "slot_seconds", 1.0),
      .latency_target = value_or<int>(doc, "latency_target", 1),
      .epsilon = doc.contains("epsilon") ? numbers(doc["epsilon"], "epsilon", -1)
                                         : std::vector<double>{0.01},
      .max_age = M,
      .utility = utility_from(doc, std::max(M, 2)),
      .t_max_cap = std::nullopt,
      .cap_at_latency_plus_3 = false,
  };
  if (doc.contains("t_max")) inst.t_max_cap = value_or<int>(doc, "t_max", 0);
  if (doc.contains("t_max_rule")) {
    const std::string rule = value_or<std::string>(doc, "t_max_rule", "");
    if (rule != "d+3") fail(ErrorCode::io, "unknown t_max_rule '" + rule + "'");
    inst.cap_at_latency_plus_3 = true;
  }
  inst.validate();
  return inst;
}

void copy_instance(const Instance& instance, const fs::path& dir) {
  fs::create_directories(dir);
  Json doc = instance.doc;
  doc["model"] = "model.txt";
  write_file(dir / "instance.json", dump(doc));
  std::ostringstream os;
  mobility::write_model(os, instance.model);
  write_file(dir / "model.txt", os.str());
}

void write_thresholds(std::ostream& out, const Thresholds& tau) {
  out << "location,threshold\n";
  for (std::size_t l = 0; l < tau.size(); ++l) out << l << ',' << tau[l] << '\n';
}

Thresholds read_thresholds(std::istream& in) {
  Thresholds tau;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (text::skip_line(line)) continue;
    const auto fields = text::split_fields(line);
    if (first && !fields.empty() && fields[0] == "location") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 2) fail(ErrorCode::io, "threshold rows need 'location,threshold'");
    const long l = text::to_long(fields[0], "threshold file");
    if (l != static_cast<long>(tau.size())) fail(ErrorCode::io, "threshold rows must be in location order");
    tau.push_back(static_cast<int>(text::to_long(fields[1], "threshold file")));
  }
  if (tau.empty()) fail(ErrorCode::io, "threshold file is empty");
  return tau;
}

Thresholds read_thresholds(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  return read_thresholds(in);
}

}  // namespace ageopt::io
