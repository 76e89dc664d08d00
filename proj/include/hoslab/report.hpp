#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hoslab {

using json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "report_v1";
inline constexpr const char* kEigenvalueConvention = "lambda_n^2 = 2|n| + d";

struct Check
{
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Tabular series attached to a report, written as CSV for plotting.
struct Curve
{
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Named statistics with pass/fail verdicts and reproducibility metadata.
class Report
{
 public:
  explicit Report(std::string kind);

  const std::string& kind() const { return kind_; }

  json& stats() { return stats_; }
  const json& stats() const { return stats_; }
  json& metadata() { return metadata_; }
  const json& metadata() const { return metadata_; }

  Report& set(const std::string& key, json value);
  Report& check(std::string name, bool pass, std::string detail = {});
  Report& note(std::string text);
  Curve& curve(std::string name, std::vector<std::string> columns);

  const std::vector<Check>& checks() const { return checks_; }
  const std::vector<Curve>& curves() const { return curves_; }
  const std::vector<std::string>& notes() const { return notes_; }
  bool passed() const;

  /// Merge another report's checks (prefixed), stats and curves under `prefix`.
  void absorb(const std::string& prefix, const Report& other);

  json to_json() const;
  /// Writes <stem>.json, one <stem>_<curve>.csv per curve and, when curves
  /// exist, a <stem>.gp gnuplot script. Returns the written paths.
  std::vector<std::filesystem::path> write(const std::filesystem::path& dir, const std::string& stem) const;

 private:
  std::string kind_;
  json stats_ = json::object();
  json metadata_ = json::object();
  std::vector<Check> checks_;
  std::vector<Curve> curves_;
  std::vector<std::string> notes_;
};

void write_csv(std::ostream& os, const Curve& curve);

/// Shortest round-trippable-ish text for a number in check details (%.6g).
std::string num(double v);

}  // namespace hoslab
