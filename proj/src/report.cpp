#include "hoslab/report.hpp"

#include "hoslab/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace hoslab {

Report::Report(std::string kind)
    : kind_(std::move(kind))
{
  metadata_["eigenvalue_convention"] = kEigenvalueConvention;
}

Report& Report::set(const std::string& key, json value)
{
  stats_[key] = std::move(value);
  return *this;
}

Report& Report::check(std::string name, bool pass, std::string detail)
{
  checks_.push_back({std::move(name), pass, std::move(detail)});
  return *this;
}

Report& Report::note(std::string text)
{
  if (std::find(notes_.begin(), notes_.end(), text) == notes_.end())
    notes_.push_back(std::move(text));
  return *this;
}

Curve& Report::curve(std::string name, std::vector<std::string> columns)
{
  curves_.push_back({std::move(name), std::move(columns), {}});
  return curves_.back();
}

bool Report::passed() const
{
  return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
}

void Report::absorb(const std::string& prefix, const Report& other)
{
  for (const Check& c : other.checks_)
    checks_.push_back({prefix + "." + c.name, c.pass, c.detail});
  stats_[prefix] = other.stats_;
  for (const Curve& c : other.curves_)
    curves_.push_back({prefix + "_" + c.name, c.columns, c.rows});
  for (const std::string& n : other.notes_)
    note(n);
}

json Report::to_json() const
{
  json j;
  j["schema"] = kReportSchema;
  j["kind"] = kind_;
  j["passed"] = passed();
  j["metadata"] = metadata_;
  json checks = json::array();
  for (const Check& c : checks_)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = checks;
  j["stats"] = stats_;
  j["notes"] = notes_;
  json curves = json::array();
  for (const Curve& c : curves_)
    curves.push_back({{"name", c.name}, {"columns", c.columns}, {"rows", c.rows.size()}});
  j["curves"] = curves;
  return j;
}

void write_csv(std::ostream& os, const Curve& curve)
{
  for (std::size_t k = 0; k < curve.columns.size(); ++k)
    os << (k ? "," : "") << curve.columns[k];
  os << '\n';
  os.precision(17);
  for (const auto& row : curve.rows) {
    for (std::size_t k = 0; k < row.size(); ++k)
      os << (k ? "," : "") << row[k];
    os << '\n';
  }
}

std::vector<std::filesystem::path> Report::write(const std::filesystem::path& dir, const std::string& stem) const
{
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  const auto json_path = dir / (stem + ".json");
  {
    std::ofstream os(json_path);
    if (!os)
      throw Error("cannot write " + json_path.string());
    os << to_json().dump(2) << '\n';
  }
  written.push_back(json_path);

  for (const Curve& c : curves_) {
    const auto path = dir / (stem + "_" + c.name + ".csv");
    std::ofstream os(path);
    if (!os)
      throw Error("cannot write " + path.string());
    write_csv(os, c);
    written.push_back(path);
  }

  if (!curves_.empty()) {
    const auto gp = dir / (stem + ".gp");
    std::ofstream os(gp);
    os << "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n";
    for (const Curve& c : curves_) {
      if (c.columns.size() < 2)
        continue;
      os << "set output '" << stem << "_" << c.name << ".png'\n";
      os << "set xlabel '" << c.columns[0] << "'\nplot ";
      for (std::size_t k = 1; k < c.columns.size(); ++k)
        os << (k > 1 ? ", " : "") << "'" << stem << "_" << c.name << ".csv' using 1:" << k + 1 << " with linespoints";
      os << "\n";
    }
    written.push_back(gp);
  }
  return written;
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace hoslab
