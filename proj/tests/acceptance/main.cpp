#include "hoslab/acceptance.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv)
{
  CLI::App app{"acceptance criteria, one line per criterion"};
  std::string tier = "reference";
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<int> only;
  std::string out;
  app.add_option("--tier", tier, "smoke, reference or extended");
  app.add_option("--seed", seed);
  app.add_option("--workers", workers);
  app.add_option("--only", only, "criterion ids");
  app.add_option("--out", out, "directory for per-criterion reports");
  CLI11_PARSE(app, argc, argv);

  hoslab::AcceptanceOptions opts;
  opts.tier = hoslab::tier_from_string(tier);
  opts.seed = seed;
  opts.workers = workers;
  opts.only = only;

  int failed = 0;
  const auto outcomes = hoslab::run_acceptance(opts, [&](const hoslab::CriterionOutcome& o) {
    std::cout << hoslab::format_outcome(o) << std::endl;
    if (!o.pass)
      ++failed;
    if (!out.empty())
      o.report.write(out, "criterion_" + std::to_string(o.id));
  });
  std::cout << (outcomes.size() - failed) << "/" << outcomes.size() << " criteria passed (" << tier << " tier)\n";
  return failed == 0 ? 0 : 1;
}
