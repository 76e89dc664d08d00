#include "hoslab/acceptance.hpp"
#include "hoslab/error.hpp"
#include "hoslab/lens_free.hpp"
#include "hoslab/picard_solver.hpp"
#include "hoslab/proba_lab.hpp"
#include "hoslab/random_ensembles.hpp"
#include "hoslab/spectral_ops.hpp"
#include "hoslab/stats.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

using namespace hoslab;
namespace fs = std::filesystem;

namespace {

constexpr const char* kCodeVersion = HOSLAB_VERSION;

enum Exit { ok = 0, checks_failed = 1, bad_config = 2, numerical_failure = 3 };

// Parameters of one command: reads from the merged config, records the
// value actually used, and rejects keys nobody asked for.
class Params
{
 public:
  Params(json source, std::string prefix = {}) : source_(std::move(source)), prefix_(std::move(prefix))
  {
    if (!source_.is_object())
      throw InvalidArgument(prefix_.empty() ? "config" : prefix_, "expected an object");
  }

  template <class T>
  T get(const std::string& key, T fallback)
  {
    used_.insert(key);
    T value = fallback;
    if (source_.contains(key)) {
      try {
        value = source_.at(key).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw InvalidArgument(name(key), "has the wrong type");
      }
    }
    resolved_[key] = value;
    return value;
  }

  bool has(const std::string& key) const { return source_.contains(key); }

  // Nested object; absent keys give an empty object.
  json object(const std::string& key)
  {
    used_.insert(key);
    if (!source_.contains(key))
      return json::object();
    if (!source_.at(key).is_object())
      throw InvalidArgument(name(key), "expected an object");
    return source_.at(key);
  }

  void record(const std::string& key, json value) { resolved_[key] = std::move(value); }

  void finish(const std::string& command) const
  {
    for (const auto& item : source_.items())
      if (!used_.count(item.key()))
        throw InvalidArgument(name(item.key()), "unknown parameter for '" + command + "'");
  }

  const json& resolved() const { return resolved_; }

 private:
  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  json source_;
  std::string prefix_;
  std::set<std::string> used_;
  json resolved_ = json::object();
};

struct Globals
{
  Tier tier = Tier::reference;
  std::uint64_t seed = 1;
  bool seed_given = false;
  int workers = 1;
  fs::path out;
  std::string resume;
};

struct Outcome
{
  std::vector<Report> reports;  // written as <command>[_<i>].json
  std::vector<fs::path> extra_files;
  Exit exit = Exit::ok;
};

long scaled(const Globals& g, long reference)
{
  switch (g.tier) {
    case Tier::smoke: return std::max(1000L, reference / 20);
    case Tier::reference: return reference;
    case Tier::extended: return 4 * reference;
  }
  return reference;
}

std::vector<double> range(double from, double to, double step)
{
  std::vector<double> v;
  for (double x = from; x <= to + 1e-9 * step; x += step)
    v.push_back(x);
  return v;
}

// Field description:
//   {"dim", "N", "profile": ground | flat | power | mixed | coeffs,
//    "amplitude", "modes", "decay", "coeffs": [re | [re, im], ...]}
SpectralField field_from_json(const json& j, int default_dim, int default_n, const std::string& default_profile,
                              json& resolved, const std::string& prefix = "field")
{
  Params p(j, prefix);
  const int dim = p.get("dim", default_dim);
  const int n = p.get("N", default_n);
  const std::string profile = p.get<std::string>("profile", default_profile);
  const double amplitude = p.get("amplitude", 1.0);
  const BasisPtr b = cached_basis(dim, n);
  SpectralField u(b);
  const auto size = static_cast<Eigen::Index>(b->size());
  if (profile == "ground") {
    u.coeffs()[0] = amplitude;
  } else if (profile == "flat") {
    const int modes = p.get("modes", 32);
    if (modes < 1 || modes > size)
      throw InvalidArgument(prefix + ".modes", "must lie in [1, basis size]");
    for (int k = 0; k < modes; ++k)
      u.coeffs()[k] = amplitude / std::sqrt(double(modes));
  } else if (profile == "power") {
    const double decay = p.get("decay", 1.0);
    for (Eigen::Index k = 0; k < size; ++k)
      u.coeffs()[k] = amplitude * std::pow(1.0 + double(b->index(k).order()), -decay);
  } else if (profile == "mixed") {
    const int modes = std::min<int>(p.get("modes", 9), int(size));
    for (int k = 0; k < modes; ++k)
      u.coeffs()[k] = std::polar(1.0 / (1.0 + k), 0.7 * k);
    u *= amplitude / u.l2_norm();
  } else if (profile == "coeffs") {
    const json list = p.get("coeffs", json::array());
    if (!list.is_array() || list.empty() || static_cast<Eigen::Index>(list.size()) > size)
      throw InvalidArgument(prefix + ".coeffs", "expected 1..basis-size numbers or [re, im] pairs");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const json& c = list[k];
      if (c.is_number())
        u.coeffs()[Eigen::Index(k)] = amplitude * c.get<double>();
      else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
        u.coeffs()[Eigen::Index(k)] = amplitude * Complex(c[0].get<double>(), c[1].get<double>());
      else
        throw InvalidArgument(prefix + ".coeffs", "entry " + std::to_string(k) + " is not a number or pair");
    }
  } else {
    throw InvalidArgument(prefix + ".profile", "unknown profile '" + profile + "' (ground, flat, power, mixed, coeffs)");
  }
  p.finish(prefix);
  resolved = p.resolved();
  return u;
}

EnsembleSpec ensemble_param(Params& p, const Globals& g, const std::string& family, double gamma = 0.0)
{
  json j = p.object("ensemble");
  Params e(j, "ensemble");
  json spec{{"family", e.get<std::string>("family", family)}, {"gamma", e.get("gamma", gamma)}};
  const std::uint64_t seed = e.get<std::uint64_t>("seed", g.seed);
  spec["seed"] = g.seed_given ? g.seed : seed;
  e.finish("ensemble");
  const EnsembleSpec out = ensemble_from_json(spec);
  p.record("ensemble", to_json(out));
  return out;
}

SolverConfig solver_param(Params& p)
{
  const json j = p.object("solver");
  const SolverConfig c = solver_config_from_json(j);
  const json known = to_json(SolverConfig{});
  for (const auto& item : j.items())
    if (!known.contains(item.key()))
      throw InvalidArgument("solver." + item.key(), "unknown solver parameter");
  p.record("solver", to_json(c));
  return c;
}

std::vector<double> coeff_param(Params& p, int default_count)
{
  if (p.has("coeffs")) {
    const auto c = p.get("coeffs", std::vector<double>{});
    if (c.empty())
      throw InvalidArgument("coeffs", "must be nonempty");
    return c;
  }
  const int count = p.get("coeff_count", default_count);
  if (count < 1)
    throw InvalidArgument("coeff_count", "must be positive");
  return std::vector<double>(static_cast<std::size_t>(count), 1.0 / std::sqrt(double(count)));
}

void print_checks(const Report& r)
{
  for (const Check& c : r.checks())
    std::cout << (c.pass ? "  PASS " : "  FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
}

Outcome single(Report r)
{
  Outcome o;
  o.exit = r.passed() ? Exit::ok : Exit::checks_failed;
  o.reports.push_back(std::move(r));
  return o;
}

// ---- commands ---------------------------------------------------------------

Outcome cmd_basis_check(Params& p, const Globals&)
{
  const int dim = p.get("dim", 1);
  const int n = p.get("N", 64);
  const int quad = p.get("quad_per_axis", dim == 1 ? 256 : 0);
  const BasisPtr b = make_basis(dim, n, quad);
  Report r("basis_check");
  r.metadata()["eigenvalue_convention"] = kEigenvalueConvention;
  const double gram = b->gram_deviation();
  r.set("dim", dim).set("N", n).set("quad_per_axis", b->quad_per_axis()).set("basis_size", b->size());
  r.set("gram_deviation", gram);
  r.check("gram_deviation", gram <= 1e-10, num(gram) + " <= 1e-10");
  std::cout << "gram deviation " << num(gram) << " (d = " << dim << ", N = " << n << ", "
            << b->quad_per_axis() << " nodes per axis)\n";
  return single(std::move(r));
}

Outcome cmd_norms(Params& p, const Globals& g)
{
  json fr;
  const SpectralField u = field_from_json(p.object("field"), 1, 32, "power", fr);
  p.record("field", fr);
  json norms = p.get("norms", json::array({json{{"kind", "harmonic_sobolev"}, {"s", 0.5}},
                                           json{{"kind", "classical_sobolev"}, {"s", 0.5}},
                                           json{{"kind", "weighted_x"}, {"s", 0.5}},
                                           json{{"kind", "fractional_laplacian_L2"}, {"s", 0.5}},
                                           json{{"kind", "sup_norm"}, {"s", 0.0}}}));
  const json st = p.object("spacetime");
  std::optional<std::tuple<double, double, int>> spacetime;
  if (!st.empty()) {
    Params sp(st, "spacetime");
    const std::string q = sp.get<std::string>("q", "inf");
    spacetime = std::tuple{q == "inf" ? kInfinity : std::stod(q), sp.get("T", 1.0), sp.get("time_nodes", 257)};
    sp.finish("spacetime");
    p.record("spacetime", sp.resolved());
  }
  Report r("norms");
  std::vector<NormRecord> rows;
  const AuditSampler sampler(u.basis_ptr());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    Params np(norms[i], "norms[" + std::to_string(i) + "]");
    NormSpec spec{norm_kind_from_string(np.get<std::string>("kind", "harmonic_sobolev")), np.get("s", 0.0),
                  np.get("r", 2.0)};
    np.finish("norms");
    spec.validate();
    NormRecord rec{spec, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                   u.basis().max_degree(), spatial_norm(u, spec, sampler)};
    rows.push_back(rec);
    if (spacetime) {
      auto [q, T, nodes] = *spacetime;
      rows.push_back({spec, q, T, rec.N, spacetime_norm(u, q, spec, T, nodes)});
    }
  }
  json values = json::array();
  for (const NormRecord& rec : rows) {
    values.push_back({{"kind", to_string(rec.norm.kind)}, {"s", rec.norm.s}, {"r", rec.norm.r},
                      {"q", std::isnan(rec.q) ? json(nullptr) : json(std::isinf(rec.q) ? "inf" : num(rec.q))},
                      {"value", rec.value}});
    std::cout << to_string(rec.norm.kind) << " s=" << num(rec.norm.s)
              << (std::isnan(rec.q) ? "" : " (L^q_t, q=" + num(rec.q) + ")") << ": " << num(rec.value) << '\n';
  }
  r.set("values", values);
  Outcome o = single(std::move(r));
  fs::create_directories(g.out);
  const fs::path csv = g.out / "norms.csv";
  std::ofstream os(csv);
  write_norm_csv(os, rows);
  o.extra_files.push_back(csv);
  return o;
}

Outcome cmd_smoothing(Params& p, const Globals& g)
{
  const int n = p.get("N", 128);
  const long draws = p.get("draws", scaled(g, 100));
  const double decay = p.get("decay", 1.0);
  const int time_nodes = p.get("time_nodes", 0);
  const auto eps_list = p.get("eps", std::vector<double>{0.05, 0.25, 0.45});
  const auto variants = p.get("variants", std::vector<std::string>{"sqrtH", "fractional_grad"});
  const EnsembleSpec spec = ensemble_param(p, g, "gaussian");
  if (draws < 1)
    throw InvalidArgument("draws", "must be positive");
  const BasisPtr b = cached_basis(1, n);

  Report r("smoothing");
  r.set("N", n).set("draws", draws);
  Curve& curve = r.curve("sup", {"variant", "eps", "sup_ratio", "mean_ratio"});
  for (const std::string& name : variants) {
    const SmoothingVariant v = smoothing_variant_from_string(name);
    for (double eps : eps_list) {
      const SmoothingEvaluator eval(b, eps, v);
      double sup = 0.0, mean = 0.0;
      for (long d = 0; d < draws; ++d) {
        SpectralField u(b);
        for (int k = 0; k <= n; ++k)
          u.coeffs()[k] = Complex(sample(spec, d, 2 * k), sample(spec, d, 2 * k + 1)) * std::pow(1.0 + k, -decay);
        const double value = eval(u, time_nodes);
        sup = std::max(sup, value);
        mean += value / draws;
      }
      curve.rows.push_back({v == SmoothingVariant::sqrtH ? 0.0 : 1.0, eps, sup, mean});
      r.set(name + "_eps_" + num(eps), json{{"sup", sup}, {"mean", mean}});
      std::cout << name << " eps=" << num(eps) << ": sup " << num(sup) << ", mean " << num(mean) << '\n';
    }
  }
  r.note("variant column: 0 = sqrtH, 1 = fractional_grad");
  return single(std::move(r));
}

Outcome cmd_lens_check(Params& p, const Globals&)
{
  const int n = p.get("N", 64);
  json fr;
  const SpectralField u0 = field_from_json(p.object("field"), 1, n, "mixed", fr);
  p.record("field", fr);
  const auto times = p.get("times", std::vector<double>{0.25, 0.5, 1.0});
  const int nodes = p.get("time_nodes", 129);
  SolverConfig cfg;
  cfg.dim = u0.basis().dim();
  cfg.N = u0.basis().max_degree();
  cfg.time_nodes = nodes;
  cfg.nonlinear = false;
  const Trajectory traj = picard_solve(u0, cfg);

  Report r("lens_check");
  Curve& curve = r.curve("conjugation", {"t", "l2_gap", "isometry_defect"});
  for (double t : times) {
    const PhysicalFrame lens = global_nls_solution(traj, t);
    const double gap = l2_distance(lens, free_propagate(u0, t, lens.grid));
    const double iso = std::abs(lens_forward(propagate_linear(u0, lens_time_map(t)), t).l2_norm() - u0.l2_norm());
    curve.rows.push_back({t, gap, iso});
    r.check("conjugation_t_" + num(t), gap <= 1e-6, "L2 gap " + num(gap));
    r.check("isometry_t_" + num(t), iso <= 1e-10, num(iso));
  }
  print_checks(r);
  return single(std::move(r));
}

Report trajectory_report(const Trajectory& t)
{
  Report r("nlsh_trajectory");
  r.metadata()["solver"] = to_json(t.config);
  const double res = residual(t);
  const double drift = mass_drift(t);
  r.set("iterations", t.iterations);
  r.set("converged", t.converged);
  r.set("contraction_factor", t.contraction_factor);
  r.set("geometric_fit_r2", std::isnan(t.geometric_fit_r2) ? json(nullptr) : json(t.geometric_fit_r2));
  r.set("residual", res);
  r.set("mass_drift", drift);
  r.set("reporting_s", t.config.reporting_s());
  Curve& hist = r.curve("contraction", {"iteration", "update_norm"});
  for (std::size_t i = 0; i < t.contraction_history.size(); ++i)
    hist.rows.push_back({double(i + 1), t.contraction_history[i]});
  Curve& mass = r.curve("mass", {"s", "mass"});
  const auto m = mass_curve(t);
  for (std::size_t k = 0; k < t.size(); ++k)
    mass.rows.push_back({t.times[k], m[k]});
  r.check("converged", t.converged, std::to_string(t.iterations) + " iterations");
  std::cout << "iterations " << t.iterations << ", contraction " << num(t.contraction_factor) << ", residual "
            << num(res) << ", mass drift " << num(drift) << '\n';
  return r;
}

Trajectory solve_from(Params& p, const Globals& g, Outcome& o)
{
  const SolverConfig cfg = solver_param(p);
  json fr;
  json fj = p.object("field");
  if (!fj.contains("amplitude") && fj.value("profile", std::string("ground")) == "ground")
    fj["amplitude"] = 0.1;
  const SpectralField u0 = field_from_json(fj, cfg.dim, cfg.N, "ground", fr);
  p.record("field", fr);
  std::optional<Trajectory> previous;
  if (!g.resume.empty())
    previous = load_trajectory(g.resume);
  Trajectory t = picard_solve(u0, cfg, {}, previous ? &*previous : nullptr);
  fs::create_directories(g.out);
  const fs::path ckpt = g.out / "trajectory.bin";
  save_trajectory(ckpt, t);
  o.extra_files.push_back(ckpt);
  return t;
}

Outcome cmd_solve_nlsh(Params& p, const Globals& g)
{
  const double pi = std::numbers::pi;
  const auto windows = p.get("T_sweep", std::vector<double>{pi / 16, pi / 8, pi / 4});
  Outcome o;
  const Trajectory t = solve_from(p, g, o);
  Report r = trajectory_report(t);
  o.exit = r.passed() ? Exit::ok : Exit::checks_failed;
  o.reports.push_back(std::move(r));
  if (!windows.empty()) {
    Report sweep = contraction_sweep(t.u0, t.config, windows);
    const json& k = sweep.stats()["kappa_hat"];
    std::cout << "kappa_hat " << (k.is_null() ? std::string("n/a") : num(k.get<double>())) << '\n';
    o.reports.push_back(std::move(sweep));
  }
  return o;
}

Outcome cmd_solve_nls(Params& p, const Globals& g)
{
  const auto times = p.get("times", std::vector<double>{0.0, 0.5, 1.0, 2.0, 5.0, 10.0});
  Outcome o;
  const Trajectory t = solve_from(p, g, o);
  Report r = trajectory_report(t);
  r.metadata()["kind_detail"] = "lens image on the real line";
  Curve& curve = r.curve("nls_norms", {"t", "l2_norm", "sup_norm"});
  for (double tt : times) {
    const PhysicalFrame f = global_nls_solution(t, tt);
    curve.rows.push_back({tt, f.l2_norm(), f.sup_norm()});
    const fs::path path = g.out / ("nls_frame_t" + num(tt) + ".csv");
    std::ofstream os(path);
    f.write_csv(os);
    o.extra_files.push_back(path);
    std::cout << "t = " << num(tt) << ": L2 " << num(f.l2_norm()) << ", sup " << num(f.sup_norm()) << '\n';
  }
  o.exit = r.passed() ? Exit::ok : Exit::checks_failed;
  o.reports.push_back(std::move(r));
  return o;
}

Outcome cmd_scattering(Params& p, const Globals& g)
{
  const auto times = p.get("times", std::vector<double>{1.0, 5.0, 20.0});
  const auto amplitudes = p.get("amplitudes", std::vector<double>{0.05, 0.1});
  Outcome o;
  const Trajectory t = solve_from(p, g, o);
  const ScatteringPair sp = scattering_extract(t, times);
  Report r("scattering");
  r.set("sobolev_order", sp.s);
  r.set("L_plus_norm", harmonic_sobolev_norm(sp.L_plus, sp.s));
  r.set("L_minus_norm", harmonic_sobolev_norm(sp.L_minus, sp.s));
  Curve& curve = r.curve("residual", {"t", "residual_Hs"});
  bool decreasing = true;
  for (std::size_t i = 0; i < sp.residual_curve.size(); ++i) {
    curve.rows.push_back({sp.residual_curve[i].first, sp.residual_curve[i].second});
    if (i > 0)
      decreasing = decreasing && sp.residual_curve[i].second < sp.residual_curve[i - 1].second;
  }
  r.check("residual_decreasing", decreasing);
  if (amplitudes.size() >= 2) {
    std::vector<double> x, y;
    for (double a : amplitudes) {
      const ScatteringPair s = scattering_extract(picard_solve(a * (t.u0 * (1.0 / t.u0.l2_norm())), t.config), times);
      x.push_back(std::log(a));
      y.push_back(std::log(harmonic_sobolev_norm(s.L_plus, s.s)));
    }
    const double slope = stats::linear_fit(x, y).slope;
    r.set("amplitude_slope", slope);
    r.check("amplitude_slope", std::abs(slope - t.config.nonlinearity_p) <= 0.3,
            num(slope) + " vs p = " + std::to_string(t.config.nonlinearity_p));
  }
  print_checks(r);
  o.reports.push_back(trajectory_report(t));
  o.reports.push_back(std::move(r));
  for (const Report& rep : o.reports)
    if (!rep.passed())
      o.exit = Exit::checks_failed;
  return o;
}

Outcome cmd_khinchin(Params& p, const Globals& g)
{
  const EnsembleSpec spec = ensemble_param(p, g, "gaussian");
  const auto c = coeff_param(p, 32);
  const auto q = p.get("q_grid", g.tier == Tier::smoke ? std::vector<int>{2, 4, 6, 8} : default_khinchin_q_grid());
  const long n = p.get("n_samples", scaled(g, 1000000));
  Report r = khinchin_growth(spec, c, q, n, g.workers);
  print_checks(r);
  return single(std::move(r));
}

Outcome cmd_b2p(Params& p, const Globals&)
{
  const int pv = p.get("p", 5);
  Report r = enumerate_b2p(pv);
  const json& row = r.stats()["table"].back();
  std::cout << "B_" << 2 * pv << " = " << row["closed_form"].get<std::string>();
  if (row.contains("brute_force"))
    std::cout << " (brute force " << row["brute_force"].get<long long>() << ", agrees: "
              << (std::to_string(row["brute_force"].get<long long>()) == row["closed_form"] ? "yes" : "no") << ")";
  else
    std::cout << " (closed form only)";
  std::cout << "; fitted C " << num(r.stats()["fitted_C"].get<double>()) << '\n';
  return single(std::move(r));
}

Outcome cmd_tails(Params& p, const Globals& g)
{
  json fr;
  json fj = p.object("base");
  const SpectralField base = field_from_json(fj, 1, 31, "flat", fr, "base");
  p.record("base", fr);
  const EnsembleSpec spec = ensemble_param(p, g, "gaussian");
  const auto t = p.get("t_grid", range(0.5, 2.5, 0.02));
  const long n = p.get("n_samples", scaled(g, 200000));
  Report r = norm_tail(base, spec, t, n, g.workers);
  print_checks(r);
  return single(std::move(r));
}

TailExperiment tail_experiment(Params& p, const Globals& g)
{
  TailExperiment e;
  json fr;
  json fj = p.object("base");
  if (fj.empty())
    fj = json{{"N", 4}, {"profile", "power"}, {"decay", 1.0}};
  e.base = field_from_json(fj, 1, 4, "power", fr, "base");
  p.record("base", fr);
  e.ensemble = ensemble_param(p, g, "gaussian");
  e.thresholds = p.get("thresholds", std::vector<double>{0.75, 1.5, 3.0, 6.0});
  e.n_samples = p.get("n_samples", scaled(g, 10000));
  e.time_nodes = p.get("time_nodes", 257);
  e.audit_density = p.get("audit_density", 16.0);
  e.validate();
  return e;
}

Outcome cmd_omega(Params& p, const Globals& g)
{
  const TailExperiment e = tail_experiment(p, g);
  const int p_nl = p.get("p_nl", 5);
  const double lambda = p.get("small_data_lambda", 1.5);
  const auto etas = p.get("small_data_etas", std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0});
  Outcome o = single(omega_t_probability(e, p_nl, g.workers));
  print_checks(o.reports.front());
  o.reports.push_back(small_data_conditional(e, p_nl, lambda, etas, g.workers));
  return o;
}

Outcome cmd_paley_zygmund(Params& p, const Globals& g)
{
  json fr;
  json fj = p.object("base");
  if (fj.empty())
    fj = json{{"N", 256}, {"profile", "power"}, {"decay", 0.75}};
  const SpectralField base = field_from_json(fj, 1, 256, "power", fr, "base");
  p.record("base", fr);
  const EnsembleSpec spec = ensemble_param(p, g, "gaussian");
  CutoffSpec cut;
  cut.N = p.get("cutoff_N", 8.0);
  cut.s = p.get("s", 0.5);
  const long n = p.get("n_samples", scaled(g, 20000));
  Report r = paley_zygmund_check(base, spec, cut, n, g.workers);
  print_checks(r);
  return single(std::move(r));
}

Outcome cmd_eigen_lp(Params& p, const Globals&)
{
  const std::string pe = p.get<std::string>("p", "inf");
  const int n_max = p.get("n_max", 400);
  const int dim = p.get("dim", 1);
  double exponent = kInfinity;
  if (pe != "inf") {
    try {
      exponent = std::stod(pe);
    } catch (const std::exception&) {
      throw InvalidArgument("p", "expected a number or \"inf\"");
    }
  }
  Report r = eigenfunction_lp_decay(exponent, n_max, dim);
  print_checks(r);
  return single(std::move(r));
}

Outcome cmd_chernoff(Params& p, const Globals& g)
{
  const EnsembleSpec spec = ensemble_param(p, g, "symmetric_weibull", 1.5);
  const auto c = coeff_param(p, 16);
  const auto rho = p.get("rho_grid", range(0.5, 6.0, 0.25));
  const long n = p.get("n_samples", scaled(g, 1000000));
  Report r = chernoff_tail(spec, c, rho, n, g.workers);
  print_checks(r);
  return single(std::move(r));
}

Outcome cmd_acceptance(Params& p, const Globals& g)
{
  AcceptanceOptions opts;
  opts.tier = g.tier;
  opts.seed = g.seed;
  opts.workers = g.workers;
  opts.only = p.get("only", std::vector<int>{});
  Outcome o;
  Report summary("acceptance");
  summary.metadata()["tier"] = to_string(g.tier);
  Curve& curve = summary.curve("criteria", {"criterion", "pass"});
  int failed = 0;
  run_acceptance(opts, [&](const CriterionOutcome& c) {
    std::cout << format_outcome(c) << std::endl;
    c.report.write(g.out, "criterion_" + std::to_string(c.id));
    summary.check("criterion_" + std::to_string(c.id), c.pass, c.title + ": " + c.summary);
    curve.rows.push_back({double(c.id), c.pass ? 1.0 : 0.0});
    failed += c.pass ? 0 : 1;
  });
  std::cout << (curve.rows.size() - failed) << "/" << curve.rows.size() << " criteria passed\n";
  o.exit = failed ? Exit::checks_failed : Exit::ok;
  o.reports.push_back(std::move(summary));
  return o;
}

using Command = Outcome (*)(Params&, const Globals&);

const std::vector<std::pair<std::string, std::pair<Command, const char*>>> kCommands = {
    {"basis-check", {cmd_basis_check, "Gram deviation of the Hermite basis on its quadrature"}},
    {"norms", {cmd_norms, "spatial and space-time norms of a field"}},
    {"smoothing", {cmd_smoothing, "normalized smoothing functional over random draws"}},
    {"lens-check", {cmd_lens_check, "lens image of the linear oscillator flow against the free flow"}},
    {"solve-nlsh", {cmd_solve_nlsh, "Picard solve of the oscillator equation on [-T, T]"}},
    {"solve-nls", {cmd_solve_nls, "solve and transport to the free equation at given times"}},
    {"scattering", {cmd_scattering, "scattering states and the residual curve"}},
    {"khinchin", {cmd_khinchin, "L^q growth of random sums"}},
    {"b2p", {cmd_b2p, "count permutations with 2- and 3-cycles only"}},
    {"tails", {cmd_tails, "survival of the random field norm"}},
    {"omega", {cmd_omega, "probability of the good-data event"}},
    {"paley-zygmund", {cmd_paley_zygmund, "second-moment lower bound for the cut-off norm"}},
    {"eigen-lp", {cmd_eigen_lp, "L^p norms of Hermite functions"}},
    {"chernoff", {cmd_chernoff, "MGF, tail and L^q shape for gamma in (1, 2]"}},
    {"acceptance", {cmd_acceptance, "full acceptance suite"}},
};

std::string utc_now()
{
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json parse_override(const std::string& text)
{
  try {
    return json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return text;
  }
}

// "a.b=1" sets config["a"]["b"] = 1.
void apply_override(json& config, const std::string& item)
{
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidArgument("set", "expected key=value, got '" + item + "'");
  json* node = &config;
  std::string key = item.substr(0, eq);
  for (std::size_t dot; (dot = key.find('.')) != std::string::npos; key = key.substr(dot + 1)) {
    json& child = (*node)[key.substr(0, dot)];
    if (child.is_null())
      child = json::object();
    if (!child.is_object())
      throw InvalidArgument(item.substr(0, eq), "cannot set a member of a non-object");
    node = &child;
  }
  (*node)[key] = parse_override(item.substr(eq + 1));
}

Report error_report(const std::string& command, const std::exception& e)
{
  Report r("error");
  r.set("command", command);
  r.set("message", e.what());
  if (const auto* sf = dynamic_cast<const SolverFailure*>(&e)) {
    r.set("error_type", sf->kind() == SolverFailure::Kind::divergence ? "divergence" : "max_iterations");
    r.set("time_node", sf->time_node());
    r.set("contraction_history", sf->contraction_history());
  } else if (dynamic_cast<const UnstableEstimate*>(&e)) {
    r.set("error_type", "unstable_estimate");
  } else if (dynamic_cast<const AliasingGuard*>(&e)) {
    r.set("error_type", "aliasing_guard");
  } else {
    r.set("error_type", "numerical");
  }
  r.check("completed", false, e.what());
  return r;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Harmonic-oscillator Schrodinger lab"};
  app.require_subcommand(1);
  std::string config_path, tier = "reference", out = "out", resume;
  std::vector<std::string> sets;
  std::uint64_t seed = 1;
  int workers = 1;
  int b2p_p = 0;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--tier", tier, "smoke, reference or extended")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "base seed for all random streams")->capture_default_str();
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--workers", workers, "worker threads (results do not depend on it)")->capture_default_str();
  app.add_option("--resume", resume, "trajectory checkpoint to resume from (solve commands)");
  app.add_option("--set", sets, "config override key=value, dotted keys for nested objects");
  app.fallthrough();

  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : kCommands)
    subs[name] = app.add_subcommand(name, entry.second);
  subs["b2p"]->add_option("--p", b2p_p, "p (counts permutations of 2p symbols)");

  CLI11_PARSE(app, argc, argv);

  std::string command;
  Command run = nullptr;
  for (const auto& [name, entry] : kCommands)
    if (subs[name]->parsed()) {
      command = name;
      run = entry.first;
    }

  Globals g;
  g.seed = seed;
  g.seed_given = seed_opt->count() > 0;
  g.workers = std::max(workers, 1);
  g.out = out;
  g.resume = resume;

  json manifest{{"schema", "manifest_v1"}, {"command", command}, {"code_version", kCodeVersion},
                {"started_utc", utc_now()}};
  const auto started = std::chrono::steady_clock::now();
  int status = Exit::ok;
  std::vector<fs::path> written;
  try {
    g.tier = tier_from_string(tier);
    json config = json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      try {
        config = json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("config", std::string("not valid JSON: ") + e.what());
      }
    }
    for (const std::string& s : sets)
      apply_override(config, s);
    if (command == "b2p" && b2p_p > 0)
      config["p"] = b2p_p;
    if (!resume.empty() && command != "solve-nlsh" && command != "solve-nls" && command != "scattering")
      throw InvalidArgument("resume", "only the solve commands can resume");

    Params params(config);
    manifest["tier"] = to_string(g.tier);
    manifest["seed"] = g.seed;
    manifest["workers"] = g.workers;
    if (!resume.empty())
      manifest["resume"] = resume;
    try {
      Outcome o = run(params, g);
      params.finish(command);
      status = o.exit;
      for (std::size_t i = 0; i < o.reports.size(); ++i) {
        Report& r = o.reports[i];
        r.metadata()["command"] = command;
        for (const auto& path : r.write(g.out, r.kind()))
          written.push_back(path);
      }
      for (const auto& f : o.extra_files)
        written.push_back(f);
    } catch (const InvalidArgument&) {
      throw;
    } catch (const BasisMismatch&) {
      throw;
    } catch (const Error& e) {
      status = Exit::numerical_failure;
      for (const auto& path : error_report(command, e).write(g.out, "error"))
        written.push_back(path);
      std::cerr << "numerical failure: " << e.what() << '\n';
    }
    manifest["config"] = params.resolved();
  } catch (const InvalidArgument& e) {
    status = Exit::bad_config;
    manifest["error"] = {{"field", e.field()}, {"message", e.what()}};
    std::cerr << "invalid configuration: " << e.what() << '\n';
  } catch (const BasisMismatch& e) {
    status = Exit::bad_config;
    manifest["error"] = {{"message", e.what()}};
    std::cerr << "invalid configuration: " << e.what() << '\n';
  } catch (const std::exception& e) {
    status = Exit::numerical_failure;
    manifest["error"] = {{"message", e.what()}};
    std::cerr << "error: " << e.what() << '\n';
  }

  manifest["finished_utc"] = utc_now();
  manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  manifest["exit_status"] = status;
  json files = json::array();
  for (const auto& f : written)
    files.push_back(f.lexically_relative(g.out).generic_string());
  manifest["outputs"] = files;
  try {
    fs::create_directories(g.out);
    std::ofstream(g.out / "manifest.json") << manifest.dump(2) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "cannot write manifest: " << e.what() << '\n';
    return status == Exit::ok ? Exit::numerical_failure : status;
  }
  return status;
}
