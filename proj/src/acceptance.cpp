#include "hoslab/acceptance.hpp"

#include "hoslab/error.hpp"
#include "hoslab/lens_free.hpp"
#include "hoslab/picard_solver.hpp"
#include "hoslab/proba_lab.hpp"
#include "hoslab/random_ensembles.hpp"
#include "hoslab/spectral_ops.hpp"
#include "hoslab/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <numbers>

namespace hoslab {

std::string to_string(Tier t)
{
  switch (t) {
    case Tier::smoke: return "smoke";
    case Tier::reference: return "reference";
    case Tier::extended: return "extended";
  }
  return "reference";
}

Tier tier_from_string(const std::string& name)
{
  if (name == "smoke")
    return Tier::smoke;
  if (name == "reference")
    return Tier::reference;
  if (name == "extended")
    return Tier::extended;
  throw InvalidArgument("tier", "unknown tier '" + name + "' (smoke, reference, extended)");
}

namespace {

struct Context
{
  Tier tier;
  std::uint64_t seed;
  int workers;

  bool smoke() const { return tier == Tier::smoke; }
  long samples(long reference, long smoke_count) const
  {
    if (tier == Tier::smoke)
      return smoke_count;
    return tier == Tier::extended ? 4 * reference : reference;
  }
  EnsembleSpec ensemble(Family f, std::uint64_t offset, double gamma = 0.0) const
  {
    return EnsembleSpec::make(f, seed * 1000 + offset, gamma);
  }
};

// Appends the names of failed checks to a summary.
std::string with_failures(std::string summary, const Report& r)
{
  std::string failed;
  for (const Check& c : r.checks())
    if (!c.pass)
      failed += (failed.empty() ? "" : ", ") + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
  if (!failed.empty())
    summary += "; failed: " + failed;
  return summary;
}

SpectralField flat_base(int modes)
{
  SpectralField u(cached_basis(1, modes - 1));
  for (int k = 0; k < modes; ++k)
    u.coeffs()[k] = 1.0 / std::sqrt(double(modes));
  return u;
}

SolverConfig reference_solver()
{
  SolverConfig c;
  c.N = 32;
  c.time_nodes = 65;
  return c;
}

Report basis_fidelity(const Context&, std::string& summary)
{
  Report r("basis_fidelity");
  const BasisPtr b = cached_basis(1, 64, 256);
  const double gram = b->gram_deviation();
  r.set("gram_deviation", gram);
  r.check("gram_deviation", gram <= 1e-10, num(gram) + " <= 1e-10");

  // <h, H h> = ||h'||^2 + ||x h||^2 on the quadrature nodes, against 2n + 1.
  const Eigen::VectorXd& w = b->quadrature().weights;
  double worst = 0.0;
  for (int n = 0; n <= 40; ++n) {
    const SpectralField h = SpectralField::unit(b, n);
    const Eigen::VectorXcd dh = synthesize(derivative_coefficients(h));
    const Eigen::VectorXcd xh = synthesize(multiply_by_x(h));
    const Eigen::VectorXcd v = synthesize(h);
    const double energy = (w.array() * (dh.cwiseAbs2() + xh.cwiseAbs2()).array()).sum();
    const double mass = (w.array() * v.cwiseAbs2().array()).sum();
    worst = std::max(worst, std::abs(energy / mass - (2.0 * n + 1.0)));
  }
  r.set("rayleigh_max_error", worst);
  r.check("rayleigh_quotients", worst <= 1e-6, num(worst) + " <= 1e-6 for n <= 40");
  summary = "Gram deviation " + num(gram) + ", max |Rayleigh - (2n+1)| " + num(worst);
  return r;
}

Report fractional_gradient(const Context&, std::string& summary)
{
  Report r("fractional_gradient");
  const BasisPtr b = cached_basis(1, 100);
  double lo = kInfinity, hi = 0.0, s1_error = 0.0;
  Curve& curve = r.curve("ratios", {"n", "s_0.5", "s_1", "s_1.5"});
  for (int n = 0; n <= 100; ++n) {
    const SpectralField h = SpectralField::unit(b, n);
    std::vector<double> row{double(n)};
    for (double s : {0.5, 1.0, 1.5}) {
      const double ratio = fractional_laplacian_L2_norm(h, s) / std::pow(2.0 * n + 1.0, 0.5 * s);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      if (s == 1.0)
        s1_error = std::max(s1_error, std::abs(ratio - 1.0 / std::sqrt(2.0)));
      row.push_back(ratio);
    }
    curve.rows.push_back(row);
  }
  r.set("ratio_min", lo);
  r.set("ratio_max", hi);
  r.set("s1_max_error", s1_error);
  r.check("ratio_bracket", lo >= 0.5 && hi <= 1.5, "[" + num(lo) + ", " + num(hi) + "] within [0.5, 1.5]");
  r.check("s1_exact", s1_error <= 1e-6, "max |ratio - 2^{-1/2}| = " + num(s1_error));
  summary = "ratio range [" + num(lo) + ", " + num(hi) + "], s = 1 error " + num(s1_error);
  return r;
}

Report eigenfunction_sup(const Context& ctx, std::string& summary)
{
  Report r("eigenfunction_sup");
  const int n_max = ctx.smoke() ? 120 : 400;
  const Report lp = eigenfunction_lp_decay(kInfinity, n_max);
  r.absorb("sup_norm", lp);
  summary = "n in [10, " + std::to_string(n_max) + "]: max ratio " + num(lp.stats()["ratio_max"].get<double>()) +
            ", ratio at 10 " + num(lp.stats()["ratio_at_10"].get<double>()) + ", Spearman " +
            num(lp.stats()["spearman"].get<double>());
  return r;
}

Report smoothing_stability(const Context& ctx, std::string& summary)
{
  Report r("smoothing_stability");
  const int coarse_n = ctx.smoke() ? 32 : 128;
  const int fine_n = 2 * coarse_n;
  const long draws = ctx.samples(100, 10);
  const BasisPtr coarse = cached_basis(1, coarse_n);
  const BasisPtr fine = cached_basis(1, fine_n);
  r.set("N_coarse", coarse_n);
  r.set("N_fine", fine_n);
  r.set("draws", draws);

  // Draw d is the same random sequence at both truncations, with 1/(1+n)
  // decay, so refinement only adds a small tail.
  const EnsembleSpec g = ctx.ensemble(Family::gaussian, 40);
  std::vector<SpectralField> fine_draws, coarse_draws;
  for (long d = 0; d < draws; ++d) {
    SpectralField u(fine);
    for (int k = 0; k <= fine_n; ++k)
      u.coeffs()[k] = Complex(sample(g, d, 2 * k), sample(g, d, 2 * k + 1)) / (1.0 + k);
    SpectralField c(coarse, u.coeffs().head(coarse_n + 1));
    u *= 1.0 / u.l2_norm();
    c *= 1.0 / c.l2_norm();
    fine_draws.push_back(std::move(u));
    coarse_draws.push_back(std::move(c));
  }

  Curve& curve = r.curve("sup_ratio", {"variant", "eps", "sup_coarse", "sup_fine", "relative_change"});
  double worst = 0.0;
  for (SmoothingVariant v : {SmoothingVariant::sqrtH, SmoothingVariant::fractional_grad}) {
    for (double eps : {0.05, 0.25, 0.45}) {
      const SmoothingEvaluator eval_coarse(coarse, eps, v);
      const SmoothingEvaluator eval_fine(fine, eps, v);
      double sup_coarse = 0.0, sup_fine = 0.0;
      for (long d = 0; d < draws; ++d) {
        sup_coarse = std::max(sup_coarse, eval_coarse(coarse_draws[d]));
        sup_fine = std::max(sup_fine, eval_fine(fine_draws[d]));
      }
      const double change = std::abs(sup_fine - sup_coarse) / sup_fine;
      worst = std::max(worst, change);
      curve.rows.push_back({double(v == SmoothingVariant::sqrtH ? 0 : 1), eps, sup_coarse, sup_fine, change});
      r.check(to_string(v) + "_eps_" + num(eps), change < 0.05,
              "sup " + num(sup_coarse) + " -> " + num(sup_fine) + " (" + num(100.0 * change) + "%)");
    }
  }
  r.set("max_relative_change", worst);
  r.note("variant column: 0 = sqrtH, 1 = fractional_grad");
  summary = std::to_string(draws) + " draws, N " + std::to_string(coarse_n) + " -> " + std::to_string(fine_n) +
            ": max sup change " + num(100.0 * worst) + "%";
  return r;
}

Report lens_conjugation(const Context&, std::string& summary)
{
  Report r("lens_conjugation");
  const BasisPtr b = cached_basis(1, 64);
  SpectralField u0(b);
  for (int k = 0; k <= 8; ++k)
    u0.coeffs()[k] = std::polar(1.0 / (1.0 + k), 0.7 * k);
  u0 *= 1.0 / u0.l2_norm();

  SolverConfig cfg;
  cfg.N = 64;
  cfg.time_nodes = 129;
  cfg.nonlinear = false;
  const Trajectory traj = picard_solve(u0, cfg);

  double worst_gap = 0.0;
  for (double t : {0.25, 0.5, 1.0}) {
    const PhysicalFrame lens = global_nls_solution(traj, t);
    const double gap = l2_distance(lens, free_propagate(u0, t, lens.grid));
    worst_gap = std::max(worst_gap, gap);
    r.check("conjugation_t_" + num(t), gap <= 1e-6, "L2 gap " + num(gap));
  }
  double worst_iso = 0.0;
  for (double t : {0.0, 0.25, 0.5, 1.0, 10.0}) {
    const PhysicalFrame g = lens_forward(propagate_linear(u0, lens_time_map(t)), t);
    worst_iso = std::max(worst_iso, std::abs(g.l2_norm() - u0.l2_norm()));
  }
  r.set("max_conjugation_gap", worst_gap);
  r.set("max_isometry_defect", worst_iso);
  r.check("isometry", worst_iso <= 1e-10, num(worst_iso) + " <= 1e-10");
  summary = "max L2 gap to the free flow " + num(worst_gap) + ", isometry defect " + num(worst_iso);
  return r;
}

Report picard_reference(const Context&, std::string& summary)
{
  Report r("picard_reference");
  const SpectralField u0 = 0.1 * SpectralField::unit(cached_basis(1, 32), 0);
  for (int K : {1, -1}) {
    SolverConfig cfg = reference_solver();
    cfg.K = K;
    const Trajectory t = picard_solve(u0, cfg);
    const double res = residual(t);
    const double drift = mass_drift(t);
    const std::string tag = K > 0 ? "K+1" : "K-1";
    r.set(tag, json{{"iterations", t.iterations},
                    {"contraction_factor", t.contraction_factor},
                    {"residual", res},
                    {"mass_drift", drift},
                    {"history", t.contraction_history}});
    r.check(tag + ".converged", t.converged && t.iterations <= 20, std::to_string(t.iterations) + " iterations");
    r.check(tag + ".contraction", t.contraction_factor < 0.5, num(t.contraction_factor));
    r.check(tag + ".residual", res <= 1e-6, num(res));
    r.check(tag + ".mass_drift", drift <= 1e-8, num(drift));
    if (K > 0)
      summary = "K=+1: " + std::to_string(t.iterations) + " iterations, rho " + num(t.contraction_factor) +
                ", residual " + num(res) + ", drift " + num(drift);
  }

  std::vector<double> logm, logr;
  Curve& curve = r.curve("residual_order", {"time_nodes", "residual"});
  for (int m : {65, 129, 257}) {
    SolverConfig cfg = reference_solver();
    cfg.time_nodes = m;
    const double res = residual(picard_solve(u0, cfg));
    curve.rows.push_back({double(m), res});
    logm.push_back(std::log(double(m - 1)));
    logr.push_back(std::log(res));
  }
  const double order = -stats::linear_fit(logm, logr).slope;
  r.set("residual_order", order);
  r.check("residual_order", order >= 3.5, num(order) + " >= 3.5");
  summary += ", order " + num(order);
  return r;
}

Report uniqueness(const Context&, std::string& summary)
{
  Report r("uniqueness");
  const SolverConfig cfg = reference_solver();
  const SpectralField u0 = 0.1 * SpectralField::unit(cached_basis(1, 32), 0);
  const Report probe = uniqueness_probe(u0, cfg, 0.01 * SpectralField::unit(u0.basis_ptr(), 1));
  r.absorb("probe", probe);
  const bool agree = probe.stats()["outcome"] == "agree";
  r.check("both_starts_converge", agree, probe.stats()["outcome"].get<std::string>());
  summary = agree ? "max gap " + num(probe.stats()["max_gap_l2"].get<double>()) + " (limit " + num(10.0 * cfg.tol) + ")"
                  : "perturbed start did not converge";
  return r;
}

Report scattering(const Context&, std::string& summary)
{
  Report r("scattering");
  const SolverConfig cfg = reference_solver();
  const BasisPtr b = cached_basis(1, 32);
  const ScatteringPair sp = scattering_extract(picard_solve(0.1 * SpectralField::unit(b, 0), cfg));
  Curve& curve = r.curve("residual", {"t", "residual_Hs"});
  bool decreasing = true;
  for (std::size_t i = 0; i < sp.residual_curve.size(); ++i) {
    curve.rows.push_back({sp.residual_curve[i].first, sp.residual_curve[i].second});
    if (i > 0)
      decreasing = decreasing && sp.residual_curve[i].second < sp.residual_curve[i - 1].second;
  }
  const double last = sp.residual_curve.back().second;
  r.set("sobolev_order", sp.s);
  r.check("residual_decreasing", decreasing);
  r.check("final_residual", last <= 1e-3, num(last) + " <= 1e-3");

  std::vector<double> loglam, lognorm;
  for (double lam : {0.05, 0.1}) {
    const ScatteringPair s = scattering_extract(picard_solve(lam * SpectralField::unit(b, 0), cfg));
    loglam.push_back(std::log(lam));
    lognorm.push_back(std::log(harmonic_sobolev_norm(s.L_plus, s.s)));
  }
  const double slope = (lognorm[1] - lognorm[0]) / (loglam[1] - loglam[0]);
  r.set("amplitude_slope", slope);
  r.check("amplitude_slope", std::abs(slope - cfg.nonlinearity_p) <= 0.3, num(slope) + " vs p = 5");
  summary = "residual " + num(sp.residual_curve.front().second) + " -> " + num(last) + ", slope " + num(slope);
  return r;
}

Report b2p_counts(const Context&, std::string& summary)
{
  Report r("b2p_counts");
  const Report table = enumerate_b2p(5);
  r.absorb("enumeration", table);
  const std::vector<std::string> expected{"1", "3", "55", "1225"};
  bool match = true;
  std::string listed;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const json& row = table.stats()["table"][i];
    match = match && row["closed_form"] == expected[i] && row.contains("brute_force") &&
            std::to_string(row["brute_force"].get<long long>()) == expected[i];
    listed += (i ? ", " : "") + row["closed_form"].get<std::string>();
  }
  r.check("known_values", match, listed);
  summary = "2p = 2..8: " + listed + "; fitted C " + num(table.stats()["fitted_C"].get<double>());
  return r;
}

// An unstable top moment widens the sample four-fold, at most twice.
Report widened_khinchin(const EnsembleSpec& spec, const std::vector<double>& c, const std::vector<int>& q, long n,
                        int workers)
{
  for (int attempt = 0;; ++attempt) {
    try {
      Report r = khinchin_growth(spec, c, q, n, workers);
      r.set("widenings", attempt);
      return r;
    } catch (const UnstableEstimate&) {
      if (attempt == 2)
        throw;
      n *= 4;
    }
  }
}

Report khinchin_exponents(const Context& ctx, std::string& summary)
{
  Report r("khinchin_exponents");
  const long n = ctx.samples(1000000, 50000);
  const std::vector<double> spread(32, 1.0 / std::sqrt(32.0));
  const std::vector<int> q = ctx.smoke() ? std::vector<int>{2, 4, 6, 8} : default_khinchin_q_grid();
  r.set("n_samples", n);

  const Report g = widened_khinchin(ctx.ensemble(Family::gaussian, 100), spread, q, n, ctx.workers);
  r.absorb("gaussian", g);
  const double bg = g.stats()["beta_hat"].get<double>();
  r.check("gaussian_exponent", std::abs(bg - 0.5) <= 0.1, num(bg) + " = 0.5 +- 0.1");

  const Report rad = widened_khinchin(ctx.ensemble(Family::rademacher, 101), {1.0}, q, n, ctx.workers);
  r.absorb("rademacher", rad);
  const double br = rad.stats()["beta_hat"].get<double>();
  r.check("rademacher_exponent", std::abs(br) <= 1e-9, num(br));

  summary = "gaussian " + num(bg) + ", rademacher " + num(br);
  for (double gamma : {1.0, 1.5}) {
    const Report w = widened_khinchin(ctx.ensemble(Family::symmetric_weibull, 102, gamma), spread, q, n, ctx.workers);
    const std::string tag = "weibull_" + num(gamma);
    r.absorb(tag, w);
    summary += ", " + tag + " " + num(w.stats()["beta_hat"].get<double>()) + " <= " +
               num(w.stats()["exponent_bound"].get<double>()) + "+0.15 (" +
               w.stats()["hypothesis_branch"].get<std::string>() + ")";
    if (const int k = w.stats()["widenings"].get<int>(); k > 0)
      summary += " [n x" + std::to_string(1 << (2 * k)) + "]";
  }
  return r;
}

Report tail_bounds(const Context& ctx, std::string& summary)
{
  Report r("tail_bounds");
  std::vector<double> t;
  for (double x = 0.5; x <= 2.5 + 1e-9; x += 0.02)
    t.push_back(x);
  const Report nt = norm_tail(flat_base(32), ctx.ensemble(Family::gaussian, 110), t, ctx.samples(200000, 20000),
                              ctx.workers);
  r.absorb("norm_tail", nt);
  summary = "norm tail R^2 " + num(nt.stats()["r_squared"].get<double>());

  std::vector<double> rho;
  for (double x = 0.5; x <= 6.0 + 1e-9; x += 0.25)
    rho.push_back(x);
  const std::vector<double> c(16, 0.25);
  for (double gamma : {1.5, 2.0}) {
    const Report ch = chernoff_tail(ctx.ensemble(Family::symmetric_weibull, 111, gamma), c, rho,
                                    ctx.samples(1000000, 100000), ctx.workers);
    const std::string tag = "chernoff_gamma_" + num(gamma);
    r.absorb(tag, ch);
    summary += ", gamma " + num(gamma) + ": MGF c " + num(ch.stats()["mgf_c_hat"].get<double>()) + ", tail R^2 " +
               num(ch.stats()["tail_fit_r2"].get<double>()) + ", L^q slope " +
               num(ch.stats()["lq_slope"].get<double>());
  }
  return r;
}

Report omega_positivity(const Context& ctx, std::string& summary)
{
  Report r("omega_positivity");
  TailExperiment e;
  e.base = SpectralField(cached_basis(1, 4));
  for (int k = 0; k < 5; ++k)
    e.base.coeffs()[k] = 1.0 / (1 + k);
  e.ensemble = ctx.ensemble(Family::gaussian, 120);
  e.thresholds = {0.75, 1.5, 3.0, 6.0};
  e.n_samples = ctx.samples(10000, 1000);
  const Report om = omega_t_probability(e, 5, ctx.workers);
  r.absorb("omega", om);
  const auto& rows = om.curves().front().rows;
  summary = "P(Omega_t) at t = " + num(rows.front()[0]) + ": " + num(rows.front()[1]) + " ... t = " +
            num(rows.back()[0]) + ": " + num(rows.back()[1]) + " (" + std::to_string(e.n_samples) + " draws)";
  return r;
}

Report paley_zygmund(const Context& ctx, std::string& summary)
{
  Report r("paley_zygmund");
  const Report single = paley_zygmund_check(SpectralField::unit(cached_basis(1, 4), 0),
                                            ctx.ensemble(Family::rademacher, 130), {4.0, 0.0}, ctx.samples(2000, 2000),
                                            ctx.workers);
  r.absorb("rademacher_single_mode", single);

  const Report chi2 = paley_zygmund_check(flat_base(16), ctx.ensemble(Family::gaussian, 131), {100.0, 0.0},
                                          ctx.samples(100000, 10000), ctx.workers);
  r.absorb("gaussian_16_modes", chi2);

  SpectralField base(cached_basis(1, 256));
  for (int k = 0; k <= 256; ++k)
    base.coeffs()[k] = std::pow(1.0 + k, -0.75);
  double prev = 0.0;
  bool increasing = true;
  for (double N : {4.0, 8.0, 16.0}) {
    const Report rn = paley_zygmund_check(base, ctx.ensemble(Family::gaussian, 132), {N, 0.5},
                                          ctx.samples(20000, 2000), ctx.workers);
    r.absorb("sobolev_half_N" + num(N), rn);
    const double sigma = rn.stats()["sigma_N2"].get<double>();
    increasing = increasing && sigma > prev;
    prev = sigma;
  }
  r.check("sigma_N_increasing", increasing);
  summary = "single mode p " + num(single.stats()["p_hat"].get<double>()) + " >= " +
            num(single.stats()["lower_bound"].get<double>()) + ", 16 modes p " +
            num(chi2.stats()["p_hat"].get<double>()) + " >= " + num(chi2.stats()["lower_bound"].get<double>()) +
            ", s = 1/2 sweep sigma_N^2 up to " + num(prev);
  return r;
}

struct Criterion
{
  const char* title;
  Report (*run)(const Context&, std::string&);
};

const Criterion kCriteria[kCriterionCount] = {
    {"basis fidelity", basis_fidelity},
    {"fractional gradient on eigenfunctions", fractional_gradient},
    {"eigenfunction sup-norm decay", eigenfunction_sup},
    {"smoothing functional refinement", smoothing_stability},
    {"lens conjugation", lens_conjugation},
    {"Picard reference run", picard_reference},
    {"uniqueness", uniqueness},
    {"scattering", scattering},
    {"B_2p combinatorics", b2p_counts},
    {"Khinchin exponents", khinchin_exponents},
    {"tail bounds", tail_bounds},
    {"Omega_t positivity and monotonicity", omega_positivity},
    {"Paley-Zygmund", paley_zygmund},
};

}  // namespace

std::vector<CriterionOutcome> run_acceptance(const AcceptanceOptions& opts,
                                             const std::function<void(const CriterionOutcome&)>& progress)
{
  for (int id : opts.only)
    if (id < 1 || id > kCriterionCount)
      throw InvalidArgument("only", "criterion ids lie in [1, " + std::to_string(kCriterionCount) + "]");
  const Context ctx{opts.tier, opts.seed, std::max(opts.workers, 1)};
  std::vector<CriterionOutcome> out;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end())
      continue;
    CriterionOutcome o;
    o.id = id;
    o.title = kCriteria[id - 1].title;
    const auto start = std::chrono::steady_clock::now();
    try {
      std::string summary;
      o.report = kCriteria[id - 1].run(ctx, summary);
      o.pass = o.report.passed();
      o.summary = with_failures(summary, o.report);
    } catch (const std::exception& e) {
      o.report = Report("acceptance_error");
      o.report.check("completed", false, e.what());
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.report.metadata()["criterion"] = id;
    o.report.metadata()["tier"] = to_string(opts.tier);
    o.report.metadata()["seed"] = opts.seed;
    if (progress)
      progress(o);
    out.push_back(std::move(o));
  }
  return out;
}

std::string format_outcome(const CriterionOutcome& o)
{
  char head[64];
  std::snprintf(head, sizeof head, "%s  [%2d] ", o.pass ? "PASS" : "FAIL", o.id);
  char time[32];
  std::snprintf(time, sizeof time, " (%.1f s): ", o.seconds);
  return head + o.title + time + o.summary;
}

}  // namespace hoslab
