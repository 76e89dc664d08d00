#include "hoslab/picard_solver.hpp"

#include "hoslab/error.hpp"
#include "hoslab/spectral_ops.hpp"
#include "hoslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hoslab {

void SolverConfig::validate() const
{
  if (dim < 1 || dim > 3)
    throw InvalidArgument("dim", "supported dimensions are 1, 2, 3");
  if (nonlinearity_p < 5 || nonlinearity_p % 2 == 0)
    throw InvalidArgument("nonlinearity_p", "nonlinearity_p must be odd ≥ 5");
  if (K != 1 && K != -1)
    throw InvalidArgument("K", "must be +1 or -1");
  if (!(T > 0.0) || T > 0.25 * std::numbers::pi * (1.0 + 1e-15))
    throw InvalidArgument("T", "must lie in (0, pi/4]");
  if (N < 0)
    throw InvalidArgument("N", "must be >= 0");
  if (time_nodes < 33 || time_nodes % 2 == 0)
    throw InvalidArgument("time_nodes", "must be odd and >= 33");
  if (!(tol > 0.0))
    throw InvalidArgument("tol", "must be positive");
  if (max_iter < 1)
    throw InvalidArgument("max_iter", "must be >= 1");
  if (!std::isnan(s) && !(s >= 0.0))
    throw InvalidArgument("s", "must be >= 0");
  if (!(blowup_factor > 1.0))
    throw InvalidArgument("blowup_factor", "must exceed 1");
  if (!(audit_density > 0.0))
    throw InvalidArgument("audit_density", "must be positive");
  // d (p - 1) is even because p is odd, so the exponent is an integer.
  if (cosine_exponent() < 0)
    throw InvalidArgument("nonlinearity_p", "cosine weight exponent d(p-1)/2 - 2 must be >= 0");
}

int SolverConfig::cosine_exponent() const
{
  return dim * (nonlinearity_p - 1) / 2 - 2;
}

double SolverConfig::reporting_s() const
{
  if (!std::isnan(s))
    return s;
  const double low = 0.5 * dim - 2.0 / (nonlinearity_p - 1);
  return 0.5 * (low + 0.5 * dim);
}

json to_json(const SolverConfig& c)
{
  return json{{"dim", c.dim},
              {"nonlinearity_p", c.nonlinearity_p},
              {"K", c.K},
              {"T", c.T},
              {"N", c.N},
              {"time_nodes", c.time_nodes},
              {"tol", c.tol},
              {"max_iter", c.max_iter},
              {"s", c.reporting_s()},
              {"nonlinear", c.nonlinear},
              {"blowup_factor", c.blowup_factor},
              {"audit_density", c.audit_density}};
}

SolverConfig solver_config_from_json(const json& j, SolverConfig c)
{
  if (!j.is_object())
    throw InvalidArgument("solver", "expected an object");
  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key))
      return;
    try {
      field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument(key, "has the wrong type");
    }
  };
  read("dim", c.dim);
  read("nonlinearity_p", c.nonlinearity_p);
  read("K", c.K);
  read("T", c.T);
  read("N", c.N);
  read("time_nodes", c.time_nodes);
  read("tol", c.tol);
  read("max_iter", c.max_iter);
  read("s", c.s);
  read("nonlinear", c.nonlinear);
  read("blowup_factor", c.blowup_factor);
  read("audit_density", c.audit_density);
  c.validate();
  return c;
}

SpectralField Trajectory::v(std::size_t k) const
{
  return propagate_linear(duhamel.at(k), times.at(k));
}

SpectralField Trajectory::u(std::size_t k) const
{
  return propagate_linear(u0 + duhamel.at(k), times.at(k));
}

SpectralField Trajectory::duhamel_at(double s) const
{
  const double T = config.T;
  if (std::abs(s) > T * (1.0 + 1e-14))
    throw InvalidArgument("s", "outside the solved window [-T, T]");
  const double h = config.step();
  const double pos = (s + T) / h;
  const long nearest = std::lround(pos);
  if (std::abs(pos - nearest) < 1e-12)
    return duhamel.at(static_cast<std::size_t>(std::clamp<long>(nearest, 0, static_cast<long>(size()) - 1)));
  const long last = static_cast<long>(size()) - 1;
  long first = static_cast<long>(std::floor(pos)) - 2;
  first = std::clamp<long>(first, 0, last - 5);
  SpectralField out = SpectralField::zero(basis());
  for (long i = first; i < first + 6; ++i) {
    double w = 1.0;
    for (long j = first; j < first + 6; ++j)
      if (j != i)
        w *= (pos - j) / double(i - j);
    out.coeffs() += w * duhamel[static_cast<std::size_t>(i)].coeffs();
  }
  return out;
}

SpectralField Trajectory::u_at(double s) const
{
  return propagate_linear(u0 + duhamel_at(s), s);
}

Nonlinearity::Nonlinearity(BasisPtr basis, const SolverConfig& cfg)
    : basis_(std::move(basis))
    , p_(cfg.nonlinearity_p)
    , K_(cfg.K)
    , exponent_(cfg.cosine_exponent())
    , enabled_(cfg.nonlinear)
    , per_axis_(basis_->dealiased_points(cfg.nonlinearity_p + 1))
    , transform_(basis_->transform_for(basis_->rule(per_axis_)))
{
}

SpectralField Nonlinearity::operator()(const SpectralField& u, double s) const
{
  if (!enabled_)
    return SpectralField::zero(basis_);
  Eigen::VectorXcd values = transform_.synthesize(u.coeffs());
  const int half = (p_ - 1) / 2;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double m2 = std::norm(values[j]);
    double f = 1.0;
    for (int k = 0; k < half; ++k)
      f *= m2;
    values[j] *= f;
  }
  double weight = K_;
  for (int k = 0; k < exponent_; ++k)
    weight *= std::cos(2.0 * s);
  return SpectralField(basis_, weight * transform_.analyze(values));
}

namespace {

template <class V>
V combine(std::initializer_list<std::pair<double, const V*>> terms)
{
  auto it = terms.begin();
  V out = it->first * *it->second;
  for (++it; it != terms.end(); ++it)
    out += it->first * *it->second;
  return out;
}

// Integrals from g[0] along g[1], g[2], ... with signed step h.
template <class V>
std::vector<V> cumulative_one_side(const std::vector<const V*>& g, double h)
{
  const std::size_t n = g.size();
  std::vector<V> out;
  out.reserve(n);
  out.push_back(0.0 * *g[0]);
  for (std::size_t k = 1; k < n; ++k) {
    if (k == 1) {
      if (n < 4)
        throw InvalidArgument("time_nodes", "need at least 3 intervals on each side of t = 0");
      out.push_back(combine<V>({{9.0 * h / 24.0, g[0]}, {19.0 * h / 24.0, g[1]}, {-5.0 * h / 24.0, g[2]}, {h / 24.0, g[3]}}));
    } else if (k % 2 == 0) {
      V step = combine<V>({{h / 3.0, g[k - 2]}, {4.0 * h / 3.0, g[k - 1]}, {h / 3.0, g[k]}});
      step += out[k - 2];
      out.push_back(std::move(step));
    } else {
      V step = combine<V>({{3.0 * h / 8.0, g[k - 3]}, {9.0 * h / 8.0, g[k - 2]}, {9.0 * h / 8.0, g[k - 1]}, {3.0 * h / 8.0, g[k]}});
      step += out[k - 3];
      out.push_back(std::move(step));
    }
  }
  return out;
}

}  // namespace

template <class V>
std::vector<V> cumulative_from_center(const std::vector<V>& f, double h)
{
  const std::size_t m = f.size();
  if (m % 2 == 0 || m < 7)
    throw InvalidArgument("time_nodes", "cumulative integration needs an odd grid of at least 7 nodes");
  const std::size_t c = m / 2;
  std::vector<const V*> right, left;
  for (std::size_t k = c; k < m; ++k)
    right.push_back(&f[k]);
  for (std::size_t k = c + 1; k-- > 0;)
    left.push_back(&f[k]);
  const std::vector<V> ir = cumulative_one_side(right, h);
  const std::vector<V> il = cumulative_one_side(left, -h);
  std::vector<V> out(m, ir[0]);
  for (std::size_t k = 0; k < ir.size(); ++k)
    out[c + k] = ir[k];
  for (std::size_t k = 1; k < il.size(); ++k)
    out[c - k] = il[k];
  return out;
}

template std::vector<double> cumulative_from_center(const std::vector<double>&, double);
template std::vector<Eigen::VectorXcd> cumulative_from_center(const std::vector<Eigen::VectorXcd>&, double);

namespace {

std::vector<double> uniform_times(const SolverConfig& cfg)
{
  std::vector<double> t(static_cast<std::size_t>(cfg.time_nodes));
  const double h = cfg.step();
  const long c = cfg.time_nodes / 2;
  for (long k = 0; k < cfg.time_nodes; ++k)
    t[static_cast<std::size_t>(k)] = (k - c) * h;  // exact 0 at the centre
  return t;
}

std::vector<SpectralField> duhamel_apply_with(const Nonlinearity& nl, const std::vector<SpectralField>& duhamel,
                                              const SpectralField& u0, const SolverConfig& cfg,
                                              const std::vector<double>& times)
{
  std::vector<Eigen::VectorXcd> integrand(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const SpectralField u = propagate_linear(u0 + duhamel[k], times[k]);
    integrand[k] = propagate_linear(nl(u, times[k]), -times[k]).coeffs();
  }
  const std::vector<Eigen::VectorXcd> integral = cumulative_from_center(integrand, cfg.step());
  std::vector<SpectralField> out;
  out.reserve(times.size());
  for (const auto& c : integral)
    out.emplace_back(u0.basis_ptr(), Complex(0.0, -1.0) * c);
  return out;
}

double trajectory_norm_with(const std::vector<SpectralField>& duhamel, const std::vector<double>& times,
                            double s, const AuditSampler& sampler)
{
  double sup_in_time = 0.0;
  double l2_time = 0.0;
  const double h = times.size() > 1 ? times[1] - times[0] : 1.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    sup_in_time = std::max(sup_in_time, harmonic_sobolev_norm(duhamel[k], s));
    const double sup = sampler.sup(harmonic_power(propagate_linear(duhamel[k], times[k]), s));
    const double w = (k == 0 || k + 1 == times.size()) ? 0.5 * h : h;
    l2_time += w * sup * sup;
  }
  return std::max(sup_in_time, std::sqrt(l2_time));
}

std::vector<SpectralField> difference(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b)
{
  std::vector<SpectralField> d;
  d.reserve(a.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    d.push_back(a[k] - b[k]);
  return d;
}

void check_field(const SpectralField& u0, const SolverConfig& cfg)
{
  if (!u0.basis_ptr())
    throw InvalidArgument("u0", "null basis");
  if (u0.basis().dim() != cfg.dim || u0.basis().max_degree() != cfg.N)
    throw BasisMismatch("u0 basis (d=" + std::to_string(u0.basis().dim()) + ", N=" +
                        std::to_string(u0.basis().max_degree()) + ") differs from the solver config");
  if (!u0.all_finite())
    throw InvalidArgument("u0", "coefficients must be finite");
}

}  // namespace

std::vector<SpectralField> duhamel_apply(const std::vector<SpectralField>& duhamel, const SpectralField& u0,
                                         const SolverConfig& cfg, const std::vector<double>& times)
{
  cfg.validate();
  check_field(u0, cfg);
  if (duhamel.size() != times.size() || static_cast<int>(times.size()) != cfg.time_nodes)
    throw InvalidArgument("duhamel", "trajectory is not on the configured time grid");
  const Nonlinearity nl(u0.basis_ptr(), cfg);
  std::vector<SpectralField> out = duhamel_apply_with(nl, duhamel, u0, cfg, times);
  for (std::size_t k = 0; k < out.size(); ++k)
    if (!out[k].all_finite())
      throw SolverFailure(SolverFailure::Kind::divergence, "non-finite Duhamel term at time node " + std::to_string(k),
                          static_cast<int>(k), {});
  return out;
}

double trajectory_norm(const std::vector<SpectralField>& duhamel, const std::vector<double>& times,
                       const SolverConfig& cfg)
{
  if (duhamel.empty())
    return 0.0;
  const AuditSampler sampler(duhamel.front().basis_ptr(), cfg.audit_density);
  return trajectory_norm_with(duhamel, times, cfg.reporting_s(), sampler);
}

Trajectory picard_solve(const SpectralField& u0, const SolverConfig& cfg, const std::optional<SpectralField>& v_init,
                        const Trajectory* resume)
{
  cfg.validate();
  check_field(u0, cfg);

  Trajectory traj;
  traj.config = cfg;
  traj.u0 = u0;
  traj.times = uniform_times(cfg);
  if (resume) {
    if (resume->times != traj.times || !resume->u0.basis().same_as(u0.basis()) ||
        (resume->u0.coeffs() - u0.coeffs()).norm() != 0.0)
      throw InvalidArgument("resume", "checkpoint does not match the requested problem");
    traj.duhamel = resume->duhamel;
    traj.iterations = resume->iterations;
    traj.contraction_history = resume->contraction_history;
    if (resume->converged) {
      traj = *resume;
      return traj;
    }
  } else {
    traj.duhamel.reserve(traj.times.size());
    for (double t : traj.times)
      traj.duhamel.push_back(v_init ? propagate_linear(*v_init, -t) : SpectralField::zero(u0.basis_ptr()));
  }

  const Nonlinearity nl(u0.basis_ptr(), cfg);
  const AuditSampler sampler(u0.basis_ptr(), cfg.audit_density);
  const double s = cfg.reporting_s();
  double initial = u0.l2_norm();
  if (v_init)
    initial = std::max(initial, v_init->l2_norm());
  const double ceiling = cfg.blowup_factor * std::max(initial, 1e-300);

  while (traj.iterations < cfg.max_iter) {
    std::vector<SpectralField> next = duhamel_apply_with(nl, traj.duhamel, u0, cfg, traj.times);
    ++traj.iterations;
    for (std::size_t k = 0; k < next.size(); ++k) {
      if (!next[k].all_finite() || (u0 + next[k]).l2_norm() > ceiling)
        throw SolverFailure(SolverFailure::Kind::divergence,
                            "Picard iterate left the blow-up guard at time node " + std::to_string(k) + " (t = " +
                                num(traj.times[k]) + ")",
                            static_cast<int>(k), traj.contraction_history);
    }
    const double update = trajectory_norm_with(difference(next, traj.duhamel), traj.times, s, sampler);
    traj.contraction_history.push_back(update);
    traj.duhamel = std::move(next);
    if (update <= cfg.tol) {
      traj.converged = true;
      break;
    }
  }

  // Ratios are only meaningful above the round-off floor of the iterate.
  const double scale = trajectory_norm_with(traj.duhamel, traj.times, s, sampler) + harmonic_sobolev_norm(u0, s);
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
  std::vector<double> ratios, ks, logs;
  const auto& hist = traj.contraction_history;
  for (std::size_t k = 0; k < hist.size(); ++k)
    if (hist[k] > floor) {
      ks.push_back(static_cast<double>(k));
      logs.push_back(std::log(hist[k]));
      if (k + 1 < hist.size() && hist[k + 1] > floor)
        ratios.push_back(hist[k + 1] / hist[k]);
    }
  if (!ratios.empty()) {
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    traj.contraction_factor = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  if (ks.size() >= 3)
    traj.geometric_fit_r2 = stats::linear_fit(ks, logs).r_squared;

  if (!traj.converged)
    throw SolverFailure(SolverFailure::Kind::max_iterations,
                        "Picard iteration did not reach tol = " + num(cfg.tol) + " within " +
                            std::to_string(cfg.max_iter) + " iterations",
                        -1, traj.contraction_history);
  return traj;
}

double residual(const Trajectory& traj)
{
  if (!traj.converged)
    throw InvalidArgument("trajectory", "residual requires a converged trajectory");
  const Nonlinearity nl(traj.basis(), traj.config);
  const double h = traj.config.step();
  const std::size_t m = traj.size();
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < m; ++k) {
    const Eigen::VectorXcd dt = (-traj.duhamel[k + 2].coeffs() + 8.0 * traj.duhamel[k + 1].coeffs() -
                                 8.0 * traj.duhamel[k - 1].coeffs() + traj.duhamel[k - 2].coeffs()) /
                                (12.0 * h);
    const SpectralField rhs = propagate_linear(nl(traj.u(k), traj.times[k]), -traj.times[k]);
    worst = std::max(worst, (Complex(0.0, 1.0) * dt - rhs.coeffs()).norm());
  }
  return worst;
}

std::vector<double> mass_curve(const Trajectory& traj)
{
  std::vector<double> m;
  m.reserve(traj.size());
  for (const SpectralField& d : traj.duhamel)
    m.push_back((traj.u0 + d).l2_norm());
  return m;
}

double mass_drift(const Trajectory& traj)
{
  const std::vector<double> m = mass_curve(traj);
  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  return *hi - *lo;
}

Report contraction_sweep(const SpectralField& u0, const SolverConfig& cfg, const std::vector<double>& windows)
{
  Report r("contraction_sweep");
  r.metadata()["solver"] = to_json(cfg);
  r.note("kappa_hat is a fitted exponent of the contraction estimate; no reference value is asserted");
  Curve& curve = r.curve("contraction", {"T", "contraction_factor", "iterations"});
  std::vector<double> x, y;
  for (double T : windows) {
    SolverConfig c = cfg;
    c.T = T;
    c.validate();
    const Trajectory t = picard_solve(u0, c);
    curve.rows.push_back({T, t.contraction_factor, double(t.iterations)});
    if (t.contraction_factor > 0.0 && std::isfinite(t.contraction_factor)) {
      x.push_back(std::log(T));
      y.push_back(std::log(t.contraction_factor));
    }
  }
  if (x.size() >= 2) {
    r.set("kappa_hat", stats::linear_fit(x, y).slope);
  } else {
    r.set("kappa_hat", nullptr);
    r.note("fewer than two windows produced a measurable contraction factor");
  }
  return r;
}

Report uniqueness_probe(const SpectralField& u0, const SolverConfig& cfg, const SpectralField& perturbation)
{
  Report r("uniqueness_probe");
  r.metadata()["solver"] = to_json(cfg);
  r.set("perturbation_l2", perturbation.l2_norm());

  const Trajectory a = picard_solve(u0, cfg);
  std::optional<Trajectory> b;
  try {
    b = picard_solve(u0, cfg, perturbation);
  } catch (const SolverFailure& e) {
    r.set("outcome", "diverged");
    r.set("failure", e.what());
    r.set("failure_time_node", e.time_node());
    r.check("no_second_solution", true, "iteration from the perturbed start was rejected: " + std::string(e.what()));
    return r;
  }

  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    gap = std::max(gap, (a.duhamel[k] - b->duhamel[k]).l2_norm());
  r.set("outcome", "agree");
  r.set("max_gap_l2", gap);
  r.set("iterations_a", a.iterations);
  r.set("iterations_b", b->iterations);
  r.check("fixed_points_agree", gap <= 10.0 * cfg.tol,
          "max_t ||v_A - v_B|| = " + num(gap) + " vs 10 tol = " + num(10.0 * cfg.tol));

  // Gronwall observable: growth rate of ||u_A - u_B||^2 against the bound
  // 2(p-1)(sup|u_A|^{p-1} + sup|u_B|^{p-1}).
  const AuditSampler sampler(u0.basis_ptr(), cfg.audit_density);
  double sup_a = 0.0, sup_b = 0.0;
  std::vector<double> gap2;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sup_a = std::max(sup_a, sampler.sup(a.u(k)));
    sup_b = std::max(sup_b, sampler.sup(b->u(k)));
    gap2.push_back(std::pow((a.duhamel[k] - b->duhamel[k]).l2_norm(), 2));
  }
  const double p = cfg.nonlinearity_p;
  const double bound = 2.0 * (p - 1.0) * (std::pow(sup_a, p - 1.0) + std::pow(sup_b, p - 1.0));
  r.set("gronwall_bound", bound);
  const double floor = std::pow(1e3 * std::numeric_limits<double>::epsilon() * std::max(u0.l2_norm(), 1.0), 2);
  const double h = cfg.step();
  double rate = 0.0;
  bool resolved = false;
  for (std::size_t k = 1; k + 1 < gap2.size(); ++k)
    if (gap2[k] > floor) {
      resolved = true;
      rate = std::max(rate, std::abs(gap2[k + 1] - gap2[k - 1]) / (2.0 * h * gap2[k]));
    }
  if (resolved) {
    r.set("gronwall_rate", rate);
    r.check("gronwall_rate_bounded", rate <= bound);
  } else {
    r.set("gronwall_rate", "below round-off");
  }
  return r;
}

ScatteringPair scattering_extract(const Trajectory& traj, const std::vector<double>& external_times)
{
  if (!traj.converged || traj.duhamel.empty())
    throw InvalidArgument("trajectory", "scattering extraction needs a solved trajectory");
  ScatteringPair sp;
  sp.L_plus = traj.duhamel.back();
  sp.L_minus = traj.duhamel.front();
  sp.s = traj.config.reporting_s();
  for (double t : external_times) {
    const double s_int = lens_time_map(t);
    if (std::abs(s_int) > traj.config.T * (1.0 + 1e-14))
      throw InvalidArgument("t", "external time maps beyond the solved window");
    const SpectralField target = t >= 0.0 ? sp.L_plus : sp.L_minus;
    sp.residual_curve.emplace_back(t, classical_sobolev_norm(traj.duhamel_at(s_int) - target, sp.s));
  }
  return sp;
}

PhysicalFrame global_nls_solution(const Trajectory& traj, double t, const std::optional<AuditGrid>& grid)
{
  return lens_forward([&](double s) { return traj.u_at(s); }, traj.config.T, t, grid);
}

}  // namespace hoslab
