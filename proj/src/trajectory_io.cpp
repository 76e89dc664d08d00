#include "hoslab/picard_solver.hpp"

#include "hoslab/error.hpp"

#include <cstring>
#include <fstream>

namespace hoslab {

namespace {

constexpr char kMagic[8] = {'H', 'O', 'S', 'T', 'R', 'A', 'J', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v)
{
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is)
{
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is)
    throw Error("trajectory checkpoint truncated");
  return v;
}

void put_vector(std::ostream& os, const std::vector<double>& v)
{
  put<std::int64_t>(os, static_cast<std::int64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_vector(std::istream& is)
{
  const auto n = get<std::int64_t>(is);
  if (n < 0 || n > (1LL << 32))
    throw Error("trajectory checkpoint corrupt: bad vector length");
  std::vector<double> v(static_cast<std::size_t>(n));
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is)
    throw Error("trajectory checkpoint truncated");
  return v;
}

void put_coeffs(std::ostream& os, const Eigen::VectorXcd& c)
{
  os.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(Complex)));
}

Eigen::VectorXcd get_coeffs(std::istream& is, Eigen::Index n)
{
  Eigen::VectorXcd c(n);
  is.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(n * sizeof(Complex)));
  if (!is)
    throw Error("trajectory checkpoint truncated");
  return c;
}

}  // namespace

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj)
{
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw Error("cannot open checkpoint for writing: " + path.string());
  const SolverConfig& c = traj.config;
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put<std::int32_t>(os, c.dim);
  put<std::int32_t>(os, c.nonlinearity_p);
  put<std::int32_t>(os, c.K);
  put(os, c.T);
  put<std::int32_t>(os, c.N);
  put<std::int32_t>(os, c.time_nodes);
  put(os, c.tol);
  put<std::int32_t>(os, c.max_iter);
  put(os, c.s);
  put<std::uint8_t>(os, c.nonlinear ? 1 : 0);
  put(os, c.blowup_factor);
  put(os, c.audit_density);
  put<std::int32_t>(os, traj.u0.basis().quad_per_axis());

  put_vector(os, traj.times);
  put<std::int64_t>(os, static_cast<std::int64_t>(traj.u0.size()));
  put_coeffs(os, traj.u0.coeffs());
  put<std::int64_t>(os, static_cast<std::int64_t>(traj.duhamel.size()));
  for (const SpectralField& d : traj.duhamel)
    put_coeffs(os, d.coeffs());
  put<std::int32_t>(os, traj.iterations);
  put_vector(os, traj.contraction_history);
  put(os, traj.contraction_factor);
  put(os, traj.geometric_fit_r2);
  put<std::uint8_t>(os, traj.converged ? 1 : 0);
  if (!os)
    throw Error("failed writing checkpoint: " + path.string());
}

Trajectory load_trajectory(const std::filesystem::path& path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw Error("cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("not a trajectory checkpoint: " + path.string());
  if (get<std::uint32_t>(is) != kVersion)
    throw Error("unsupported checkpoint version in " + path.string());

  Trajectory traj;
  SolverConfig& c = traj.config;
  c.dim = get<std::int32_t>(is);
  c.nonlinearity_p = get<std::int32_t>(is);
  c.K = get<std::int32_t>(is);
  c.T = get<double>(is);
  c.N = get<std::int32_t>(is);
  c.time_nodes = get<std::int32_t>(is);
  c.tol = get<double>(is);
  c.max_iter = get<std::int32_t>(is);
  c.s = get<double>(is);
  c.nonlinear = get<std::uint8_t>(is) != 0;
  c.blowup_factor = get<double>(is);
  c.audit_density = get<double>(is);
  const int quad = get<std::int32_t>(is);
  c.validate();

  const BasisPtr basis = cached_basis(c.dim, c.N, quad);
  traj.times = get_vector(is);
  const auto n = get<std::int64_t>(is);
  if (n != static_cast<std::int64_t>(basis->size()))
    throw BasisMismatch("checkpoint coefficient count does not match its basis");
  traj.u0 = SpectralField(basis, get_coeffs(is, n));
  const auto m = get<std::int64_t>(is);
  if (m != static_cast<std::int64_t>(traj.times.size()))
    throw Error("checkpoint corrupt: time grid and trajectory lengths differ");
  traj.duhamel.reserve(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k)
    traj.duhamel.emplace_back(basis, get_coeffs(is, n));
  traj.iterations = get<std::int32_t>(is);
  traj.contraction_history = get_vector(is);
  traj.contraction_factor = get<double>(is);
  traj.geometric_fit_r2 = get<double>(is);
  traj.converged = get<std::uint8_t>(is) != 0;
  return traj;
}

}  // namespace hoslab
