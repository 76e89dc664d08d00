#include "hoslab/basis_cache.hpp"

#include "hoslab/error.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace hoslab {

namespace {

constexpr char kMagic[8] = {'H', 'O', 'S', 'B', 'A', 'S', 'I', 'S'};

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
    throw Error("basis cache truncated");
  return v;
}

void put_doubles(std::ostream& os, const double* data, std::int64_t n)
{
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& is, double* data, std::int64_t n)
{
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is)
    throw Error("basis cache truncated");
}

bool same_bytes(const double* a, const double* b, Eigen::Index n)
{
  return std::memcmp(a, b, static_cast<std::size_t>(n) * sizeof(double)) == 0;
}

}  // namespace

void save_basis(const std::filesystem::path& path, const BasisGrid& basis)
{
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw Error("cannot open basis cache for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kBasisCacheVersion);
  put<std::int32_t>(os, basis.dim());
  put<std::int32_t>(os, basis.max_degree());
  put<std::int32_t>(os, basis.quad_per_axis());
  const Quadrature& q = basis.quadrature();
  put<std::int64_t>(os, q.size());
  put<std::int64_t>(os, static_cast<std::int64_t>(basis.size()));
  put_doubles(os, q.points.data(), q.points.size());
  put_doubles(os, q.weights.data(), q.weights.size());
  put_doubles(os, basis.eval_table().data(), basis.eval_table().size());
  if (!os)
    throw Error("failed writing basis cache: " + path.string());
}

BasisPtr load_basis(const std::filesystem::path& path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw Error("cannot open basis cache: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("not a basis cache file: " + path.string());
  const auto version = get<std::uint32_t>(is);
  if (version != kBasisCacheVersion)
    throw Error("unsupported basis cache version " + std::to_string(version));
  const int dim = get<std::int32_t>(is);
  const int max_degree = get<std::int32_t>(is);
  const int quad = get<std::int32_t>(is);
  const auto npoints = get<std::int64_t>(is);
  const auto nbasis = get<std::int64_t>(is);
  if (dim < 1 || dim > 3 || max_degree < 0 || npoints <= 0 || nbasis <= 0)
    throw Error("corrupt basis cache header");

  Quadrature q;
  q.points.resize(dim, npoints);
  q.weights.resize(npoints);
  Eigen::MatrixXd table(nbasis, npoints);
  get_doubles(is, q.points.data(), q.points.size());
  get_doubles(is, q.weights.data(), q.weights.size());
  get_doubles(is, table.data(), table.size());
  return BasisGrid::from_parts(dim, max_degree, quad, std::move(q), std::move(table));
}

BasisPtr load_or_build_basis(const std::filesystem::path& dir, int dim, int max_degree, int quad_per_axis)
{
  if (quad_per_axis <= 0)
    quad_per_axis = 2 * (max_degree + 1);
  std::ostringstream key;
  key << "d" << dim << "_N" << max_degree << "_q" << quad_per_axis << ".hbasis";
  const std::filesystem::path path = dir / key.str();
  if (std::filesystem::exists(path)) {
    BasisPtr cached = load_basis(path);
    if (cached->dim() == dim && cached->max_degree() == max_degree && cached->quad_per_axis() == quad_per_axis)
      return cached;
  }
  BasisPtr built = BasisGrid::build(dim, max_degree, quad_per_axis);
  std::filesystem::create_directories(dir);
  save_basis(path, *built);
  return built;
}

bool bitwise_equal(const BasisGrid& a, const BasisGrid& b)
{
  if (!a.same_as(b) || a.quadrature().size() != b.quadrature().size() || a.size() != b.size())
    return false;
  return same_bytes(a.quadrature().points.data(), b.quadrature().points.data(), a.quadrature().points.size()) &&
         same_bytes(a.quadrature().weights.data(), b.quadrature().weights.data(), a.quadrature().weights.size()) &&
         same_bytes(a.eval_table().data(), b.eval_table().data(), a.eval_table().size());
}

}  // namespace hoslab
