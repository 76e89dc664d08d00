#pragma once

#include "hoslab/hermite_basis.hpp"

#include <cstdint>
#include <filesystem>

namespace hoslab {

inline constexpr std::uint32_t kBasisCacheVersion = 1;

/// Binary basis descriptor: magic "HOSBASIS", format version, (d, N, q),
/// then nodes, weights and the evaluation table as little-endian doubles.
void save_basis(const std::filesystem::path& path, const BasisGrid& basis);
BasisPtr load_basis(const std::filesystem::path& path);

/// Load `<dir>/<cache_key>.hbasis` if present and matching, otherwise build
/// and write it. The loaded tables are bit-identical to a fresh build.
BasisPtr load_or_build_basis(const std::filesystem::path& dir, int dim, int max_degree, int quad_per_axis);

/// True when both bases carry exactly the same bytes in every table.
bool bitwise_equal(const BasisGrid& a, const BasisGrid& b);

}  // namespace hoslab
