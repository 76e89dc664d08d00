#pragma once

#include <array>
#include <cstdint>

namespace hoslab {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011). Every output
/// is a pure function of (key, counter), so streams can be consumed in any
/// order and on any thread.
class Philox4x32
{
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key);
};

/// Named stream coordinates used throughout the library.
struct StreamId
{
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
  std::uint32_t coeff_index = 0;
  std::uint32_t slot = 0;  // distinguishes independent uses of one (sample, coeff)
};

/// Four 32-bit words for the given stream position.
Philox4x32::Block random_block(const StreamId& id);

/// Two independent uniforms in the open interval (0, 1), 53-bit resolution.
std::array<double, 2> open_uniforms(const StreamId& id);

}  // namespace hoslab
