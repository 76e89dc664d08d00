#include "hoslab/counter_rng.hpp"

namespace hoslab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Block Philox4x32::generate(Block c, Key k)
{
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

Philox4x32::Block random_block(const StreamId& id)
{
  const Philox4x32::Block counter{static_cast<std::uint32_t>(id.sample_index),
                                  static_cast<std::uint32_t>(id.sample_index >> 32), id.coeff_index, id.slot};
  const Philox4x32::Key key{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32)};
  return Philox4x32::generate(counter, key);
}

std::array<double, 2> open_uniforms(const StreamId& id)
{
  const auto b = random_block(id);
  const std::uint64_t a = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  const std::uint64_t c = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
  constexpr double scale = 0x1.0p-53;
  return {((a >> 11) + 0.5) * scale, ((c >> 11) + 0.5) * scale};
}

}  // namespace hoslab
