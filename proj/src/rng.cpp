#include "lorentz/rng.hpp"

namespace lorentz {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

void CounterRng::refill() {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(state_.stream),
      static_cast<std::uint32_t>(state_.stream >> 32),
      static_cast<std::uint32_t>(state_.counter),
      static_cast<std::uint32_t>(state_.counter >> 32)};
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(state_.seed),
                                      static_cast<std::uint32_t>(state_.seed >> 32)};
  block_ = philox4x32(ctr, key);
  ++state_.counter;
  used_ = 0;
}

std::uint64_t CounterRng::next_u64() {
  if (used_ >= 4) refill();
  std::uint64_t v = (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
  used_ += 2;
  return v;
}

}  // namespace lorentz
