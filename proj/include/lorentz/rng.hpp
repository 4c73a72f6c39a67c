#pragma once

#include <array>
#include <cstdint>

namespace lorentz {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;  // next block index
  bool operator==(const RngState&) const = default;
};

// Counter-based generator. Each (seed, stream) pair is an independent
// sequence; position inside the sequence is the block counter.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t stream) {
    state_.seed = seed;
    state_.stream = stream;
  }

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  const RngState& state() const { return state_; }

 private:
  void refill();

  RngState state_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;  // 32-bit words consumed from block_, in pairs
};

}  // namespace lorentz
