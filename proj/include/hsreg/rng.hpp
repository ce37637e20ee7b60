#pragma once

#include <cstdint>

namespace hsreg {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Seeded, splittable random stream. A (seed, stream_id) pair pins the whole
// draw sequence; distinct stream_ids give statistically independent
// sequences, so replicate/chain workers can each own a stream without any
// coordination. Engine is xoshiro256++ with state derived via SplitMix64.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) {
    std::uint64_t st = seed;
    (void)detail::splitmix64_next(st);
    // fold the stream id in through an odd-multiplier hash so different
    // streams land far apart in state space
    st ^= (stream_id + 1) * 0xD1342543DE82EF95ULL;
    for (auto& word : state_) word = detail::splitmix64_next(st);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // std::uniform_random_bit_generator interface
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

// Stream-id allocation shared across the project: the two low bits tag the
// role so data generation, chain sampling and split shuffling can never
// collide on a stream, whatever the indices.
inline std::uint64_t stream_for_data(std::uint64_t replicate) {
  return (replicate << 2) | 0u;
}
inline std::uint64_t stream_for_chain(std::uint64_t fit_index,
                                      std::uint64_t chain = 0) {
  return (((fit_index << 8) | (chain & 0xffu)) << 2) | 1u;
}
inline std::uint64_t stream_for_shuffle(std::uint64_t split) {
  return (split << 2) | 2u;
}

}  // namespace hsreg
