#ifndef L2NAS_RNG_HPP
#define L2NAS_RNG_HPP

#include <cstdint>

namespace l2nas {

// splitmix64: integer-only stream, bit-identical on every platform.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless mix of a seed and up to three indices into one 64-bit word.
// Used to key per-entry table values so they do not depend on fill order.
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) {
  std::uint64_t s = seed;
  s ^= splitmix64(a) + 0x9e3779b97f4a7c15ULL;
  std::uint64_t t = s;
  t ^= splitmix64(b) + (t << 6) + (t >> 2);
  t ^= splitmix64(c) + (t << 6) + (t >> 2);
  return splitmix64(t);
}

// Maps a 64-bit word to [0,1) using the top 53 bits.
inline double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0,1).
  double next_unit() { return unit_double(next_u64()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool chance(double p) { return next_unit() < p; }

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

}  // namespace l2nas

#endif  // L2NAS_RNG_HPP
