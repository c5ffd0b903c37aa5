#ifndef METAMAP_RNG_HPP
#define METAMAP_RNG_HPP

#include <cstdint>
#include <string_view>

namespace metamap {

/// Counter-based generator keyed by (seed, purpose tag).  Streams with
/// different tags are independent, so parallel workers never share state,
/// and a (seed, tag, counter) triple always yields the same value on any
/// platform.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::string_view purpose)
      : key_(mix(seed ^ fnv1a(purpose))), counter_(0) {}

  /// Uniform double in [0, 1).
  double uniform() { return to_unit(mix(key_ ^ mix(++counter_))); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return mix(key_ ^ mix(++counter_)); }

private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace metamap

#endif
