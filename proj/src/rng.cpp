#include "mfcl/rng.hpp"

#include <cmath>

namespace mfcl::rng {

namespace {
constexpr uint64_t k0 = 0x9e3779b97f4a7c15ull;
constexpr uint64_t k1 = 0xbf58476d1ce4e5b9ull;
constexpr uint64_t k2 = 0x94d049bb133111ebull;
constexpr uint64_t k3 = 0xd6e8feb86659fd93ull;

double to_unit(uint64_t h) {
  // 53-bit mantissa shifted into (0, 1); the half offset keeps log() finite.
  return ((h >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

uint64_t mix(uint64_t x) {
  x += k0;
  x = (x ^ (x >> 30)) * k1;
  x = (x ^ (x >> 27)) * k2;
  return x ^ (x >> 31);
}

uint64_t keyed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t h = mix(seed ^ k1);
  h = mix(h ^ a ^ k2);
  h = mix(h ^ b ^ k3);
  return mix(h ^ c ^ k0);
}

double uniform(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
  return to_unit(keyed(seed, a, b, c));
}

double normal(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t h = keyed(seed, a, b, c);
  double u1 = to_unit(mix(h ^ k2));
  double u2 = to_unit(mix(h ^ k3));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace mfcl::rng
