#pragma once

#include <cstdint>

namespace mfcl {

// Stateless counter-based generator: every draw is a pure function of
// (seed, a, b, c), so ensembles are bitwise reproducible however the work is
// partitioned. Streams are separated by the caller through the id triple.
namespace rng {

uint64_t mix(uint64_t x);  // splitmix64 finalizer
uint64_t keyed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c);

// Strictly inside (0, 1).
double uniform(uint64_t seed, uint64_t a, uint64_t b, uint64_t c);

// Standard normal via Box-Muller on two uniforms derived from the same key.
double normal(uint64_t seed, uint64_t a, uint64_t b, uint64_t c);

}  // namespace rng
}  // namespace mfcl
