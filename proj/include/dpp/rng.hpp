#pragma once

#include <cstdint>

namespace dpp {

// Counter-based generator: every output is a pure hash of
// (seed, stream_id, counter), so draws can be produced in any order and in
// parallel while remaining bit-exact across platforms and languages.
//
// Algorithm: three rounds of the 64-bit murmur finalizer, one per input word,
// each input offset by a distinct odd constant before mixing:
//   h = fmix64(seed + C1)
//   h = fmix64(h ^ fmix64(stream + C2))
//   out = fmix64(h ^ fmix64(counter + C3))
// with fmix64(k): k ^= k>>33; k *= 0xff51afd7ed558ccd; k ^= k>>33;
//                 k *= 0xc4ceb9fe1a85ec53; k ^= k>>33.
// C1 = 0x9e3779b97f4a7c15, C2 = 0xbf58476d1ce4e5b9, C3 = 0x94d049bb133111eb.
// Uniform doubles take the top 53 bits: (out >> 11) * 2^-53.
//
// The unit tests pin authoritative test vectors for cross-language ports.

inline std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

inline std::uint64_t counter_rng_u64(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t counter) {
  std::uint64_t h = fmix64(seed + 0x9e3779b97f4a7c15ULL);
  h = fmix64(h ^ fmix64(stream + 0xbf58476d1ce4e5b9ULL));
  return fmix64(h ^ fmix64(counter + 0x94d049bb133111ebULL));
}

inline double counter_rng_uniform(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
  return static_cast<double>(counter_rng_u64(seed, stream, counter) >> 11) * 0x1.0p-53;
}

struct SamplerState {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t counter = 0;  // draw index; each draw consumes one counter slot
};

}  // namespace dpp
