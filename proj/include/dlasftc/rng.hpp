#pragma once

#include <cstdint>
#include <initializer_list>

namespace dlasftc {

// SplitMix64 step. Small, fast, and good enough for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic subseed for a named stream. All randomness in an experiment
// flows from one master seed through calls of this function, so runs are
// reproducible regardless of execution order (graph index, node index,
// repetition index, ... are passed as tags).
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = master;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t t : tags) {
    s ^= out + t * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull;
    out = splitmix64(s);
  }
  return out;
}

}  // namespace dlasftc
