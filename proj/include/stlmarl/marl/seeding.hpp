#pragma once

#include <cstdint>

namespace stlmarl::marl {

/// Deterministic stream derivation (splitmix64 over a tagged combination),
/// so environment layouts stay identical across variants with shared seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 0x632be59bd9b4e019ull);
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

}  // namespace stlmarl::marl
