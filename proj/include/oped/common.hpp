#pragma once

// Shared scalar utilities: an extended real with an explicit +infinity
// sentinel, the exception taxonomy used across the library, and bit-mixing
// helpers for seed derivation and identity hashing.
//
// The sentinel is a discrete state, not a floating-point infinity; it never
// enters arithmetic, so serialized reports stay total-ordered and comparable.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace oped {

// Invalid user input (malformed spec, out-of-range index, bad dimensions).
class validation_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A computed quantity violated a structural invariant it must satisfy.
class invariant_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Finite double or +infinity. Callers branch on is_inf before touching value.
struct ExtReal {
  double value = 0.0;
  bool is_inf = false;

  static ExtReal finite(double v) { return ExtReal{v, false}; }
  static ExtReal inf() { return ExtReal{0.0, true}; }

  bool finite_value() const { return !is_inf; }

  // Total order: every finite value precedes +infinity.
  bool operator<(const ExtReal& o) const {
    if (is_inf) return false;
    if (o.is_inf) return true;
    return value < o.value;
  }
  bool operator<=(const ExtReal& o) const { return !(o < *this); }

  std::string to_string() const {
    if (is_inf) return "inf";
    return std::to_string(value);
  }
};

namespace detail {

// splitmix64: the standard 64-bit finalizer, used both as a stream deriver
// and as the engine seeder. Constants are Vigna's.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// FNV-1a over raw bytes; used for distribution identity hashes in dataset
// provenance.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xCBF29CE484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

// Deterministic per-cell stream seed: cell index folded into the master seed
// through splitmix64, so parallel and serial sweeps draw identical streams.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t state = master_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  std::uint64_t s = state;
  std::uint64_t z = detail::splitmix64(s);
  return z ^ detail::splitmix64(s);
}

}  // namespace oped
