#pragma once

// Counter-based random streams. A stream is keyed by a 64-bit seed and a
// short list of integer ids (replica, mode indices, frequency cell, ...), so
// the variates a consumer sees do not depend on the order in which streams
// are created or on how work is scheduled.
//
// Normal variates use a hand-written Box–Muller transform: the standard
// library distributions are implementation-defined and would break
// bit-for-bit reproducibility across toolchains.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace mfbm {

namespace detail {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_id) {
    std::uint64_t h = detail::mix64(seed ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t id : stream_id) {
      h = detail::mix64(h + kGolden + detail::mix64(id + 0x3c6ef372fe94f82bULL));
    }
    state_ = h;
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return detail::mix64(state_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mfbm
