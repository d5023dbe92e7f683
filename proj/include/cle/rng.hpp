#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cle {

// splitmix64 finalizer (Steele, Lea, Flood; constants from Vigna's reference code).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Key of replica `index` under `master`. Replica streams depend only on
/// (master, index), never on how replicas are distributed over workers.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master ^ 0x6a09e667f3bcc909ULL) + mix64(index + kGoldenGamma));
}

/// Counter-based stream: output k is mix64(key + (k+1)·γ).
class StreamRng {
 public:
  explicit constexpr StreamRng(std::uint64_t key) noexcept : key_(key) {}
  StreamRng(std::uint64_t master, std::uint64_t index) noexcept
      : key_(derive_seed(master, index)) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box–Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Independent child stream, e.g. per retry or per sub-trial.
  StreamRng split(std::uint64_t index) const noexcept { return StreamRng(derive_seed(key_, index)); }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cle
