#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

namespace dfw {

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based generator. The n-th output is a pure function of
/// (key, n), so streams can be split into independent children by tag
/// without any shared state. Normals come from Box-Muller on the
/// uniform stream.
class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) : key_(detail::mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  constexpr Rng split(std::uint64_t tag) const {
    Rng child(0);
    child.key_ = detail::mix64(key_ ^ detail::mix64(tag + 0x9e3779b97f4a7c15ULL));
    return child;
  }
  constexpr Rng split(std::string_view tag) const { return split(detail::hash_tag(tag)); }

  constexpr Rng split(std::initializer_list<std::uint64_t> path) const {
    Rng r = *this;
    for (auto t : path) r = r.split(t);
    return r;
  }

  constexpr std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    const std::uint64_t ctr = counter_++;
    return detail::mix64(detail::mix64(key_ + (ctr + 1) * 0x9e3779b97f4a7c15ULL) ^ key_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

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
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives a child seed from a master seed and a path of integer tags.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(master).split(path).key();
}

}  // namespace dfw
