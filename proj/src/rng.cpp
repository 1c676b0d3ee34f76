#include "compois/rng.hpp"

#include <cmath>

namespace compois {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) noexcept {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

RngStream RngStream::derive(std::uint64_t key, std::uint64_t index) noexcept {
  std::uint64_t a = key;
  std::uint64_t b = index ^ 0x6a09e667f3bcc909ULL;
  const std::uint64_t mixed = splitmix64(a) ^ (splitmix64(b) * 0x9e3779b97f4a7c15ULL);
  return RngStream(mixed);
}

double RngStream::normal() noexcept {
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

}  // namespace compois
