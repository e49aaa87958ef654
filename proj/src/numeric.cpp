#include "rtig/numeric.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace rtig {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double log_erfc(double z) {
  if (z < 25.0) return std::log(std::erfc(z));
  // erfc(z) = exp(-z^2) / (z sqrt(pi)) * (1 - 1/(2z^2) + 3/(4z^4) - ...);
  // at z >= 25 the truncated series is accurate to well below 1e-12.
  const double inv2 = 1.0 / (2.0 * z * z);
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) * inv2;
    series += term;
  }
  return -z * z - std::log(z * std::sqrt(std::numbers::pi)) + std::log(series);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

}  // namespace rtig
