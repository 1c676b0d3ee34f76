#include "compois/cmp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "compois/error.hpp"

namespace compois {

namespace {

constexpr std::size_t kFactorialTableSize = 4096;
constexpr Count kMaxTerms = 10'000'000;
constexpr double kLogZTolerance = 1e-14;
constexpr double kTailMass = 1e-12;

const std::array<double, kFactorialTableSize>& factorial_table() {
  static const auto table = [] {
    std::array<double, kFactorialTableSize> t{};
    for (std::size_t k = 0; k < kFactorialTableSize; ++k) {
      t[k] = std::lgamma(static_cast<double>(k) + 1.0);
    }
    return t;
  }();
  return table;
}

double lgamma_threadsafe(double x) noexcept {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

void check_window(const CmpParams& params, TruncationWindow w) {
  const Count m = mode(params);
  const bool lower_ok = (m == 0) ? (w.k1 == 0) : (w.k1 < m);
  if (w.k1 > w.k2 || !lower_ok || !(m < w.k2)) {
    throw InvalidWindow("truncation window [" + std::to_string(w.k1) + ", " +
                        std::to_string(w.k2) + "] does not bracket the mode " +
                        std::to_string(m));
  }
}

// Sum of exp(lq(y) - pivot) over [lo, hi].
double scaled_block_sum(const CmpParams& params, Count lo, Count hi, double pivot) {
  double s = 0.0;
  for (Count y = lo; y <= hi; ++y) s += std::exp(log_unnormalized_mass(params, y) - pivot);
  return s;
}

}  // namespace

CmpParams::CmpParams(double mu, double nu) : mu_(mu), nu_(nu), log_mu_(std::log(mu)) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidParameter("COM-Poisson mu must be finite and > 0, got " + std::to_string(mu));
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw InvalidParameter("COM-Poisson nu must be finite and > 0, got " + std::to_string(nu));
  }
}

std::optional<CmpParams> CmpParams::try_from_log(double log_mu, double log_nu) noexcept {
  const double mu = std::exp(log_mu);
  const double nu = std::exp(log_nu);
  if (!std::isfinite(log_mu) || !(mu > 0.0) || !std::isfinite(mu) || !std::isfinite(log_nu) ||
      !(nu > 0.0) || !std::isfinite(nu)) {
    return std::nullopt;
  }
  return CmpParams(mu, nu, log_mu);
}

CmpParams CmpParams::from_log(double log_mu, double log_nu) {
  if (auto p = try_from_log(log_mu, log_nu)) return *p;
  throw InvalidParameter("COM-Poisson log-parameters out of range");
}

double log_factorial(Count y) noexcept {
  if (y < kFactorialTableSize) return factorial_table()[y];
  return lgamma_threadsafe(static_cast<double>(y) + 1.0);
}

Count mode(const CmpParams& params) noexcept {
  return static_cast<Count>(std::floor(params.mu()));
}

Moments approx_moments(const CmpParams& params) noexcept {
  return {params.mu() + 1.0 / (2.0 * params.nu()) - 0.5, params.mu() / params.nu()};
}

double truncated_log_z(const CmpParams& params, TruncationWindow window) {
  check_window(params, window);
  // The mode term is the largest summand.
  const double pivot = log_unnormalized_mass(params, mode(params));
  return pivot + std::log(scaled_block_sum(params, window.k1, window.k2, pivot));
}

ConvergedLogZ adaptive_log_z(const CmpParams& params) {
  const Count m = mode(params);
  const double pivot = log_unnormalized_mass(params, m);
  Count k2 = 2 * m + 20;
  if (k2 >= kMaxTerms) {
    throw NonConvergence("truncated normaliser needs more than 1e7 terms (mode " +
                         std::to_string(m) + ")");
  }
  double sum = scaled_block_sum(params, 0, k2, pivot);
  while (true) {
    const Count next = std::min<Count>(2 * k2 + 1, kMaxTerms - 1);
    if (next <= k2) {
      throw NonConvergence("truncated normaliser did not converge within 1e7 terms");
    }
    const double block = scaled_block_sum(params, k2 + 1, next, pivot);
    sum += block;
    k2 = next;
    if (std::log1p(block / (sum - block)) < kLogZTolerance) break;
  }
  return {pivot + std::log(sum), k2};
}

std::vector<double> oracle_pmf(const CmpParams& params, Count ymax) {
  const ConvergedLogZ z = adaptive_log_z(params);
  std::vector<double> pmf;
  const Count last = std::max(z.k2, ymax);
  pmf.reserve(last + 1);
  for (Count y = 0; y <= last; ++y) {
    pmf.push_back(std::exp(log_unnormalized_mass(params, y) - z.log_z));
  }
  // Trim from the right while the discarded tail stays under the threshold.
  double tail = 0.0;
  std::size_t len = pmf.size();
  while (len > ymax + 1 && len > 1 && tail + pmf[len - 1] < kTailMass) {
    tail += pmf[len - 1];
    --len;
  }
  pmf.resize(len);
  return pmf;
}

double truncated_loglik(std::span<const Count> y, std::span<const CmpParams> params) {
  if (y.size() != params.size()) throw InvalidParameter("truncated_loglik: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += log_unnormalized_mass(params[i], y[i]) - adaptive_log_z(params[i]).log_z;
  }
  return total;
}

double truncated_loglik(std::span<const Count> y, std::span<const CmpParams> params,
                        const WindowPolicy& policy) {
  if (y.size() != params.size()) throw InvalidParameter("truncated_loglik: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += log_unnormalized_mass(params[i], y[i]) - truncated_log_z(params[i], policy(params[i]));
  }
  return total;
}

}  // namespace compois
