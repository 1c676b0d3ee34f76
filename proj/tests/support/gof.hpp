#pragma once

// Goodness-of-fit of integer draws against a reference pmf.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace gof {

struct Result {
  double chi2;
  int dof;
  double p_value;
  double tv;
};

/// Pearson chi-square with adjacent bins pooled until each expected count is
/// at least 5 (the remainder, including the whole upper tail, forms the last
/// bin), plus the total-variation distance of the empirical pmf.
inline Result compare(std::span<const std::uint64_t> draws, std::span<const double> pmf) {
  const double n = static_cast<double>(draws.size());
  std::uint64_t top = 0;
  for (auto d : draws) top = std::max(top, d);
  std::vector<double> observed(std::max<std::size_t>(pmf.size(), top + 1), 0.0);
  for (auto d : draws) observed[d] += 1.0;

  double tv = 0.0;
  for (std::size_t y = 0; y < observed.size(); ++y) {
    const double p = y < pmf.size() ? pmf[y] : 0.0;
    tv += std::fabs(observed[y] / n - p);
  }
  tv *= 0.5;

  std::vector<double> obs_bins, exp_bins;
  double o = 0.0, e = 0.0, expected_left = n;
  for (std::size_t y = 0; y < observed.size(); ++y) {
    const double ey = (y < pmf.size() ? pmf[y] : 0.0) * n;
    o += observed[y];
    e += ey;
    expected_left -= ey;
    if (e >= 5.0 && expected_left >= 5.0) {
      obs_bins.push_back(o);
      exp_bins.push_back(e);
      o = e = 0.0;
    }
  }
  // Remaining mass (and any rounding residue) closes the last bin.
  e += std::max(expected_left, 0.0);
  if (!obs_bins.empty() && e < 5.0) {
    obs_bins.back() += o;
    exp_bins.back() += e;
  } else {
    obs_bins.push_back(o);
    exp_bins.push_back(e);
  }
  double chi2 = 0.0;
  for (std::size_t b = 0; b < obs_bins.size(); ++b) {
    const double d = obs_bins[b] - exp_bins[b];
    chi2 += d * d / exp_bins[b];
  }
  const int dof = static_cast<int>(obs_bins.size()) - 1;
  const double p = dof > 0 ? boost::math::gamma_q(0.5 * dof, 0.5 * chi2) : 1.0;
  return {chi2, dof, p, tv};
}

}  // namespace gof
