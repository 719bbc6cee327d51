#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "coca/errors.hpp"
#include "coca/numerics/linalg.hpp"
#include "coca/numerics/matrix.hpp"

namespace coca {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// log N(x; mean, cov), in nats, through a Cholesky factor of `cov`.
inline double mvn_logpdf(std::span<const double> x, std::span<const double> mean,
                         const Matrix& cov) {
  const std::size_t d = x.size();
  if (mean.size() != d || cov.rows() != d || cov.cols() != d)
    throw DimensionError("mvn_logpdf: dimensions disagree");
  const Matrix l = cholesky(cov);
  std::vector<double> r(d);
  for (std::size_t i = 0; i < d; ++i) r[i] = x[i] - mean[i];
  forward_substitute(l, r);
  double maha = 0.0;
  double half_logdet = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    maha += r[i] * r[i];
    half_logdet += std::log(l(i, i));
  }
  return -0.5 * static_cast<double>(d) * kLog2Pi - half_logdet - 0.5 * maha;
}

/// −Σ log N(data_ij; mean_ij, sigma²) over every entry.
inline double iso_gaussian_nll(const Matrix& data, const Matrix& mean, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("iso_gaussian_nll: sigma must be positive");
  if (data.rows() != mean.rows() || data.cols() != mean.cols())
    throw DimensionError("iso_gaussian_nll: shapes disagree");
  auto dv = data.values();
  auto mv = mean.values();
  double rss = 0.0;
  for (std::size_t i = 0; i < dv.size(); ++i) {
    const double r = dv[i] - mv[i];
    rss += r * r;
  }
  const auto count = static_cast<double>(dv.size());
  return count * (0.5 * kLog2Pi + std::log(sigma)) + 0.5 * rss / (sigma * sigma);
}

/// log Σ exp(v) without overflow; −∞ for an empty or all −∞ input.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

inline double log_mean_exp(std::span<const double> v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

}  // namespace coca
