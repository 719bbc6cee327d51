#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "coca/errors.hpp"
#include "coca/numerics/matrix.hpp"
#include "coca/numerics/rng.hpp"

namespace coca {

/// Source distributions of the synthetic generators.
enum class SourceDistribution { Normal, Laplace, LogNormal, Uniform };

inline constexpr std::array<SourceDistribution, 4> kAllSources{
    SourceDistribution::Normal, SourceDistribution::Laplace, SourceDistribution::LogNormal,
    SourceDistribution::Uniform};

inline std::string_view to_string(SourceDistribution d) {
  switch (d) {
    case SourceDistribution::Normal: return "normal";
    case SourceDistribution::Laplace: return "laplace";
    case SourceDistribution::LogNormal: return "lognormal";
    case SourceDistribution::Uniform: return "uniform";
  }
  return "unknown";
}

inline std::optional<SourceDistribution> parse_source(std::string_view s) {
  for (auto d : kAllSources)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

/// One draw. Laplace has location 0 and scale 1; Uniform is on [0, 1).
inline double draw(SourceDistribution dist, RngStream& rng) {
  switch (dist) {
    case SourceDistribution::Normal: return rng.normal();
    case SourceDistribution::Laplace: {
      const double u = rng.uniform_open() - 0.5;
      return u < 0.0 ? std::log1p(2.0 * u) : -std::log1p(-2.0 * u);
    }
    case SourceDistribution::LogNormal: return std::exp(rng.normal());
    case SourceDistribution::Uniform: return rng.uniform();
  }
  return 0.0;
}

/// rows×cols matrix of i.i.d. draws, filled in row-major order.
inline Matrix sample_source(SourceDistribution dist, std::size_t rows, std::size_t cols,
                            RngStream& rng) {
  if (rows == 0 || cols == 0) throw DimensionError("sample_source: rows and cols must be >= 1");
  Matrix m(rows, cols);
  for (double& v : m.values()) v = draw(dist, rng);
  return m;
}

}  // namespace coca
