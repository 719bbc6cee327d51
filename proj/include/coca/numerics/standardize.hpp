#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "coca/errors.hpp"
#include "coca/numerics/matrix.hpp"

namespace coca {

/// Per-column location and scale removed by `standardize`.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;  // sample sd, denominator n−1
};

/// z-scores every column. Throws DegenerateInputError for n < 3 or a
/// constant column.
inline std::pair<Matrix, Standardization> standardize(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n < 3) throw DegenerateInputError("standardize: need at least 3 rows, got " + std::to_string(n));
  Standardization st{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  Matrix out = data;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += data(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dev = data(r, c) - mean;
      ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    // Relative threshold: a column of identical values can leave rounding
    // residue of order eps·|mean| in `ss`.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))) || !std::isfinite(sd)) {
      throw DegenerateInputError("standardize: column " + std::to_string(c) +
                                 " has zero variance");
    }
    for (std::size_t r = 0; r < n; ++r) out(r, c) = (data(r, c) - mean) / sd;
    st.mean[c] = mean;
    st.scale[c] = sd;
  }
  return {std::move(out), std::move(st)};
}

}  // namespace coca
