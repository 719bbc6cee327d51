#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "coca/errors.hpp"
#include "coca/numerics/matrix.hpp"

namespace coca {

/// A sample over (X, Y): n rows of m covariates plus a scalar target.
struct DatasetPair {
  std::string name;
  Matrix x;
  std::vector<double> y;
  double weight = 1.0;

  std::size_t n() const noexcept { return y.size(); }
  std::size_t m() const noexcept { return x.cols(); }

  /// [X | Y] as an n×(m+1) matrix.
  Matrix joint() const {
    Matrix j(x.rows(), x.cols() + 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto src = x.row(r);
      auto dst = j.row(r);
      std::copy(src.begin(), src.end(), dst.begin());
      dst[x.cols()] = y[r];
    }
    return j;
  }

  /// Inverse of joint(): the last column becomes Y.
  static DatasetPair from_joint(std::string name, const Matrix& joint, double weight = 1.0) {
    if (joint.cols() < 2) throw DimensionError("DatasetPair: joint needs at least 2 columns");
    return {std::move(name), joint.cols_range(0, joint.cols() - 1), joint.col(joint.cols() - 1),
            weight};
  }

  /// Throws DegenerateInputError / DimensionError when invariants fail.
  void validate() const {
    if (x.rows() != y.size())
      throw DimensionError("dataset '" + name + "': X has " + std::to_string(x.rows()) +
                           " rows but Y has " + std::to_string(y.size()));
    if (n() < 3) throw DegenerateInputError("dataset '" + name + "': need at least 3 samples");
    if (m() < 1) throw DegenerateInputError("dataset '" + name + "': X has no columns");
    if (!(weight > 0.0)) throw DomainError("dataset '" + name + "': weight must be positive");
    for (double v : x.values())
      if (!std::isfinite(v)) throw DegenerateInputError("dataset '" + name + "': non-finite X entry");
    for (double v : y)
      if (!std::isfinite(v)) throw DegenerateInputError("dataset '" + name + "': non-finite Y entry");
  }
};

}  // namespace coca
