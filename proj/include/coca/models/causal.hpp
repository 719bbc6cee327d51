#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "coca/dataset.hpp"
#include "coca/models/advi.hpp"
#include "coca/models/config.hpp"
#include "coca/numerics/gaussian.hpp"
#include "coca/numerics/rng.hpp"

namespace coca {

/// q(w, log σ_y) for the causal model Y | X, w ~ N(wᵗX, σ_y²).
struct CausalPosterior {
  std::vector<double> weight_mean;
  std::vector<double> weight_log_sd;
  double log_sigma_y_mean = 0.0;
  double log_sigma_y_log_sd = 0.0;

  MeanFieldGaussian to_mean_field() const {
    MeanFieldGaussian q{weight_mean, weight_log_sd};
    q.mean.push_back(log_sigma_y_mean);
    q.log_sd.push_back(log_sigma_y_log_sd);
    return q;
  }
  static CausalPosterior from_mean_field(const MeanFieldGaussian& q) {
    const std::size_t m = q.dim() - 1;
    return {std::vector<double>(q.mean.begin(), q.mean.begin() + static_cast<std::ptrdiff_t>(m)),
            std::vector<double>(q.log_sd.begin(), q.log_sd.begin() + static_cast<std::ptrdiff_t>(m)),
            q.mean[m], q.log_sd[m]};
  }
};

/// Log joint of Y given X under w ~ N(0, σ_w²I), log σ_y ~ N(0, 1).
/// θ = [w₁ … w_m, log σ_y].
class CausalLogJoint {
 public:
  CausalLogJoint(const Matrix& x, std::span<const double> y, double sigma_w)
      : x_(x), y_(y.begin(), y.end()), sigma_w_(sigma_w), resid_(y.size()) {}

  std::size_t dim() const noexcept { return x_.cols() + 1; }

  double log_joint(std::span<const double> theta, std::span<double> grad) const {
    const std::size_t n = x_.rows();
    const std::size_t m = x_.cols();
    const double s = theta[m];
    const double inv_var = std::exp(-2.0 * s);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto xi = x_.row(i);
      double pred = 0.0;
      for (std::size_t j = 0; j < m; ++j) pred += xi[j] * theta[j];
      resid_[i] = y_[i] - pred;
      rss += resid_[i] * resid_[i];
    }
    const auto nd = static_cast<double>(n);
    const double inv_w2 = 1.0 / (sigma_w_ * sigma_w_);
    double lp = -0.5 * nd * kLog2Pi - nd * s - 0.5 * inv_var * rss;
    double wsq = 0.0;
    for (std::size_t j = 0; j < m; ++j) wsq += theta[j] * theta[j];
    lp += -static_cast<double>(m) * (0.5 * kLog2Pi + std::log(sigma_w_)) - 0.5 * inv_w2 * wsq;
    lp += -0.5 * kLog2Pi - 0.5 * s * s;

    if (!grad.empty()) {
      for (std::size_t j = 0; j < m; ++j) grad[j] = -inv_w2 * theta[j];
      for (std::size_t i = 0; i < n; ++i) {
        auto xi = x_.row(i);
        const double r = inv_var * resid_[i];
        for (std::size_t j = 0; j < m; ++j) grad[j] += r * xi[j];
      }
      grad[m] = -nd + inv_var * rss - s;
    }
    return lp;
  }

 private:
  const Matrix& x_;
  std::vector<double> y_;
  double sigma_w_;
  mutable std::vector<double> resid_;
};

/// −log P(X) with every entry of the standardized X coded under N(0, 1).
inline double causal_x_code_length(const Matrix& x) {
  return iso_gaussian_nll(x, Matrix(x.rows(), x.cols()), 1.0);
}

inline void check_not_underdetermined(std::size_t n, std::size_t m, const std::string& what) {
  if (n <= m + 2) {
    throw DegenerateInputError(what + ": need n > m + 2 samples (n=" + std::to_string(n) +
                               ", m=" + std::to_string(m) + ")");
  }
}

/// Mean-field ADVI fit of the causal model on a standardized pair.
inline CausalPosterior fit_causal(const DatasetPair& pair, const ModelConfig& config, RngStream rng,
                                  FitTrace* trace = nullptr) {
  check_not_underdetermined(pair.n(), pair.m(), "fit_causal");
  const CausalLogJoint model(pair.x, pair.y, config.sigma_w);
  MeanFieldGaussian q{std::vector<double>(model.dim(), 0.0), std::vector<double>(model.dim(), -2.0)};
  q = maximize_elbo(model, std::move(q), config.vi, rng, trace);
  return CausalPosterior::from_mean_field(q);
}

/// Options of the Monte-Carlo causal code length.
struct CausalScoreOptions {
  ScoreSampling sampling = ScoreSampling::Posterior;
  ScoreWeighting weighting = ScoreWeighting::Importance;
  /// Hold σ_y at this value instead of sampling it.
  std::optional<double> fixed_sigma_y;
};

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * kLog2Pi - std::log(sd) - 0.5 * z * z;
}

/// L_ca ≈ −log P(X) − log[ N⁻¹ Σⱼ P(Y | X, ŵⱼ, σ̂_{y,j})·ρⱼ ] in nats.
///
/// Draws (ŵⱼ, log σ̂_{y,j}) come from the posterior or the prior. With
/// importance weighting and posterior draws, ρⱼ = p(ŵⱼ, σ̂ⱼ)/q(ŵⱼ, σ̂ⱼ), which
/// makes the average an unbiased estimate of ∫P(Y|X,w,σ)dP(w,σ); otherwise
/// ρⱼ = 1. Prior draws need no weights.
inline double score_causal_mc(const DatasetPair& pair, const CausalPosterior& posterior,
                              const ModelConfig& config, RngStream rng,
                              const CausalScoreOptions& options = {}) {
  const std::size_t n = pair.n();
  const std::size_t m = pair.m();
  const auto nd = static_cast<double>(n);
  const bool from_posterior = options.sampling == ScoreSampling::Posterior;
  const bool weighted = from_posterior && options.weighting == ScoreWeighting::Importance;
  std::vector<double> log_terms(config.mc_samples);
  std::vector<double> w(m);
  for (std::size_t j = 0; j < config.mc_samples; ++j) {
    double log_ratio = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      if (from_posterior) {
        const double sd = std::exp(posterior.weight_log_sd[c]);
        w[c] = posterior.weight_mean[c] + sd * rng.normal();
        if (weighted)
          log_ratio += normal_logpdf(w[c], 0.0, config.sigma_w) -
                       normal_logpdf(w[c], posterior.weight_mean[c], sd);
      } else {
        w[c] = config.sigma_w * rng.normal();
      }
    }
    double s = 0.0;
    if (options.fixed_sigma_y) {
      s = std::log(*options.fixed_sigma_y);
    } else if (from_posterior) {
      const double sd = std::exp(posterior.log_sigma_y_log_sd);
      s = posterior.log_sigma_y_mean + sd * rng.normal();
      if (weighted) log_ratio += normal_logpdf(s, 0.0, 1.0) - normal_logpdf(s, posterior.log_sigma_y_mean, sd);
    } else {
      s = rng.normal();
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = pair.y[i] - dot(pair.x.row(i), w);
      rss += r * r;
    }
    log_terms[j] = -0.5 * nd * kLog2Pi - nd * s - 0.5 * std::exp(-2.0 * s) * rss + log_ratio;
  }
  return causal_x_code_length(pair.x) - log_mean_exp(log_terms);
}

/// Exact L_ca for fixed σ_y: −log P(X) − log N(Y; 0, σ_w²XXᵗ + σ_y²I).
inline double score_causal_closed(const DatasetPair& pair, double sigma_w, double sigma_y) {
  if (!(sigma_w > 0.0) || !(sigma_y > 0.0))
    throw DomainError("score_causal_closed: scales must be positive");
  const std::size_t n = pair.n();
  Matrix cov = pair.x * pair.x.transposed();
  const double w2 = sigma_w * sigma_w;
  for (double& v : cov.values()) v *= w2;
  for (std::size_t i = 0; i < n; ++i) cov(i, i) += sigma_y * sigma_y;
  const std::vector<double> zero(n, 0.0);
  return causal_x_code_length(pair.x) - mvn_logpdf(pair.y, zero, cov);
}

}  // namespace coca
