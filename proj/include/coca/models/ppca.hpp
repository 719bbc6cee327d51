#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "coca/errors.hpp"
#include "coca/models/advi.hpp"
#include "coca/models/causal.hpp"
#include "coca/models/config.hpp"
#include "coca/numerics/gaussian.hpp"
#include "coca/numerics/linalg.hpp"
#include "coca/numerics/matrix.hpp"
#include "coca/numerics/rng.hpp"

namespace coca {

/// q(W, Z, log σ_x) for the factor model D | Z, W ~ N(Z·W, σ_x²I).
///
/// W is k×d (one loading row per latent dimension), Z is n×k.
struct PpcaPosterior {
  Matrix loading_mean;
  Matrix loading_log_sd;
  Matrix factor_mean;
  Matrix factor_log_sd;
  double log_sigma_x_mean = 0.0;
  double log_sigma_x_log_sd = 0.0;

  std::size_t latent_dim() const noexcept { return loading_mean.rows(); }

  /// Flat layout [W (row-major), Z (row-major), log σ_x].
  MeanFieldGaussian to_mean_field() const {
    MeanFieldGaussian q;
    auto append = [](std::vector<double>& dst, const Matrix& m) {
      dst.insert(dst.end(), m.values().begin(), m.values().end());
    };
    append(q.mean, loading_mean);
    append(q.mean, factor_mean);
    q.mean.push_back(log_sigma_x_mean);
    append(q.log_sd, loading_log_sd);
    append(q.log_sd, factor_log_sd);
    q.log_sd.push_back(log_sigma_x_log_sd);
    return q;
  }

  static PpcaPosterior from_mean_field(const MeanFieldGaussian& q, std::size_t n, std::size_t d,
                                       std::size_t k) {
    if (q.dim() != k * d + n * k + 1) throw DimensionError("PpcaPosterior: flat size mismatch");
    auto slice = [](const std::vector<double>& v, std::size_t off, std::size_t rows,
                    std::size_t cols) {
      return Matrix(rows, cols,
                    std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(off),
                                        v.begin() + static_cast<std::ptrdiff_t>(off + rows * cols)));
    };
    return {slice(q.mean, 0, k, d),        slice(q.log_sd, 0, k, d),
            slice(q.mean, k * d, n, k),    slice(q.log_sd, k * d, n, k),
            q.mean[k * d + n * k],         q.log_sd[k * d + n * k]};
  }
};

/// Log joint of the factor model with W ~ N(0, σ_w²), Z ~ N(0, σ_z²),
/// log σ_x ~ N(0, 1). θ = [W (k×d), Z (n×k), log σ_x].
class PpcaLogJoint {
 public:
  PpcaLogJoint(const Matrix& data, std::size_t k, double sigma_z, double sigma_w)
      : data_(data), k_(k), sigma_z_(sigma_z), sigma_w_(sigma_w), resid_(data.cols()) {}

  std::size_t dim() const noexcept { return k_ * data_.cols() + data_.rows() * k_ + 1; }

  double log_joint(std::span<const double> theta, std::span<double> grad) const {
    const std::size_t n = data_.rows();
    const std::size_t d = data_.cols();
    const std::size_t k = k_;
    const double* w = theta.data();
    const double* z = theta.data() + k * d;
    const double s = theta[k * d + n * k];
    const double inv_var = std::exp(-2.0 * s);
    const bool want_grad = !grad.empty();
    double* gw = want_grad ? grad.data() : nullptr;
    double* gz = want_grad ? grad.data() + k * d : nullptr;
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto di = data_.row(i);
      const double* zi = z + i * k;
      for (std::size_t c = 0; c < d; ++c) {
        double mean = 0.0;
        for (std::size_t l = 0; l < k; ++l) mean += zi[l] * w[l * d + c];
        resid_[c] = di[c] - mean;
        rss += resid_[c] * resid_[c];
      }
      if (want_grad) {
        for (std::size_t l = 0; l < k; ++l) {
          double acc = 0.0;
          const double* wl = w + l * d;
          double* gwl = gw + l * d;
          const double zil = inv_var * zi[l];
          for (std::size_t c = 0; c < d; ++c) {
            acc += resid_[c] * wl[c];
            gwl[c] += zil * resid_[c];
          }
          gz[i * k + l] = inv_var * acc - zi[l] / (sigma_z_ * sigma_z_);
        }
      }
    }

    const auto nd = static_cast<double>(n * d);
    double lp = -0.5 * nd * kLog2Pi - nd * s - 0.5 * inv_var * rss;
    double wsq = 0.0;
    for (std::size_t i = 0; i < k * d; ++i) wsq += w[i] * w[i];
    double zsq = 0.0;
    for (std::size_t i = 0; i < n * k; ++i) zsq += z[i] * z[i];
    lp += -static_cast<double>(k * d) * (0.5 * kLog2Pi + std::log(sigma_w_)) -
          0.5 * wsq / (sigma_w_ * sigma_w_);
    lp += -static_cast<double>(n * k) * (0.5 * kLog2Pi + std::log(sigma_z_)) -
          0.5 * zsq / (sigma_z_ * sigma_z_);
    lp += -0.5 * kLog2Pi - 0.5 * s * s;

    if (want_grad) {
      for (std::size_t i = 0; i < k * d; ++i) gw[i] -= w[i] / (sigma_w_ * sigma_w_);
      grad[k * d + n * k] = -nd + inv_var * rss - s;
    }
    return lp;
  }

 private:
  const Matrix& data_;
  std::size_t k_;
  double sigma_z_;
  double sigma_w_;
  mutable std::vector<double> resid_;
};

/// Maximum-likelihood PPCA parameters: loadings (k×d) and noise scale σ.
struct PpcaMle {
  Matrix loadings;
  double sigma = 0.0;
};

/// Closed-form PPCA MLE from a covariance matrix: top-k eigenpairs give the
/// loading rows uᵢ·√(λᵢ − σ²); σ² is the mean of the d−k trailing eigenvalues.
inline PpcaMle ppca_mle_from_covariance(const Matrix& cov, std::size_t k) {
  const std::size_t d = cov.rows();
  if (k < 1 || k >= d)
    throw DimensionError("ppca_closed_mle: need 1 <= k < d (k=" + std::to_string(k) +
                         ", d=" + std::to_string(d) + ")");
  const SymmetricEigen eig = symmetric_eigen(cov);
  double tail = 0.0;
  for (std::size_t i = k; i < d; ++i) tail += eig.values[i];
  const double sigma2 = tail / static_cast<double>(d - k);
  if (!(sigma2 > 0.0)) throw DegenerateInputError("ppca_closed_mle: trailing eigenvalues are not positive");
  PpcaMle mle{Matrix(k, d), std::sqrt(sigma2)};
  for (std::size_t i = 0; i < k; ++i) {
    const double excess = eig.values[i] - sigma2;
    if (excess <= 0.0) continue;
    const double scale = std::sqrt(excess);
    for (std::size_t c = 0; c < d; ++c) mle.loadings(i, c) = eig.vectors(c, i) * scale;
  }
  return mle;
}

inline PpcaMle ppca_closed_mle(const Matrix& joint, std::size_t k) {
  return ppca_mle_from_covariance(sample_covariance(joint), k);
}

/// Posterior means of the factors given loadings: Z = D·Wᵗ·(W·Wᵗ + σ²I)⁻¹.
inline Matrix ppca_project(const Matrix& data, const Matrix& loadings, double sigma) {
  const std::size_t k = loadings.rows();
  Matrix m = loadings * loadings.transposed();
  for (std::size_t i = 0; i < k; ++i) m(i, i) += sigma * sigma;
  const Matrix l = cholesky(m);
  Matrix proj = data * loadings.transposed();
  for (std::size_t r = 0; r < proj.rows(); ++r) {
    auto row = proj.row(r);
    forward_substitute(l, row);
    backward_substitute_transposed(l, row);
  }
  return proj;
}

inline constexpr double kInitLogSd = -2.0;

/// Mean-field ADVI fit of the factor model on a standardized joint sample,
/// started from the closed-form MLE.
inline PpcaPosterior fit_ppca(const Matrix& joint, const ModelConfig& config, RngStream rng,
                              FitTrace* trace = nullptr) {
  const std::size_t n = joint.rows();
  const std::size_t d = joint.cols();
  const std::size_t k = config.latent_dim;
  check_not_underdetermined(n, d - 1, "fit_ppca");
  const PpcaMle mle = ppca_closed_mle(joint, k);
  const double sigma0 = std::max(mle.sigma, 1e-6);
  PpcaPosterior init{mle.loadings,
                     Matrix(k, d, kInitLogSd),
                     ppca_project(joint, mle.loadings, sigma0),
                     Matrix(n, k, kInitLogSd),
                     std::log(sigma0),
                     kInitLogSd};
  const PpcaLogJoint model(joint, k, config.sigma_z, config.sigma_w);
  const MeanFieldGaussian q = maximize_elbo(model, init.to_mean_field(), config.vi, rng, trace);
  return PpcaPosterior::from_mean_field(q, n, d, k);
}

/// Density used for each Monte-Carlo draw of the factor model.
enum class FactorLikelihood {
  /// p(D | W, σ) = Πᵢ N(dᵢ; 0, WᵗW + σ²I), Z integrated out (default).
  Marginal,
  /// p(D | Z, W, σ) = Πᵢⱼ N(dᵢⱼ; (Z·W)ᵢⱼ, σ²), Z drawn as well.
  Conditional,
};

/// Options of the Monte-Carlo confounded code length.
struct PpcaScoreOptions {
  ScoreSampling sampling = ScoreSampling::Posterior;
  ScoreWeighting weighting = ScoreWeighting::Importance;
  FactorLikelihood likelihood = FactorLikelihood::Marginal;
};

/// Σᵢ log N(dᵢ; 0, WᵗW + σ²I) from the scatter S = DᵗD of the n rows.
inline double ppca_marginal_loglik(const Matrix& scatter, std::size_t n, const Matrix& loadings,
                                   double sigma) {
  const std::size_t d = scatter.rows();
  if (loadings.cols() != d) throw DimensionError("ppca_marginal_loglik: loadings do not match data");
  Matrix cov = gram(loadings);
  for (std::size_t i = 0; i < d; ++i) cov(i, i) += sigma * sigma;
  const Matrix l = cholesky(cov);
  double logdet = 0.0;
  for (std::size_t i = 0; i < d; ++i) logdet += 2.0 * std::log(l(i, i));
  // tr(C⁻¹S) with C = L·Lᵗ
  double trace = 0.0;
  std::vector<double> col(d);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < d; ++r) col[r] = scatter(r, c);
    forward_substitute(l, col);
    backward_substitute_transposed(l, col);
    trace += col[c];
  }
  return -0.5 * static_cast<double>(n) * (static_cast<double>(d) * kLog2Pi + logdet) - 0.5 * trace;
}

/// L_co ≈ −log[ N⁻¹ Σⱼ p(D | θ̂ⱼ)·ρⱼ ] in nats.
///
/// By default θ̂ⱼ = (Ŵⱼ, σ̂ⱼ) are posterior draws, p integrates Z out
/// analytically and ρⱼ = p(θ̂ⱼ)/q(θ̂ⱼ), giving an importance-sampling estimate
/// of the Bayesian marginal likelihood. The conditional likelihood also draws
/// Ẑⱼ; unweighted or prior draws use ρⱼ = 1.
inline double score_confounded_mc(const Matrix& joint, const PpcaPosterior& posterior,
                                  const ModelConfig& config, RngStream rng,
                                  const PpcaScoreOptions& options = {}) {
  const std::size_t n = joint.rows();
  const std::size_t d = joint.cols();
  const std::size_t k = posterior.latent_dim();
  if (posterior.loading_mean.cols() != d || posterior.factor_mean.rows() != n)
    throw DimensionError("score_confounded_mc: posterior does not match data shape");
  const bool marginal = options.likelihood == FactorLikelihood::Marginal;
  const bool from_posterior = options.sampling == ScoreSampling::Posterior;
  const bool weighted = from_posterior && options.weighting == ScoreWeighting::Importance;
  const auto nd = static_cast<double>(n * d);

  // Draws cover [W, Z, log σ] for the conditional density and [W, log σ]
  // for the marginal one; the importance ratio uses the same coordinates.
  MeanFieldGaussian q = posterior.to_mean_field();
  MeanFieldGaussian prior;
  {
    const std::size_t dim = q.dim();
    prior.mean.assign(dim, 0.0);
    prior.log_sd.assign(dim, 0.0);
    for (std::size_t i = 0; i < k * d; ++i) prior.log_sd[i] = std::log(config.sigma_w);
    for (std::size_t i = k * d; i + 1 < dim; ++i) prior.log_sd[i] = std::log(config.sigma_z);
  }
  if (marginal) {
    const auto z_first = static_cast<std::ptrdiff_t>(k * d);
    const auto z_last = static_cast<std::ptrdiff_t>(k * d + n * k);
    for (MeanFieldGaussian* g : {&q, &prior}) {
      g->mean.erase(g->mean.begin() + z_first, g->mean.begin() + z_last);
      g->log_sd.erase(g->log_sd.begin() + z_first, g->log_sd.begin() + z_last);
    }
  }
  const MeanFieldGaussian& proposal = from_posterior ? q : prior;
  const Matrix scatter = marginal ? gram(joint) : Matrix();

  std::vector<double> theta(proposal.dim());
  std::vector<double> log_terms(config.mc_samples);
  Matrix loadings(k, d);
  for (std::size_t j = 0; j < config.mc_samples; ++j) {
    proposal.sample(rng, theta);
    const double s = theta.back();
    double log_lik = 0.0;
    if (marginal) {
      std::copy_n(theta.begin(), k * d, loadings.values().begin());
      log_lik = ppca_marginal_loglik(scatter, n, loadings, std::exp(s));
    } else {
      const double* w = theta.data();
      const double* z = theta.data() + k * d;
      double rss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        auto di = joint.row(i);
        const double* zi = z + i * k;
        for (std::size_t c = 0; c < d; ++c) {
          double mean = 0.0;
          for (std::size_t l = 0; l < k; ++l) mean += zi[l] * w[l * d + c];
          const double r = di[c] - mean;
          rss += r * r;
        }
      }
      log_lik = -0.5 * nd * kLog2Pi - nd * s - 0.5 * std::exp(-2.0 * s) * rss;
    }
    if (weighted) log_lik += prior.log_density(theta) - q.log_density(theta);
    log_terms[j] = log_lik;
  }
  return -log_mean_exp(log_terms);
}

}  // namespace coca
