#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coca/errors.hpp"
#include "coca/models/config.hpp"
#include "coca/numerics/gaussian.hpp"
#include "coca/numerics/matrix.hpp"
#include "coca/numerics/rng.hpp"

namespace coca {

/// A differentiable unnormalized log joint log p(data, θ) over a flat θ.
template <class M>
concept LogJointModel = requires(const M& m, std::span<const double> theta, std::span<double> grad) {
  { m.dim() } -> std::convertible_to<std::size_t>;
  { m.log_joint(theta, grad) } -> std::convertible_to<double>;
};

/// Mean-field Gaussian q(θ) = Π N(θᵢ; meanᵢ, exp(log_sdᵢ)²).
struct MeanFieldGaussian {
  std::vector<double> mean;
  std::vector<double> log_sd;

  std::size_t dim() const noexcept { return mean.size(); }

  /// θ = mean + exp(log_sd)·ε for a standard-normal ε.
  void transform(std::span<const double> eps, std::span<double> theta) const {
    for (std::size_t i = 0; i < mean.size(); ++i) theta[i] = mean[i] + std::exp(log_sd[i]) * eps[i];
  }

  void sample(RngStream& rng, std::span<double> theta) const {
    for (std::size_t i = 0; i < mean.size(); ++i)
      theta[i] = mean[i] + std::exp(log_sd[i]) * rng.normal();
  }

  /// log q(θ).
  double log_density(std::span<const double> theta) const {
    double lp = -0.5 * static_cast<double>(mean.size()) * kLog2Pi;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double z = (theta[i] - mean[i]) * std::exp(-log_sd[i]);
      lp -= log_sd[i] + 0.5 * z * z;
    }
    return lp;
  }

  double entropy() const {
    double h = 0.5 * static_cast<double>(mean.size()) * (1.0 + kLog2Pi);
    for (double l : log_sd) h += l;
    return h;
  }
};

/// Reparameterized ELBO estimate for fixed noise ε (one row per draw).
///
/// Returns (1/S)·Σₛ log p(data, mean + exp(log_sd)·εₛ) + H[q]. When the
/// gradient spans are non-empty they receive ∂/∂mean and ∂/∂log_sd of that
/// same estimate, so central differences over (mean, log_sd) with ε held
/// fixed reproduce them.
template <LogJointModel Model>
double elbo_estimate(const Model& model, const MeanFieldGaussian& q, const Matrix& noise,
                     std::span<double> grad_mean = {}, std::span<double> grad_log_sd = {}) {
  const std::size_t dim = q.dim();
  const std::size_t draws = noise.rows();
  const bool want_grad = !grad_mean.empty();
  std::vector<double> theta(dim);
  std::vector<double> g(dim);
  std::vector<double> sd(dim);
  for (std::size_t i = 0; i < dim; ++i) sd[i] = std::exp(q.log_sd[i]);
  if (want_grad) {
    std::fill(grad_mean.begin(), grad_mean.end(), 0.0);
    std::fill(grad_log_sd.begin(), grad_log_sd.end(), 0.0);
  }
  double total = 0.0;
  const double inv = 1.0 / static_cast<double>(draws);
  for (std::size_t s = 0; s < draws; ++s) {
    auto eps = noise.row(s);
    for (std::size_t i = 0; i < dim; ++i) theta[i] = q.mean[i] + sd[i] * eps[i];
    total += model.log_joint(theta, want_grad ? std::span<double>(g) : std::span<double>());
    if (want_grad) {
      for (std::size_t i = 0; i < dim; ++i) {
        grad_mean[i] += inv * g[i];
        grad_log_sd[i] += inv * g[i] * sd[i] * eps[i];
      }
    }
  }
  if (want_grad)
    for (double& v : grad_log_sd) v += 1.0;
  return total * inv + q.entropy();
}

/// Windowed ELBO record of one optimization run.
struct FitTrace {
  std::vector<double> window_means;  // mean ELBO of each completed window
  std::size_t steps = 0;
  bool converged = false;
};

/// Adam ascent on the ELBO, stopping on a small relative change between
/// consecutive window averages or after `max_steps`.
template <LogJointModel Model>
MeanFieldGaussian maximize_elbo(const Model& model, MeanFieldGaussian q, const ViSettings& vi,
                                RngStream& rng, FitTrace* trace = nullptr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const std::size_t dim = q.dim();
  const std::size_t n_params = 2 * dim;
  std::vector<double> grad(n_params);
  std::vector<double> m1(n_params, 0.0);
  std::vector<double> m2(n_params, 0.0);
  Matrix noise(vi.mc_grad_samples, dim);
  std::span<double> grad_mean(grad.data(), dim);
  std::span<double> grad_log_sd(grad.data() + dim, dim);

  FitTrace local;
  FitTrace& tr = trace != nullptr ? *trace : local;
  tr = FitTrace{};

  double window_sum = 0.0;
  std::size_t in_window = 0;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  for (std::size_t step = 0; step < vi.max_steps; ++step) {
    for (double& e : noise.values()) e = rng.normal();
    const double elbo = elbo_estimate(model, q, noise, grad_mean, grad_log_sd);
    bool finite = std::isfinite(elbo);
    for (double v : grad) finite = finite && std::isfinite(v);
    if (!finite) {
      throw DivergenceError("ELBO became non-finite at step " + std::to_string(step), step);
    }

    beta1_pow *= kBeta1;
    beta2_pow *= kBeta2;
    const double lr = vi.step_size * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
    for (std::size_t i = 0; i < n_params; ++i) {
      m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * grad[i];
      m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      const double delta = lr * m1[i] / (std::sqrt(m2[i]) + kEps);
      if (i < dim)
        q.mean[i] += delta;
      else
        q.log_sd[i - dim] += delta;
    }

    tr.steps = step + 1;
    window_sum += elbo;
    if (++in_window == vi.convergence_window) {
      const double avg = window_sum / static_cast<double>(in_window);
      tr.window_means.push_back(avg);
      window_sum = 0.0;
      in_window = 0;
      const std::size_t w = tr.window_means.size();
      if (w >= 2) {
        const double prev = tr.window_means[w - 2];
        if (std::abs(avg - prev) < vi.rel_tol * std::abs(prev)) {
          tr.converged = true;
          break;
        }
      }
    }
  }
  return q;
}

}  // namespace coca
