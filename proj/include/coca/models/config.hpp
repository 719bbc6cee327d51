#pragma once

#include <cstddef>

#include "coca/errors.hpp"

namespace coca {

/// Settings of the stochastic-gradient ELBO maximizer.
struct ViSettings {
  double step_size = 0.01;
  std::size_t max_steps = 10000;
  std::size_t mc_grad_samples = 8;
  std::size_t convergence_window = 100;
  double rel_tol = 1e-4;
};

/// Which distribution the Monte-Carlo code-length estimators draw from.
enum class ScoreSampling {
  Posterior,  // the fitted variational posterior (default)
  Prior,      // the model prior; validation against closed forms only
};

/// How Monte-Carlo draws are combined into a code length.
enum class ScoreWeighting {
  /// −log N⁻¹ Σⱼ p(D|θⱼ)·p(θⱼ)/q(θⱼ): an importance-sampling estimate of the
  /// Bayesian marginal likelihood with q as proposal (default).
  Importance,
  /// −log N⁻¹ Σⱼ p(D|θⱼ): plain average of the likelihood over q draws.
  Unweighted,
};

struct ModelConfig {
  double sigma_z = 1.0;
  double sigma_w = 1.0;
  std::size_t latent_dim = 1;
  std::size_t mc_samples = 500;
  ViSettings vi{};

  void validate() const {
    if (!(sigma_z > 0.0) || !(sigma_w > 0.0)) throw DomainError("ModelConfig: prior scales must be positive");
    if (latent_dim < 1) throw DomainError("ModelConfig: latent_dim must be >= 1");
    if (mc_samples < 1) throw DomainError("ModelConfig: mc_samples must be >= 1");
    if (!(vi.step_size > 0.0) || !(vi.rel_tol > 0.0))
      throw DomainError("ModelConfig: step_size and rel_tol must be positive");
    if (vi.mc_grad_samples < 1 || vi.convergence_window < 1 || vi.max_steps < 1)
      throw DomainError("ModelConfig: VI counts must be >= 1");
  }
};

}  // namespace coca
