#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "coca/coca.hpp"
#include "coca/dataset.hpp"
#include "coca/errors.hpp"
#include "coca/numerics/distributions.hpp"
#include "coca/numerics/matrix.hpp"
#include "coca/numerics/rng.hpp"

namespace coca {

enum class GenKind { Causal, Confounded };

inline Label truth_label(GenKind k) { return k == GenKind::Causal ? Label::Causal : Label::Confounded; }

/// Recipe for one synthetic dataset.
struct GenSpec {
  GenKind kind = GenKind::Causal;
  std::size_t dim_x = 1;
  std::size_t dim_z = 1;  // Confounded only
  std::size_t n = 500;
  SourceDistribution p_x = SourceDistribution::Normal;
  SourceDistribution p_z = SourceDistribution::Normal;
  SourceDistribution p_w = SourceDistribution::Normal;
  std::uint64_t seed = 0;
  std::string name = "synthetic";
  /// Validation hook: force every mixing weight to zero.
  bool zero_weights = false;

  void validate() const {
    if (dim_x < 1) throw DomainError("GenSpec: dim_x must be >= 1");
    if (kind == GenKind::Confounded && dim_z < 1) throw DomainError("GenSpec: dim_z must be >= 1");
    if (n < 3) throw DomainError("GenSpec: n must be >= 3");
  }
};

namespace detail {
inline RngStream gen_stream(const GenSpec& spec, std::uint64_t part) {
  return RngStream(spec.seed, hash_name("synthgen")).split(part);
}
}  // namespace detail

struct CausalSample {
  DatasetPair pair;
  std::vector<double> weights;  // the w of Y = wᵗX + ε
};

/// Xᵢ ~ p_x, wᵢ ~ p_w (once per dataset), Y = wᵗX + ε with ε ~ N(0, 1).
inline CausalSample gen_causal_full(const GenSpec& spec) {
  spec.validate();
  if (spec.kind != GenKind::Causal) throw DomainError("gen_causal: spec kind is not Causal");
  RngStream xs = detail::gen_stream(spec, 0);
  RngStream ws = detail::gen_stream(spec, 1);
  RngStream noise = detail::gen_stream(spec, 2);
  Matrix x = sample_source(spec.p_x, spec.n, spec.dim_x, xs);
  std::vector<double> w(spec.dim_x, 0.0);
  if (!spec.zero_weights)
    for (double& v : w) v = draw(spec.p_w, ws);
  std::vector<double> y(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) y[i] = dot(x.row(i), w) + noise.normal();
  return {DatasetPair{spec.name, std::move(x), std::move(y), 1.0}, std::move(w)};
}

inline DatasetPair gen_causal(const GenSpec& spec) { return gen_causal_full(spec).pair; }

struct ConfoundedSample {
  DatasetPair pair;
  Matrix latents;   // Z, n×k
  Matrix loadings;  // W, k×(m+1)
};

/// Zⱼ ~ p_z, Wᵢⱼ ~ p_w (once per dataset), [X | Y] = Z·W + ε with ε ~ N(0, 1).
inline ConfoundedSample gen_confounded_full(const GenSpec& spec) {
  spec.validate();
  if (spec.kind != GenKind::Confounded) throw DomainError("gen_confounded: spec kind is not Confounded");
  RngStream zs = detail::gen_stream(spec, 0);
  RngStream ws = detail::gen_stream(spec, 1);
  RngStream noise = detail::gen_stream(spec, 2);
  const std::size_t d = spec.dim_x + 1;
  Matrix z = sample_source(spec.p_z, spec.n, spec.dim_z, zs);
  Matrix w = spec.zero_weights ? Matrix(spec.dim_z, d) : sample_source(spec.p_w, spec.dim_z, d, ws);
  Matrix joint = z * w;
  for (double& v : joint.values()) v += noise.normal();
  return {DatasetPair::from_joint(spec.name, joint), std::move(z), std::move(w)};
}

inline DatasetPair gen_confounded(const GenSpec& spec) { return gen_confounded_full(spec).pair; }

inline DatasetPair generate(const GenSpec& spec) {
  return spec.kind == GenKind::Causal ? gen_causal(spec) : gen_confounded(spec);
}

/// How source distributions are assigned across the datasets of a benchmark.
struct SourcePlan {
  enum class Mode { Fixed, Cycle, Random };
  Mode mode = Mode::Fixed;
  SourceDistribution fixed = SourceDistribution::Normal;

  /// "normal" | "laplace" | "lognormal" | "uniform" | "mixed" (cycle) | "random".
  static std::optional<SourcePlan> parse(std::string_view s) {
    if (s == "mixed") return SourcePlan{Mode::Cycle, SourceDistribution::Normal};
    if (s == "random") return SourcePlan{Mode::Random, SourceDistribution::Normal};
    if (auto d = parse_source(s)) return SourcePlan{Mode::Fixed, *d};
    return std::nullopt;
  }
};

/// A balanced synthetic benchmark: even indices causal, odd confounded.
struct BenchmarkSpec {
  std::size_t dim_x = 6;
  std::size_t dim_z = 3;
  std::size_t n = 500;
  std::size_t datasets = 200;
  SourcePlan sources{};
  std::uint64_t seed = 0;
  std::string prefix = "bench";
};

/// The recipe of dataset `index`; depends only on (spec, index).
inline GenSpec benchmark_dataset(const BenchmarkSpec& bench, std::size_t index) {
  GenSpec g;
  g.kind = index % 2 == 0 ? GenKind::Causal : GenKind::Confounded;
  g.dim_x = bench.dim_x;
  g.dim_z = bench.dim_z;
  g.n = bench.n;
  g.seed = mix64(bench.seed ^ mix64(hash_name(bench.prefix) + index));
  char buf[64];
  std::snprintf(buf, sizeof buf, "-%05zu", index);
  g.name = bench.prefix + buf;
  switch (bench.sources.mode) {
    case SourcePlan::Mode::Fixed:
      g.p_x = g.p_z = g.p_w = bench.sources.fixed;
      break;
    case SourcePlan::Mode::Cycle:
      // Pairs (2i, 2i+1) share a distribution, so both classes see all four.
      g.p_x = g.p_z = g.p_w = kAllSources[(index / 2) % kAllSources.size()];
      break;
    case SourcePlan::Mode::Random: {
      RngStream pick(g.seed, hash_name("sources"));
      g.p_x = kAllSources[pick.next_u32() % kAllSources.size()];
      g.p_z = kAllSources[pick.next_u32() % kAllSources.size()];
      g.p_w = kAllSources[pick.next_u32() % kAllSources.size()];
      break;
    }
  }
  return g;
}

}  // namespace coca
