#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coca/coca.hpp"
#include "coca/errors.hpp"
#include "coca/parallel.hpp"
#include "coca/synthgen.hpp"

namespace coca {

/// A verdict together with the ground truth it is judged against.
struct LabeledVerdict {
  std::string name;
  Verdict verdict;
  Label truth;  // Causal or Confounded
  double weight = 1.0;

  /// Undecided never counts as correct.
  bool correct() const noexcept { return verdict.label() == truth; }
};

struct DrPoint {
  double rate = 0.0;
  double accuracy = 0.0;
};

/// Decision-rate curve: weighted accuracy over the top-j most confident items.
struct DrCurve {
  std::vector<DrPoint> points;
  double audr = 0.0;
};

/// Indices of `items` in decision order: |C| descending, ties by name,
/// Undecided verdicts last.
inline std::vector<std::size_t> decision_order(std::span<const LabeledVerdict> items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& va = items[a];
    const auto& vb = items[b];
    const bool ua = va.verdict.label() == Label::Undecided;
    const bool ub = vb.verdict.label() == Label::Undecided;
    if (ua != ub) return ub;
    const double ca = std::abs(va.verdict.confidence());
    const double cb = std::abs(vb.verdict.confidence());
    if (ca != cb) return ca > cb;
    return va.name < vb.name;
  });
  return order;
}

/// Accumulated in decision order, so it equals the curve's last point exactly.
inline double weighted_accuracy(std::span<const LabeledVerdict> items) {
  double hit = 0.0;
  double total = 0.0;
  for (std::size_t idx : decision_order(items)) {
    const auto& it = items[idx];
    total += it.weight;
    if (it.correct()) hit += it.weight;
  }
  return total > 0.0 ? hit / total : 0.0;
}

/// Share of total weight held by the heavier truth class.
inline double weighted_majority_baseline(std::span<const LabeledVerdict> items) {
  double causal = 0.0;
  double total = 0.0;
  for (const auto& it : items) {
    total += it.weight;
    if (it.truth == Label::Causal) causal += it.weight;
  }
  return total > 0.0 ? std::max(causal, total - causal) / total : 0.0;
}

inline DrCurve decision_rate_curve(std::span<const LabeledVerdict> items) {
  if (items.empty()) throw DomainError("decision_rate_curve: no verdicts");
  for (const auto& it : items)
    if (!(it.weight > 0.0)) throw DomainError("decision_rate_curve: weights must be positive");
  const auto order = decision_order(items);
  const std::size_t count = items.size();
  DrCurve curve;
  curve.points.reserve(count);
  double hit = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const auto& it = items[order[j]];
    total += it.weight;
    if (it.correct()) hit += it.weight;
    curve.points.push_back({static_cast<double>(j + 1) / static_cast<double>(count), hit / total});
  }
  if (count == 1) {
    curve.audr = curve.points.front().accuracy;
  } else {
    // Trapezoids over rate ∈ [1/J, 1], rescaled to unit width.
    double area = 0.0;
    for (std::size_t j = 0; j + 1 < count; ++j)
      area += 0.5 * (curve.points[j].accuracy + curve.points[j + 1].accuracy);
    curve.audr = area / static_cast<double>(count - 1);
  }
  return curve;
}

/// Weighted accuracy over the most confident `fraction` of items.
inline double accuracy_at_rate(const DrCurve& curve, double fraction) {
  if (curve.points.empty()) throw DomainError("accuracy_at_rate: empty curve");
  const auto count = static_cast<double>(curve.points.size());
  const auto j = static_cast<std::size_t>(std::max(1.0, std::ceil(fraction * count - 1e-9)));
  return curve.points[std::min(j, curve.points.size()) - 1].accuracy;
}

/// Two-sided 95% normal-approximation band of a Binomial(n, p0) proportion.
inline std::pair<double, double> binomial_band(std::size_t n_decisions, double p0 = 0.5) {
  if (n_decisions < 1) throw DomainError("binomial_band: need at least one decision");
  const double half = 1.96 * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n_decisions));
  return {std::clamp(p0 - half, 0.0, 1.0), std::clamp(p0 + half, 0.0, 1.0)};
}

/// Signature of the per-dataset decision used by the benchmark drivers.
using InferFn = std::function<Verdict(const DatasetPair&, const ModelConfig&, std::uint64_t)>;

inline Verdict default_infer(const DatasetPair& pair, const ModelConfig& config, std::uint64_t seed) {
  return infer_or_undecided(pair, config, seed);
}

/// Generates and scores every dataset of a balanced benchmark. Results are
/// in dataset-index order and independent of `workers`.
inline std::vector<LabeledVerdict> run_benchmark(const BenchmarkSpec& bench, const ModelConfig& config,
                                                 std::size_t workers,
                                                 const InferFn& fn = default_infer) {
  return parallel_map(bench.datasets, workers, [&](std::size_t i) {
    const GenSpec g = benchmark_dataset(bench, i);
    const DatasetPair pair = generate(g);
    return LabeledVerdict{pair.name, fn(pair, config, bench.seed), truth_label(g.kind), 1.0};
  });
}

/// Settings of an AUDR sweep over (dim_x, dim_z).
struct SweepSpec {
  std::vector<std::size_t> dims_x{2, 6, 10};
  std::vector<std::size_t> dims_z{2, 6, 10};
  std::size_t per_cell = 200;
  std::size_t n = 500;
  SourcePlan sources{};
  std::uint64_t seed = 0;
};

struct AudrGrid {
  std::vector<std::size_t> dims_x;
  std::vector<std::size_t> dims_z;
  Matrix audr;  // rows follow dims_x, columns dims_z
  std::vector<std::vector<LabeledVerdict>> cells;  // row-major over (dim_x, dim_z)
};

inline BenchmarkSpec sweep_cell(const SweepSpec& sweep, std::size_t dim_x, std::size_t dim_z) {
  BenchmarkSpec b;
  b.dim_x = dim_x;
  b.dim_z = dim_z;
  b.n = sweep.n;
  b.datasets = sweep.per_cell;
  b.sources = sweep.sources;
  b.seed = sweep.seed;
  b.prefix = "cell-x" + std::to_string(dim_x) + "-z" + std::to_string(dim_z);
  return b;
}

/// AUDR of per_cell balanced datasets for every (dim_x, dim_z) cell.
inline AudrGrid audr_grid(const SweepSpec& sweep, const ModelConfig& config, std::size_t workers,
                          const InferFn& fn = default_infer) {
  if (sweep.per_cell < 2 || sweep.per_cell % 2 != 0)
    throw DomainError("audr_grid: per_cell must be even and >= 2");
  const std::size_t nx = sweep.dims_x.size();
  const std::size_t nz = sweep.dims_z.size();
  const std::size_t cells = nx * nz;
  // One flat task list so workers stay busy across cell boundaries.
  auto flat = parallel_map(cells * sweep.per_cell, workers, [&](std::size_t t) {
    const std::size_t cell = t / sweep.per_cell;
    const std::size_t dx = sweep.dims_x[cell / nz];
    const std::size_t dz = sweep.dims_z[cell % nz];
    const BenchmarkSpec b = sweep_cell(sweep, dx, dz);
    const GenSpec g = benchmark_dataset(b, t % sweep.per_cell);
    const DatasetPair pair = generate(g);
    try {
      return LabeledVerdict{pair.name, fn(pair, config, sweep.seed), truth_label(g.kind), 1.0};
    } catch (const Error&) {
      rethrow_with_context("cell (dim_x=" + std::to_string(dx) + ", dim_z=" + std::to_string(dz) +
                           "): ");
    }
  });
  AudrGrid grid{sweep.dims_x, sweep.dims_z, Matrix(nx, nz), {}};
  grid.cells.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    auto first = flat.begin() + static_cast<std::ptrdiff_t>(c * sweep.per_cell);
    grid.cells[c].assign(first, first + static_cast<std::ptrdiff_t>(sweep.per_cell));
    grid.audr(c / nz, c % nz) = decision_rate_curve(grid.cells[c]).audr;
  }
  return grid;
}

}  // namespace coca
