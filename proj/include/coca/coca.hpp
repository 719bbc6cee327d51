#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "coca/dataset.hpp"
#include "coca/errors.hpp"
#include "coca/models/causal.hpp"
#include "coca/models/config.hpp"
#include "coca/models/ppca.hpp"
#include "coca/numerics/rng.hpp"
#include "coca/numerics/standardize.hpp"

namespace coca {

/// Code lengths of the two model classes, in nats.
struct CodeLengths {
  double l_causal = 0.0;
  double l_confounded = 0.0;
};

enum class Label { Causal, Confounded, Undecided };

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::Causal: return "causal";
    case Label::Confounded: return "confounded";
    case Label::Undecided: return "undecided";
  }
  return "undecided";
}

inline std::optional<Label> parse_label(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (Label l : {Label::Causal, Label::Confounded, Label::Undecided})
    if (to_string(l) == lower) return l;
  return std::nullopt;
}

/// C = (L_co − L_ca) / max(L_co, L_ca). Positive favours the causal model.
inline double confidence(const CodeLengths& lengths) {
  if (!std::isfinite(lengths.l_causal) || !std::isfinite(lengths.l_confounded))
    throw DomainError("confidence: code lengths must be finite");
  const double denom = std::max(lengths.l_confounded, lengths.l_causal);
  if (!(denom > 0.0))
    throw DegenerateInputError("confidence: the larger code length must be positive");
  return (lengths.l_confounded - lengths.l_causal) / denom;
}

inline Label label_for(double c) {
  if (c > 0.0) return Label::Causal;
  if (c < 0.0) return Label::Confounded;
  return Label::Undecided;
}

/// Outcome of one decision. The label always agrees with the sign of C.
class Verdict {
 public:
  Verdict(CodeLengths lengths, double confidence, Label label)
      : lengths_(lengths), confidence_(confidence), label_(label) {
    if (label_for(confidence_) != label_)
      throw DomainError("Verdict: label disagrees with the sign of the confidence");
  }

  static Verdict from_lengths(const CodeLengths& lengths) {
    const double c = coca::confidence(lengths);
    return {lengths, c, label_for(c)};
  }

  const CodeLengths& lengths() const noexcept { return lengths_; }
  double confidence() const noexcept { return confidence_; }
  Label label() const noexcept { return label_; }

 private:
  CodeLengths lengths_;
  double confidence_;
  Label label_;
};

/// Stream ids used by one inference, derived from (seed, dataset name).
struct InferStreams {
  RngStream fit_causal;
  RngStream fit_confounded;
  RngStream score_causal;
  RngStream score_confounded;

  static InferStreams derive(std::uint64_t seed, std::string_view name) {
    const RngStream root(seed, hash_name(name));
    return {root.split(0), root.split(1), root.split(2), root.split(3)};
  }
};

namespace detail {

template <class F>
auto with_dataset_name(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const Error&) {
    rethrow_with_context("dataset '" + name + "': ");
  }
}

}  // namespace detail

/// Both code lengths for a pair: standardizes [X | Y] column-wise, fits the
/// causal and the factor model, then scores each with `mc_samples` draws.
inline CodeLengths code_lengths(const DatasetPair& pair, const ModelConfig& config,
                                std::uint64_t seed) {
  config.validate();
  pair.validate();
  return detail::with_dataset_name(pair.name, [&] {
    check_not_underdetermined(pair.n(), pair.m(), "infer");
    const Matrix joint = standardize(pair.joint()).first;
    const DatasetPair standardized = DatasetPair::from_joint(pair.name, joint, pair.weight);
    const InferStreams streams = InferStreams::derive(seed, pair.name);

    const CausalPosterior causal = fit_causal(standardized, config, streams.fit_causal);
    const PpcaPosterior confounded = fit_ppca(joint, config, streams.fit_confounded);
    return CodeLengths{score_causal_mc(standardized, causal, config, streams.score_causal),
                       score_confounded_mc(joint, confounded, config, streams.score_confounded)};
  });
}

/// Decides whether X causes Y or both share a hidden confounder.
inline Verdict infer(const DatasetPair& pair, const ModelConfig& config, std::uint64_t seed) {
  const CodeLengths lengths = code_lengths(pair, config, seed);
  return detail::with_dataset_name(pair.name, [&] { return Verdict::from_lengths(lengths); });
}

/// True when neither code length is positive, so C is undefined.
inline bool no_positive_length(const CodeLengths& l) {
  return !(std::max(l.l_causal, l.l_confounded) > 0.0);
}

/// Batch form of infer: a pair with no positive code length is kept as
/// Undecided instead of aborting the whole run.
inline Verdict infer_or_undecided(const DatasetPair& pair, const ModelConfig& config, std::uint64_t seed) {
  const CodeLengths lengths = code_lengths(pair, config, seed);
  if (no_positive_length(lengths) && std::isfinite(lengths.l_causal) && std::isfinite(lengths.l_confounded))
    return {lengths, 0.0, Label::Undecided};
  return detail::with_dataset_name(pair.name, [&] { return Verdict::from_lengths(lengths); });
}

}  // namespace coca
