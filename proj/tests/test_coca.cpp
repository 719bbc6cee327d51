#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "coca/coca.hpp"
#include "coca/synthgen.hpp"

namespace {

using coca::CodeLengths;
using coca::Label;
using coca::Verdict;

TEST(Confidence, HandExamples) {
  EXPECT_EQ(coca::confidence({100.0, 100.0}), 0.0);
  EXPECT_NEAR(coca::confidence({100.0, 80.0}), -0.2, 1e-15);
  EXPECT_NEAR(coca::confidence({100.0, 120.0}), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(Verdict::from_lengths({100.0, 80.0}).label(), Label::Confounded);
  EXPECT_EQ(Verdict::from_lengths({100.0, 120.0}).label(), Label::Causal);
}

TEST(Confidence, EqualLengthsAreUndecided) {
  const Verdict v = Verdict::from_lengths({42.5, 42.5});
  EXPECT_EQ(v.label(), Label::Undecided);
  EXPECT_EQ(v.confidence(), 0.0);
}

TEST(Confidence, BoundedForPositiveLengths) {
  for (double a : {1e-3, 0.5, 3.0, 1e6})
    for (double b : {1e-3, 0.5, 3.0, 1e6}) EXPECT_LE(std::abs(coca::confidence({a, b})), 1.0);
}

TEST(Confidence, NonPositiveMaximumIsDegenerate) {
  EXPECT_THROW(coca::confidence({-1.0, -2.0}), coca::DegenerateInputError);
  EXPECT_THROW(coca::confidence({0.0, 0.0}), coca::DegenerateInputError);
}

TEST(Verdict, ConstructorEnforcesSignLabelCoupling) {
  EXPECT_THROW(Verdict({1.0, 2.0}, 0.5, Label::Confounded), coca::DomainError);
  EXPECT_THROW(Verdict({1.0, 1.0}, 0.0, Label::Causal), coca::DomainError);
  EXPECT_NO_THROW(Verdict({1.0, 2.0}, 0.5, Label::Causal));
}

TEST(Label, ParseIsCaseInsensitive) {
  EXPECT_EQ(coca::parse_label("Causal"), Label::Causal);
  EXPECT_EQ(coca::parse_label("CONFOUNDED"), Label::Confounded);
  EXPECT_EQ(coca::parse_label("undecided"), Label::Undecided);
  EXPECT_FALSE(coca::parse_label("maybe").has_value());
  for (Label l : {Label::Causal, Label::Confounded, Label::Undecided})
    EXPECT_EQ(coca::parse_label(coca::to_string(l)), l);
}

coca::GenSpec spec(coca::GenKind kind, std::uint64_t seed) {
  coca::GenSpec g;
  g.kind = kind;
  g.dim_x = 6;
  g.dim_z = 3;
  g.n = 500;
  g.seed = seed;
  g.name = "majority-" + std::to_string(seed);
  return g;
}

int count_label(coca::GenKind kind, Label want) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s)
    if (coca::infer(coca::generate(spec(kind, 1000 + s)), coca::ModelConfig{}, s).label() == want) ++hits;
  return hits;
}

TEST(Infer, CausalGeneratorIsCalledCausal) {
  EXPECT_GE(count_label(coca::GenKind::Causal, Label::Causal), 18);
}

TEST(Infer, ConfoundedGeneratorIsCalledConfounded) {
  EXPECT_GE(count_label(coca::GenKind::Confounded, Label::Confounded), 18);
}

TEST(Infer, BitwiseDeterministic) {
  const auto pair = coca::generate(spec(coca::GenKind::Confounded, 7));
  const CodeLengths a = coca::code_lengths(pair, coca::ModelConfig{}, 3);
  const CodeLengths b = coca::code_lengths(pair, coca::ModelConfig{}, 3);
  EXPECT_EQ(a.l_causal, b.l_causal);
  EXPECT_EQ(a.l_confounded, b.l_confounded);
  const CodeLengths c = coca::code_lengths(pair, coca::ModelConfig{}, 4);
  EXPECT_NE(a.l_causal, c.l_causal);
}

TEST(Infer, AffineColumnMapsLeaveConfidenceUnchanged) {
  auto pair = coca::generate(spec(coca::GenKind::Causal, 8));
  const double before = coca::infer(pair, coca::ModelConfig{}, 5).confidence();
  for (std::size_t i = 0; i < pair.n(); ++i) {
    pair.x(i, 0) = 3.7 * pair.x(i, 0) + 12.5;
    pair.x(i, 4) = 0.01 * pair.x(i, 4);
    pair.y[i] = 250.0 * pair.y[i] - 4.0;
  }
  EXPECT_NEAR(coca::infer(pair, coca::ModelConfig{}, 5).confidence(), before, 1e-8);
}

TEST(Infer, UnderdeterminedPairIsDegenerateAndNamed) {
  coca::GenSpec g = spec(coca::GenKind::Causal, 9);
  g.n = 8;
  g.name = "tiny-pair";
  try {
    (void)coca::infer(coca::generate(g), coca::ModelConfig{}, 0);
    FAIL() << "expected DegenerateInputError";
  } catch (const coca::DegenerateInputError& e) {
    EXPECT_NE(std::string(e.what()).find("tiny-pair"), std::string::npos);
  }
}

TEST(Infer, ConstantColumnIsDegenerate) {
  auto pair = coca::generate(spec(coca::GenKind::Causal, 10));
  for (std::size_t i = 0; i < pair.n(); ++i) pair.x(i, 2) = 1.0;
  EXPECT_THROW(coca::infer(pair, coca::ModelConfig{}, 0), coca::DegenerateInputError);
}

TEST(Infer, NearDeterministicPairIsUndecidedInBatchForm) {
  coca::GenSpec g = spec(coca::GenKind::Causal, 12);
  g.dim_x = 1;
  g.n = 100;
  auto pair = coca::generate(g);
  coca::RngStream rng(12, 1);
  for (std::size_t i = 0; i < pair.n(); ++i) pair.y[i] = 2.0 * pair.x(i, 0) + 1e-6 * rng.normal();
  const coca::CodeLengths l = coca::code_lengths(pair, coca::ModelConfig{}, 0);
  ASSERT_TRUE(coca::no_positive_length(l)) << l.l_causal << " " << l.l_confounded;
  EXPECT_THROW(coca::infer(pair, coca::ModelConfig{}, 0), coca::DegenerateInputError);
  const Verdict v = coca::infer_or_undecided(pair, coca::ModelConfig{}, 0);
  EXPECT_EQ(v.label(), Label::Undecided);
  EXPECT_EQ(v.confidence(), 0.0);
  EXPECT_EQ(v.lengths().l_causal, l.l_causal);
}

TEST(Infer, InvalidConfigIsRejected) {
  const auto pair = coca::generate(spec(coca::GenKind::Causal, 11));
  coca::ModelConfig cfg;
  cfg.mc_samples = 0;
  EXPECT_THROW(coca::infer(pair, cfg, 0), coca::DomainError);
  cfg = {};
  cfg.sigma_w = -1.0;
  EXPECT_THROW(coca::infer(pair, cfg, 0), coca::DomainError);
}

TEST(InferStreams, DependOnSeedAndName) {
  auto a = coca::InferStreams::derive(1, "x");
  auto b = coca::InferStreams::derive(1, "x");
  auto c = coca::InferStreams::derive(1, "y");
  auto d = coca::InferStreams::derive(2, "x");
  const auto va = a.fit_causal.next_u64();
  EXPECT_EQ(va, b.fit_causal.next_u64());
  EXPECT_NE(va, c.fit_causal.next_u64());
  EXPECT_NE(va, d.fit_causal.next_u64());
  EXPECT_NE(va, a.fit_confounded.next_u64());
}

}  // namespace
