#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "coca/dataio.hpp"
#include "coca/synthgen.hpp"
#include "test_util.hpp"

namespace {

using coca::Coding;
using coca::Label;
using coca::Verdict;

TEST(ReadPairTable, WhitespaceLastTarget) {
  test::TempDir dir("table");
  test::write_file(dir / "p.txt", "1 2\n2 4\n3 6\n");
  const auto pair = coca::read_pair_table(dir / "p.txt");
  EXPECT_EQ(pair.name, "p");
  ASSERT_EQ(pair.x.rows(), 3U);
  ASSERT_EQ(pair.x.cols(), 1U);
  EXPECT_EQ(pair.x.col(0), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(pair.y, (std::vector<double>{2, 4, 6}));
}

TEST(ReadPairTable, ExplicitTargetCommentsAndCrlf) {
  test::TempDir dir("table");
  test::write_file(dir / "q.csv", "# header comment\r\n1,10,100\r\n\r\n2,20,200\r\n3,30,300\r\n");
  const auto pair = coca::read_pair_table(dir / "q.csv", coca::Delimiter::Auto, coca::TargetColumn::at(0));
  EXPECT_EQ(pair.y, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(pair.x.cols(), 2U);
  EXPECT_EQ(pair.x(2, 1), 300.0);
  test::write_file(dir / "lf.csv", "# header comment\n1,10,100\n\n2,20,200\n3,30,300\n");
  const auto lf = coca::read_pair_table(dir / "lf.csv", coca::Delimiter::Auto, coca::TargetColumn::at(0));
  EXPECT_EQ(lf.x, pair.x);
  EXPECT_EQ(lf.y, pair.y);
}

TEST(ReadPairTable, NonNumericCellCitesRow) {
  test::TempDir dir("table");
  test::write_file(dir / "bad.txt", "1 2\nabc 4\n3 6\n");
  try {
    (void)coca::read_pair_table(dir / "bad.txt");
    FAIL() << "expected ParseError";
  } catch (const coca::ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 1"), std::string::npos) << msg;
  }
}

TEST(ReadPairTable, RejectsNonFiniteRaggedShortAndMissing) {
  test::TempDir dir("table");
  for (const char* cell : {"nan", "inf", "-Infinity", "1e999"}) {
    test::write_file(dir / "nf.txt", std::string("1 2\n2 ") + cell + "\n3 6\n");
    EXPECT_THROW(coca::read_pair_table(dir / "nf.txt"), coca::ParseError) << cell;
  }
  test::write_file(dir / "ragged.txt", "1 2\n2 4 5\n3 6\n");
  EXPECT_THROW(coca::read_pair_table(dir / "ragged.txt"), coca::ParseError);
  test::write_file(dir / "short.txt", "1 2\n2 4\n");
  EXPECT_THROW(coca::read_pair_table(dir / "short.txt"), coca::DegenerateInputError);
  test::write_file(dir / "one.txt", "1\n2\n3\n");
  EXPECT_THROW(coca::read_pair_table(dir / "one.txt"), coca::ParseError);
  EXPECT_THROW(coca::read_pair_table(dir / "short.txt", coca::Delimiter::Auto, coca::TargetColumn::at(5)),
               coca::DegenerateInputError);
  EXPECT_THROW(coca::read_pair_table(dir / "missing.txt"), coca::IoError);
}

TEST(PairTable, RoundTripIsExact) {
  test::TempDir dir("table");
  coca::GenSpec g;
  g.kind = coca::GenKind::Confounded;
  g.dim_x = 3;
  g.dim_z = 2;
  g.n = 60;
  g.p_x = g.p_z = g.p_w = coca::SourceDistribution::LogNormal;
  const auto pair = coca::generate(g);
  coca::write_pair_table(dir / "rt.csv", pair);
  const auto back = coca::read_pair_table(dir / "rt.csv");
  ASSERT_EQ(back.x.rows(), pair.x.rows());
  for (std::size_t i = 0; i < pair.x.size(); ++i) EXPECT_NEAR(back.x.values()[i], pair.x.values()[i], 1e-12);
  for (std::size_t i = 0; i < pair.n(); ++i) EXPECT_NEAR(back.y[i], pair.y[i], 1e-12);
  // %.17g is lossless.
  EXPECT_EQ(back.x, pair.x);
  EXPECT_EQ(back.y, pair.y);
}

TEST(ReadCoding, BundledDefault) {
  const auto entries = coca::read_coding(COCA_DEFAULT_CODING_FILE);
  ASSERT_EQ(entries.size(), 100U);
  auto coding_of = [&](const std::string& id) {
    for (const auto& e : entries)
      if (e.pair_id == id) return e.coding;
    ADD_FAILURE() << "missing id " << id;
    return Coding::Uncertain;
  };
  EXPECT_EQ(coding_of("65"), Coding::Confounded);
  EXPECT_EQ(coding_of("13"), Coding::Causal);
  EXPECT_EQ(coding_of("1"), Coding::Uncertain);
  int causal = 0;
  int confounded = 0;
  for (const auto& e : entries) {
    causal += e.coding == Coding::Causal ? 1 : 0;
    confounded += e.coding == Coding::Confounded ? 1 : 0;
  }
  EXPECT_EQ(confounded, 6);
  EXPECT_EQ(causal, 41);
}

TEST(ReadCoding, DuplicateUnknownAndCase) {
  test::TempDir dir("coding");
  test::write_file(dir / "dup.csv", "7,causal\n7,confounded\n");
  EXPECT_THROW(coca::read_coding(dir / "dup.csv"), coca::ParseError);
  test::write_file(dir / "dup0.csv", "7,causal\n007,causal\n");
  EXPECT_THROW(coca::read_coding(dir / "dup0.csv"), coca::ParseError);
  test::write_file(dir / "unk.csv", "7,probably\n");
  EXPECT_THROW(coca::read_coding(dir / "unk.csv"), coca::ParseError);
  test::write_file(dir / "ok.csv", "# c\n1,CAUSAL\r\n2, Confounded \n3,uncertain\n");
  const auto e = coca::read_coding(dir / "ok.csv");
  ASSERT_EQ(e.size(), 3U);
  EXPECT_EQ(e[0].coding, Coding::Causal);
  EXPECT_EQ(e[1].coding, Coding::Confounded);
  EXPECT_EQ(e[2].coding, Coding::Uncertain);
}

TEST(ReadPairMeta, ParsesAndValidates) {
  test::TempDir dir("meta");
  test::write_file(dir / "meta.txt", "0001 1 1 2 2 1\n0002 1 2 3 3 0.5\n");
  const auto meta = coca::read_pair_meta(dir / "meta.txt");
  ASSERT_EQ(meta.size(), 2U);
  EXPECT_EQ(meta[1].pair_id, "0002");
  EXPECT_EQ(meta[1].cause_width(), 2U);
  EXPECT_EQ(meta[1].weight, 0.5);
  for (const char* bad : {"0001 1 1 2 2\n", "0001 1 1 1 1 1\n", "0001 2 1 3 3 1\n", "0001 1 1 2 2 0\n",
                          "0001 0 1 2 2 1\n"}) {
    test::write_file(dir / "bad.txt", bad);
    EXPECT_THROW(coca::read_pair_meta(dir / "bad.txt"), coca::ParseError) << bad;
  }
}

TEST(LoadCorpus, FiltersByCodingAndEffectWidth) {
  test::TempDir dir("corpus");
  test::write_file(dir / "pair0001.txt", "1 2\n2 3\n3 5\n4 4\n");
  test::write_file(dir / "pair0002.txt", "1 2 3\n2 3 1\n3 5 2\n4 4 4\n");
  test::write_file(dir / "pair0003.txt", "1 2 3\n2 3 1\n3 5 2\n4 4 4\n");
  test::write_file(dir / "pair0004.txt", "1 2\n2 3\n3 5\n4 4\n");
  const std::vector<coca::PairMetaEntry> meta{
      {"0001", 1, 1, 2, 2, 1.0}, {"0002", 1, 2, 3, 3, 0.5}, {"0003", 1, 1, 2, 3, 1.0}, {"0004", 1, 1, 2, 2, 1.0}};
  const std::vector<coca::CodingEntry> coding{
      {"1", Coding::Causal}, {"2", Coding::Confounded}, {"3", Coding::Causal}, {"4", Coding::Uncertain}};
  const auto corpus = coca::load_corpus(dir.path(), meta, coding);
  ASSERT_EQ(corpus.pairs.size(), 2U);
  EXPECT_EQ(corpus.pairs[0].pair.name, "pair0001");
  EXPECT_EQ(corpus.pairs[0].truth, Label::Causal);
  EXPECT_EQ(corpus.pairs[1].pair.m(), 2U);
  EXPECT_EQ(corpus.pairs[1].pair.weight, 0.5);
  EXPECT_EQ(corpus.pairs[1].truth, Label::Confounded);
  ASSERT_EQ(corpus.warnings.size(), 1U);
  EXPECT_NE(corpus.warnings[0].find("0003"), std::string::npos);
}

TEST(WriteResults, EmptyIsHeaderOnly) {
  test::TempDir dir("results");
  coca::write_results(dir / "r.csv", {});
  EXPECT_EQ(test::read_file(dir / "r.csv"), std::string(coca::kResultsHeader) + "\n");
  EXPECT_TRUE(coca::read_results(dir / "r.csv").empty());
}

TEST(WriteResults, ConfoundedExampleRecord) {
  std::ostringstream out;
  coca::write_results(out, {{"ex", Verdict::from_lengths({100.0, 80.0}), 1.0}});
  EXPECT_EQ(out.str(), std::string(coca::kResultsHeader) + "\nex,100,80,-0.20000000000000001,confounded,1\n");
}

TEST(WriteResults, RoundTripSortedByName) {
  test::TempDir dir("results");
  std::vector<coca::ResultRecord> records{{"zeta", Verdict::from_lengths({1234.5678901, 1200.1}), 0.25},
                                          {"alpha", Verdict::from_lengths({3.0 / 7.0, 1.0 / 3.0}), 1.0},
                                          {"mid", Verdict::from_lengths({10.0, 10.0}), 2.0}};
  coca::write_results(dir / "r.csv", records);
  const auto back = coca::read_results(dir / "r.csv");
  ASSERT_EQ(back.size(), 3U);
  EXPECT_EQ(back[0].name, "alpha");
  EXPECT_EQ(back[1].name, "mid");
  EXPECT_EQ(back[1].verdict.label(), Label::Undecided);
  EXPECT_EQ(back[2].name, "zeta");
  EXPECT_NEAR(back[2].verdict.lengths().l_causal, 1234.5678901, 1e-12);
  EXPECT_NEAR(back[2].verdict.confidence(), records[0].verdict.confidence(), 1e-12);
  EXPECT_NEAR(back[0].verdict.lengths().l_confounded, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(back[2].weight, 0.25);
}

TEST(WriteResults, JsonMirror) {
  const auto j = coca::results_to_json({{"b", Verdict::from_lengths({100.0, 120.0}), 1.0},
                                        {"a", Verdict::from_lengths({100.0, 80.0}), 2.0}});
  ASSERT_EQ(j.size(), 2U);
  EXPECT_EQ(j[0]["name"], "a");
  EXPECT_EQ(j[0]["label"], "confounded");
  EXPECT_DOUBLE_EQ(j[1]["confidence"].get<double>(), 1.0 / 6.0);
}

TEST(ReadResults, RejectsInconsistentRows) {
  test::TempDir dir("results");
  test::write_file(dir / "bad.csv", std::string(coca::kResultsHeader) + "\nx,1,2,0.5,confounded,1\n");
  EXPECT_THROW(coca::read_results(dir / "bad.csv"), coca::ParseError);
  test::write_file(dir / "hdr.csv", "name,foo\n");
  EXPECT_THROW(coca::read_results(dir / "hdr.csv"), coca::ParseError);
  EXPECT_THROW(coca::write_results(dir.path() / "nope" / "r.csv", {}), coca::IoError);
}

}  // namespace
