#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coca/coca.hpp"
#include "coca/dataset.hpp"
#include "coca/errors.hpp"
#include "coca/evalkit.hpp"
#include "coca/numerics/matrix.hpp"

namespace coca {

namespace io_detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Lines of a text file with CR stripped, paired with 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in || std::filesystem::is_directory(path)) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.emplace_back(number, std::move(line));
  }
  return lines;
}

inline bool is_blank_or_comment(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

inline std::vector<std::string_view> split_fields(std::string_view line, bool comma) {
  std::vector<std::string_view> out;
  if (comma) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  } else {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) out.push_back(line.substr(start, i - start));
    }
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Canonical pair id: leading zeros stripped ("0065" → "65").
inline std::string canonical_id(std::string_view id) {
  id = trim(id);
  const auto nz = id.find_first_not_of('0');
  if (nz == std::string_view::npos) return id.empty() ? std::string{} : std::string("0");
  return std::string(id.substr(nz));
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

inline void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace io_detail

enum class Delimiter { Auto, Comma, Whitespace };

/// Numeric table: comma or whitespace separated, '#' comment lines and
/// blank lines ignored, LF or CRLF endings. Every cell must be finite.
inline Matrix read_table(const std::filesystem::path& path, Delimiter delimiter = Delimiter::Auto) {
  using namespace io_detail;
  const auto lines = read_lines(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  for (const auto& [number, text] : lines) {
    if (is_blank_or_comment(text)) continue;
    const bool comma = delimiter == Delimiter::Comma ||
                       (delimiter == Delimiter::Auto && text.find(',') != std::string::npos);
    const auto fields = split_fields(text, comma);
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) {
      throw ParseError(path.string() + ": row " + std::to_string(number) + " has " +
                       std::to_string(fields.size()) + " columns, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_double(fields[c]);
      if (!v) {
        throw ParseError(path.string() + ": row " + std::to_string(number) + ", column " +
                         std::to_string(c + 1) + ": not a number: '" + std::string(fields[c]) + "'");
      }
      if (!std::isfinite(*v)) {
        throw ParseError(path.string() + ": row " + std::to_string(number) + ", column " +
                         std::to_string(c + 1) + ": non-finite value");
      }
      values.push_back(*v);
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

/// Which column of a pair table is Y.
struct TargetColumn {
  std::optional<std::size_t> index;  // 0-based; empty = last column

  static TargetColumn last() { return {}; }
  static TargetColumn at(std::size_t i) { return {i}; }
};

/// Reads an n×(m+1) table; the target column becomes Y, the rest X.
inline DatasetPair read_pair_table(const std::filesystem::path& path,
                                   Delimiter delimiter = Delimiter::Auto,
                                   TargetColumn target = TargetColumn::last()) {
  const Matrix table = read_table(path, delimiter);
  if (table.rows() < 3)
    throw DegenerateInputError(path.string() + ": need at least 3 rows, got " + std::to_string(table.rows()));
  if (table.cols() < 2) throw ParseError(path.string() + ": need at least 2 columns");
  const std::size_t t = target.index.value_or(table.cols() - 1);
  if (t >= table.cols())
    throw ParseError(path.string() + ": target column " + std::to_string(t + 1) + " does not exist");
  Matrix x(table.rows(), table.cols() - 1);
  std::vector<double> y(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    std::size_t out = 0;
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (c == t)
        y[r] = table(r, c);
      else
        x(r, out++) = table(r, c);
    }
  }
  return {path.stem().string(), std::move(x), std::move(y), 1.0};
}

/// Writes [X | Y] as comma-separated text with round-trip precision.
inline void write_pair_table(const std::filesystem::path& path, const DatasetPair& pair) {
  auto out = io_detail::open_for_write(path);
  for (std::size_t r = 0; r < pair.n(); ++r) {
    for (double v : pair.x.row(r)) out << io_detail::format_double(v) << ',';
    out << io_detail::format_double(pair.y[r]) << '\n';
  }
  io_detail::finish_write(out, path);
}

// ---------------------------------------------------------------------------
// Coding lists

enum class Coding { Causal, Confounded, Uncertain };

inline std::string_view to_string(Coding c) {
  switch (c) {
    case Coding::Causal: return "causal";
    case Coding::Confounded: return "confounded";
    case Coding::Uncertain: return "uncertain";
  }
  return "uncertain";
}

struct CodingEntry {
  std::string pair_id;
  Coding coding = Coding::Uncertain;
};

/// "id,label" lines; labels causal / confounded / uncertain in any case.
inline std::vector<CodingEntry> read_coding(const std::filesystem::path& path) {
  using namespace io_detail;
  std::vector<CodingEntry> entries;
  std::map<std::string, std::size_t> seen;
  for (const auto& [number, text] : read_lines(path)) {
    if (is_blank_or_comment(text)) continue;
    const auto fields = split_fields(text, true);
    const auto where = path.string() + ": row " + std::to_string(number);
    if (fields.size() != 2 || fields[0].empty()) throw ParseError(where + ": expected 'id,label'");
    const std::string label = lowercase(fields[1]);
    Coding coding;
    if (label == "causal")
      coding = Coding::Causal;
    else if (label == "confounded")
      coding = Coding::Confounded;
    else if (label == "uncertain")
      coding = Coding::Uncertain;
    else
      throw ParseError(where + ": unknown label '" + std::string(fields[1]) + "'");
    const std::string id(fields[0]);
    if (auto [it, inserted] = seen.emplace(canonical_id(id), number); !inserted) {
      throw ParseError(where + ": duplicate id '" + id + "' (first seen on row " +
                       std::to_string(it->second) + ")");
    }
    entries.push_back({id, coding});
  }
  return entries;
}

// ---------------------------------------------------------------------------
// Pair metadata (whitespace separated: id causeStart causeEnd effectStart effectEnd weight)

struct PairMetaEntry {
  std::string pair_id;
  std::size_t cause_start = 1;
  std::size_t cause_end = 1;
  std::size_t effect_start = 2;
  std::size_t effect_end = 2;
  double weight = 1.0;

  std::size_t cause_width() const noexcept { return cause_end - cause_start + 1; }
  std::size_t effect_width() const noexcept { return effect_end - effect_start + 1; }
};

inline std::vector<PairMetaEntry> read_pair_meta(const std::filesystem::path& path) {
  using namespace io_detail;
  std::vector<PairMetaEntry> entries;
  for (const auto& [number, text] : read_lines(path)) {
    if (is_blank_or_comment(text)) continue;
    const auto fields = split_fields(text, false);
    const auto where = path.string() + ": row " + std::to_string(number);
    if (fields.size() != 6) throw ParseError(where + ": expected 6 fields");
    PairMetaEntry e;
    e.pair_id = std::string(fields[0]);
    std::size_t* idx[] = {&e.cause_start, &e.cause_end, &e.effect_start, &e.effect_end};
    for (int i = 0; i < 4; ++i) {
      const auto v = parse_double(fields[static_cast<std::size_t>(i) + 1]);
      if (!v || *v < 1.0 || *v != std::floor(*v)) throw ParseError(where + ": bad column index");
      *idx[i] = static_cast<std::size_t>(*v);
    }
    const auto w = parse_double(fields[5]);
    if (!w || !std::isfinite(*w) || !(*w > 0.0)) throw ParseError(where + ": weight must be positive");
    e.weight = *w;
    const bool ordered = e.cause_start <= e.cause_end && e.effect_start <= e.effect_end;
    const bool disjoint = e.cause_end < e.effect_start || e.effect_end < e.cause_start;
    if (!ordered || !disjoint) throw ParseError(where + ": invalid or overlapping column ranges");
    entries.push_back(std::move(e));
  }
  return entries;
}

/// A corpus pair selected for evaluation.
struct CorpusPair {
  DatasetPair pair;
  Label truth;
};

struct Corpus {
  std::vector<CorpusPair> pairs;
  std::vector<std::string> warnings;
};

/// Joins pair tables in `dir` (named pairNNNN.txt after the meta ids) with
/// their metadata and coding. Keeps pairs coded causal or confounded whose
/// effect block is a single column; the cause block may be multivariate.
inline Corpus load_corpus(const std::filesystem::path& dir, const std::vector<PairMetaEntry>& meta,
                          const std::vector<CodingEntry>& coding) {
  using namespace io_detail;
  std::map<std::string, Coding> by_id;
  for (const auto& c : coding) by_id[canonical_id(c.pair_id)] = c.coding;
  Corpus corpus;
  for (const auto& m : meta) {
    const auto it = by_id.find(canonical_id(m.pair_id));
    if (it == by_id.end() || it->second == Coding::Uncertain) continue;
    if (m.effect_width() != 1) {
      corpus.warnings.push_back("pair " + m.pair_id + ": multi-column effect block skipped (Y must be scalar)");
      continue;
    }
    const auto path = dir / ("pair" + m.pair_id + ".txt");
    const Matrix table = read_table(path);
    if (std::max(m.cause_end, m.effect_end) > table.cols())
      throw ParseError(path.string() + ": metadata refers to a missing column");
    if (table.rows() < 3) throw DegenerateInputError(path.string() + ": need at least 3 rows");
    Matrix x = table.cols_range(m.cause_start - 1, m.cause_end);
    std::vector<double> y = table.col(m.effect_start - 1);
    corpus.pairs.push_back({DatasetPair{"pair" + m.pair_id, std::move(x), std::move(y), m.weight},
                            it->second == Coding::Causal ? Label::Causal : Label::Confounded});
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Result files

/// One row of a results file.
struct ResultRecord {
  std::string name;
  Verdict verdict;
  double weight = 1.0;
};

inline constexpr std::string_view kResultsHeader =
    "name,l_causal_nats,l_confounded_nats,confidence,label,weight";

inline std::vector<ResultRecord> sorted_by_name(std::vector<ResultRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const ResultRecord& a, const ResultRecord& b) { return a.name < b.name; });
  return records;
}

inline void write_results(std::ostream& out, std::vector<ResultRecord> records) {
  using io_detail::format_double;
  out << kResultsHeader << '\n';
  for (const auto& r : sorted_by_name(std::move(records))) {
    if (r.name.find_first_of(",\n\r") != std::string::npos)
      throw ParseError("write_results: name '" + r.name + "' contains a separator");
    out << r.name << ',' << format_double(r.verdict.lengths().l_causal) << ','
        << format_double(r.verdict.lengths().l_confounded) << ','
        << format_double(r.verdict.confidence()) << ',' << to_string(r.verdict.label()) << ','
        << format_double(r.weight) << '\n';
  }
}

/// CSV with header `kResultsHeader`, one row per record, sorted by name.
inline void write_results(const std::filesystem::path& path, std::vector<ResultRecord> records) {
  auto out = io_detail::open_for_write(path);
  write_results(out, std::move(records));
  io_detail::finish_write(out, path);
}

inline nlohmann::json results_to_json(std::vector<ResultRecord> records) {
  auto arr = nlohmann::json::array();
  for (const auto& r : sorted_by_name(std::move(records))) {
    arr.push_back({{"name", r.name},
                   {"l_causal_nats", r.verdict.lengths().l_causal},
                   {"l_confounded_nats", r.verdict.lengths().l_confounded},
                   {"confidence", r.verdict.confidence()},
                   {"label", std::string(to_string(r.verdict.label()))},
                   {"weight", r.weight}});
  }
  return arr;
}

inline void write_results_json(const std::filesystem::path& path, std::vector<ResultRecord> records) {
  auto out = io_detail::open_for_write(path);
  out << results_to_json(std::move(records)).dump(2) << '\n';
  io_detail::finish_write(out, path);
}

inline std::vector<ResultRecord> read_results(const std::filesystem::path& path) {
  using namespace io_detail;
  const auto lines = read_lines(path);
  std::vector<ResultRecord> records;
  bool header_seen = false;
  for (const auto& [number, text] : lines) {
    if (trim(text).empty()) continue;
    const auto where = path.string() + ": row " + std::to_string(number);
    if (!header_seen) {
      if (trim(text) != kResultsHeader) throw ParseError(where + ": unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split_fields(text, true);
    if (f.size() != 6) throw ParseError(where + ": expected 6 fields");
    double nums[4];
    const std::size_t cols[4] = {1, 2, 3, 5};
    for (int i = 0; i < 4; ++i) {
      const auto v = parse_double(f[cols[i]]);
      if (!v || !std::isfinite(*v))
        throw ParseError(where + ", column " + std::to_string(cols[i] + 1) + ": bad number");
      nums[i] = *v;
    }
    const auto label = parse_label(f[4]);
    if (!label) throw ParseError(where + ": unknown label '" + std::string(f[4]) + "'");
    try {
      records.push_back({std::string(f[0]), Verdict({nums[0], nums[1]}, nums[2], *label), nums[3]});
    } catch (const DomainError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (!header_seen) throw ParseError(path.string() + ": missing header");
  return records;
}

inline void write_dr_curve(const std::filesystem::path& path, const DrCurve& curve) {
  auto out = io_detail::open_for_write(path);
  out << "rate,accuracy\n";
  for (const auto& p : curve.points)
    out << io_detail::format_double(p.rate) << ',' << io_detail::format_double(p.accuracy) << '\n';
  io_detail::finish_write(out, path);
}

inline void write_audr_grid(const std::filesystem::path& path, const AudrGrid& grid) {
  auto out = io_detail::open_for_write(path);
  out << "dim_x,dim_z,audr\n";
  for (std::size_t i = 0; i < grid.dims_x.size(); ++i)
    for (std::size_t j = 0; j < grid.dims_z.size(); ++j)
      out << grid.dims_x[i] << ',' << grid.dims_z[j] << ',' << io_detail::format_double(grid.audr(i, j))
          << '\n';
  io_detail::finish_write(out, path);
}

}  // namespace coca
