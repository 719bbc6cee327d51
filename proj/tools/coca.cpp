// Command-line front end: infer, gen, bench, sweep, eval, pairs.
//
// Exit codes: 0 success, 1 usage, 2 input/parse, 3 degenerate data,
// 4 numeric divergence.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coca/coca.hpp"
#include "coca/dataio.hpp"
#include "coca/evalkit.hpp"
#include "coca/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kDegenerate = 3, kDivergence = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::uint64_t seed = 0;
  std::size_t mc_samples = 500;
  std::size_t latent_dim = 1;
  std::size_t workers = coca::default_workers();
  std::string format = "csv";

  coca::ModelConfig model() const {
    coca::ModelConfig c;
    c.mc_samples = mc_samples;
    c.latent_dim = latent_dim;
    return c;
  }
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--seed", o.seed, "Global seed")->capture_default_str();
  cmd.add_option("--mc-samples", o.mc_samples, "Monte-Carlo draws per code length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--latent-dim", o.latent_dim, "Latent dimension k of the factor model")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--workers", o.workers, "Worker threads (default: $COCA_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--format", o.format, "Results format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

void write_records(const fs::path& path, std::vector<coca::ResultRecord> records,
                   const std::string& format) {
  if (format == "json")
    coca::write_results_json(path, std::move(records));
  else
    coca::write_results(path, std::move(records));
}

std::string results_name(const std::string& format) {
  return format == "json" ? "results.json" : "results.csv";
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw coca::IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

/// Truth file in coding-list format ("name,label").
void write_truth(const fs::path& path, const std::vector<coca::LabeledVerdict>& items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw coca::IoError("cannot write '" + path.string() + "'");
  std::map<std::string, coca::Label> sorted;
  for (const auto& it : items) sorted[it.name] = it.truth;
  for (const auto& [name, truth] : sorted) out << name << ',' << coca::to_string(truth) << '\n';
}

std::vector<coca::ResultRecord> to_records(const std::vector<coca::LabeledVerdict>& items) {
  std::vector<coca::ResultRecord> out;
  out.reserve(items.size());
  for (const auto& it : items) {
    if (coca::no_positive_length(it.verdict.lengths()))
      std::cerr << "warning: dataset '" << it.name << "': no positive code length, kept as undecided\n";
    out.push_back({it.name, it.verdict, it.weight});
  }
  return out;
}

json curve_summary(const std::vector<coca::LabeledVerdict>& items) {
  const coca::DrCurve curve = coca::decision_rate_curve(items);
  const auto [lo, hi] = coca::binomial_band(items.size());
  std::size_t causal = 0;
  for (const auto& it : items) causal += it.verdict.label() == coca::Label::Causal ? 1U : 0U;
  return {{"datasets", items.size()},
          {"audr", curve.audr},
          {"accuracy", coca::weighted_accuracy(items)},
          {"accuracy_top25", coca::accuracy_at_rate(curve, 0.25)},
          {"accuracy_top50", coca::accuracy_at_rate(curve, 0.50)},
          {"accuracy_top75", coca::accuracy_at_rate(curve, 0.75)},
          {"fair_coin_band", {lo, hi}},
          {"causal_fraction", static_cast<double>(causal) / static_cast<double>(items.size())},
          {"weighted_majority_baseline", coca::weighted_majority_baseline(items)}};
}

coca::SourcePlan parse_sources(const std::string& s) {
  auto plan = coca::SourcePlan::parse(s);
  if (!plan) throw UsageError("unknown --sources value '" + s + "'");
  return *plan;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw coca::IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------

struct InferArgs {
  std::string input;
  std::string delimiter = "auto";
  std::string target = "last";
  std::string name;
  std::string output;
};

int cmd_infer(const InferArgs& a, const CommonOptions& o) {
  const auto delim = a.delimiter == "comma"        ? coca::Delimiter::Comma
                     : a.delimiter == "whitespace" ? coca::Delimiter::Whitespace
                                                   : coca::Delimiter::Auto;
  coca::TargetColumn target;
  if (a.target != "last") {
    std::size_t pos = 0;
    unsigned long idx = 0;
    try {
      idx = std::stoul(a.target, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != a.target.size() || idx < 1) throw UsageError("--target must be 'last' or a 1-based column index");
    target = coca::TargetColumn::at(idx - 1);
  }
  coca::DatasetPair pair = coca::read_pair_table(a.input, delim, target);
  if (!a.name.empty()) pair.name = a.name;
  const coca::Verdict v = coca::infer(pair, o.model(), o.seed);
  std::vector<coca::ResultRecord> records{{pair.name, v, pair.weight}};
  if (!a.output.empty()) {
    write_records(a.output, std::move(records), o.format);
  } else if (o.format == "json") {
    std::cout << coca::results_to_json(std::move(records)).dump(2) << '\n';
  } else {
    coca::write_results(std::cout, std::move(records));
  }
  return kOk;
}

struct GenArgs {
  std::string kind = "causal";
  std::size_t dim_x = 1;
  std::size_t dim_z = 1;
  std::size_t samples = 500;
  std::string source = "normal";
  std::string output;
};

int cmd_gen(const GenArgs& a, const CommonOptions& o) {
  coca::GenSpec g;
  g.kind = a.kind == "causal" ? coca::GenKind::Causal : coca::GenKind::Confounded;
  g.dim_x = a.dim_x;
  g.dim_z = a.dim_z;
  g.n = a.samples;
  const auto src = coca::parse_source(a.source);
  if (!src) throw UsageError("unknown --source '" + a.source + "'");
  g.p_x = g.p_z = g.p_w = *src;
  g.seed = o.seed;
  g.name = fs::path(a.output).stem().string();
  coca::write_pair_table(a.output, coca::generate(g));
  return kOk;
}

struct BenchArgs {
  std::vector<std::size_t> dim_x{6};
  std::vector<std::size_t> dim_z{3};
  std::size_t datasets = 200;
  std::size_t per_cell = 200;
  std::size_t samples = 500;
  std::string sources = "normal";
  std::string output_dir;
};

int cmd_bench(const BenchArgs& a, const CommonOptions& o) {
  if (a.dim_x.size() != 1 || a.dim_z.size() != 1)
    throw UsageError("bench takes a single --dim-x and --dim-z; use sweep for grids");
  if (a.datasets < 2 || a.datasets % 2 != 0) throw UsageError("--datasets must be even and >= 2");
  coca::BenchmarkSpec b;
  b.dim_x = a.dim_x.front();
  b.dim_z = a.dim_z.front();
  b.n = a.samples;
  b.datasets = a.datasets;
  b.sources = parse_sources(a.sources);
  b.seed = o.seed;
  const auto items = coca::run_benchmark(b, o.model(), o.workers);

  const fs::path dir(a.output_dir);
  ensure_dir(dir);
  write_records(dir / results_name(o.format), to_records(items), o.format);
  write_truth(dir / "truth.csv", items);
  coca::write_dr_curve(dir / "drcurve.csv", coca::decision_rate_curve(items));
  json summary = curve_summary(items);
  summary["dim_x"] = b.dim_x;
  summary["dim_z"] = b.dim_z;
  summary["samples"] = b.n;
  summary["sources"] = a.sources;
  summary["seed"] = o.seed;
  write_json(dir / "summary.json", summary);
  std::cerr << "bench: " << items.size() << " datasets, AUDR " << summary["audr"].get<double>()
            << ", accuracy " << summary["accuracy"].get<double>() << '\n';
  return kOk;
}

int cmd_sweep(const BenchArgs& a, const CommonOptions& o) {
  if (a.dim_x.empty() || a.dim_z.empty()) throw UsageError("--dim-x and --dim-z need at least one value");
  if (a.per_cell < 2 || a.per_cell % 2 != 0) throw UsageError("--per-cell must be even and >= 2");
  coca::SweepSpec s;
  s.dims_x = a.dim_x;
  s.dims_z = a.dim_z;
  s.per_cell = a.per_cell;
  s.n = a.samples;
  s.sources = parse_sources(a.sources);
  s.seed = o.seed;
  const coca::AudrGrid grid = coca::audr_grid(s, o.model(), o.workers);

  std::vector<coca::LabeledVerdict> all;
  for (const auto& cell : grid.cells) all.insert(all.end(), cell.begin(), cell.end());
  const fs::path dir(a.output_dir);
  ensure_dir(dir);
  write_records(dir / results_name(o.format), to_records(all), o.format);
  write_truth(dir / "truth.csv", all);
  coca::write_audr_grid(dir / "audr_grid.csv", grid);
  for (std::size_t i = 0; i < grid.dims_x.size(); ++i)
    for (std::size_t j = 0; j < grid.dims_z.size(); ++j)
      std::cerr << "sweep: dim_x=" << grid.dims_x[i] << " dim_z=" << grid.dims_z[j]
                << " AUDR=" << grid.audr(i, j) << '\n';
  return kOk;
}

struct EvalArgs {
  std::string results;
  std::string truth;
  std::string output_dir;
};

int cmd_eval(const EvalArgs& a, const CommonOptions&) {
  const auto records = coca::read_results(a.results);
  std::map<std::string, coca::Label> truth;
  for (const auto& e : coca::read_coding(a.truth)) {
    if (e.coding == coca::Coding::Causal) truth[e.pair_id] = coca::Label::Causal;
    if (e.coding == coca::Coding::Confounded) truth[e.pair_id] = coca::Label::Confounded;
  }
  std::vector<coca::LabeledVerdict> items;
  for (const auto& r : records) {
    const auto it = truth.find(r.name);
    if (it == truth.end()) {
      std::cerr << "eval: warning: no causal/confounded truth for '" << r.name << "', skipped\n";
      continue;
    }
    items.push_back({r.name, r.verdict, it->second, r.weight});
  }
  if (items.empty()) throw coca::ParseError("eval: no result matches a causal/confounded truth entry");
  const fs::path dir(a.output_dir);
  ensure_dir(dir);
  coca::write_dr_curve(dir / "drcurve.csv", coca::decision_rate_curve(items));
  write_json(dir / "summary.json", curve_summary(items));
  return kOk;
}

struct PairsArgs {
  std::string dir;
  std::string meta;
  std::string coding = COCA_DEFAULT_CODING_FILE;
  std::string output_dir;
};

int cmd_pairs(const PairsArgs& a, const CommonOptions& o) {
  if (!fs::is_directory(a.dir)) throw coca::IoError("pair directory '" + a.dir + "' does not exist");
  const auto meta = coca::read_pair_meta(a.meta);
  const auto coding = coca::read_coding(a.coding);
  const coca::Corpus corpus = coca::load_corpus(a.dir, meta, coding);
  for (const auto& w : corpus.warnings) std::cerr << "pairs: warning: " << w << '\n';

  const fs::path dir(a.output_dir);
  ensure_dir(dir);
  if (corpus.pairs.empty()) {
    std::cerr << "pairs: warning: no pair is coded causal or confounded; nothing to do\n";
    write_records(dir / results_name(o.format), {}, o.format);
    return kOk;
  }
  const coca::ModelConfig config = o.model();
  const auto items = coca::parallel_map(corpus.pairs.size(), o.workers, [&](std::size_t i) {
    const auto& cp = corpus.pairs[i];
    return coca::LabeledVerdict{cp.pair.name, coca::infer_or_undecided(cp.pair, config, o.seed), cp.truth,
                                cp.pair.weight};
  });
  write_records(dir / results_name(o.format), to_records(items), o.format);
  write_truth(dir / "truth.csv", items);
  coca::write_dr_curve(dir / "drcurve.csv", coca::decision_rate_curve(items));
  json summary = curve_summary(items);
  std::vector<std::string> used;
  for (const auto& it : items) used.push_back(it.name);
  summary["pairs"] = used;
  write_json(dir / "summary.json", summary);
  std::cerr << "pairs: " << items.size() << " pairs, weighted accuracy "
            << summary["accuracy"].get<double>() << ", baseline "
            << summary["weighted_majority_baseline"].get<double>() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tell causal from confounded: compares MDL code lengths of a linear causal model "
               "and a latent factor model"};
  app.require_subcommand(1);
  CommonOptions common;

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "Score one pair table");
  infer->add_option("input", infer_args.input, "Numeric table; Y is the target column")
      ->required();
  infer->add_option("--delimiter", infer_args.delimiter)
      ->check(CLI::IsMember({"auto", "comma", "whitespace"}))
      ->capture_default_str();
  infer->add_option("--target", infer_args.target, "'last' or a 1-based column index")
      ->capture_default_str();
  infer->add_option("--name", infer_args.name, "Dataset name (default: file stem)");
  infer->add_option("--output,-o", infer_args.output, "Write the record here instead of stdout");
  add_common(*infer, common);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Write one synthetic pair table");
  gen->add_option("--kind", gen_args.kind)
      ->check(CLI::IsMember({"causal", "confounded"}))
      ->capture_default_str();
  gen->add_option("--dim-x", gen_args.dim_x)->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--dim-z", gen_args.dim_z)->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--samples", gen_args.samples)->check(CLI::Range(3, 100000000))->capture_default_str();
  gen->add_option("--source", gen_args.source)
      ->check(CLI::IsMember({"normal", "laplace", "lognormal", "uniform"}))
      ->capture_default_str();
  gen->add_option("--output,-o", gen_args.output)->required();
  add_common(*gen, common);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Balanced synthetic benchmark with a decision-rate curve");
  bench->add_option("--dim-x", bench_args.dim_x)->expected(1)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--dim-z", bench_args.dim_z)->expected(1)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--datasets", bench_args.datasets)->capture_default_str();
  bench->add_option("--samples", bench_args.samples)->check(CLI::Range(3, 100000000))->capture_default_str();
  bench->add_option("--sources", bench_args.sources,
                    "normal|laplace|lognormal|uniform|mixed|random")
      ->capture_default_str();
  bench->add_option("--output-dir", bench_args.output_dir)->required();
  add_common(*bench, common);

  BenchArgs sweep_args;
  sweep_args.dim_x = {2, 6, 10};
  sweep_args.dim_z = {2, 6, 10};
  auto* sweep = app.add_subcommand("sweep", "AUDR heatmap over dim_x × dim_z");
  sweep->add_option("--dim-x", sweep_args.dim_x)->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--dim-z", sweep_args.dim_z)->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--per-cell", sweep_args.per_cell)->capture_default_str();
  sweep->add_option("--samples", sweep_args.samples)->check(CLI::Range(3, 100000000))->capture_default_str();
  sweep->add_option("--sources", sweep_args.sources)->capture_default_str();
  sweep->add_option("--output-dir", sweep_args.output_dir)->required();
  add_common(*sweep, common);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Decision-rate curve from a results file and a truth list");
  eval->add_option("--results", eval_args.results)->required();
  eval->add_option("--truth", eval_args.truth, "'name,label' lines")->required();
  eval->add_option("--output-dir", eval_args.output_dir)->required();

  PairsArgs pairs_args;
  auto* pairs = app.add_subcommand("pairs", "Run a cause-effect pair corpus");
  pairs->add_option("--dir", pairs_args.dir, "Directory holding pairNNNN.txt tables")->required();
  pairs->add_option("--meta", pairs_args.meta, "Pair metadata (6 whitespace-separated fields)")->required();
  pairs->add_option("--coding", pairs_args.coding, "'id,label' coding list")->capture_default_str();
  pairs->add_option("--output-dir", pairs_args.output_dir)->required();
  add_common(*pairs, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (infer->parsed()) return cmd_infer(infer_args, common);
    if (gen->parsed()) return cmd_gen(gen_args, common);
    if (bench->parsed()) return cmd_bench(bench_args, common);
    if (sweep->parsed()) return cmd_sweep(sweep_args, common);
    if (eval->parsed()) return cmd_eval(eval_args, common);
    if (pairs->parsed()) return cmd_pairs(pairs_args, common);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const coca::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const coca::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const coca::DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const coca::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const coca::FactorizationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const coca::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
