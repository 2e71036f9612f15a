#include "mcagg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <ostream>

#include "mcagg/generators.hpp"
#include "mcagg/io.hpp"
#include "mcagg/pipeline.hpp"
#include "mcagg/simd/kernels.hpp"

namespace mcagg {

namespace {

namespace fs = std::filesystem;

struct Options {
  // shared
  std::string matrix;
  std::string format;  // matrix format; empty: from extension
  std::string out;
  std::string report_format;
  std::string rho = "uniform";
  std::string mode = "plain";
  std::string membership = "normalized";
  double floor = 1e-12;

  // generators
  std::vector<std::size_t> blocks;
  std::size_t n = 0;
  std::size_t kt = 0;
  std::vector<std::size_t> counts;
  double eps = 0.0;
  std::string truth;

  // annealing
  AnnealConfig anneal;
  std::string schedule = "geometric";
  std::string snapshot = "on-split";
  std::string models;

  // select / ingest
  std::string partitions;
  std::string input;
  double eta = 1.0;
};

Format format_for(const std::string& explicit_format, const std::string& path, Format fallback) {
  if (!explicit_format.empty()) return parse_format(explicit_format);
  const auto ext = fs::path(path).extension().string();
  if (ext == ".json") return Format::Json;
  if (ext == ".csv") return Format::Csv;
  return fallback;
}

StochasticMatrix load_matrix(const Options& o) {
  return parse_matrix(o.matrix, format_for(o.format, o.matrix, Format::Csv));
}

StateWeights make_rho(const Options& o, const StochasticMatrix& pi) {
  if (o.rho == "uniform") return StateWeights::uniform(pi.size());
  return stationary_distribution(pi);
}

SelectionOptions selection_options(const Options& o) {
  SelectionOptions s;
  s.mode = o.mode == "whiten" ? CovarianceMode::Whiten : CovarianceMode::Plain;
  s.membership = o.membership == "raw" ? Membership::Raw : Membership::Normalized;
  s.floor = o.floor;
  return s;
}

AnnealConfig anneal_config(const Options& o) {
  AnnealConfig c = o.anneal;
  c.schedule = o.schedule == "adaptive" ? Schedule::Adaptive : Schedule::Geometric;
  c.snapshot = o.snapshot == "last" ? Snapshot::LastBeforeSplit : Snapshot::OnSplit;
  c.floor = o.floor;
  return c;
}

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::pair<std::string, std::string>> anneal_echo(const AnnealConfig& c, const std::string& schedule,
                                                             const std::string& snapshot) {
  return {{"alpha", num(c.alpha)},
          {"t0_factor", num(c.t0_factor)},
          {"t_min_factor", num(c.t_min_factor)},
          {"merge_tol", num(c.merge_tol)},
          {"delta", num(c.delta)},
          {"fp_tol", num(c.fp_tol)},
          {"fp_max_iter", std::to_string(c.fp_max_iter)},
          {"kmax", std::to_string(c.k_max)},
          {"seed", std::to_string(c.seed)},
          {"schedule", schedule},
          {"snapshot", snapshot},
          {"per_k", c.per_k ? "true" : "false"}};
}

std::vector<std::pair<std::string, std::string>> selection_echo(const Options& o) {
  return {{"rho", o.rho}, {"mode", o.mode}, {"membership", o.membership}, {"floor", num(o.floor)}};
}

void print_config(std::ostream& os, const std::string& command,
                  const std::vector<std::pair<std::string, std::string>>& entries) {
  os << "# mcagg " << command << " simd=" << simd::to_string(simd::active_kernels().level);
  for (const auto& [k, v] : entries) os << " " << k << "=" << v;
  os << "\n";
}

void emit(std::ostream& out, const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file(path, content);
  }
}

void add_selection_flags(CLI::App* app, Options& o) {
  app->add_option("--rho", o.rho, "State weights")->check(CLI::IsMember({"uniform", "stationary"}));
  app->add_option("--mode", o.mode, "Covariance mode")->check(CLI::IsMember({"plain", "whiten"}));
  app->add_option("--membership", o.membership, "Hard membership weights")
      ->check(CLI::IsMember({"normalized", "raw"}));
  app->add_option("--floor", o.floor, "Smallest admissible distribution coordinate")->check(CLI::NonNegativeNumber);
}

void add_anneal_flags(CLI::App* app, Options& o) {
  auto& c = o.anneal;
  app->add_option("--alpha", c.alpha, "Geometric cooling factor");
  app->add_option("--t0-factor", c.t0_factor, "Initial temperature over the first critical temperature");
  app->add_option("--t-min-factor", c.t_min_factor, "Final temperature over the initial one");
  app->add_option("--merge-tol", c.merge_tol, "Sup-norm distance below which distributions merge");
  app->add_option("--delta", c.delta, "Relative split perturbation");
  app->add_option("--fp-tol", c.fp_tol, "Fixed-point tolerance");
  app->add_option("--fp-max-iter", c.fp_max_iter, "Fixed-point iteration cap");
  app->add_option("--kmax", c.k_max, "Largest number of superstates (0: n)");
  app->add_option("--seed", c.seed, "Seed for random split directions");
  app->add_option("--schedule", o.schedule, "Cooling schedule")->check(CLI::IsMember({"geometric", "adaptive"}));
  app->add_option("--snapshot", o.snapshot, "Partition kept per k")->check(CLI::IsMember({"on-split", "last"}));
  app->add_flag("--per-k", c.per_k, "Independent runs per k instead of one sweep");
}

int cmd_gen(const std::string& family, const Options& o, std::ostream& out, std::ostream& err) {
  GenSpec spec;
  spec.eps = o.eps;
  spec.seed = o.anneal.seed;
  std::vector<std::pair<std::string, std::string>> echo;
  if (family == "ncd") {
    spec.family = Family::Ncd;
    spec.blocks = o.blocks;
    std::string b;
    for (auto s : o.blocks) b += (b.empty() ? "" : ",") + std::to_string(s);
    echo = {{"family", "ncd"}, {"blocks", b}};
  } else {
    spec.family = Family::ReplicatedRows;
    spec.n = o.n;
    spec.k_t = o.kt;
    spec.counts = o.counts;
    std::string c;
    for (auto s : o.counts) c += (c.empty() ? "" : ",") + std::to_string(s);
    echo = {{"family", "rows"}, {"n", std::to_string(o.n)}, {"kt", std::to_string(o.kt)}, {"counts", c}};
  }
  echo.emplace_back("eps", num(o.eps));
  echo.emplace_back("seed", std::to_string(spec.seed));
  print_config(err, "gen", echo);
  const GeneratedChain g = generate(spec);
  emit(out, o.out, format_matrix(g.pi, format_for(o.format, o.out, Format::Csv)));
  if (!o.truth.empty()) write_partitions({{g.truth.k(), g.truth}}, o.truth);
  return 0;
}

int cmd_aggregate(const Options& o, std::ostream& out, std::ostream& err) {
  const StochasticMatrix pi = load_matrix(o);
  const AnnealConfig cfg = anneal_config(o);
  auto echo = anneal_echo(cfg, o.schedule, o.snapshot);
  echo.emplace_back("rho", o.rho);
  echo.emplace_back("floor", num(o.floor));
  print_config(err, "aggregate", echo);
  const StateWeights rho = make_rho(o, pi);
  const auto entries = aggregate(pi, rho, cfg);
  std::map<std::size_t, Partition> parts;
  for (const auto& e : entries) parts.emplace(e.k, e.partition);
  emit(out, o.out, format_partitions(parts));
  if (!o.models.empty()) write_file(o.models, format_models(entries, pi.labels()));
  return 0;
}

int write_selection(const SelectionReport& rep, const Options& o, const std::string& command,
                    std::vector<std::pair<std::string, std::string>> echo, const std::string& input_bytes,
                    std::ostream& out) {
  ReportMeta meta;
  meta.input_hash = fnv1a64_hex(input_bytes);
  meta.options = std::move(echo);
  meta.options.insert(meta.options.begin(), {"command", command});
  const Format f = format_for(o.report_format, o.out, Format::Json);
  emit(out, o.out, format_report(rep, meta, f));
  return 0;
}

int cmd_select(const Options& o, std::ostream& out, std::ostream& err) {
  print_config(err, "select", selection_echo(o));
  const std::string bytes = read_file(o.matrix);
  const StochasticMatrix pi = parse_matrix_text(bytes, format_for(o.format, o.matrix, Format::Csv));
  const auto parts = parse_partitions(o.partitions, pi.size(), pi.labels());
  const StateWeights rho = make_rho(o, pi);
  const SelectionReport rep = select_k(pi, parts, rho, selection_options(o));
  err << "k_t=" << rep.k_t << "\n";
  return write_selection(rep, o, "select", selection_echo(o), bytes, out);
}

int cmd_pipeline(const Options& o, std::ostream& out, std::ostream& err) {
  const AnnealConfig cfg = anneal_config(o);
  auto echo = anneal_echo(cfg, o.schedule, o.snapshot);
  for (auto& e : selection_echo(o)) echo.push_back(e);
  print_config(err, "pipeline", echo);
  const std::string bytes = read_file(o.matrix);
  const StochasticMatrix pi = parse_matrix_text(bytes, format_for(o.format, o.matrix, Format::Csv));
  const StateWeights rho = make_rho(o, pi);
  const PipelineResult res = run_pipeline(pi, rho, cfg, selection_options(o));
  if (!o.partitions.empty()) write_partitions(res.partitions, o.partitions);
  if (!o.models.empty()) write_file(o.models, format_models(res.entries, pi.labels()));
  err << "k_t=" << res.report.k_t << "\n";
  return write_selection(res.report, o, "pipeline", echo, bytes, out);
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  print_config(err, "ingest-bigrams", {{"input", o.input}, {"eta", num(o.eta)}});
  const StochasticMatrix pi = ingest_bigrams(o.input, o.eta);
  emit(out, o.out, format_matrix(pi, format_for(o.format, o.out, Format::Csv)));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Markov chain aggregation and model-order selection", "mcagg"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic chain");
  gen->require_subcommand(1);
  auto* ncd = gen->add_subcommand("ncd", "Nearly decomposable block chain");
  ncd->add_option("--blocks", o.blocks, "Block sizes")->delimiter(',')->required();
  auto* rows = gen->add_subcommand("rows", "Replicated-row chain");
  rows->add_option("--n", o.n, "Number of states")->required();
  rows->add_option("--kt", o.kt, "Number of distinct rows")->required();
  rows->add_option("--counts", o.counts, "States per class")->delimiter(',');
  for (auto* g : {ncd, rows}) {
    g->add_option("--eps", o.eps, "Perturbation level");
    g->add_option("--seed", o.anneal.seed, "Seed");
    g->add_option("--out", o.out, "Output matrix file (default stdout)");
    g->add_option("--format", o.format, "csv or json (default: from extension)");
    g->add_option("--truth", o.truth, "Also write the generating partition");
  }

  auto* agg = app.add_subcommand("aggregate", "Anneal and write one partition per k");
  agg->add_option("--matrix", o.matrix, "Transition matrix file")->required();
  agg->add_option("--format", o.format, "Matrix format (default: from extension)");
  agg->add_option("--out", o.out, "Partitions json (default stdout)");
  agg->add_option("--models", o.models, "Also write aggregated models as json");
  agg->add_option("--rho", o.rho, "State weights")->check(CLI::IsMember({"uniform", "stationary"}));
  agg->add_option("--floor", o.floor, "Smallest admissible distribution coordinate")->check(CLI::NonNegativeNumber);
  add_anneal_flags(agg, o);

  auto* sel = app.add_subcommand("select", "Select the number of superstates for given partitions");
  sel->add_option("--matrix", o.matrix, "Transition matrix file")->required();
  sel->add_option("--partitions", o.partitions, "Partitions json keyed by k")->required();
  sel->add_option("--format", o.format, "Matrix format (default: from extension)");
  sel->add_option("--out", o.out, "Report file (default stdout)");
  sel->add_option("--report-format", o.report_format, "csv or json (default: from extension, else json)");
  add_selection_flags(sel, o);

  auto* pipe = app.add_subcommand("pipeline", "Aggregate, then select");
  pipe->add_option("--matrix", o.matrix, "Transition matrix file")->required();
  pipe->add_option("--format", o.format, "Matrix format (default: from extension)");
  pipe->add_option("--out", o.out, "Report file (default stdout)");
  pipe->add_option("--report-format", o.report_format, "csv or json (default: from extension, else json)");
  pipe->add_option("--partitions", o.partitions, "Also write the partitions json");
  pipe->add_option("--models", o.models, "Also write aggregated models as json");
  add_selection_flags(pipe, o);
  add_anneal_flags(pipe, o);

  auto* ing = app.add_subcommand("ingest-bigrams", "Letter-bigram counts to a 26-state chain");
  ing->add_option("--input", o.input, "Bigram count file")->required();
  ing->add_option("--eta", o.eta, "Add-eta smoothing per cell")->check(CLI::NonNegativeNumber);
  ing->add_option("--out", o.out, "Output matrix file (default stdout)");
  ing->add_option("--format", o.format, "csv or json (default: from extension)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* scope = &app;
    for (auto* sub : app.get_subcommands()) {
      scope = sub;
      for (auto* inner : sub->get_subcommands()) scope = inner;
    }
    err << scope->help();
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(ncd->parsed() ? "ncd" : "rows", o, out, err);
    if (agg->parsed()) return cmd_aggregate(o, out, err);
    if (sel->parsed()) return cmd_select(o, out, err);
    if (pipe->parsed()) return cmd_pipeline(o, out, err);
    if (ing->parsed()) return cmd_ingest(o, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace mcagg
