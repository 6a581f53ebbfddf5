#include "sbm/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbm/config.hpp"
#include "sbm/cycles.hpp"
#include "sbm/error.hpp"
#include "sbm/graph_io.hpp"
#include "sbm/manifest.hpp"
#include "sbm/moments.hpp"
#include "sbm/polytope.hpp"
#include "sbm/reconstruct.hpp"
#include "sbm/rng.hpp"
#include "sbm/sampler.hpp"
#include "sbm/tvoracle.hpp"

namespace sbm::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json number(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

struct Artifact {
  std::string name;
  std::string content;
};

struct Outcome {
  std::string report;  // printed to stdout
  std::vector<Artifact> artifacts;
  std::optional<std::uint64_t> seed;
};

struct Options {
  int threads = 1;
  std::string out_dir;
  std::string config;
  std::string graph;
  std::optional<std::uint64_t> seed;
  // qfunc
  int starts = 64;
  // qcurve
  double pmin = 0.05;
  double pmax = 0.5;
  int steps = 32;
  double a = 1.5;
  // sample
  int n = 0;
  bool er = false;
  double er_d = 0.0;
  // cycles
  int K = kDefaultCycleK;
  // moment
  int samples = 1000;
  double gamma = 0.75;
  int exact_tiny = 0;
  int multinomial_n = 0;
  // reconstruct
  double p = 0.0;
  double d = 0.0;
  std::optional<double> delta;
  bool first = false;
  // oracle
  std::vector<int> pins_a;
  std::vector<int> pins_b;
  int u = 0;
  std::vector<int> pinned;
  std::vector<int> labels;
  // replay
  std::string manifest;
};

std::uint64_t require_seed(const Options& o, const char* subcommand) {
  if (!o.seed) {
    throw Error(ErrorCode::ConfigError, std::string(subcommand) + " is randomized and needs an explicit --seed");
  }
  return *o.seed;
}

json spectrum_json(const SpectralSummary& spectrum) {
  json eig = json::array();
  for (const auto& l : spectrum.eigenvalues) eig.push_back({{"re", l.real()}, {"im", l.imag()}});
  return {{"d", spectrum.d},
          {"T", matrix_json(spectrum.T)},
          {"eigenvalues", eig},
          {"lambda2_modulus", std::abs(spectrum.lambda2())},
          {"ks_gap", spectrum.ks_gap}};
}

Outcome do_analyze(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  const SpectralSummary spectrum = spectral_summary(cfg.model);
  OptimizerSettings settings;
  settings.threads = o.threads;
  const QResult q = q_value(cfg.model, settings);
  json report = model_to_json(cfg.model);
  report["spectrum"] = spectrum_json(spectrum);
  report["q"] = q.q;
  report["local_limit"] = q.local_limit;
  report["q_stalled"] = q.stalled;
  report["regime"] = std::string(to_string(classify_regime(spectrum, q.q)));
  report["second_moment_limit"] = number(second_moment_limit(spectrum));
  report["gaussian_exp_moment"] = number(gaussian_exp_moment(spectrum));
  const NuTerms nu = nu_terms(spectrum);
  report["nu1"] = nu.nu1;
  report["nu2"] = nu.nu2;
  if (std::abs(std::abs(spectrum.lambda2()) - 1.0) < 1e-9) {
    report["note"] = spectrum.d < 1.0
                         ? "d lambda_2^2 = d < 1 yet lambda_2 = 1: below the Kesten-Stigum bound; classified by Q"
                         : "lambda_2 = 1 with d >= 1: outside both theorem hypotheses; classified by Q";
  }
  const std::string text = dump(report);
  return {text, {{"report.json", text}}, std::nullopt};
}

Outcome do_qfunc(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  OptimizerSettings settings;
  settings.threads = o.threads;
  settings.starts = o.starts;
  if (o.seed) settings.seed = *o.seed;
  const QResult q = q_value(cfg.model, settings);
  const json report = {{"q", q.q},
                       {"local_limit", q.local_limit},
                       {"argmax", matrix_json(q.argmax.alpha)},
                       {"starts_used", q.starts_used},
                       {"max_gradient_residual", q.max_gradient_residual},
                       {"stalled", q.stalled},
                       {"ks_gap", spectral_summary(cfg.model).ks_gap}};
  const std::string text = dump(report);
  return {text, {{"qresult.json", text}}, settings.seed};
}

Outcome do_qcurve(const Options& o) {
  if (o.steps < 1) throw Error(ErrorCode::ConfigError, "--steps must be positive");
  if (!(o.pmin > 0.0 && o.pmin <= o.pmax && o.pmax <= 0.5)) {
    throw Error(ErrorCode::ConfigError, "need 0 < pmin <= pmax <= 0.5");
  }
  std::vector<double> grid(o.steps);
  for (int i = 0; i < o.steps; ++i) {
    grid[i] = o.steps == 1 ? o.pmax : o.pmin + (o.pmax - o.pmin) * i / (o.steps - 1);
  }
  OptimizerSettings settings;
  settings.threads = o.threads;
  std::string csv = "p,threshold\n";
  char line[64];
  for (const auto& pt : threshold_curve(grid, o.a, settings)) {
    std::snprintf(line, sizeof line, "%.10g,%.10g\n", pt.p, pt.threshold);
    csv += line;
  }
  return {csv, {{"threshold.csv", csv}}, std::nullopt};
}

Outcome do_sample(const Options& o) {
  const std::uint64_t seed = require_seed(o, "sample");
  if (o.n < 2) throw Error(ErrorCode::ConfigError, "--n must be at least 2");
  LabeledGraph graph;
  json meta = {{"seed", seed}, {"generator", std::string(Rng::generator_name())}, {"n", o.n}};
  if (o.er) {
    graph = sample_er(o.n, o.er_d, seed);
    meta["model"] = {{"erdos_renyi_d", o.er_d}};
    meta["model_hash"] = digest_hex(json{{"erdos_renyi_d", o.er_d}}.dump());
  } else {
    if (o.config.empty()) throw Error(ErrorCode::ConfigError, "sample needs --config or --er");
    const ModelConfig cfg = load_model_config(o.config);
    graph = sample_sbm(cfg.model, o.n, seed);
    const json model = model_to_json(cfg.model);
    meta["model"] = model;
    meta["model_hash"] = digest_hex(model.dump());
  }
  meta["m"] = graph.edges.size();
  const std::string edges = edge_list_string(graph);
  return {edges, {{"graph.txt", edges}, {"graph.json", dump(meta)}}, seed};
}

Outcome do_cycles(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  const LabeledGraph graph = read_edge_list_file(o.graph);
  const CycleStats stats = cycle_stats(graph, cfg.model, o.K, o.threads);
  json counts = json::object();
  for (const auto& [k, x] : stats.counts) {
    counts[std::to_string(k)] = {
        {"count", x}, {"null_mean", stats.null_means.at(k)}, {"planted_mean", stats.planted_means.at(k)}};
  }
  const CycleTestResult test = cycle_test(graph, cfg.model, o.K, o.threads);
  const json report = {{"counts", counts},
                       {"test",
                        {{"k", test.k},
                         {"statistic", test.statistic},
                         {"null_mean", test.null_mean},
                         {"planted_mean", test.planted_mean},
                         {"decision", std::string(to_string(test.decision))}}}};
  const std::string text = dump(report);
  return {text, {{"cycles.json", text}}, std::nullopt};
}

Outcome do_moment(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  const SpectralSummary spectrum = spectral_summary(cfg.model);
  const BalanceWindow window = make_window(o.gamma);
  const NuTerms nu = nu_terms(spectrum);
  json report = {{"closed_form", number(second_moment_limit(spectrum))},
                 {"gaussian_exp_moment", number(gaussian_exp_moment(spectrum))},
                 {"nu1", nu.nu1},
                 {"nu2", nu.nu2},
                 {"window_gamma", window.gamma}};
  std::optional<std::uint64_t> seed;
  if (o.n > 0) {
    seed = require_seed(o, "moment --n");
    const EmpiricalMoment e = empirical_second_moment(cfg.model, o.n, o.samples, window, *seed, o.threads);
    report["empirical"] = {{"estimate", number(e.estimate)},
                           {"std_error", number(e.std_error)},
                           {"log_estimate", e.log_estimate},
                           {"n", e.n},
                           {"samples", e.samples},
                           {"acceptance_rate", e.acceptance_rate}};
  }
  if (o.exact_tiny > 0) {
    const ExactTinyMoment t = exact_tiny_second_moment(cfg.model, o.exact_tiny, window);
    report["exact_tiny_n"] = {
        {"n", o.exact_tiny}, {"graph_enumeration", t.graph_enumeration}, {"pair_product", t.pair_product}};
  }
  if (o.multinomial_n > 0) {
    const double value =
        multinomial_exp_moment(cfg.model.pi(), quadratic_kernel(cfg.model), o.multinomial_n, window);
    report["multinomial"] = {{"n", o.multinomial_n}, {"value", number(value)}};
  }
  const std::string text = dump(report);
  return {text, {{"moment.json", text}}, seed};
}

Outcome do_reconstruct(const Options& o) {
  const LabeledGraph graph = read_edge_list_file(o.graph);
  const ReconstructResult r = exhaustive_reconstruct(graph, o.p, o.d, o.a, o.delta, o.first, o.threads);
  json accepted = json::array();
  for (const auto& part : r.accepted) {
    json entry = {{"members", part.members}, {"inblock_edges", part.inblock_edges}};
    if (part.overlap) entry["overlap"] = *part.overlap;
    accepted.push_back(entry);
  }
  const json report = {{"block_size", r.block_size},
                       {"delta", r.delta},
                       {"window", {r.window_lo, r.window_hi}},
                       {"partitions_checked", r.partitions_checked},
                       {"accepted", accepted}};
  const std::string text = dump(report);
  return {text, {{"reconstruct.json", text}}, std::nullopt};
}

Outcome oracle_outcome(const json& body, double seconds) {
  json shown = body;
  shown["runtime"] = seconds;
  return {dump(shown), {{"oracle.json", dump(body)}}, std::nullopt};
}

Outcome do_oracle_tv(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  const auto start = std::chrono::steady_clock::now();
  const TvResult r = exact_conditional_tv(cfg.model, o.n, ConditionalSpec{o.pins_a, o.pins_b});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return oracle_outcome({{"tv", r.tv}, {"n_terms", r.terms}}, secs);
}

Outcome do_oracle_posterior(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  const auto start = std::chrono::steady_clock::now();
  const TvResult r = exact_posterior_tv(cfg.model, o.n, o.u, o.pinned, o.labels);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return oracle_outcome({{"tv", r.tv}, {"n_terms", r.terms}}, secs);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
}

void emit(const std::string& subcommand, const std::vector<std::string>& args, const Options& o,
          const Outcome& outcome, std::ostream& out) {
  out << outcome.report;
  if (o.out_dir.empty()) return;
  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + o.out_dir);
  RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.argv = args;
  manifest.seed = outcome.seed;
  manifest.generator = std::string(Rng::generator_name());
  if (!o.config.empty()) manifest.inputs["--config"] = read_text_file(o.config);
  if (!o.graph.empty()) manifest.inputs["--graph"] = read_text_file(o.graph);
  for (const auto& artifact : outcome.artifacts) {
    write_file(dir / artifact.name, artifact.content);
    manifest.outputs[artifact.name] = digest_hex(artifact.content);
  }
  write_file(dir / "manifest.json", dump(manifest_to_json(manifest)));
}

// Re-runs the recorded argv with inputs restored from the manifest and the
// output directory redirected, then compares output digests.
int do_replay(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out_dir.empty()) throw Error(ErrorCode::ConfigError, "replay needs --out");
  json doc;
  try {
    doc = json::parse(read_text_file(o.manifest));
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::ConfigError, o.manifest + ": not valid JSON");
  }
  const RunManifest recorded = manifest_from_json(doc);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  std::map<std::string, std::string> restored;
  for (const auto& [flag, content] : recorded.inputs) {
    const fs::path path = dir / ("input" + flag.substr(1) + ".txt");
    write_file(path, content);
    restored[flag] = path.string();
  }
  restored["--out"] = dir.string();
  std::vector<std::string> args;
  for (std::size_t i = 0; i < recorded.argv.size(); ++i) {
    const std::string& token = recorded.argv[i];
    const auto eq = token.find('=');
    const std::string flag = token.substr(0, eq);
    if (restored.count(flag)) {
      if (eq != std::string::npos) {
        args.push_back(flag + "=" + restored[flag]);
      } else {
        args.push_back(token);
        if (i + 1 < recorded.argv.size()) ++i;
        args.push_back(restored[flag]);
      }
      continue;
    }
    args.push_back(token);
  }
  std::ostringstream sink;
  const int code = run(args, sink, err);
  if (code != kOk) return code;
  const RunManifest fresh = manifest_from_json(json::parse(read_text_file((dir / "manifest.json").string())));
  json report = {{"identical", fresh.outputs == recorded.outputs}, {"outputs", json::object()}};
  for (const auto& [name, digest] : recorded.outputs) {
    const auto it = fresh.outputs.find(name);
    report["outputs"][name] = {{"recorded", digest}, {"replayed", it == fresh.outputs.end() ? "" : it->second}};
  }
  out << dump(report);
  return fresh.outputs == recorded.outputs ? kOk : kReplayMismatch;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Numerical laboratory for sparse stochastic block model thresholds", "sbmlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out_dir, "Directory for artifacts and manifest.json");
  };
  auto config_flag = [&](CLI::App* sub) {
    return sub->add_option("--config", o.config, "Model config (JSON)")->required();
  };

  auto* analyze = app.add_subcommand("analyze", "Spectrum, Q, regime and second-moment limit");
  config_flag(analyze);
  common(analyze);

  auto* qfunc = app.add_subcommand("qfunc", "Q(pi, A/sqrt(2d)) with optimizer diagnostics");
  config_flag(qfunc);
  qfunc->add_option("--starts", o.starts, "Optimizer starts")->check(CLI::PositiveNumber);
  qfunc->add_option("--seed", o.seed, "Seed for the start design");
  common(qfunc);

  auto* qcurve = app.add_subcommand("qcurve", "Threshold on d lambda_2^2 across class balance p");
  qcurve->add_option("--pmin", o.pmin, "Smallest p");
  qcurve->add_option("--pmax", o.pmax, "Largest p (<= 0.5)");
  qcurve->add_option("--steps", o.steps, "Number of grid points");
  qcurve->add_option("--a", o.a, "Two-cluster parameter a");
  common(qcurve);

  auto* sample = app.add_subcommand("sample", "Draw a labeled block-model graph or G(n, d/n)");
  sample->add_option("--config", o.config, "Model config (JSON)");
  sample->add_option("--n", o.n, "Vertex count")->required();
  sample->add_option("--seed", o.seed, "Seed");
  sample->add_flag("--er", o.er, "Sample Erdos-Renyi G(n, d/n) instead");
  sample->add_option("--d", o.er_d, "Expected degree for --er");
  common(sample);

  auto* cycles = app.add_subcommand("cycles", "Short-cycle counts and the cycle test");
  config_flag(cycles);
  cycles->add_option("--graph", o.graph, "Edge-list file")->required();
  cycles->add_option("--K", o.K, "Largest cycle length (<= 12)");
  common(cycles);

  auto* moment = app.add_subcommand("moment", "Second-moment quantities");
  config_flag(moment);
  moment->add_option("--n", o.n, "Monte-Carlo vertex count");
  moment->add_option("--samples", o.samples, "Monte-Carlo samples");
  moment->add_option("--window-gamma", o.gamma, "Window exponent gamma in (1/2, 1]");
  moment->add_option("--exact-tiny", o.exact_tiny, "Exact enumeration at this n (<= 6)");
  moment->add_option("--multinomial-n", o.multinomial_n, "Exact multinomial sum at this n");
  moment->add_option("--seed", o.seed, "Seed");
  common(moment);

  auto* reconstruct = app.add_subcommand("reconstruct", "Exhaustive in-block edge-count reconstructor");
  reconstruct->add_option("--graph", o.graph, "Edge-list file")->required();
  reconstruct->add_option("--p", o.p, "Small-block fraction")->required();
  reconstruct->add_option("--a", o.a, "Two-cluster parameter a")->required();
  reconstruct->add_option("--d", o.d, "Expected degree")->required();
  reconstruct->add_option("--delta", o.delta, "Window half-width per vertex");
  reconstruct->add_flag("--first", o.first, "Return only the lexicographically first accepted partition");
  common(reconstruct);

  auto* oracle = app.add_subcommand("oracle", "Exact tiny-n total-variation oracles");
  oracle->require_subcommand(1);
  auto* tv = oracle->add_subcommand("tv", "TV between graph laws under two pinnings of vertices 0..r-1");
  tv->add_option("--config", o.config, "Model config (JSON)")->required();
  tv->add_option("--n", o.n, "Vertex count (<= 6)")->required();
  tv->add_option("--pins-a", o.pins_a, "Comma-separated labels")->delimiter(',')->required();
  tv->add_option("--pins-b", o.pins_b, "Comma-separated labels")->delimiter(',')->required();
  common(tv);
  auto* posterior = oracle->add_subcommand("posterior", "Expected TV of the posterior of sigma_u from pi");
  posterior->add_option("--config", o.config, "Model config (JSON)")->required();
  posterior->add_option("--n", o.n, "Vertex count (<= 6)")->required();
  posterior->add_option("--u", o.u, "Queried vertex")->required();
  posterior->add_option("--pinned", o.pinned, "Comma-separated pinned vertices")->delimiter(',');
  posterior->add_option("--labels", o.labels, "Comma-separated pinned labels")->delimiter(',');
  common(posterior);

  auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  replay->add_option("--manifest", o.manifest, "manifest.json of a previous run")->required();
  replay->add_option("--out", o.out_dir, "Directory for the replayed artifacts")->required();

  std::vector<std::string> storage{"sbmlab"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (replay->parsed()) return do_replay(o, out, err);
    std::string name;
    Outcome outcome;
    if (analyze->parsed()) {
      name = "analyze";
      outcome = do_analyze(o);
    } else if (qfunc->parsed()) {
      name = "qfunc";
      outcome = do_qfunc(o);
    } else if (qcurve->parsed()) {
      name = "qcurve";
      outcome = do_qcurve(o);
    } else if (sample->parsed()) {
      name = "sample";
      outcome = do_sample(o);
    } else if (cycles->parsed()) {
      name = "cycles";
      outcome = do_cycles(o);
    } else if (moment->parsed()) {
      name = "moment";
      outcome = do_moment(o);
    } else if (reconstruct->parsed()) {
      name = "reconstruct";
      outcome = do_reconstruct(o);
    } else if (tv->parsed()) {
      name = "oracle tv";
      outcome = do_oracle_tv(o);
    } else {
      name = "oracle posterior";
      outcome = do_oracle_posterior(o);
    }
    emit(name, args, o, outcome, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kFailure;
  } catch (const fs::filesystem_error& e) {
    err << "IoError: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace sbm::cli
