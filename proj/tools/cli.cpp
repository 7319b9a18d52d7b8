#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "boostne/boost.hpp"
#include "boostne/connectivity.hpp"
#include "boostne/errors.hpp"
#include "boostne/eval.hpp"
#include "boostne/graph.hpp"
#include "boostne/hashing.hpp"
#include "boostne/io.hpp"
#include "boostne/kernels.hpp"

namespace boostne::cli {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json to_json(const MatrixOptions& m) {
  ordered_json j;
  j["matrix"] = m.matrix;
  j["window"] = m.window;
  j["shift"] = m.shift ? ordered_json(*m.shift) : ordered_json(nullptr);
  j["step"] = m.step;
  j["drop_isolated"] = m.drop_isolated;
  j["max_dense_nodes"] = m.max_dense_nodes;
  return j;
}

MatrixOptions matrix_from_json(const nlohmann::json& j) {
  MatrixOptions m;
  m.matrix = j.at("matrix").get<std::string>();
  m.window = j.at("window").get<int>();
  if (!j.at("shift").is_null()) m.shift = j.at("shift").get<double>();
  m.step = j.at("step").get<int>();
  m.drop_isolated = j.at("drop_isolated").get<bool>();
  m.max_dense_nodes = j.at("max_dense_nodes").get<std::size_t>();
  return m;
}

std::string default_path(const std::string& explicit_path, const std::string& out, const std::string& suffix,
                         const std::string& fallback) {
  if (!explicit_path.empty()) return explicit_path;
  if (!out.empty()) return out + suffix;
  return fallback;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open output file " + path);
  return out;
}

ordered_json input_record(const std::string& path) {
  return {{"path", path}, {"fingerprint", to_hex(file_fingerprint(path))}};
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest(const std::string& path, const std::string& command, ordered_json parameters,
                    ordered_json inputs, ordered_json outputs, ordered_json resolved, double seconds) {
  ordered_json m;
  m["tool"] = "boostne";
  m["version"] = BOOSTNE_VERSION;
  m["command"] = command;
  m["parameters"] = std::move(parameters);
  m["resolved"] = std::move(resolved);
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  m["kernels"] = std::string(kernels::active().name);
  m["duration_seconds"] = seconds;
  auto out = open_output(path);
  out << m.dump(2) << '\n';
}

struct PreparedGraph {
  Graph graph;
  std::size_t dropped = 0;
};

PreparedGraph prepare_graph(const std::string& path, const MatrixOptions& m) {
  PreparedGraph p;
  p.graph = load_edge_list_file(path);
  if (m.drop_isolated) {
    const std::size_t before = p.graph.num_nodes();
    p.graph = drop_isolated(p.graph);
    p.dropped = before - p.graph.num_nodes();
  }
  return p;
}

ConnectivityConfig resolve_connectivity(const MatrixOptions& m, std::size_t num_nodes) {
  ConnectivityConfig c;
  c.kind = parse_matrix_kind(m.matrix);
  c.window = m.window;
  c.step = m.step;
  if (m.shift) {
    c.shift = *m.shift;
  } else {
    c.shift = c.kind == MatrixKind::kGraRepStep ? 1.0 / static_cast<double>(num_nodes) : 5.0;
  }
  c.validate();
  return c;
}

BoostConfig make_boost_config(int dim, int levels, std::uint64_t seed, int nmf_iters, double nmf_tol,
                              bool allow_wide) {
  if (levels < 1) throw UsageError("--levels must be >= 1");
  if (dim < 1) throw UsageError("--dim must be >= 1");
  if (dim % levels != 0) {
    throw UsageError("--dim " + std::to_string(dim) + " is not divisible by --levels " + std::to_string(levels));
  }
  BoostConfig cfg;
  cfg.levels = levels;
  cfg.level_rank = dim / levels;
  cfg.seed = seed;
  cfg.allow_wide = allow_wide;
  cfg.nmf.max_iters = nmf_iters;
  cfg.nmf.rel_tol = nmf_tol;
  return cfg;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_inputs(const nlohmann::json& manifest) {
  for (const auto& [name, record] : manifest.at("inputs").items()) {
    const auto path = record.at("path").get<std::string>();
    const auto expected = record.at("fingerprint").get<std::string>();
    const auto actual = to_hex(file_fingerprint(path));
    if (actual != expected) {
      throw DataError("input '" + name + "' (" + path + ") changed since the manifest was written: fingerprint " +
                      actual + " != " + expected);
    }
  }
}

nlohmann::json load_manifest(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + path + ": " + e.what());
  }
  if (m.value("command", std::string()) != command) {
    throw UsageError("manifest " + path + " records command '" + m.value("command", std::string()) +
                     "', not '" + command + "'");
  }
  check_inputs(m);
  return m;
}

}  // namespace

ordered_json to_json(const EmbedOptions& o) {
  ordered_json j;
  j["edges"] = o.edges;
  j["matrix"] = to_json(o.matrix);
  j["dim"] = o.dim;
  j["levels"] = o.levels;
  j["seed"] = o.seed;
  j["nmf_iters"] = o.nmf_iters;
  j["nmf_tol"] = o.nmf_tol;
  j["allow_wide"] = o.allow_wide;
  j["out"] = o.out;
  j["trace"] = o.trace;
  j["manifest"] = o.manifest;
  return j;
}

EmbedOptions embed_options_from_json(const nlohmann::json& j) {
  EmbedOptions o;
  o.edges = j.at("edges").get<std::string>();
  o.matrix = matrix_from_json(j.at("matrix"));
  o.dim = j.at("dim").get<int>();
  o.levels = j.at("levels").get<int>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.nmf_iters = j.at("nmf_iters").get<int>();
  o.nmf_tol = j.at("nmf_tol").get<double>();
  o.allow_wide = j.at("allow_wide").get<bool>();
  o.out = j.at("out").get<std::string>();
  o.trace = j.at("trace").get<std::string>();
  o.manifest = j.at("manifest").get<std::string>();
  return o;
}

ordered_json to_json(const EvalOptions& o) {
  ordered_json j;
  j["embedding"] = o.embedding;
  j["labels"] = o.labels;
  j["ratios"] = o.ratios;
  j["repeats"] = o.repeats;
  j["seed"] = o.seed;
  j["lambda"] = o.lambda;
  j["iters"] = o.iters;
  j["rule"] = o.rule;
  j["threshold"] = o.threshold;
  j["out"] = o.out;
  j["manifest"] = o.manifest;
  return j;
}

EvalOptions eval_options_from_json(const nlohmann::json& j) {
  EvalOptions o;
  o.embedding = j.at("embedding").get<std::string>();
  o.labels = j.at("labels").get<std::string>();
  o.ratios = j.at("ratios").get<std::vector<double>>();
  o.repeats = j.at("repeats").get<int>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.lambda = j.at("lambda").get<double>();
  o.iters = j.at("iters").get<int>();
  o.rule = j.at("rule").get<std::string>();
  o.threshold = j.at("threshold").get<double>();
  o.out = j.at("out").get<std::string>();
  o.manifest = j.at("manifest").get<std::string>();
  return o;
}

ordered_json to_json(const ResidualsOptions& o) {
  ordered_json j;
  j["edges"] = o.edges;
  j["matrix"] = to_json(o.matrix);
  j["dim"] = o.dim;
  j["levels_sweep"] = o.levels_sweep;
  j["seed"] = o.seed;
  j["nmf_iters"] = o.nmf_iters;
  j["nmf_tol"] = o.nmf_tol;
  j["allow_wide"] = o.allow_wide;
  j["out"] = o.out;
  j["manifest"] = o.manifest;
  return j;
}

ResidualsOptions residuals_options_from_json(const nlohmann::json& j) {
  ResidualsOptions o;
  o.edges = j.at("edges").get<std::string>();
  o.matrix = matrix_from_json(j.at("matrix"));
  o.dim = j.at("dim").get<int>();
  o.levels_sweep = j.at("levels_sweep").get<std::vector<int>>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.nmf_iters = j.at("nmf_iters").get<int>();
  o.nmf_tol = j.at("nmf_tol").get<double>();
  o.allow_wide = j.at("allow_wide").get<bool>();
  o.out = j.at("out").get<std::string>();
  o.manifest = j.at("manifest").get<std::string>();
  return o;
}

int run_embed(const EmbedOptions& opts) {
  const Stopwatch clock;
  EmbedOptions o = opts;
  if (o.edges.empty()) throw UsageError("--edges is required");
  if (o.out.empty()) throw UsageError("--out must not be empty");
  o.trace = default_path(o.trace, o.out, ".trace.json", "");
  o.manifest = default_path(o.manifest, o.out, ".manifest.json", "");

  BoostConfig cfg = make_boost_config(o.dim, o.levels, o.seed, o.nmf_iters, o.nmf_tol, o.allow_wide);
  const auto prepared = prepare_graph(o.edges, o.matrix);
  const Graph& g = prepared.graph;
  const ConnectivityConfig cc = resolve_connectivity(o.matrix, g.num_nodes());
  std::cerr << "graph: n=" << g.num_nodes() << " m=" << g.num_edges() << " vol=" << g.volume();
  if (prepared.dropped > 0) std::cerr << " (dropped " << prepared.dropped << " isolated)";
  std::cerr << '\n';

  const ConnectivityMatrix x = build_connectivity(g, cc, WalkSumOptions{o.matrix.max_dense_nodes});
  std::cerr << "connectivity: " << to_string(cc.kind) << " nnz=" << x.values.nnz() << '\n';
  const MultiLevelEmbedding e = boostne(x, cfg);
  for (const auto& w : e.warnings) std::cerr << "warning: " << w << '\n';

  {
    auto out = open_output(o.out);
    write_embedding(out, g.node_ids(), e.embedding);
  }
  const auto trace = residual_trace(e);
  {
    auto out = open_output(o.trace);
    write_trace_json(out, trace);
  }

  ordered_json resolved;
  resolved["shift"] = cc.shift;
  resolved["level_rank"] = cfg.level_rank;
  resolved["nodes"] = g.num_nodes();
  resolved["edges"] = g.num_edges();
  resolved["connectivity_nnz"] = x.values.nnz();
  resolved["terminal_residual_norm"] = e.terminal_norm;
  ordered_json inputs;
  inputs["edges"] = input_record(o.edges);
  ordered_json outputs;
  outputs["embedding"] = o.out;
  outputs["trace"] = o.trace;
  write_manifest(o.manifest, "embed", to_json(o), inputs, outputs, resolved, clock.seconds());
  return 0;
}

int run_eval(const EvalOptions& opts) {
  const Stopwatch clock;
  EvalOptions o = opts;
  if (o.embedding.empty()) throw UsageError("--embedding is required");
  if (o.labels.empty()) throw UsageError("--labels is required");
  o.manifest = default_path(o.manifest, o.out, ".manifest.json", "boostne-eval.manifest.json");

  EvalConfig cfg;
  cfg.train_ratios = o.ratios;
  cfg.repeats = o.repeats;
  cfg.seed = o.seed;
  cfg.lambda = o.lambda;
  cfg.iterations = o.iters;
  cfg.threshold = o.threshold;
  if (o.rule == "topk") {
    cfg.rule = DecisionRule::kTopK;
  } else if (o.rule == "threshold") {
    cfg.rule = DecisionRule::kThreshold;
  } else {
    throw UsageError("--rule must be 'topk' or 'threshold'");
  }
  cfg.validate();

  const Embedding emb = read_embedding_file(o.embedding);
  const LabelSet labels = load_labels_file(o.labels, emb.node_ids);
  const EvalReport report = evaluate(emb.vectors, labels, cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

  ordered_json outputs;
  if (o.out.empty()) {
    write_report_table(std::cout, report);
  } else {
    {
      auto out = open_output(o.out + ".json");
      write_report_json(out, report);
    }
    {
      auto out = open_output(o.out + ".txt");
      write_report_table(out, report);
    }
    write_report_table(std::cout, report);
    outputs["report_json"] = o.out + ".json";
    outputs["report_table"] = o.out + ".txt";
  }

  ordered_json inputs;
  inputs["embedding"] = input_record(o.embedding);
  inputs["labels"] = input_record(o.labels);
  ordered_json resolved;
  resolved["labeled_nodes"] = labels.labeled_nodes().size();
  resolved["classes"] = labels.num_classes;
  resolved["cells"] = report.cells.size();
  write_manifest(o.manifest, "eval", to_json(o), inputs, outputs, resolved, clock.seconds());
  return 0;
}

int run_residuals(const ResidualsOptions& opts) {
  const Stopwatch clock;
  ResidualsOptions o = opts;
  if (o.edges.empty()) throw UsageError("--edges is required");
  if (o.levels_sweep.empty()) throw UsageError("--levels-sweep must list at least one level count");
  std::string offenders;
  for (const int k : o.levels_sweep) {
    if (k < 1 || o.dim % k != 0) offenders += (offenders.empty() ? "" : ",") + std::to_string(k);
  }
  if (!offenders.empty()) {
    throw UsageError("level counts not dividing --dim " + std::to_string(o.dim) + ": " + offenders);
  }
  o.manifest = default_path(o.manifest, o.out, ".manifest.json", "boostne-residuals.manifest.json");

  const auto prepared = prepare_graph(o.edges, o.matrix);
  const Graph& g = prepared.graph;
  const ConnectivityConfig cc = resolve_connectivity(o.matrix, g.num_nodes());
  const ConnectivityMatrix x = build_connectivity(g, cc, WalkSumOptions{o.matrix.max_dense_nodes});
  const double x_norm = x.values.frobenius_norm();

  std::ostringstream csv;
  csv << "levels,level_rank,terminal_norm,relative_terminal_norm,terminal_nnz,joint_objective,sum_level_nnz\n";
  for (const int k : o.levels_sweep) {
    const BoostConfig cfg = make_boost_config(o.dim, k, o.seed, o.nmf_iters, o.nmf_tol, o.allow_wide);
    const MultiLevelEmbedding e = boostne(x, cfg);
    std::size_t level_nnz = 0;
    for (const auto& level : e.levels) level_nnz += level.residual_nnz_before;
    csv << k << ',' << cfg.level_rank << ',' << format_double(e.terminal_norm) << ','
        << format_double(x_norm > 0.0 ? e.terminal_norm / x_norm : 0.0) << ',' << e.terminal_nnz << ','
        << format_double(joint_objective(x.values, e)) << ',' << level_nnz << '\n';
    std::cerr << "levels=" << k << " terminal_norm=" << e.terminal_norm << '\n';
  }

  ordered_json outputs;
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    auto out = open_output(o.out);
    out << csv.str();
    outputs["csv"] = o.out;
  }
  ordered_json inputs;
  inputs["edges"] = input_record(o.edges);
  ordered_json resolved;
  resolved["shift"] = cc.shift;
  resolved["nodes"] = g.num_nodes();
  resolved["connectivity_nnz"] = x.values.nnz();
  resolved["connectivity_norm"] = x_norm;
  write_manifest(o.manifest, "residuals", to_json(o), inputs, outputs, resolved, clock.seconds());
  return 0;
}

namespace {

void add_matrix_flags(CLI::App* cmd, MatrixOptions& m, double& shift) {
  cmd->add_option("--matrix", m.matrix, "Connectivity matrix: deepwalk, line or grarep")
      ->check(CLI::IsMember({"deepwalk", "line", "grarep"}))
      ->capture_default_str();
  cmd->add_option("--window", m.window, "DeepWalk context window T")->capture_default_str();
  cmd->add_option("--shift", shift, "Log shift b (default 5, or 1/n for grarep)");
  cmd->add_option("--step", m.step, "GraRep transition step p")->capture_default_str();
  cmd->add_flag("--drop-isolated", m.drop_isolated, "Remove zero-degree nodes before building S");
  cmd->add_option("--max-dense-nodes", m.max_dense_nodes, "Refuse dense n x n matrices above this node count")
      ->capture_default_str();
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Multi-level network embedding by boosted nonnegative low-rank approximation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BOOSTNE_VERSION);

  EmbedOptions embed;
  double embed_shift = 0.0;
  std::string embed_manifest_in;
  auto* embed_cmd = app.add_subcommand("embed", "Build the connectivity matrix and learn a multi-level embedding");
  embed_cmd->add_option("--edges", embed.edges, "Edge list file (src dst [weight])");
  add_matrix_flags(embed_cmd, embed.matrix, embed_shift);
  embed_cmd->add_option("--dim", embed.dim, "Total embedding dimension d")->capture_default_str();
  embed_cmd->add_option("--levels", embed.levels, "Number of levels k (must divide d)")->capture_default_str();
  embed_cmd->add_option("--seed", embed.seed, "Random seed")->capture_default_str();
  embed_cmd->add_option("--nmf-iters", embed.nmf_iters, "Max multiplicative-update iterations per level")
      ->capture_default_str();
  embed_cmd->add_option("--nmf-tol", embed.nmf_tol, "Relative objective-decrease stopping tolerance")
      ->capture_default_str();
  embed_cmd->add_flag("--allow-wide", embed.allow_wide, "Allow d >= n");
  embed_cmd->add_option("--out", embed.out, "Embedding output (word2vec text)")->capture_default_str();
  embed_cmd->add_option("--trace", embed.trace, "Residual trace JSON (default <out>.trace.json)");
  embed_cmd->add_option("--manifest", embed.manifest, "Run manifest (default <out>.manifest.json)");
  embed_cmd->add_option("--from-manifest", embed_manifest_in, "Replay the run recorded in a manifest");

  EvalOptions eval;
  std::string eval_manifest_in;
  auto* eval_cmd = app.add_subcommand("eval", "Multi-label node classification with Micro/Macro-F1");
  eval_cmd->add_option("--embedding", eval.embedding, "Embedding file (word2vec text)");
  eval_cmd->add_option("--labels", eval.labels, "Label file (node_id label [label ...])");
  eval_cmd->add_option("--ratios", eval.ratios, "Training ratios")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--repeats", eval.repeats, "Repeats per ratio")->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Random seed")->capture_default_str();
  eval_cmd->add_option("--lambda", eval.lambda, "L2 regularization strength")->capture_default_str();
  eval_cmd->add_option("--iters", eval.iters, "Classifier gradient iterations")->capture_default_str();
  eval_cmd->add_option("--rule", eval.rule, "Decision rule: topk or threshold")
      ->check(CLI::IsMember({"topk", "threshold"}))
      ->capture_default_str();
  eval_cmd->add_option("--threshold", eval.threshold, "Score threshold for --rule threshold")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Output prefix for <out>.json and <out>.txt");
  eval_cmd->add_option("--manifest", eval.manifest, "Run manifest path");
  eval_cmd->add_option("--from-manifest", eval_manifest_in, "Replay the run recorded in a manifest");

  ResidualsOptions res;
  double res_shift = 0.0;
  std::string res_manifest_in;
  auto* res_cmd = app.add_subcommand("residuals", "Terminal residual norm for a sweep of level counts");
  res_cmd->add_option("--edges", res.edges, "Edge list file");
  add_matrix_flags(res_cmd, res.matrix, res_shift);
  res_cmd->add_option("--dim", res.dim, "Total embedding dimension d")->capture_default_str();
  res_cmd->add_option("--levels-sweep", res.levels_sweep, "Comma-separated level counts")
      ->delimiter(',')
      ->capture_default_str();
  res_cmd->add_option("--seed", res.seed, "Random seed")->capture_default_str();
  res_cmd->add_option("--nmf-iters", res.nmf_iters, "Max iterations per level")->capture_default_str();
  res_cmd->add_option("--nmf-tol", res.nmf_tol, "Stopping tolerance")->capture_default_str();
  res_cmd->add_flag("--allow-wide", res.allow_wide, "Allow d >= n");
  res_cmd->add_option("--out", res.out, "CSV output (stdout when omitted)");
  res_cmd->add_option("--manifest", res.manifest, "Run manifest path");
  res_cmd->add_option("--from-manifest", res_manifest_in, "Replay the run recorded in a manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (*embed_cmd) {
      if (!embed_manifest_in.empty()) {
        const auto m = load_manifest(embed_manifest_in, "embed");
        EmbedOptions replay = embed_options_from_json(m.at("parameters"));
        if (embed_cmd->count("--out")) {
          replay.out = embed.out;
          replay.trace = embed.trace;
          replay.manifest = embed.manifest;
        }
        if (embed_cmd->count("--trace")) replay.trace = embed.trace;
        if (embed_cmd->count("--manifest")) replay.manifest = embed.manifest;
        return run_embed(replay);
      }
      if (embed_cmd->count("--shift")) embed.matrix.shift = embed_shift;
      return run_embed(embed);
    }
    if (*eval_cmd) {
      if (!eval_manifest_in.empty()) {
        const auto m = load_manifest(eval_manifest_in, "eval");
        EvalOptions replay = eval_options_from_json(m.at("parameters"));
        if (eval_cmd->count("--out")) {
          replay.out = eval.out;
          replay.manifest = eval.manifest;
        }
        if (eval_cmd->count("--manifest")) replay.manifest = eval.manifest;
        return run_eval(replay);
      }
      return run_eval(eval);
    }
    if (*res_cmd) {
      if (!res_manifest_in.empty()) {
        const auto m = load_manifest(res_manifest_in, "residuals");
        ResidualsOptions replay = residuals_options_from_json(m.at("parameters"));
        if (res_cmd->count("--out")) {
          replay.out = res.out;
          replay.manifest = res.manifest;
        }
        if (res_cmd->count("--manifest")) replay.manifest = res.manifest;
        return run_residuals(replay);
      }
      if (res_cmd->count("--shift")) res.matrix.shift = res_shift;
      return run_residuals(res);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed manifest: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kData);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kInternal);
  }
  return static_cast<int>(ErrorKind::kUsage);
}

}  // namespace boostne::cli
