#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace boostne::cli {

/// Seed used when --seed is omitted.
inline constexpr std::uint64_t kDefaultSeed = 42;

struct MatrixOptions {
  std::string matrix = "deepwalk";
  int window = 10;
  /// Unset means the per-kind default: 5 for deepwalk/line, 1/n for grarep.
  std::optional<double> shift;
  int step = 1;
  bool drop_isolated = false;
  std::size_t max_dense_nodes = 20000;
};

struct EmbedOptions {
  std::string edges;
  MatrixOptions matrix;
  int dim = 128;
  int levels = 8;
  std::uint64_t seed = kDefaultSeed;
  int nmf_iters = 200;
  double nmf_tol = 1e-4;
  bool allow_wide = false;
  std::string out = "embedding.txt";
  std::string trace;     // default: <out>.trace.json
  std::string manifest;  // default: <out>.manifest.json
};

struct EvalOptions {
  std::string embedding;
  std::string labels;
  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int repeats = 10;
  std::uint64_t seed = kDefaultSeed;
  double lambda = 1.0;
  int iters = 300;
  std::string rule = "topk";
  double threshold = 0.5;
  std::string out;       // prefix for <out>.json and <out>.txt; table to stdout when empty
  std::string manifest;  // default: <out>.manifest.json or boostne-eval.manifest.json
};

struct ResidualsOptions {
  std::string edges;
  MatrixOptions matrix;
  int dim = 128;
  std::vector<int> levels_sweep = {1, 2, 4, 8, 16, 32, 64};
  std::uint64_t seed = kDefaultSeed;
  int nmf_iters = 200;
  double nmf_tol = 1e-4;
  bool allow_wide = false;
  std::string out;       // CSV path; stdout when empty
  std::string manifest;  // default: <out>.manifest.json or boostne-residuals.manifest.json
};

nlohmann::ordered_json to_json(const EmbedOptions& o);
nlohmann::ordered_json to_json(const EvalOptions& o);
nlohmann::ordered_json to_json(const ResidualsOptions& o);
EmbedOptions embed_options_from_json(const nlohmann::json& j);
EvalOptions eval_options_from_json(const nlohmann::json& j);
ResidualsOptions residuals_options_from_json(const nlohmann::json& j);

/// Each command writes its outputs plus a run manifest and returns the exit
/// code. Errors propagate as boostne::Error.
int run_embed(const EmbedOptions& o);
int run_eval(const EvalOptions& o);
int run_residuals(const ResidualsOptions& o);

/// Full command-line entry point (argv[0] is the program name).
int main_entry(int argc, char** argv);

}  // namespace boostne::cli
