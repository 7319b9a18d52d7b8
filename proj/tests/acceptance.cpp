// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//
//   acceptance --group synthetic   criteria 1-5 and 10 (generated inputs)
//   acceptance --group datasets    criteria 6-9 (Cora / Wiki files)
//   acceptance --group all
//
// Dataset files are looked up in --data-dir, then $BOOSTNE_DATA_DIR, then the
// source tree's data/ directory:
//   <dir>/cora/cora.edges  <dir>/cora/cora.labels
//   <dir>/wiki/wiki.edges  <dir>/wiki/wiki.labels
// Exit status: 0 all run criteria passed, 1 a criterion failed, 77 nothing
// ran because every dataset was missing.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boostne/boost.hpp"
#include "boostne/connectivity.hpp"
#include "boostne/eval.hpp"
#include "boostne/graph.hpp"
#include "boostne/nmf.hpp"
#include "cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace boostne;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Result {
  Outcome outcome;
  std::string detail;
};

Result pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Result fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Result skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

struct Runner {
  int failed = 0;
  int passed = 0;
  int skipped = 0;

  void run(int id, const std::string& name, double budget_seconds, const std::function<Result()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = body();
    } catch (const std::exception& e) {
      r = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.outcome == Outcome::kPass && budget_seconds > 0 && secs > budget_seconds) {
      r = fail(r.detail + "; runtime " + fmt(secs, 1) + "s over budget " + fmt(budget_seconds, 0) + "s");
    }
    const char* tag = r.outcome == Outcome::kPass ? "PASS" : r.outcome == Outcome::kFail ? "FAIL" : "SKIP";
    (r.outcome == Outcome::kPass ? passed : r.outcome == Outcome::kFail ? failed : skipped) += 1;
    std::cout << "[" << tag << "] " << id << ". " << name << ": " << r.detail << " (" << fmt(secs, 1) << "s)"
              << std::endl;
  }
};

// ---------------------------------------------------------------------------
// Criteria on generated inputs

ConnectivityMatrix random_connectivity(const Graph& g, std::mt19937_64& rng) {
  const std::size_t n = g.num_nodes();
  switch (rng() % 3) {
    case 0:
      return deepwalk_matrix(g, 1 + static_cast<int>(rng() % 10), std::ldexp(1.0, static_cast<int>(rng() % 5) - 2));
    case 1:
      return line_matrix(g, std::ldexp(1.0, -static_cast<int>(rng() % 4)));
    default:
      return grarep_step_matrix(g, 1 + static_cast<int>(rng() % 4), 1.0 / static_cast<double>(n));
  }
}

Result residual_dominance() {
  std::mt19937_64 rng(1001);
  std::size_t checked_levels = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng() % 191;
    const double p = std::min(1.0, (2.0 + static_cast<double>(rng() % 8)) / static_cast<double>(n));
    const Graph g = oracle::random_graph(n, p, rng, trial % 2 == 1);
    const auto x = random_connectivity(g, rng);
    BoostConfig cfg;
    cfg.levels = 1 + static_cast<int>(rng() % 6);
    cfg.level_rank = 1 + static_cast<int>(rng() % std::min<std::size_t>(8, n / 2));
    cfg.allow_wide = true;
    cfg.seed = rng();
    cfg.nmf.max_iters = 30 + static_cast<int>(rng() % 60);
    const auto e = boostne::boostne(x, cfg);

    CsrMatrix r = x.values;
    double prev_norm = r.frobenius_norm();
    for (const auto& level : e.levels) {
      if (level.residual_norm_before != r.frobenius_norm() || level.residual_nnz_before != r.nnz()) {
        return fail("trial " + std::to_string(trial) + ": recorded level statistics disagree with recomputation");
      }
      const CsrMatrix next = level.factors.degenerate ? r : residual(r, level.factors);
      for (std::size_t i = 0; i < n; ++i) {
        const auto cols = next.row_cols(i);
        const auto vals = next.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
          const double before = r.at(i, cols[k]);
          if (before == 0.0) return fail("trial " + std::to_string(trial) + ": residual support grew");
          if (!(vals[k] >= 0.0) || vals[k] > before) {
            return fail("trial " + std::to_string(trial) + ": entry outside [0, previous residual]");
          }
        }
      }
      if (next.nnz() > r.nnz() || next.frobenius_norm() > prev_norm) {
        return fail("trial " + std::to_string(trial) + ": residual norm or nnz increased");
      }
      prev_norm = next.frobenius_norm();
      r = next;
      ++checked_levels;
    }
    if (e.terminal_norm != r.frobenius_norm()) return fail("terminal norm mismatch");
  }
  return pass("100 graphs, " + std::to_string(checked_levels) + " level transitions, no violation");
}

Result nmf_monotonicity() {
  std::mt19937_64 rng(2002);
  double worst = -1e300;
  std::size_t steps = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 2 + rng() % 40, cols = 2 + rng() % 40;
    const std::size_t rank = 1 + rng() % std::min<std::size_t>(6, std::min(rows, cols));
    const double density = 0.05 + 0.6 * static_cast<double>(rng() % 100) / 100.0;
    const auto r = oracle::random_sparse(rows, cols, density, rng);
    const auto r_t = r.transposed();
    auto f = oracle::random_factors(rows, cols, rank, 0.1 + 2.0 * static_cast<double>(rng() % 100) / 100.0, rng);
    double prev = objective(r, f);
    for (int s = 0; s < 10; ++s) {
      multiplicative_step(r, r_t, f, 1e-12);
      const double cur = objective(r, f);
      worst = std::max(worst, cur - prev);
      if (cur > prev + 1e-9) {
        return fail("trial " + std::to_string(trial) + " step " + std::to_string(s) + ": objective rose by " +
                    sci(cur - prev));
      }
      for (const double v : f.u.values())
        if (!(v >= 0.0)) return fail("negative or NaN entry in U");
      for (const double v : f.v_t.values())
        if (!(v >= 0.0)) return fail("negative or NaN entry in V");
      prev = cur;
      ++steps;
    }
  }
  return pass("1000 instances, " + std::to_string(steps) + " steps, largest objective change " + sci(worst));
}

Result oracle_equivalence() {
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t rows = 1 + rng() % 50, cols = 1 + rng() % 50, rank = 1 + rng() % 8;
    const auto r = oracle::random_sparse(rows, cols, 0.02 + 0.5 * static_cast<double>(rng() % 100) / 100.0, rng);
    const auto f = oracle::random_factors(rows, cols, rank, 0.5, rng);
    const double want = oracle::dense_objective(oracle::from_csr(r), oracle::from_dense(f.u),
                                                oracle::from_dense(f.context()));
    const double err = std::abs(objective(r, f) - want);
    worst = std::max(worst, err);
    if (err > 1e-9) return fail("objective off by " + sci(err) + " on trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 100, c = 1 + rng() % 10;
    std::vector<LabelList> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t k = 0; k < c; ++k) {
        if (rng() % 3 == 0) truth[i].push_back(k);
        if (rng() % 3 == 0) pred[i].push_back(k);
      }
    }
    const auto got = micro_macro_f1(pred, truth, c);
    const auto [micro, macro] = oracle::f1_by_confusion(pred, truth, c);
    if (got.micro != micro || got.macro != macro) {
      return fail("F1 differs from confusion oracle on trial " + std::to_string(trial));
    }
  }
  return pass("500 objective instances (max |diff| " + sci(worst) + "), 200 F1 instances exact");
}

Result rank_recovery() {
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  double worst = 0.0;
  int instances = 0;
  for (const std::size_t true_rank : {std::size_t{1}, std::size_t{3}}) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t rows = 20 + rng() % 30, cols = 20 + rng() % 30;
      oracle::Dense a = oracle::zeros(rows, true_rank), b = oracle::zeros(true_rank, cols);
      for (auto& row : a)
        for (double& v : row) v = unit(rng);
      for (auto& row : b)
        for (double& v : row) v = unit(rng);
      const auto target = oracle::matmul(a, b);
      DenseMatrix dense(rows, cols);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) dense(i, j) = target[i][j];
      const auto r = CsrMatrix::from_dense(dense);
      NmfConfig cfg;
      cfg.rank = static_cast<int>(true_rank);
      cfg.max_iters = 5000;
      cfg.rel_tol = 1e-14;
      cfg.seed = rng();
      const auto f = factorize(r, cfg);
      const double rel = std::sqrt(std::max(objective(r, f), 0.0)) / r.frobenius_norm();
      worst = std::max(worst, rel);
      ++instances;
      if (rel >= 1e-3) {
        return fail("rank " + std::to_string(true_rank) + " trial " + std::to_string(trial) +
                    ": relative residual " + sci(rel));
      }
    }
  }
  return pass(std::to_string(instances) + " instances (rank 1 and 3, d_s = rank), worst relative residual " +
              sci(worst));
}

Result single_level_reduction() {
  std::mt19937_64 rng(5005);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 30 + rng() % 120;
    const Graph g = oracle::random_graph(n, 4.0 / static_cast<double>(n), rng);
    const auto x = random_connectivity(g, rng);
    BoostConfig cfg;
    cfg.levels = 1;
    cfg.level_rank = 4 + static_cast<int>(rng() % 12);
    cfg.seed = rng();
    const auto e = boostne::boostne(x, cfg);
    NmfConfig nmf;
    nmf.rank = cfg.level_rank;
    nmf.seed = cfg.seed;
    const auto f = factorize(x.values, nmf);
    if (!(e.embedding == f.u) || !(e.levels[0].factors.v_t == f.v_t)) {
      return fail("trial " + std::to_string(trial) + ": factors differ");
    }
  }
  return pass("10 graphs, U and V bit-identical");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "boostne");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

Result manifest_replay() {
  const fs::path dir = fs::temp_directory_path() / ("boostne_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::mt19937_64 rng(10010);
  const Graph g = oracle::random_graph(150, 0.05, rng, true);
  {
    std::ofstream out(dir / "g.edges");
    write_edge_list(out, g);
  }
  const auto p = [&](const char* name) { return (dir / name).string(); };
  if (run_cli({"embed", "--edges", p("g.edges"), "--dim", "16", "--levels", "4", "--seed", "7", "--out",
               p("orig.txt")}) != 0) {
    return fail("initial embed run failed");
  }
  int rc = run_cli({"embed", "--from-manifest", p("orig.txt.manifest.json"), "--out", p("r1.txt")});
  rc |= run_cli({"embed", "--from-manifest", p("orig.txt.manifest.json"), "--out", p("r2.txt")});
  if (rc != 0) return fail("replay run failed");
  const std::string a = slurp(dir / "orig.txt"), b = slurp(dir / "r1.txt"), c = slurp(dir / "r2.txt");
  fs::remove_all(dir);
  if (a.empty() || a != b || b != c) return fail("replayed embeddings differ");
  return pass("original and two replays byte-identical (" + std::to_string(a.size()) + " bytes)");
}

// ---------------------------------------------------------------------------
// Criteria on the benchmark datasets

struct Dataset {
  Graph graph;
  LabelSet labels;
};

std::optional<Dataset> load_dataset(const fs::path& data_dir, const std::string& name) {
  const fs::path edges = data_dir / name / (name + ".edges");
  const fs::path labels = data_dir / name / (name + ".labels");
  if (!fs::exists(edges) || !fs::exists(labels)) return std::nullopt;
  Dataset d;
  d.graph = load_edge_list_file(edges.string());
  d.labels = load_labels_file(labels.string(), d.graph.node_ids());
  return d;
}

MultiLevelEmbedding embed_defaults(const Graph& g, int levels, int dim, std::uint64_t seed) {
  const auto x = deepwalk_matrix(g, 10, 5.0);
  BoostConfig cfg;
  cfg.levels = levels;
  cfg.level_rank = dim / levels;
  cfg.seed = seed;
  return boostne::boostne(x, cfg);
}

Result residual_sweep_trend(const std::optional<Dataset>& cora) {
  if (!cora) return skip("Cora files not found");
  const auto x = deepwalk_matrix(cora->graph, 10, 5.0);
  std::vector<double> norms;
  std::string series;
  for (const int k : {1, 2, 4, 8, 16, 32, 64}) {
    BoostConfig cfg;
    cfg.levels = k;
    cfg.level_rank = 128 / k;
    norms.push_back(boostne::boostne(x, cfg).terminal_norm);
    series += (series.empty() ? "" : " ") + std::string("k=") + std::to_string(k) + ":" + fmt(norms.back(), 3);
  }
  for (std::size_t i = 1; i < norms.size(); ++i) {
    if (norms[i] > norms[i - 1]) return fail("norm rose between sweep entries " + std::to_string(i) + "; " + series);
  }
  if (!(norms.back() < norms.front())) return fail("norm(k=64) not below norm(k=1); " + series);
  return pass(series);
}

Result cora_reference_f1(const std::optional<Dataset>& cora) {
  if (!cora) return skip("Cora files not found");
  if (cora->graph.num_nodes() != 2708 || cora->graph.num_edges() != 5278) {
    return fail("Cora has n=" + std::to_string(cora->graph.num_nodes()) + " m=" +
                std::to_string(cora->graph.num_edges()) + ", expected n=2708 m=5278");
  }
  const auto e = embed_defaults(cora->graph, 8, 128, 42);
  EvalConfig cfg;
  cfg.train_ratios = {0.1, 0.5, 0.9};
  cfg.repeats = 10;
  const auto report = evaluate(e.embedding, cora->labels, cfg);
  const double want_micro[] = {0.7824, 0.8257, 0.8373};
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < 3; ++i) {
    const double got = report.summary[i].mean_micro;
    ok = ok && std::abs(got - want_micro[i]) <= 0.03;
    detail += "Micro@" + fmt(cfg.train_ratios[i], 1) + "=" + fmt(got) + " (ref " + fmt(want_micro[i]) + ") ";
  }
  const double macro = report.summary[1].mean_macro;
  ok = ok && std::abs(macro - 0.8143) <= 0.03;
  detail += "Macro@0.5=" + fmt(macro) + " (ref 0.8143), tolerance 0.03";
  return ok ? pass(detail) : fail(detail);
}

Result wiki_reference_f1(const std::optional<Dataset>& wiki) {
  if (!wiki) return skip("Wiki files not found");
  const auto e = embed_defaults(wiki->graph, 8, 128, 42);
  EvalConfig cfg;
  cfg.train_ratios = {0.5};
  cfg.repeats = 10;
  const double got = evaluate(e.embedding, wiki->labels, cfg).summary[0].mean_micro;
  const std::string detail = "Micro@0.5=" + fmt(got) + " (ref 0.6749, tolerance 0.04)";
  return std::abs(got - 0.6749) <= 0.04 ? pass(detail) : fail(detail);
}

Result multi_vs_single(const std::optional<Dataset>& cora) {
  if (!cora) return skip("Cora files not found");
  EvalConfig cfg;
  cfg.train_ratios = {0.5};
  cfg.repeats = 10;
  std::string detail;
  bool ok = true;
  for (const std::uint64_t seed : {42u, 43u, 44u}) {
    cfg.seed = seed;
    const double multi = evaluate(embed_defaults(cora->graph, 8, 128, seed).embedding, cora->labels, cfg)
                             .summary[0]
                             .mean_micro;
    const double single = evaluate(embed_defaults(cora->graph, 1, 128, seed).embedding, cora->labels, cfg)
                              .summary[0]
                              .mean_micro;
    ok = ok && multi >= single - 0.005;
    detail += "seed " + std::to_string(seed) + ": k=8 " + fmt(multi) + " vs k=1 " + fmt(single) + "; ";
  }
  return ok ? pass(detail + "slack 0.005") : fail(detail + "slack 0.005");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BoostNE acceptance suite"};
  std::string group = "all";
  std::string data_dir;
  app.add_option("--group", group, "synthetic, datasets or all")
      ->check(CLI::IsMember({"synthetic", "datasets", "all"}));
  app.add_option("--data-dir", data_dir, "Directory holding cora/ and wiki/");
  CLI11_PARSE(app, argc, argv);

  if (data_dir.empty()) {
    const char* env = std::getenv("BOOSTNE_DATA_DIR");
    data_dir = env != nullptr && *env != '\0' ? env : BOOSTNE_DEFAULT_DATA_DIR;
  }

  Runner runner;
  if (group != "datasets") {
    runner.run(1, "residual dominance", 60, residual_dominance);
    runner.run(2, "NMF monotonicity", 60, nmf_monotonicity);
    runner.run(3, "oracle equivalence", 0, oracle_equivalence);
    runner.run(4, "rank recovery", 0, rank_recovery);
    runner.run(5, "k=1 reduction", 0, single_level_reduction);
  }
  if (group != "synthetic") {
    std::cout << "data directory: " << data_dir << std::endl;
    const auto cora = load_dataset(data_dir, "cora");
    const auto wiki = load_dataset(data_dir, "wiki");
    runner.run(6, "residual trend over level counts on Cora", 15 * 60, [&] { return residual_sweep_trend(cora); });
    runner.run(7, "reference F1 on Cora", 20 * 60, [&] { return cora_reference_f1(cora); });
    runner.run(8, "reference F1 on Wiki", 0, [&] { return wiki_reference_f1(wiki); });
    runner.run(9, "multi-level vs single-level on Cora", 0, [&] { return multi_vs_single(cora); });
  }
  if (group != "datasets") runner.run(10, "manifest replay determinism", 0, manifest_replay);

  std::cout << runner.passed << " passed, " << runner.failed << " failed, " << runner.skipped << " skipped"
            << std::endl;
  if (runner.failed > 0) return 1;
  if (runner.passed == 0 && runner.skipped > 0) return 77;
  return 0;
}
