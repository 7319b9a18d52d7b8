#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "boostne/connectivity.hpp"
#include "boostne/graph.hpp"
#include "boostne/io.hpp"
#include "boostne/nmf.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("boostne_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_two_clusters(60);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  /// Runs the CLI and returns its exit code; output goes to a log file.
  int run(const std::string& args) const {
    const std::string cmd = std::string(BOOSTNE_CLI_PATH) + " " + args + " >" + path("stdout.log") + " 2>" +
                            path("stderr.log");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void write_two_clusters(std::size_t n) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0, 1);
    std::ofstream edges(path("g.edges"));
    std::ofstream labels(path("g.labels"));
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
      labels << "v" << i << ' ' << (i < half ? "left" : "right") << '\n';
      if (i + 1 < n && i + 1 != half) edges << "v" << i << " v" << i + 1 << '\n';
      for (std::size_t j = i + 2; j < n; ++j) {
        const bool same = (i < half) == (j < half);
        if (unit(rng) < (same ? 0.3 : 0.01)) edges << "v" << i << " v" << j << '\n';
      }
    }
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, EmbedWritesEmbeddingTraceAndManifest) {
  ASSERT_EQ(run("embed --edges " + path("g.edges") + " --dim 8 --levels 2 --shift 1 --out " + path("e.txt")), 0);
  const auto e = boostne::read_embedding_file(path("e.txt"));
  EXPECT_EQ(e.vectors.rows(), 60u);
  EXPECT_EQ(e.vectors.cols(), 8u);
  const auto trace = nlohmann::json::parse(slurp(path("e.txt.trace.json")));
  ASSERT_EQ(trace.size(), 3u);
  EXPECT_GE(trace[0]["frobenius_norm"].get<double>(), trace[2]["frobenius_norm"].get<double>());
  const auto manifest = nlohmann::json::parse(slurp(path("e.txt.manifest.json")));
  EXPECT_EQ(manifest["command"], "embed");
  EXPECT_TRUE(manifest.contains("inputs"));
  EXPECT_TRUE(manifest.contains("duration_seconds"));
  EXPECT_EQ(manifest["parameters"]["seed"], 42);
}

TEST_F(CliTest, SingleLevelMatchesLibraryFactorize) {
  ASSERT_EQ(run("embed --edges " + path("g.edges") + " --dim 16 --levels 1 --shift 1 --seed 5 --out " +
                path("k1.txt")),
            0);
  const auto g = boostne::load_edge_list_file(path("g.edges"));
  const auto x = boostne::deepwalk_matrix(g, 10, 1.0);
  boostne::NmfConfig cfg;
  cfg.rank = 16;
  cfg.seed = 5;
  const auto f = boostne::factorize(x.values, cfg);
  std::ostringstream expected;
  boostne::write_embedding(expected, g.node_ids(), f.u);
  EXPECT_EQ(slurp(path("k1.txt")), expected.str());
}

TEST_F(CliTest, DimensionMustDivideLevels) {
  EXPECT_EQ(run("embed --edges " + path("g.edges") + " --dim 100 --levels 8 --out " + path("x.txt")), 2);
  EXPECT_NE(slurp(path("stderr.log")).find("error"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("x.txt")));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("embed --edges " + path("missing.edges") + " --dim 8 --levels 2 --out " + path("x.txt")), 3);
  EXPECT_EQ(run("embed --bogus-flag"), 2);
  EXPECT_EQ(run("embed --edges " + path("g.edges") + " --dim 8 --levels 2 --max-dense-nodes 10 --out " +
                path("x.txt")),
            4);
  std::ofstream(path("bad.edges")) << "a b\nc\n";
  EXPECT_EQ(run("embed --edges " + path("bad.edges") + " --dim 2 --levels 1 --allow-wide --out " + path("x.txt")),
            3);
  EXPECT_NE(slurp(path("stderr.log")).find("line 2"), std::string::npos);
}

TEST_F(CliTest, EvalCellCounts) {
  ASSERT_EQ(run("embed --edges " + path("g.edges") + " --dim 8 --levels 2 --shift 1 --out " + path("e.txt")), 0);
  ASSERT_EQ(run("eval --embedding " + path("e.txt") + " --labels " + path("g.labels") + " --out " + path("r")), 0);
  const auto report = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_EQ(report["cells"].size(), 90u);
  EXPECT_NE(slurp(path("r.txt")).find("Micro-F1"), std::string::npos);

  ASSERT_EQ(run("eval --embedding " + path("e.txt") + " --labels " + path("g.labels") +
                " --ratios 0.5 --repeats 1 --out " + path("one")),
            0);
  const auto one = nlohmann::json::parse(slurp(path("one.json")));
  ASSERT_EQ(one["cells"].size(), 1u);
  EXPECT_GE(one["cells"][0]["micro_f1"].get<double>(), 0.95);

  EXPECT_NE(run("eval --embedding " + path("e.txt") + " --labels " + path("nope.labels")), 0);
}

TEST_F(CliTest, EvalReportsUnknownLabelIds) {
  ASSERT_EQ(run("embed --edges " + path("g.edges") + " --dim 8 --levels 2 --out " + path("e.txt")), 0);
  std::ofstream(path("odd.labels")) << "v0 a\nghost1 a\nghost2 b\n";
  EXPECT_EQ(run("eval --embedding " + path("e.txt") + " --labels " + path("odd.labels")), 3);
  const auto err = slurp(path("stderr.log"));
  EXPECT_NE(err.find("ghost1"), std::string::npos);
  EXPECT_NE(err.find("ghost2"), std::string::npos);
}

TEST_F(CliTest, ResidualSweep) {
  ASSERT_EQ(run("residuals --edges " + path("g.edges") + " --dim 8 --levels-sweep 1,2,4,8 --shift 1 --out " +
                path("res.csv")),
            0);
  std::istringstream csv(slurp(path("res.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("levels,", 0), 0u);
  std::vector<double> norms;
  double k1_joint = -1;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 7u);
    norms.push_back(std::stod(cells[2]));
    if (cells[0] == "1") k1_joint = std::stod(cells[5]);
  }
  ASSERT_EQ(norms.size(), 4u);
  for (std::size_t i = 1; i < norms.size(); ++i) EXPECT_LE(norms[i], norms[i - 1] * 1.05);

  const auto g = boostne::load_edge_list_file(path("g.edges"));
  const auto x = boostne::deepwalk_matrix(g, 10, 1.0);
  boostne::NmfConfig cfg;
  cfg.rank = 8;
  const auto f = boostne::factorize(x.values, cfg);
  EXPECT_NEAR(k1_joint, f.final_objective, 1e-9 * f.final_objective);

  EXPECT_EQ(run("residuals --edges " + path("g.edges") + " --dim 8 --levels-sweep 3,5"), 2);
  EXPECT_NE(slurp(path("stderr.log")).find("3"), std::string::npos);
}

TEST_F(CliTest, ManifestReplayIsByteIdentical) {
  ASSERT_EQ(run("embed --edges " + path("g.edges") + " --dim 8 --levels 4 --seed 11 --out " + path("a.txt")), 0);
  ASSERT_EQ(run("embed --from-manifest " + path("a.txt.manifest.json") + " --out " + path("b.txt")), 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  EXPECT_EQ(slurp(path("a.txt.trace.json")), slurp(path("b.txt.trace.json")));

  ASSERT_EQ(run("eval --embedding " + path("a.txt") + " --labels " + path("g.labels") +
                " --ratios 0.3,0.7 --repeats 2 --out " + path("r1")),
            0);
  ASSERT_EQ(run("eval --from-manifest " + path("r1.manifest.json") + " --out " + path("r2")), 0);
  auto r1 = nlohmann::json::parse(slurp(path("r1.json")));
  auto r2 = nlohmann::json::parse(slurp(path("r2.json")));
  EXPECT_EQ(r1["cells"], r2["cells"]);

  // A changed input no longer matches the recorded fingerprint.
  std::ofstream(path("g.edges"), std::ios::app) << "v0 v59\n";
  EXPECT_EQ(run("embed --from-manifest " + path("a.txt.manifest.json") + " --out " + path("c.txt")), 3);
}
