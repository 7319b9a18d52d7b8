#include "boostne/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "boostne/errors.hpp"
#include "boostne/hashing.hpp"
#include "boostne/kernels.hpp"
#include "boostne/parallel.hpp"

namespace boostne {

std::vector<std::size_t> LabelSet::labeled_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < node_labels.size(); ++i) {
    if (!node_labels[i].empty()) out.push_back(i);
  }
  return out;
}

LabelSet load_labels(std::istream& in, const std::vector<std::string>& node_ids) {
  std::unordered_map<std::string, std::size_t> node_index;
  node_index.reserve(node_ids.size());
  for (std::size_t i = 0; i < node_ids.size(); ++i) node_index.emplace(node_ids[i], i);

  LabelSet labels;
  labels.node_labels.resize(node_ids.size());
  std::unordered_map<std::string, std::uint32_t> class_index;
  std::vector<std::string> unknown;
  std::size_t unknown_total = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string node;
    if (!(tokens >> node) || node.front() == '#') continue;
    std::string label;
    std::vector<std::string> names;
    while (tokens >> label) names.push_back(label);
    if (names.empty()) throw ParseError(line_no, "node '" + node + "' has no labels");

    const auto it = node_index.find(node);
    if (it == node_index.end()) {
      if (std::find(unknown.begin(), unknown.end(), node) == unknown.end()) {
        ++unknown_total;
        if (unknown.size() < 10) unknown.push_back(node);
      }
      continue;
    }
    auto& list = labels.node_labels[it->second];
    for (const auto& name : names) {
      const auto [cit, inserted] = class_index.emplace(name, static_cast<std::uint32_t>(labels.class_names.size()));
      if (inserted) labels.class_names.push_back(name);
      if (std::find(list.begin(), list.end(), cit->second) == list.end()) list.push_back(cit->second);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "label file references node ids absent from the embedding:";
    for (const auto& id : unknown) msg += " " + id;
    if (unknown_total > unknown.size()) msg += " ...";
    throw DataError(msg);
  }
  for (auto& list : labels.node_labels) std::sort(list.begin(), list.end());
  labels.num_classes = labels.class_names.size();
  if (labels.num_classes == 0) throw DataError("label file contains no labels");
  return labels;
}

LabelSet load_labels_file(const std::string& path, const std::vector<std::string>& node_ids) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file " + path);
  try {
    return load_labels(in, node_ids);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void EvalConfig::validate() const {
  if (train_ratios.empty()) throw UsageError("at least one training ratio is required");
  for (const double r : train_ratios) {
    if (!(r > 0.0 && r < 1.0)) throw UsageError("training ratios must lie strictly between 0 and 1");
  }
  if (repeats < 1) throw UsageError("repeats must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be finite and >= 0");
  if (iterations < 1) throw UsageError("classifier iterations must be >= 1");
}

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection sampling for an unbiased draw in [0, bound).
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double largest_eigenvalue(const DenseMatrix& g) {
  const std::size_t d = g.rows();
  if (d == 0) return 0.0;
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d))), w(d);
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (std::size_t i = 0; i < d; ++i) w[i] = kernels::dot(g.row(i), v);
    const double norm = std::sqrt(kernels::dot(w, w));
    if (norm == 0.0) return 0.0;
    lambda = kernels::dot(v, w);
    for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / norm;
  }
  return lambda;
}

std::uint64_t ratio_key(double ratio) { return static_cast<std::uint64_t>(std::llround(ratio * 1e6)); }

}  // namespace

Split split(std::span<const std::size_t> nodes, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("split ratio must lie strictly between 0 and 1");
  const std::size_t n = nodes.size();
  if (n < 2) throw DataError("need at least two labeled nodes to split");
  std::vector<std::size_t> order(nodes.begin(), nodes.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[bounded(rng, i + 1)]);

  auto train_count = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  train_count = std::clamp<std::size_t>(train_count, 1, n - 1);
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Split split(const LabelSet& labels, double ratio, std::uint64_t seed) {
  const auto nodes = labels.labeled_nodes();
  return split(nodes, ratio, seed);
}

std::vector<double> OvrModel::scores(std::span<const double> x) const {
  std::vector<double> out(num_classes());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = sigmoid(kernels::dot(weights.row(c), x) + bias[c]);
  return out;
}

OvrModel train_ovr(const DenseMatrix& embedding, const LabelSet& labels, std::span<const std::size_t> train,
                   const TrainOptions& options) {
  const std::size_t d = embedding.cols();
  const std::size_t c = labels.num_classes;
  const std::size_t n = train.size();
  if (d == 0) throw UsageError("embedding has no columns");
  if (n == 0) throw UsageError("no training nodes");
  if (!(options.lambda >= 0.0) || options.iterations < 1) throw UsageError("invalid classifier options");

  // Centered copy of the training rows. Centering is a reparametrization of
  // the unpenalized bias, so the optimum is unchanged.
  DenseMatrix x(n, d);
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = embedding.row(train[i]);
    for (const double v : src) {
      if (!std::isfinite(v)) throw DataError("embedding contains non-finite entries");
    }
    std::copy(src.begin(), src.end(), x.row(i).begin());
    kernels::axpy(1.0, src, mean);
  }
  kernels::scale(1.0 / static_cast<double>(n), mean);
  for (std::size_t i = 0; i < n; ++i) kernels::axpy(-1.0, mean, x.row(i));

  DenseMatrix y(n, c);
  std::vector<std::size_t> positives(c, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto label : labels.node_labels[train[i]]) {
      y(i, label) = 1.0;
      ++positives[label];
    }
  }

  DenseMatrix g(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    for (std::size_t l = 0; l < d; ++l) {
      if (row[l] != 0.0) kernels::axpy(row[l], row, g.row(l));
    }
  }
  // Block-diagonal majorizer of the augmented Hessian: [X 1]^T [X 1] / 4 is
  // bounded by 2 * diag(X^T X, n) / 4.
  const double curvature_w = 0.5 * 1.05 * largest_eigenvalue(g) + options.lambda;
  const double step_w = curvature_w > 0.0 ? 1.0 / curvature_w : 0.0;
  const double step_b = 1.0 / (0.5 * static_cast<double>(n));

  OvrModel model;
  model.weights = DenseMatrix(c, d);
  model.bias.assign(c, 0.0);
  DenseMatrix w_prev = model.weights;
  std::vector<double> b_prev = model.bias;
  DenseMatrix w_look = model.weights;
  std::vector<double> b_look = model.bias;
  DenseMatrix grad(c, d);
  std::vector<double> grad_b(c);
  double t = 1.0;

  for (int it = 0; it < options.iterations; ++it) {
    std::fill(grad.values().begin(), grad.values().end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = x.row(i);
      for (std::size_t k = 0; k < c; ++k) {
        const double r = sigmoid(kernels::dot(w_look.row(k), xi) + b_look[k]) - y(i, k);
        kernels::axpy(r, xi, grad.row(k));
        grad_b[k] += r;
      }
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    for (std::size_t k = 0; k < c; ++k) {
      auto wl = w_look.row(k);
      auto gk = grad.row(k);
      kernels::axpy(options.lambda, wl, gk);
      auto wk = model.weights.row(k);
      auto wp = w_prev.row(k);
      std::copy(wk.begin(), wk.end(), wp.begin());
      for (std::size_t l = 0; l < d; ++l) wk[l] = wl[l] - step_w * gk[l];
      b_prev[k] = model.bias[k];
      model.bias[k] = b_look[k] - step_b * grad_b[k];
      for (std::size_t l = 0; l < d; ++l) wl[l] = wk[l] + momentum * (wk[l] - wp[l]);
      b_look[k] = model.bias[k] + momentum * (model.bias[k] - b_prev[k]);
    }
    t = t_next;
  }

  for (std::size_t k = 0; k < c; ++k) {
    if (positives[k] == 0) {
      std::fill(model.weights.row(k).begin(), model.weights.row(k).end(), 0.0);
      model.bias[k] = -std::numeric_limits<double>::infinity();
      model.classes_without_positives.push_back(static_cast<std::uint32_t>(k));
      continue;
    }
    model.bias[k] -= kernels::dot(model.weights.row(k), mean);
  }
  return model;
}

std::vector<LabelList> predict(const OvrModel& model, const DenseMatrix& embedding,
                               std::span<const std::size_t> nodes, std::span<const std::size_t> label_counts) {
  if (nodes.size() != label_counts.size()) throw UsageError("one label count per predicted node is required");
  const std::size_t c = model.num_classes();
  std::vector<LabelList> out(nodes.size());
  std::vector<std::uint32_t> order(c);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t want = label_counts[i];
    if (want == 0 || want > c) {
      throw UsageError("label count " + std::to_string(want) + " outside [1, " + std::to_string(c) + "]");
    }
    const auto s = model.scores(embedding.row(nodes[i]));
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return s[a] > s[b]; });
    out[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(want));
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

std::vector<LabelList> predict_threshold(const OvrModel& model, const DenseMatrix& embedding,
                                         std::span<const std::size_t> nodes, double threshold) {
  std::vector<LabelList> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto s = model.scores(embedding.row(nodes[i]));
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] >= threshold) out[i].push_back(static_cast<std::uint32_t>(k));
    }
  }
  return out;
}

F1Scores micro_macro_f1(std::span<const LabelList> predicted, std::span<const LabelList> truth,
                        std::size_t num_classes) {
  if (predicted.size() != truth.size()) throw UsageError("prediction and truth sizes differ");
  if (truth.empty()) throw DataError("cannot score an empty test set");
  std::vector<std::uint64_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& p = predicted[i];
    const auto& t = truth[i];
    for (const auto k : p) {
      if (k >= num_classes) throw UsageError("predicted class index out of range");
      if (std::find(t.begin(), t.end(), k) != t.end()) {
        ++tp[k];
      } else {
        ++fp[k];
      }
    }
    for (const auto k : t) {
      if (k >= num_classes) throw UsageError("true class index out of range");
      if (std::find(p.begin(), p.end(), k) == p.end()) ++fn[k];
    }
  }
  std::uint64_t num = 0, den = 0;
  double macro = 0.0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    const std::uint64_t dk = 2 * tp[k] + fp[k] + fn[k];
    num += 2 * tp[k];
    den += dk;
    if (dk > 0) macro += static_cast<double>(2 * tp[k]) / static_cast<double>(dk);
  }
  F1Scores out;
  out.micro = den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  out.macro = num_classes > 0 ? macro / static_cast<double>(num_classes) : 0.0;
  return out;
}

std::string embedding_fingerprint(const DenseMatrix& embedding) {
  Fingerprint fp;
  fp.value(embedding.rows()).value(embedding.cols());
  fp.values(embedding.values());
  return fp.hex();
}

std::string config_fingerprint(const EvalConfig& cfg) {
  Fingerprint fp;
  for (const double r : cfg.train_ratios) fp.value(r);
  fp.value(cfg.repeats).value(cfg.seed).value(cfg.lambda).value(cfg.iterations);
  fp.value(static_cast<int>(cfg.rule)).value(cfg.threshold);
  return fp.hex();
}

EvalReport evaluate(const DenseMatrix& embedding, const LabelSet& labels, const EvalConfig& cfg) {
  cfg.validate();
  if (labels.node_labels.size() != embedding.rows()) throw UsageError("label set does not match embedding rows");
  const auto nodes = labels.labeled_nodes();

  const std::size_t repeats = static_cast<std::size_t>(cfg.repeats);
  const std::size_t total = cfg.train_ratios.size() * repeats;
  std::vector<EvalCell> cells(total);
  std::vector<std::size_t> missing_classes(total, 0);
  const TrainOptions options{cfg.lambda, cfg.iterations};

  parallel_for(0, total, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const double ratio = cfg.train_ratios[idx / repeats];
      const int repeat = static_cast<int>(idx % repeats);
      const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, ratio_key(ratio)), static_cast<std::uint64_t>(repeat));
      const Split s = split(nodes, ratio, seed);
      const OvrModel model = train_ovr(embedding, labels, s.train, options);

      std::vector<LabelList> truth;
      std::vector<std::size_t> counts;
      truth.reserve(s.test.size());
      for (const auto node : s.test) {
        truth.push_back(labels.node_labels[node]);
        counts.push_back(labels.node_labels[node].size());
      }
      const auto predicted = cfg.rule == DecisionRule::kTopK ? predict(model, embedding, s.test, counts)
                                                             : predict_threshold(model, embedding, s.test, cfg.threshold);
      const F1Scores f1 = micro_macro_f1(predicted, truth, labels.num_classes);
      cells[idx] = {ratio, repeat, f1.micro, f1.macro};
      missing_classes[idx] = model.classes_without_positives.size();
    }
  }, 1);

  EvalReport report;
  report.cells = std::move(cells);
  report.config_fingerprint = config_fingerprint(cfg);
  report.embedding_fingerprint = embedding_fingerprint(embedding);
  for (std::size_t a = 0; a < cfg.train_ratios.size(); ++a) {
    RatioSummary sum;
    sum.ratio = cfg.train_ratios[a];
    for (std::size_t t = 0; t < repeats; ++t) {
      sum.mean_micro += report.cells[a * repeats + t].micro;
      sum.mean_macro += report.cells[a * repeats + t].macro;
    }
    sum.mean_micro /= static_cast<double>(repeats);
    sum.mean_macro /= static_cast<double>(repeats);
    if (repeats > 1) {
      double vm = 0.0, va = 0.0;
      for (std::size_t t = 0; t < repeats; ++t) {
        vm += std::pow(report.cells[a * repeats + t].micro - sum.mean_micro, 2);
        va += std::pow(report.cells[a * repeats + t].macro - sum.mean_macro, 2);
      }
      sum.std_micro = std::sqrt(vm / static_cast<double>(repeats - 1));
      sum.std_macro = std::sqrt(va / static_cast<double>(repeats - 1));
    }
    report.summary.push_back(sum);
  }
  const std::size_t affected = static_cast<std::size_t>(
      std::count_if(missing_classes.begin(), missing_classes.end(), [](std::size_t m) { return m > 0; }));
  if (affected > 0) {
    report.warnings.push_back(std::to_string(affected) +
                              " split(s) had classes without training examples; those classes were predicted "
                              "always-negative");
  }
  return report;
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::ordered_json j;
  j["config_fingerprint"] = report.config_fingerprint;
  j["embedding_fingerprint"] = report.embedding_fingerprint;
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"ratio", c.ratio}, {"repeat", c.repeat}, {"micro_f1", c.micro}, {"macro_f1", c.macro}});
  }
  auto& summary = j["summary"] = nlohmann::ordered_json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"ratio", s.ratio},
                       {"mean_micro_f1", s.mean_micro},
                       {"mean_macro_f1", s.mean_macro},
                       {"std_micro_f1", s.std_micro},
                       {"std_macro_f1", s.std_macro}});
  }
  j["warnings"] = report.warnings;
  out << j.dump(2) << '\n';
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  std::ostringstream text;
  text << std::left << std::setw(16) << "Training ratio";
  for (const auto& s : report.summary) {
    std::ostringstream pct;
    pct << std::setprecision(3) << s.ratio * 100.0 << '%';
    text << std::right << std::setw(9) << pct.str();
  }
  text << '\n';
  auto metric_row = [&](const char* name, auto field) {
    text << std::left << std::setw(16) << name;
    for (const auto& s : report.summary) text << std::right << std::setw(9) << std::fixed << std::setprecision(4) << field(s);
    text << '\n';
  };
  metric_row("Micro-F1", [](const RatioSummary& s) { return s.mean_micro; });
  metric_row("Macro-F1", [](const RatioSummary& s) { return s.mean_macro; });
  out << text.str();
}

}  // namespace boostne
