#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "boostne/matrix.hpp"

namespace boostne {

using LabelList = std::vector<std::uint32_t>;

/// Multi-label assignment over the rows of an embedding. Nodes with an empty
/// list are unlabeled and excluded from evaluation.
struct LabelSet {
  std::size_t num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<LabelList> node_labels;

  std::vector<std::size_t> labeled_nodes() const;
};

/// Reads `node_id label [label ...]` lines; repeated node lines add labels.
/// Class names are indexed in first-seen order. Ids missing from `node_ids`
/// raise a DataError that lists up to ten of them.
LabelSet load_labels(std::istream& in, const std::vector<std::string>& node_ids);
LabelSet load_labels_file(const std::string& path, const std::vector<std::string>& node_ids);

enum class DecisionRule {
  kTopK,       // the l_i highest-scoring classes, l_i = true label count
  kThreshold,  // every class whose score reaches the threshold
};

struct EvalConfig {
  std::vector<double> train_ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int repeats = 10;
  std::uint64_t seed = 42;
  double lambda = 1.0;
  int iterations = 300;
  DecisionRule rule = DecisionRule::kTopK;
  double threshold = 0.5;

  void validate() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Uniform random partition of `nodes`: ceil(ratio * n) of them train (kept
/// within [1, n-1]), the rest test. Both lists are sorted.
Split split(std::span<const std::size_t> nodes, double ratio, std::uint64_t seed);
Split split(const LabelSet& labels, double ratio, std::uint64_t seed);

/// One binary L2-regularized logistic regression per class.
struct OvrModel {
  DenseMatrix weights;  // classes x dim
  std::vector<double> bias;
  /// Classes with no positive training example (always-negative models).
  std::vector<std::uint32_t> classes_without_positives;

  std::size_t num_classes() const noexcept { return weights.rows(); }
  /// sigma(w_c . x + b_c) for every class.
  std::vector<double> scores(std::span<const double> x) const;
};

struct TrainOptions {
  double lambda = 1.0;
  int iterations = 300;
};

/// Minimizes sum_i log-loss + (lambda/2)||w||^2 per class (bias unpenalized)
/// with Nesterov-accelerated full-batch gradient descent at the fixed step
/// 1/L, L an upper estimate of the loss Lipschitz constant.
OvrModel train_ovr(const DenseMatrix& embedding, const LabelSet& labels, std::span<const std::size_t> train,
                   const TrainOptions& options);

/// Top-l_i prediction, ties broken towards the lower class index.
/// Throws UsageError when a count is zero or exceeds the class count.
std::vector<LabelList> predict(const OvrModel& model, const DenseMatrix& embedding,
                               std::span<const std::size_t> nodes, std::span<const std::size_t> label_counts);

std::vector<LabelList> predict_threshold(const OvrModel& model, const DenseMatrix& embedding,
                                         std::span<const std::size_t> nodes, double threshold);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

/// Micro-F1 = sum 2TP / sum (2TP + FP + FN); Macro-F1 = mean over all classes
/// of 2TP / (2TP + FP + FN), with 0/0 taken as 0.
F1Scores micro_macro_f1(std::span<const LabelList> predicted, std::span<const LabelList> truth,
                        std::size_t num_classes);

struct EvalCell {
  double ratio = 0.0;
  int repeat = 0;
  double micro = 0.0;
  double macro = 0.0;
};

struct RatioSummary {
  double ratio = 0.0;
  double mean_micro = 0.0;
  double mean_macro = 0.0;
  double std_micro = 0.0;
  double std_macro = 0.0;
};

struct EvalReport {
  std::vector<EvalCell> cells;
  std::vector<RatioSummary> summary;
  std::string config_fingerprint;
  std::string embedding_fingerprint;
  std::vector<std::string> warnings;
};

EvalReport evaluate(const DenseMatrix& embedding, const LabelSet& labels, const EvalConfig& cfg);

std::string embedding_fingerprint(const DenseMatrix& embedding);
std::string config_fingerprint(const EvalConfig& cfg);

void write_report_json(std::ostream& out, const EvalReport& report);
/// Ratios as columns, Micro-F1 and Macro-F1 as rows.
void write_report_table(std::ostream& out, const EvalReport& report);

}  // namespace boostne
