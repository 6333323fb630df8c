#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vtd/features.hpp"
#include "vtd/kernels.hpp"

namespace vtd::classify {

using kernels::RowMatrix;

struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation

  std::vector<double> apply(std::span<const double> x) const;
  RowMatrix apply(const RowMatrix& x) const;
};

// Throws DegenerateFeature for a constant column, InvalidDataset for < 2 rows.
Scaler standardize_fit(const RowMatrix& x);

/// Training rows with class indices into `labels`, which is sorted
/// lexicographically so index order doubles as the label tie-break order.
struct Dataset {
  RowMatrix x;
  std::vector<std::size_t> y;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t n_classes() const noexcept { return labels.size(); }
  Dataset subset(std::span<const std::size_t> indices) const;
};

Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                     const std::vector<std::string>& labels);
Dataset make_dataset(const std::vector<features::FeatureRow>& rows);

std::vector<double> feature_array(const features::FeatureVector& fv);

enum class ModelKind { Knn, LinearSvm, LogReg, Tree, Mlp };  // report row order

std::string_view to_string(ModelKind kind) noexcept;       // knn, svm, logreg, tree, mlp
std::string_view display_name(ModelKind kind) noexcept;    // report row titles
ModelKind parse_model_kind(std::string_view text);
inline constexpr ModelKind kAllModelKinds[] = {ModelKind::Knn, ModelKind::LinearSvm,
                                               ModelKind::LogReg, ModelKind::Tree,
                                               ModelKind::Mlp};

struct LogRegConfig {
  double lr = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
};

struct TreeConfig {
  std::size_t max_depth = 6;
  std::size_t min_split = 4;
};

struct KnnConfig {
  std::size_t k = 5;
};

struct SvmConfig {
  double lr = 0.01;
  std::size_t epochs = 200;
  double c = 1.0;
  std::uint64_t seed = 0;
};

struct MlpConfig {
  std::size_t hidden = 16;
  double lr = 0.05;
  std::size_t epochs = 2000;
  std::uint64_t seed = 0;
};

struct LearnerConfig {
  LogRegConfig logreg;
  TreeConfig tree;
  KnnConfig knn;
  SvmConfig svm;
  MlpConfig mlp;

  void validate() const;
};

// Weights are class-major: w[c * n_features + j].
struct LogRegParams {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<double> w;
  std::vector<double> b;
};

struct SvmParams {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;  // one binary machine per class
  std::vector<double> w;
  std::vector<double> b;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  std::size_t leaf_class = 0;
  std::vector<std::size_t> class_counts;
};

struct TreeParams {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct KnnParams {
  std::size_t k = 5;
  RowMatrix x;  // standardized training rows
  std::vector<std::size_t> y;
};

// w1[h * n_features + j], w2[c * hidden + h]
struct MlpParams {
  std::size_t n_features = 0;
  std::size_t hidden = 0;
  std::size_t n_classes = 0;
  std::vector<double> w1, b1, w2, b2;
};

struct Model {
  ModelKind kind = ModelKind::LogReg;
  Scaler scaler;
  std::vector<std::string> labels;
  std::variant<std::monostate, LogRegParams, TreeParams, KnnParams, SvmParams, MlpParams> params;

  bool trained() const noexcept { return params.index() != 0; }
};

/// Mean cross-entropy of a softmax model plus (l2/2)*|w|^2 (biases are not
/// penalized). Writes the exact gradient when `grad` is non-null.
double logreg_loss(const LogRegParams& p, const RowMatrix& z, std::span<const std::size_t> y,
                   double l2, LogRegParams* grad);

/// Mean cross-entropy of the sigmoid-hidden, softmax-output network.
double mlp_loss(const MlpParams& p, const RowMatrix& z, std::span<const std::size_t> y,
                MlpParams* grad);

/// Binary soft-margin objective 0.5*|w|^2 + c * sum(max(0, 1 - t*(w.x + b)))
/// for targets t in {-1, +1}, with its subgradient (a zero hinge
/// contribution at the kink). Training runs SGD on the per-row share
/// |w|^2/(2n) + c * hinge_i.
double svm_objective(std::span<const double> w, double b, const RowMatrix& z,
                     std::span<const int> targets, double c, std::vector<double>* grad_w,
                     double* grad_b);

double gini(std::span<const std::size_t> class_counts);

Model train_logreg(const Dataset& ds, const LogRegConfig& cfg = {});
Model train_tree(const Dataset& ds, const TreeConfig& cfg = {});
Model train_knn(const Dataset& ds, const KnnConfig& cfg = {});
Model train_linear_svm(const Dataset& ds, const SvmConfig& cfg = {});
Model train_mlp(const Dataset& ds, const MlpConfig& cfg = {});
Model train(ModelKind kind, const Dataset& ds, const LearnerConfig& cfg);

/// Majority vote of the k nearest standardized rows (Euclidean). Distance
/// ties go to the lower row index; vote ties to the smaller mean distance,
/// then to the lower class index.
std::size_t knn_vote(const RowMatrix& train, std::span<const std::size_t> y,
                     std::size_t n_classes, std::span<const double> query, std::size_t k);

// Class index into model.labels for raw (unstandardized) features.
std::size_t predict(const Model& model, std::span<const double> x);
const std::string& predict_label(const Model& model, std::span<const double> x);

/// Class probabilities: softmax for LogReg and Mlp, leaf frequencies for
/// Tree, vote shares for Knn. Throws Unsupported for LinearSvm.
std::vector<double> predict_proba(const Model& model, std::span<const double> x);

// Raw per-class margins of the one-vs-rest machines.
std::vector<double> svm_margins(const Model& model, std::span<const double> x);

inline constexpr int kModelFormatVersion = 1;

/// JSON text: {"format","version","kind","labels","scaler","params"}.
std::string save_model(const Model& model);
Model load_model(std::string_view text);

}  // namespace vtd::classify
