#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vtd/classify.hpp"

namespace vtd::eval {

// Rows are true labels, columns predicted.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;
};

/// Label order is the sorted union of observed labels unless `label_order`
/// is given (its labels must cover every observed one).
ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                          std::span<const std::string> label_order = {});

struct ClassMetrics {
  std::string label;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t support = 0;
  double precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  // Set when the corresponding denominator was zero and 0 was reported.
  bool precision_undefined = false;
  bool sensitivity_undefined = false;
  bool specificity_undefined = false;
};

struct Averages {
  double precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  Averages macro;
  Averages weighted;  // weighted by true-class support
  std::size_t total = 0;
};

MetricsReport metrics(const ConfusionMatrix& cm);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per class: seeded shuffle of its row indices, the first
/// ceil(test_frac * class_size) go to test. Both index lists are returned
/// in ascending order.
Split stratified_split(std::span<const std::size_t> y, std::size_t n_classes, double test_frac,
                       std::uint64_t seed);

struct ModelResult {
  classify::ModelKind kind = classify::ModelKind::LogReg;
  ConfusionMatrix cm;
  MetricsReport report;
};

struct Comparison {
  std::vector<ModelResult> rows;  // always in kAllModelKinds order
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

Comparison compare_models(const classify::Dataset& ds, std::span<const classify::ModelKind> kinds,
                          const classify::LearnerConfig& cfg, std::uint64_t seed,
                          double test_frac = 0.2);

// Per-class rows, accuracy, macro and weighted averages.
std::string format_report_text(const MetricsReport& report, const std::string& title);

// Algorithm | Precision | Sensitivity | F1 Score | Accuracy (weighted averages),
// followed by the per-class block of each model.
std::string format_comparison_text(const Comparison& cmp);

// model,class,precision,sensitivity,specificity,f1,accuracy
std::string format_report_csv(const std::string& model, const MetricsReport& report,
                              bool with_header = true);
std::string format_comparison_csv(const Comparison& cmp);

}  // namespace vtd::eval
