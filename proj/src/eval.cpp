#include "vtd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>

#include "vtd/error.hpp"
#include "vtd/rng.hpp"
#include "vtd/text.hpp"

namespace vtd::eval {
namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string cell(double v) { return pad_left(text::format_fixed(v, 4), 12); }

}  // namespace

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) t += c;
  }
  return t;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                          std::span<const std::string> label_order) {
  if (truth.empty()) throw Error(ErrorCode::EmptyInput, "no labels to compare");
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(truth.size()) + " true labels but " +
                                               std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm;
  if (label_order.empty()) {
    std::set<std::string> all(truth.begin(), truth.end());
    all.insert(predicted.begin(), predicted.end());
    cm.labels.assign(all.begin(), all.end());
  } else {
    cm.labels.assign(label_order.begin(), label_order.end());
  }
  const auto index = [&cm](const std::string& label) {
    const auto it = std::find(cm.labels.begin(), cm.labels.end(), label);
    if (it == cm.labels.end()) throw Error(ErrorCode::LengthMismatch, "label '" + label + "' is not in the label order");
    return static_cast<std::size_t>(it - cm.labels.begin());
  };
  cm.counts.assign(cm.labels.size(), std::vector<std::size_t>(cm.labels.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index(truth[i])][index(predicted[i])];
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.total = cm.total();
  if (r.total == 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
  const std::size_t n = cm.labels.size();
  for (std::size_t c = 0; c < n; ++c) {
    ClassMetrics m;
    m.label = cm.labels[c];
    m.tp = cm.counts[c][c];
    std::size_t row = 0;
    std::size_t col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      row += cm.counts[c][k];
      col += cm.counts[k][c];
    }
    m.fn = row - m.tp;
    m.fp = col - m.tp;
    m.tn = r.total - m.tp - m.fp - m.fn;
    m.support = row;
    m.precision = ratio(m.tp, m.tp + m.fp, m.precision_undefined);
    m.sensitivity = ratio(m.tp, m.tp + m.fn, m.sensitivity_undefined);
    m.specificity = ratio(m.tn, m.tn + m.fp, m.specificity_undefined);
    const double ps = m.precision + m.sensitivity;
    m.f1 = ps > 0.0 ? 2.0 * m.precision * m.sensitivity / ps : 0.0;
    r.per_class.push_back(m);
  }
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(r.total);
  const double total = static_cast<double>(r.total);
  for (const ClassMetrics& m : r.per_class) {
    const double w = static_cast<double>(m.support) / total;
    r.macro.precision += m.precision / static_cast<double>(n);
    r.macro.sensitivity += m.sensitivity / static_cast<double>(n);
    r.macro.specificity += m.specificity / static_cast<double>(n);
    r.macro.f1 += m.f1 / static_cast<double>(n);
    r.weighted.precision += w * m.precision;
    r.weighted.sensitivity += w * m.sensitivity;
    r.weighted.specificity += w * m.specificity;
    r.weighted.f1 += w * m.f1;
  }
  return r;
}

Split stratified_split(std::span<const std::size_t> y, std::size_t n_classes, double test_frac,
                       std::uint64_t seed) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "test fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= n_classes) throw Error(ErrorCode::InvalidDataset, "class index out of range");
    by_class[y[i]].push_back(i);
  }
  Rng rng(seed);
  Split s;
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    if (rows.size() < 2) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " has a single row; a split needs 2");
    }
    shuffle(rows, rng);
    auto n_test = static_cast<std::size_t>(std::ceil(test_frac * static_cast<double>(rows.size()) - 1e-9));
    n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    s.test.insert(s.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.insert(s.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Comparison compare_models(const classify::Dataset& ds, std::span<const classify::ModelKind> kinds,
                          const classify::LearnerConfig& cfg, std::uint64_t seed, double test_frac) {
  cfg.validate();
  std::vector<classify::ModelKind> ordered;
  for (classify::ModelKind k : classify::kAllModelKinds) {
    if (std::find(kinds.begin(), kinds.end(), k) != kinds.end()) ordered.push_back(k);
  }
  if (ordered.empty()) throw Error(ErrorCode::InvalidConfig, "no models selected");

  const Split split = stratified_split(ds.y, ds.n_classes(), test_frac, seed);
  const classify::Dataset train = ds.subset(split.train);
  const classify::Dataset test = ds.subset(split.test);
  std::vector<std::string> truth;
  for (std::size_t c : test.y) truth.push_back(ds.labels[c]);

  Comparison cmp;
  cmp.n_train = train.size();
  cmp.n_test = test.size();
  cmp.rows.resize(ordered.size());
  std::vector<std::exception_ptr> errors(ordered.size());
  const auto n = static_cast<std::ptrdiff_t>(ordered.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const classify::Model model = classify::train(ordered[k], train, cfg);
      std::vector<std::string> pred;
      for (std::size_t r = 0; r < test.size(); ++r) pred.push_back(classify::predict_label(model, test.x.row(r)));
      ModelResult res;
      res.kind = ordered[k];
      res.cm = confusion(truth, pred, ds.labels);
      res.report = metrics(res.cm);
      cmp.rows[k] = std::move(res);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return cmp;
}

std::string format_report_text(const MetricsReport& report, const std::string& title) {
  std::size_t w = 14;
  for (const auto& m : report.per_class) w = std::max(w, m.label.size() + 2);
  std::string out;
  if (!title.empty()) out += title + "\n";
  out += pad_right("", w) + pad_left("precision", 12) + pad_left("sensitivity", 12) +
         pad_left("specificity", 12) + pad_left("f1-score", 12) + pad_left("support", 10) + "\n";
  for (const auto& m : report.per_class) {
    out += pad_right(m.label, w) + cell(m.precision) + cell(m.sensitivity) + cell(m.specificity) + cell(m.f1) +
           pad_left(std::to_string(m.support), 10) + "\n";
  }
  out += "\n";
  out += pad_right("accuracy", w) + pad_left("", 36) + cell(report.accuracy) +
         pad_left(std::to_string(report.total), 10) + "\n";
  const auto avg = [&](const char* name, const Averages& a) {
    return pad_right(name, w) + cell(a.precision) + cell(a.sensitivity) + cell(a.specificity) + cell(a.f1) +
           pad_left(std::to_string(report.total), 10) + "\n";
  };
  out += avg("macro avg", report.macro);
  out += avg("weighted avg", report.weighted);
  return out;
}

std::string format_comparison_text(const Comparison& cmp) {
  std::string out = "train rows: " + std::to_string(cmp.n_train) + ", test rows: " + std::to_string(cmp.n_test) + "\n\n";
  out += pad_right("Algorithm", 22) + pad_left("Precision", 12) + pad_left("Sensitivity", 12) +
         pad_left("F1 Score", 12) + pad_left("Accuracy", 12) + "\n";
  for (const ModelResult& r : cmp.rows) {
    out += pad_right(std::string(classify::display_name(r.kind)), 22) + cell(r.report.weighted.precision) +
           cell(r.report.weighted.sensitivity) + cell(r.report.weighted.f1) + cell(r.report.accuracy) + "\n";
  }
  for (const ModelResult& r : cmp.rows) {
    out += "\n" + format_report_text(r.report, std::string(classify::display_name(r.kind)));
  }
  return out;
}

std::string format_report_csv(const std::string& model, const MetricsReport& report, bool with_header) {
  std::string out;
  if (with_header) out += "model,class,precision,sensitivity,specificity,f1,accuracy\n";
  const std::string acc = text::format_fixed(report.accuracy, 6);
  const auto row = [&](const std::string& cls, double p, double s, double sp, double f1) {
    out += model + ',' + cls + ',' + text::format_fixed(p, 6) + ',' + text::format_fixed(s, 6) + ',' +
           text::format_fixed(sp, 6) + ',' + text::format_fixed(f1, 6) + ',' + acc + '\n';
  };
  for (const auto& m : report.per_class) row(m.label, m.precision, m.sensitivity, m.specificity, m.f1);
  row("macro avg", report.macro.precision, report.macro.sensitivity, report.macro.specificity, report.macro.f1);
  row("weighted avg", report.weighted.precision, report.weighted.sensitivity, report.weighted.specificity,
      report.weighted.f1);
  return out;
}

std::string format_comparison_csv(const Comparison& cmp) {
  std::string out = "model,class,precision,sensitivity,specificity,f1,accuracy\n";
  for (const ModelResult& r : cmp.rows) {
    out += format_report_csv(std::string(classify::display_name(r.kind)), r.report, false);
  }
  return out;
}

}  // namespace vtd::eval
