#include "vtd/classify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

#include "vtd/error.hpp"
#include "vtd/rng.hpp"

namespace vtd::classify {
namespace {

using nlohmann::json;

[[noreturn]] void diverged(std::string_view learner) {
  throw Error(ErrorCode::Diverged, std::string(learner) + " training produced a non-finite loss");
}

void check_trainable(const Dataset& ds) {
  if (ds.size() < 2) throw Error(ErrorCode::InvalidDataset, "training needs at least 2 rows");
  if (ds.x.rows != ds.y.size()) throw Error(ErrorCode::InvalidDataset, "row and label counts differ");
}

void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& e : v) {
    e = std::exp(e - m);
    sum += e;
  }
  for (double& e : v) e /= sum;
}

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

std::vector<double> logreg_logits(const LogRegParams& p, std::span<const double> z) {
  std::vector<double> out(p.n_classes);
  for (std::size_t c = 0; c < p.n_classes; ++c) {
    double s = p.b[c];
    for (std::size_t j = 0; j < p.n_features; ++j) s += p.w[c * p.n_features + j] * z[j];
    out[c] = s;
  }
  return out;
}

struct MlpForward {
  std::vector<double> hidden;
  std::vector<double> proba;
};

MlpForward mlp_forward(const MlpParams& p, std::span<const double> z) {
  MlpForward f;
  f.hidden.resize(p.hidden);
  for (std::size_t h = 0; h < p.hidden; ++h) {
    double a = p.b1[h];
    for (std::size_t j = 0; j < p.n_features; ++j) a += p.w1[h * p.n_features + j] * z[j];
    f.hidden[h] = sigmoid(a);
  }
  f.proba.resize(p.n_classes);
  for (std::size_t c = 0; c < p.n_classes; ++c) {
    double o = p.b2[c];
    for (std::size_t h = 0; h < p.hidden; ++h) o += p.w2[c * p.hidden + h] * f.hidden[h];
    f.proba[c] = o;
  }
  softmax_inplace(f.proba);
  return f;
}

double svm_decision(const SvmParams& p, std::size_t c, std::span<const double> z) {
  double s = p.b[c];
  for (std::size_t j = 0; j < p.n_features; ++j) s += p.w[c * p.n_features + j] * z[j];
  return s;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

// Knn neighbours of a standardized query, ordered by (distance, index).
std::vector<std::pair<double, std::size_t>> nearest(const RowMatrix& train, std::span<const double> query,
                                                    std::size_t k) {
  if (k == 0 || k > train.rows) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " needs 1 <= k <= " + std::to_string(train.rows));
  }
  const std::vector<double> d2 = kernels::parallel::squared_distances(train, query);
  std::vector<std::pair<double, std::size_t>> order(d2.size());
  for (std::size_t i = 0; i < d2.size(); ++i) order[i] = {d2[i], i};
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  order.resize(k);
  return order;
}

// ---- tree ----

std::size_t majority(const std::vector<std::size_t>& counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct TreeBuilder {
  const RowMatrix& z;
  const std::vector<std::size_t>& y;
  std::size_t n_classes;
  const TreeConfig& cfg;
  std::vector<TreeNode> nodes;

  std::vector<std::size_t> count(const std::vector<std::size_t>& idx) const {
    std::vector<std::size_t> c(n_classes, 0);
    for (std::size_t i : idx) ++c[y[i]];
    return c;
  }

  int build(const std::vector<std::size_t>& idx, std::size_t depth) {
    TreeNode node;
    node.class_counts = count(idx);
    node.leaf_class = majority(node.class_counts);
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(node);

    const double parent = gini(node.class_counts);
    if (depth >= cfg.max_depth || idx.size() < cfg.min_split || parent == 0.0) return id;

    const double n = static_cast<double>(idx.size());
    double best = parent - 1e-12;
    int best_feature = -1;
    double best_thr = 0.0;
    for (std::size_t j = 0; j < z.cols; ++j) {
      std::vector<std::size_t> order = idx;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return z.row(a)[j] < z.row(b)[j]; });
      std::vector<std::size_t> left(n_classes, 0);
      std::vector<std::size_t> right = node.class_counts;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        ++left[y[order[k]]];
        --right[y[order[k]]];
        const double a = z.row(order[k])[j];
        const double b = z.row(order[k + 1])[j];
        if (!(a < b)) continue;
        const double nl = static_cast<double>(k + 1);
        const double impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
        if (impurity < best - 1e-12) {
          best = impurity;
          best_feature = static_cast<int>(j);
          best_thr = a + (b - a) / 2.0;
          if (!(best_thr < b)) best_thr = a;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> li;
    std::vector<std::size_t> ri;
    for (std::size_t i : idx) {
      (z.row(i)[static_cast<std::size_t>(best_feature)] <= best_thr ? li : ri).push_back(i);
    }
    nodes[static_cast<std::size_t>(id)].feature = best_feature;
    nodes[static_cast<std::size_t>(id)].threshold = best_thr;
    const int l = build(li, depth + 1);
    const int r = build(ri, depth + 1);
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

const TreeNode& tree_leaf(const TreeParams& p, std::span<const double> z) {
  std::size_t at = 0;
  while (p.nodes[at].feature >= 0) {
    const TreeNode& n = p.nodes[at];
    at = static_cast<std::size_t>(z[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return p.nodes[at];
}

// ---- model plumbing ----

Model base_model(ModelKind kind, const Dataset& ds, Scaler scaler) {
  Model m;
  m.kind = kind;
  m.scaler = std::move(scaler);
  m.labels = ds.labels;
  return m;
}

std::vector<double> standardized_input(const Model& model, std::span<const double> x) {
  if (!model.trained()) throw Error(ErrorCode::UntrainedModel, "model has not been trained");
  if (x.size() != model.scaler.mean.size()) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(model.scaler.mean.size()) +
                                               " features, got " + std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "feature value is not finite");
  }
  return model.scaler.apply(x);
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedModel, "model file: " + what);
}

void expect_size(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() != n) malformed(std::string(what) + " has the wrong length");
}

json matrix_json(const RowMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

RowMatrix matrix_from_json(const json& j, std::size_t cols) {
  RowMatrix m;
  m.cols = cols;
  for (const json& row : j) {
    const auto r = row.get<std::vector<double>>();
    if (r.size() != cols) malformed("stored row has the wrong width");
    m.data.insert(m.data.end(), r.begin(), r.end());
    ++m.rows;
  }
  return m;
}

}  // namespace

// ---- scaler and dataset ----

std::vector<double> Scaler::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) throw Error(ErrorCode::LengthMismatch, "feature count differs from the scaler");
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / stddev[j];
  return z;
}

RowMatrix Scaler::apply(const RowMatrix& x) const {
  RowMatrix z{x.rows, x.cols, std::vector<double>(x.data.size())};
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto r = apply(x.row(i));
    std::copy(r.begin(), r.end(), z.data.begin() + static_cast<std::ptrdiff_t>(i * x.cols));
  }
  return z;
}

Scaler standardize_fit(const RowMatrix& x) {
  if (x.rows < 2) throw Error(ErrorCode::InvalidDataset, "standardization needs at least 2 rows");
  Scaler s;
  s.mean.assign(x.cols, 0.0);
  s.stddev.assign(x.cols, 0.0);
  const double n = static_cast<double>(x.rows);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) sum += x.row(i)[j];
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double d = x.row(i)[j] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) {
      throw Error(ErrorCode::DegenerateFeature, "feature " + std::to_string(j) + " is constant");
    }
    s.mean[j] = mean;
    s.stddev[j] = sd;
  }
  return s;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.labels = labels;
  out.x.cols = x.cols;
  for (std::size_t i : indices) {
    if (i >= size()) throw Error(ErrorCode::InvalidDataset, "subset index out of range");
    const auto r = x.row(i);
    out.x.data.insert(out.x.data.end(), r.begin(), r.end());
    out.y.push_back(y[i]);
  }
  out.x.rows = out.y.size();
  return out;
}

Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& labels) {
  if (rows.empty()) throw Error(ErrorCode::InvalidDataset, "dataset is empty");
  if (rows.size() != labels.size()) throw Error(ErrorCode::InvalidDataset, "row and label counts differ");
  const std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw Error(ErrorCode::InvalidDataset, "training needs at least 2 distinct labels");
  Dataset ds;
  ds.labels.assign(distinct.begin(), distinct.end());
  ds.x.cols = rows.front().size();
  if (ds.x.cols == 0) throw Error(ErrorCode::InvalidDataset, "rows have no features");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != ds.x.cols) throw Error(ErrorCode::InvalidDataset, "rows differ in width");
    for (double v : rows[i]) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidDataset, "row " + std::to_string(i) + " is not finite");
    }
    ds.x.data.insert(ds.x.data.end(), rows[i].begin(), rows[i].end());
    ds.y.push_back(static_cast<std::size_t>(
        std::lower_bound(ds.labels.begin(), ds.labels.end(), labels[i]) - ds.labels.begin()));
  }
  ds.x.rows = rows.size();
  return ds;
}

Dataset make_dataset(const std::vector<features::FeatureRow>& rows) {
  std::vector<std::vector<double>> x;
  std::vector<std::string> labels;
  for (const auto& r : rows) {
    x.push_back(feature_array(r.fv));
    labels.emplace_back(to_string(r.label));
  }
  return make_dataset(x, labels);
}

std::vector<double> feature_array(const features::FeatureVector& fv) {
  return {fv.mean_rr_s, fv.mean_qrs_s, fv.hbr_bpm};
}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Knn: return "knn";
    case ModelKind::LinearSvm: return "svm";
    case ModelKind::LogReg: return "logreg";
    case ModelKind::Tree: return "tree";
    case ModelKind::Mlp: return "mlp";
  }
  return "logreg";
}

std::string_view display_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Knn: return "KNN";
    case ModelKind::LinearSvm: return "SVM";
    case ModelKind::LogReg: return "Logistic Regression";
    case ModelKind::Tree: return "Decision Tree";
    case ModelKind::Mlp: return "MLP(Neural Network)";
  }
  return "Logistic Regression";
}

ModelKind parse_model_kind(std::string_view text) {
  for (ModelKind k : kAllModelKinds) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::InvalidConfig,
              "unknown model '" + std::string(text) + "' (expected knn, svm, logreg, tree or mlp)");
}

void LearnerConfig::validate() const {
  const auto bad = [](const char* what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(logreg.lr > 0.0) || logreg.l2 < 0.0) bad("logreg needs lr > 0 and l2 >= 0");
  if (tree.max_depth < 1 || tree.min_split < 2) bad("tree needs max_depth >= 1 and min_split >= 2");
  if (knn.k < 1) bad("knn needs k >= 1");
  if (!(svm.lr > 0.0) || !(svm.c > 0.0)) bad("svm needs lr > 0 and c > 0");
  if (mlp.hidden < 1 || !(mlp.lr > 0.0)) bad("mlp needs hidden >= 1 and lr > 0");
}

// ---- objectives ----

double logreg_loss(const LogRegParams& p, const RowMatrix& z, std::span<const std::size_t> y, double l2,
                   LogRegParams* grad) {
  const double n = static_cast<double>(z.rows);
  if (grad) {
    *grad = p;
    std::fill(grad->w.begin(), grad->w.end(), 0.0);
    std::fill(grad->b.begin(), grad->b.end(), 0.0);
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows; ++i) {
    const auto zi = z.row(i);
    std::vector<double> prob = logreg_logits(p, zi);
    softmax_inplace(prob);
    loss -= std::log(std::max(prob[y[i]], std::numeric_limits<double>::min()));
    if (grad) {
      for (std::size_t c = 0; c < p.n_classes; ++c) {
        const double d = (prob[c] - (c == y[i] ? 1.0 : 0.0)) / n;
        grad->b[c] += d;
        for (std::size_t j = 0; j < p.n_features; ++j) grad->w[c * p.n_features + j] += d * zi[j];
      }
    }
  }
  loss /= n;
  double wsq = 0.0;
  for (std::size_t k = 0; k < p.w.size(); ++k) {
    wsq += p.w[k] * p.w[k];
    if (grad) grad->w[k] += l2 * p.w[k];
  }
  return loss + 0.5 * l2 * wsq;
}

double mlp_loss(const MlpParams& p, const RowMatrix& z, std::span<const std::size_t> y, MlpParams* grad) {
  const double n = static_cast<double>(z.rows);
  if (grad) {
    *grad = p;
    for (auto* v : {&grad->w1, &grad->b1, &grad->w2, &grad->b2}) std::fill(v->begin(), v->end(), 0.0);
  }
  double loss = 0.0;
  std::vector<double> dh(p.hidden);
  for (std::size_t i = 0; i < z.rows; ++i) {
    const auto zi = z.row(i);
    const MlpForward f = mlp_forward(p, zi);
    loss -= std::log(std::max(f.proba[y[i]], std::numeric_limits<double>::min()));
    if (!grad) continue;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < p.n_classes; ++c) {
      const double d = (f.proba[c] - (c == y[i] ? 1.0 : 0.0)) / n;
      grad->b2[c] += d;
      for (std::size_t h = 0; h < p.hidden; ++h) {
        grad->w2[c * p.hidden + h] += d * f.hidden[h];
        dh[h] += d * p.w2[c * p.hidden + h];
      }
    }
    for (std::size_t h = 0; h < p.hidden; ++h) {
      const double da = dh[h] * f.hidden[h] * (1.0 - f.hidden[h]);
      grad->b1[h] += da;
      for (std::size_t j = 0; j < p.n_features; ++j) grad->w1[h * p.n_features + j] += da * zi[j];
    }
  }
  return loss / n;
}

double svm_objective(std::span<const double> w, double b, const RowMatrix& z, std::span<const int> targets,
                     double c, std::vector<double>* grad_w, double* grad_b) {
  double hinge = 0.0;
  if (grad_w) grad_w->assign(w.begin(), w.end());
  if (grad_b) *grad_b = 0.0;
  double wsq = 0.0;
  for (double v : w) wsq += v * v;
  for (std::size_t i = 0; i < z.rows; ++i) {
    const auto zi = z.row(i);
    double f = b;
    for (std::size_t j = 0; j < w.size(); ++j) f += w[j] * zi[j];
    const double t = static_cast<double>(targets[i]);
    const double slack = 1.0 - t * f;
    if (slack > 0.0) {
      hinge += slack;
      if (grad_w) {
        for (std::size_t j = 0; j < w.size(); ++j) (*grad_w)[j] -= c * t * zi[j];
      }
      if (grad_b) *grad_b -= c * t;
    }
  }
  return 0.5 * wsq + c * hinge;
}

double gini(std::span<const std::size_t> class_counts) {
  const double total = static_cast<double>(std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
  if (total == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t c : class_counts) {
    const double p = static_cast<double>(c) / total;
    sum += p * p;
  }
  return 1.0 - sum;
}

// ---- training ----

Model train_logreg(const Dataset& ds, const LogRegConfig& cfg) {
  check_trainable(ds);
  Scaler scaler = standardize_fit(ds.x);
  const RowMatrix z = scaler.apply(ds.x);
  LogRegParams p{ds.x.cols, ds.n_classes(), std::vector<double>(ds.x.cols * ds.n_classes(), 0.0),
                 std::vector<double>(ds.n_classes(), 0.0)};
  LogRegParams grad;
  double loss = logreg_loss(p, z, ds.y, cfg.l2, &grad);
  if (!std::isfinite(loss)) diverged("logistic regression");
  double lr = cfg.lr;
  int halvings = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    bool accepted = false;
    while (!accepted) {
      LogRegParams cand = p;
      for (std::size_t k = 0; k < cand.w.size(); ++k) cand.w[k] -= lr * grad.w[k];
      for (std::size_t k = 0; k < cand.b.size(); ++k) cand.b[k] -= lr * grad.b[k];
      LogRegParams cand_grad;
      const double cand_loss = logreg_loss(cand, z, ds.y, cfg.l2, &cand_grad);
      if (!std::isfinite(cand_loss)) diverged("logistic regression");
      if (cand_loss <= loss + 1e-9) {
        p = std::move(cand);
        grad = std::move(cand_grad);
        loss = cand_loss;
        accepted = true;
      } else if (halvings == 10) {
        break;
      } else {
        lr /= 2.0;
        ++halvings;
      }
    }
    if (!accepted) break;
  }
  Model m = base_model(ModelKind::LogReg, ds, std::move(scaler));
  m.params = std::move(p);
  return m;
}

Model train_tree(const Dataset& ds, const TreeConfig& cfg) {
  check_trainable(ds);
  Scaler scaler = standardize_fit(ds.x);
  const RowMatrix z = scaler.apply(ds.x);
  TreeBuilder builder{z, ds.y, ds.n_classes(), cfg, {}};
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  builder.build(all, 0);
  Model m = base_model(ModelKind::Tree, ds, std::move(scaler));
  m.params = TreeParams{std::move(builder.nodes)};
  return m;
}

Model train_knn(const Dataset& ds, const KnnConfig& cfg) {
  check_trainable(ds);
  if (cfg.k == 0 || cfg.k > ds.size()) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(cfg.k) + " exceeds the " +
                                          std::to_string(ds.size()) + " training rows");
  }
  Scaler scaler = standardize_fit(ds.x);
  KnnParams p{cfg.k, scaler.apply(ds.x), ds.y};
  Model m = base_model(ModelKind::Knn, ds, std::move(scaler));
  m.params = std::move(p);
  return m;
}

Model train_linear_svm(const Dataset& ds, const SvmConfig& cfg) {
  check_trainable(ds);
  Scaler scaler = standardize_fit(ds.x);
  const RowMatrix z = scaler.apply(ds.x);
  const std::size_t d = ds.x.cols;
  SvmParams p{d, ds.n_classes(), std::vector<double>(d * ds.n_classes(), 0.0),
              std::vector<double>(ds.n_classes(), 0.0)};
  Rng rng(cfg.seed);
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t c = 0; c < p.n_classes; ++c) {
    double* w = p.w.data() + c * d;
    double& b = p.b[c];
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      shuffle(order, rng);
      for (std::size_t i : order) {
        const auto zi = z.row(i);
        const double t = ds.y[i] == c ? 1.0 : -1.0;
        double f = b;
        for (std::size_t j = 0; j < d; ++j) f += w[j] * zi[j];
        const bool active = 1.0 - t * f > 0.0;
        for (std::size_t j = 0; j < d; ++j) w[j] -= cfg.lr * (inv_n * w[j] - (active ? cfg.c * t * zi[j] : 0.0));
        if (active) b += cfg.lr * cfg.c * t;
      }
      if (!std::isfinite(b) || !std::all_of(w, w + d, [](double v) { return std::isfinite(v); })) {
        diverged("linear SVM");
      }
    }
  }
  Model m = base_model(ModelKind::LinearSvm, ds, std::move(scaler));
  m.params = std::move(p);
  return m;
}

Model train_mlp(const Dataset& ds, const MlpConfig& cfg) {
  check_trainable(ds);
  Scaler scaler = standardize_fit(ds.x);
  const RowMatrix z = scaler.apply(ds.x);
  MlpParams p;
  p.n_features = ds.x.cols;
  p.hidden = cfg.hidden;
  p.n_classes = ds.n_classes();
  Rng rng(cfg.seed);
  const auto init = [&rng](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& e : v) e = rng.uniform(-0.5, 0.5);
  };
  init(p.w1, p.hidden * p.n_features);
  init(p.b1, p.hidden);
  init(p.w2, p.n_classes * p.hidden);
  init(p.b2, p.n_classes);
  MlpParams grad;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = mlp_loss(p, z, ds.y, &grad);
    if (!std::isfinite(loss)) diverged("MLP");
    for (auto [v, g] : {std::pair{&p.w1, &grad.w1}, std::pair{&p.b1, &grad.b1}, std::pair{&p.w2, &grad.w2},
                        std::pair{&p.b2, &grad.b2}}) {
      for (std::size_t k = 0; k < v->size(); ++k) (*v)[k] -= cfg.lr * (*g)[k];
    }
  }
  if (!all_finite(p.w1) || !all_finite(p.w2)) diverged("MLP");
  Model m = base_model(ModelKind::Mlp, ds, std::move(scaler));
  m.params = std::move(p);
  return m;
}

Model train(ModelKind kind, const Dataset& ds, const LearnerConfig& cfg) {
  cfg.validate();
  switch (kind) {
    case ModelKind::Knn: return train_knn(ds, cfg.knn);
    case ModelKind::LinearSvm: return train_linear_svm(ds, cfg.svm);
    case ModelKind::LogReg: return train_logreg(ds, cfg.logreg);
    case ModelKind::Tree: return train_tree(ds, cfg.tree);
    case ModelKind::Mlp: return train_mlp(ds, cfg.mlp);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown model kind");
}

// ---- prediction ----

std::size_t knn_vote(const RowMatrix& train, std::span<const std::size_t> y, std::size_t n_classes,
                     std::span<const double> query, std::size_t k) {
  const auto nn = nearest(train, query, k);
  std::vector<std::size_t> votes(n_classes, 0);
  std::vector<double> dist(n_classes, 0.0);
  for (const auto& [d2, i] : nn) {
    ++votes[y[i]];
    dist[y[i]] += std::sqrt(d2);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < n_classes; ++c) {
    if (votes[c] > votes[best]) {
      best = c;
    } else if (votes[c] == votes[best] && votes[c] > 0) {
      const double mc = dist[c] / static_cast<double>(votes[c]);
      const double mb = dist[best] / static_cast<double>(votes[best]);
      if (mc < mb) best = c;
    }
  }
  return best;
}

std::vector<double> svm_margins(const Model& model, std::span<const double> x) {
  const std::vector<double> z = standardized_input(model, x);
  const auto* p = std::get_if<SvmParams>(&model.params);
  if (!p) throw Error(ErrorCode::Unsupported, "margins are only defined for the linear SVM");
  std::vector<double> out(p->n_classes);
  for (std::size_t c = 0; c < p->n_classes; ++c) out[c] = svm_decision(*p, c, z);
  return out;
}

std::size_t predict(const Model& model, std::span<const double> x) {
  if (model.kind == ModelKind::LinearSvm) {
    const auto m = svm_margins(model, x);
    return static_cast<std::size_t>(std::max_element(m.begin(), m.end()) - m.begin());
  }
  if (model.kind == ModelKind::Knn) {
    const std::vector<double> z = standardized_input(model, x);
    const auto& p = std::get<KnnParams>(model.params);
    return knn_vote(p.x, p.y, model.labels.size(), z, p.k);
  }
  if (model.kind == ModelKind::Tree) {
    const std::vector<double> z = standardized_input(model, x);
    return tree_leaf(std::get<TreeParams>(model.params), z).leaf_class;
  }
  const auto proba = predict_proba(model, x);
  return static_cast<std::size_t>(std::max_element(proba.begin(), proba.end()) - proba.begin());
}

const std::string& predict_label(const Model& model, std::span<const double> x) {
  return model.labels.at(predict(model, x));
}

std::vector<double> predict_proba(const Model& model, std::span<const double> x) {
  const std::vector<double> z = standardized_input(model, x);
  switch (model.kind) {
    case ModelKind::LogReg: {
      std::vector<double> v = logreg_logits(std::get<LogRegParams>(model.params), z);
      softmax_inplace(v);
      return v;
    }
    case ModelKind::Mlp:
      return mlp_forward(std::get<MlpParams>(model.params), z).proba;
    case ModelKind::Tree: {
      const TreeNode& leaf = tree_leaf(std::get<TreeParams>(model.params), z);
      const double total = static_cast<double>(
          std::accumulate(leaf.class_counts.begin(), leaf.class_counts.end(), std::size_t{0}));
      std::vector<double> v(leaf.class_counts.size());
      for (std::size_t c = 0; c < v.size(); ++c) v[c] = static_cast<double>(leaf.class_counts[c]) / total;
      return v;
    }
    case ModelKind::Knn: {
      const auto& p = std::get<KnnParams>(model.params);
      std::vector<double> v(model.labels.size(), 0.0);
      for (const auto& nn : nearest(p.x, z, p.k)) v[p.y[nn.second]] += 1.0 / static_cast<double>(p.k);
      return v;
    }
    case ModelKind::LinearSvm:
      break;
  }
  throw Error(ErrorCode::Unsupported, "the linear SVM has no probability output");
}

// ---- persistence ----

std::string save_model(const Model& model) {
  if (!model.trained()) throw Error(ErrorCode::UntrainedModel, "cannot save an untrained model");
  json j;
  j["format"] = "vtd-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = std::string(to_string(model.kind));
  j["labels"] = model.labels;
  j["scaler"] = {{"mean", model.scaler.mean}, {"stddev", model.scaler.stddev}};
  json params;
  std::visit(
      [&params](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogRegParams> || std::is_same_v<T, SvmParams>) {
          params = {{"n_features", p.n_features}, {"n_classes", p.n_classes}, {"w", p.w}, {"b", p.b}};
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          json nodes = json::array();
          for (const TreeNode& n : p.nodes) {
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"leaf_class", n.leaf_class},
                             {"class_counts", n.class_counts}});
          }
          params = {{"nodes", nodes}};
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          params = {{"k", p.k}, {"x", matrix_json(p.x)}, {"y", p.y}};
        } else if constexpr (std::is_same_v<T, MlpParams>) {
          params = {{"n_features", p.n_features}, {"hidden", p.hidden}, {"n_classes", p.n_classes},
                    {"w1", p.w1}, {"b1", p.b1}, {"w2", p.w2}, {"b2", p.b2}};
        }
      },
      model.params);
  j["params"] = params;
  return j.dump(2) + "\n";
}

Model load_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    malformed(std::string("not valid JSON (") + e.what() + ")");
  }
  try {
    if (!j.is_object() || j.value("format", std::string()) != "vtd-model") malformed("format must be \"vtd-model\"");
    const json& v = j.at("version");
    long long version = 0;
    if (v.is_number_integer()) {
      version = v.get<long long>();
    } else if (v.is_string()) {
      try {
        version = std::stoll(v.get<std::string>());
      } catch (const std::exception&) {
        malformed("version is not an integer");
      }
    } else {
      malformed("version is not an integer");
    }
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::BadVersion, "model format version " + std::to_string(version) +
                                             " is not supported (reader is version " +
                                             std::to_string(kModelFormatVersion) + ")");
    }
    Model m;
    try {
      m.kind = parse_model_kind(j.at("kind").get<std::string>());
    } catch (const Error&) {
      malformed("unknown model kind");
    }
    m.labels = j.at("labels").get<std::vector<std::string>>();
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.stddev = j.at("scaler").at("stddev").get<std::vector<double>>();
    const std::size_t d = m.scaler.mean.size();
    const std::size_t nc = m.labels.size();
    if (d == 0 || m.scaler.stddev.size() != d || nc < 1) malformed("scaler or labels are empty");
    const json& pj = j.at("params");
    switch (m.kind) {
      case ModelKind::LogReg:
      case ModelKind::LinearSvm: {
        LogRegParams p{pj.at("n_features").get<std::size_t>(), pj.at("n_classes").get<std::size_t>(),
                       pj.at("w").get<std::vector<double>>(), pj.at("b").get<std::vector<double>>()};
        if (p.n_features != d || p.n_classes != nc) malformed("parameter shape disagrees with labels/scaler");
        expect_size(p.w, d * nc, "w");
        expect_size(p.b, nc, "b");
        if (m.kind == ModelKind::LogReg) {
          m.params = std::move(p);
        } else {
          m.params = SvmParams{p.n_features, p.n_classes, std::move(p.w), std::move(p.b)};
        }
        break;
      }
      case ModelKind::Tree: {
        TreeParams p;
        for (const json& n : pj.at("nodes")) {
          TreeNode node;
          node.feature = n.at("feature").get<int>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<int>();
          node.right = n.at("right").get<int>();
          node.leaf_class = n.at("leaf_class").get<std::size_t>();
          node.class_counts = n.at("class_counts").get<std::vector<std::size_t>>();
          p.nodes.push_back(std::move(node));
        }
        const int count = static_cast<int>(p.nodes.size());
        if (count == 0) malformed("tree has no nodes");
        for (int i = 0; i < count; ++i) {
          const TreeNode& n = p.nodes[static_cast<std::size_t>(i)];
          if (n.leaf_class >= nc || n.class_counts.size() != nc) malformed("tree leaf class out of range");
          if (n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= d || n.left <= i || n.right <= i ||
                                 n.left >= count || n.right >= count)) {
            malformed("tree node links are invalid");
          }
        }
        m.params = std::move(p);
        break;
      }
      case ModelKind::Knn: {
        KnnParams p;
        p.k = pj.at("k").get<std::size_t>();
        p.x = matrix_from_json(pj.at("x"), d);
        p.y = pj.at("y").get<std::vector<std::size_t>>();
        if (p.y.size() != p.x.rows || p.k == 0 || p.k > p.x.rows) malformed("stored neighbours are inconsistent");
        for (std::size_t c : p.y) {
          if (c >= nc) malformed("stored neighbour label out of range");
        }
        m.params = std::move(p);
        break;
      }
      case ModelKind::Mlp: {
        MlpParams p;
        p.n_features = pj.at("n_features").get<std::size_t>();
        p.hidden = pj.at("hidden").get<std::size_t>();
        p.n_classes = pj.at("n_classes").get<std::size_t>();
        p.w1 = pj.at("w1").get<std::vector<double>>();
        p.b1 = pj.at("b1").get<std::vector<double>>();
        p.w2 = pj.at("w2").get<std::vector<double>>();
        p.b2 = pj.at("b2").get<std::vector<double>>();
        if (p.n_features != d || p.n_classes != nc || p.hidden == 0) malformed("network shape disagrees with labels/scaler");
        expect_size(p.w1, p.hidden * d, "w1");
        expect_size(p.b1, p.hidden, "b1");
        expect_size(p.w2, nc * p.hidden, "w2");
        expect_size(p.b2, nc, "b2");
        m.params = std::move(p);
        break;
      }
    }
    return m;
  } catch (const json::exception& e) {
    malformed(std::string("missing or mistyped field (") + e.what() + ")");
  }
}

}  // namespace vtd::classify
