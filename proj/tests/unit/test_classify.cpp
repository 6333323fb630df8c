#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "vtd/classify.hpp"

namespace vtd::classify {
namespace {

using Rows = std::vector<std::vector<double>>;

// Two or three well separated Gaussian blobs in `dims` dimensions.
Dataset blobs(std::size_t per_class, std::size_t n_classes, std::size_t dims, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 0.3);
  Rows rows;
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> r(dims);
      for (std::size_t j = 0; j < dims; ++j) r[j] = nd(gen) + (j == c % dims ? 4.0 : 0.0) + 2.0 * c;
      rows.push_back(r);
      labels.push_back(std::string(1, static_cast<char>('a' + c)));
    }
  }
  return make_dataset(rows, labels);
}

double accuracy_on(const Model& m, const Dataset& ds) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) ok += predict(m, ds.x.row(i)) == ds.y[i];
  return static_cast<double>(ok) / static_cast<double>(ds.size());
}

RowMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  RowMatrix m{rows, cols, std::vector<double>(rows * cols)};
  for (double& v : m.data) v = nd(gen);
  return m;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& e : v) e = ud(gen);
  return v;
}

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-4});
}

// Central differences of f over every entry of v, compared with g.
template <typename F>
double max_fd_error(std::vector<double>& v, const std::vector<double>& g, F f) {
  constexpr double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double saved = v[k];
    v[k] = saved + eps;
    const double up = f();
    v[k] = saved - eps;
    const double down = f();
    v[k] = saved;
    worst = std::max(worst, rel_err(g[k], (up - down) / (2 * eps)));
  }
  return worst;
}

TEST(Scaler, TwoPointExample) {
  const RowMatrix x{2, 1, {1, 3}};
  const Scaler s = standardize_fit(x);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(s.stddev[0], 1.0);
  const RowMatrix z = s.apply(x);
  EXPECT_DOUBLE_EQ(z.data[0], -1.0);
  EXPECT_DOUBLE_EQ(z.data[1], 1.0);
}

TEST(Scaler, ConstantFeatureRejected) {
  const RowMatrix x{3, 2, {1, 5, 2, 5, 3, 5}};
  EXPECT_VTD_ERROR(standardize_fit(x), ErrorCode::DegenerateFeature);
  EXPECT_VTD_ERROR(standardize_fit(RowMatrix{1, 1, {1}}), ErrorCode::InvalidDataset);
}

TEST(Scaler, StandardizedMomentsAreUnit) {
  RowMatrix x = random_matrix(257, 3, 11);
  for (std::size_t i = 0; i < x.rows; ++i) x.data[i * 3 + 1] = 100 + 40 * x.data[i * 3 + 1];
  const RowMatrix z = standardize_fit(x).apply(x);
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) mean += z.data[i * 3 + j];
    mean /= z.rows;
    for (std::size_t i = 0; i < z.rows; ++i) sq += std::pow(z.data[i * 3 + j] - mean, 2);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(sq / z.rows), 1.0, 1e-9);
  }
}

TEST(Dataset, LabelsSortedAndValidated) {
  const Dataset ds = make_dataset(Rows{{1}, {2}, {3}}, {"VT", "NonVT", "VT"});
  EXPECT_EQ(ds.labels, (std::vector<std::string>{"NonVT", "VT"}));
  EXPECT_EQ(ds.y, (std::vector<std::size_t>{1, 0, 1}));
  EXPECT_VTD_ERROR(make_dataset(Rows{{1}, {2}}, {"VT", "VT"}), ErrorCode::InvalidDataset);
  EXPECT_VTD_ERROR(make_dataset(Rows{{1}, {2, 3}}, {"a", "b"}), ErrorCode::InvalidDataset);
  EXPECT_VTD_ERROR(make_dataset(Rows{{1}, {NAN}}, {"a", "b"}), ErrorCode::InvalidDataset);
}

TEST(ModelKind, NamesRoundTrip) {
  for (ModelKind k : kAllModelKinds) EXPECT_EQ(parse_model_kind(to_string(k)), k);
  EXPECT_EQ(to_string(ModelKind::LinearSvm), "svm");
  EXPECT_VTD_ERROR(parse_model_kind("forest"), ErrorCode::InvalidConfig);
}

TEST(LogReg, SeparableSetFitsExactly) {
  const Dataset ds = blobs(20, 2, 3, 1);
  const Model m = train_logreg(ds);
  EXPECT_EQ(accuracy_on(m, ds), 1.0);
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(predict_label(m, ds.x.row(i)), ds.labels[ds.y[i]]);
}

TEST(LogReg, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(5);
  const RowMatrix z = random_matrix(5, 3, 6);
  const std::vector<std::size_t> y{0, 2, 1, 1, 0};
  LogRegParams p{3, 3, random_vector(9, gen), random_vector(3, gen)};
  const double l2 = 1e-3;
  LogRegParams g;
  logreg_loss(p, z, y, l2, &g);
  const auto f = [&] { return logreg_loss(p, z, y, l2, nullptr); };
  EXPECT_LT(max_fd_error(p.w, g.w, f), 1e-5);
  EXPECT_LT(max_fd_error(p.b, g.b, f), 1e-5);
}

TEST(Tree, RootSplitsAtMidpoint) {
  const Dataset ds = make_dataset(Rows{{3}, {4}, {6}, {7}}, {"a", "a", "b", "b"});
  const Model m = train_tree(ds);
  const auto& nodes = std::get<TreeParams>(m.params).nodes;
  ASSERT_EQ(nodes.size(), 3u);
  EXPECT_EQ(nodes[0].feature, 0);
  const double raw = nodes[0].threshold * m.scaler.stddev[0] + m.scaler.mean[0];
  EXPECT_NEAR(raw, 5.0, 1e-12);
}

TEST(Tree, PureChildrenAreLeaves) {
  const Dataset ds = make_dataset(Rows{{1}, {2}, {3}, {10}, {11}, {12}}, {"a", "a", "a", "b", "b", "b"});
  const Model m = train_tree(ds);
  const auto& nodes = std::get<TreeParams>(m.params).nodes;
  ASSERT_EQ(nodes.size(), 3u);
  EXPECT_EQ(nodes[1].feature, -1);
  EXPECT_EQ(nodes[2].feature, -1);
  EXPECT_EQ(nodes[1].class_counts, (std::vector<std::size_t>{3, 0}));
  EXPECT_EQ(nodes[2].class_counts, (std::vector<std::size_t>{0, 3}));
}

TEST(Tree, SmallNodeBecomesMajorityLeaf) {
  const Dataset ds = make_dataset(Rows{{1}, {2}, {3}}, {"a", "b", "b"});
  const Model m = train_tree(ds, TreeConfig{6, 4});
  const auto& nodes = std::get<TreeParams>(m.params).nodes;
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(m.labels[nodes[0].leaf_class], "b");
}

TEST(Tree, GiniValues) {
  EXPECT_DOUBLE_EQ(gini(std::vector<std::size_t>{5, 5}), 0.5);
  EXPECT_DOUBLE_EQ(gini(std::vector<std::size_t>{7, 0}), 0.0);
  EXPECT_NEAR(gini(std::vector<std::size_t>{1, 1, 1}), 2.0 / 3.0, 1e-15);
}

TEST(Tree, LeafTieGoesToFirstLabel) {
  // No split lowers the impurity, so the root is a 2-2 leaf.
  const Dataset ds3 = make_dataset(Rows{{0}, {0}, {1}, {1}}, {"b", "a", "b", "a"});
  const Model m = train_tree(ds3);
  const auto& nodes = std::get<TreeParams>(m.params).nodes;
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(m.labels[nodes[0].leaf_class], "a");
}

TEST(Tree, PredictionMatchesHandTrace) {
  const Dataset ds = blobs(15, 3, 2, 3);
  const Model m = train_tree(ds);
  const auto& nodes = std::get<TreeParams>(m.params).nodes;
  ASSERT_GT(nodes.size(), 1u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto x = ds.x.row(i);
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
      const TreeNode& n = nodes[static_cast<std::size_t>(at)];
      const std::size_t j = static_cast<std::size_t>(n.feature);
      const double z = (x[j] - m.scaler.mean[j]) / m.scaler.stddev[j];
      at = z <= n.threshold ? n.left : n.right;
    }
    EXPECT_EQ(predict(m, x), nodes[static_cast<std::size_t>(at)].leaf_class);
  }
}

TEST(Tree, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  Rows raw, warped;
  std::vector<std::string> labels;
  for (int i = 0; i < 80; ++i) {
    const double a = ud(gen), b = ud(gen);
    raw.push_back({a, b});
    warped.push_back({std::exp(a), b * b * b});
    labels.push_back(a + 0.5 * b > 0.3 ? "x" : (b > 1.0 ? "y" : "z"));
  }
  const Model m1 = train_tree(make_dataset(raw, labels));
  const Model m2 = train_tree(make_dataset(warped, labels));
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_EQ(predict(m1, raw[i]), predict(m2, warped[i])) << i;
}

TEST(Knn, HandVotes) {
  const RowMatrix train{3, 2, {0, 0, 1, 0, 0, 2}};
  const std::vector<std::size_t> y{0, 1, 1};
  const std::vector<double> q{0.1, 0.0};
  EXPECT_EQ(knn_vote(train, y, 2, q, 1), 0u);  // nearest is row 0 at 0.1
  EXPECT_EQ(knn_vote(train, y, 2, q, 2), 0u);  // 1-1 vote, class 0 mean distance 0.1 < 0.9
  EXPECT_EQ(knn_vote(train, y, 2, q, 3), 1u);  // 2-1 vote
  EXPECT_VTD_ERROR(knn_vote(train, y, 2, q, 4), ErrorCode::KTooLarge);
  EXPECT_VTD_ERROR(knn_vote(train, y, 2, q, 0), ErrorCode::KTooLarge);
}

TEST(Knn, VoteTieBreaks) {
  const RowMatrix train{2, 1, {0, 3}};
  const std::vector<std::size_t> y{0, 1};
  EXPECT_EQ(knn_vote(train, y, 2, std::vector<double>{1.0}, 2), 0u);
  EXPECT_EQ(knn_vote(train, y, 2, std::vector<double>{2.0}, 2), 1u);
  EXPECT_EQ(knn_vote(train, y, 2, std::vector<double>{1.5}, 2), 0u);  // equal means: lower class
  // Distance ties between rows go to the lower index.
  const RowMatrix sym{2, 1, {-1, 1}};
  EXPECT_EQ(knn_vote(sym, std::vector<std::size_t>{1, 0}, 2, std::vector<double>{0.0}, 1), 1u);
}

TEST(Knn, TrainingRowAndGlobalMajority) {
  const Dataset ds = blobs(10, 3, 2, 4);
  const Model m1 = train_knn(ds, KnnConfig{1});
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(predict(m1, ds.x.row(i)), ds.y[i]);

  Dataset skewed = make_dataset(Rows{{0}, {1}, {2}, {3}, {4}}, {"b", "a", "b", "b", "a"});
  const Model all = train_knn(skewed, KnnConfig{5});
  EXPECT_EQ(predict_label(all, std::vector<double>{-50}), "b");
  EXPECT_EQ(predict_label(all, std::vector<double>{50}), "b");
  EXPECT_VTD_ERROR(train_knn(skewed, KnnConfig{6}), ErrorCode::KTooLarge);
}

TEST(Svm, SeparableSetFitsExactly) {
  const Dataset ds = blobs(20, 2, 3, 2);
  EXPECT_EQ(accuracy_on(train_linear_svm(ds), ds), 1.0);
  const Dataset three = blobs(20, 3, 3, 12);
  EXPECT_EQ(accuracy_on(train_linear_svm(three), three), 1.0);
}

TEST(Svm, ScaleInvariance) {
  const Dataset ds = blobs(25, 3, 3, 7);
  Rows big;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<double> r(ds.x.row(i).begin(), ds.x.row(i).end());
    for (double& v : r) v *= 10;
    big.push_back(r);
    labels.push_back(ds.labels[ds.y[i]]);
  }
  const Model m1 = train_linear_svm(ds);
  const Model m10 = train_linear_svm(make_dataset(big, labels));
  std::mt19937_64 gen(8);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> q = random_vector(3, gen);
    for (double& v : q) v *= 5;
    std::vector<double> q10 = q;
    for (double& v : q10) v *= 10;
    EXPECT_EQ(predict(m1, q), predict(m10, q10));
  }
}

TEST(Svm, SubgradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(3);
  const RowMatrix z = random_matrix(8, 3, 4);
  const std::vector<int> t{1, -1, 1, 1, -1, -1, 1, -1};
  std::vector<double> w = random_vector(3, gen);
  double b = 0.1;
  for (std::size_t i = 0; i < z.rows; ++i) {
    double m = b;
    for (std::size_t j = 0; j < 3; ++j) m += w[j] * z.data[i * 3 + j];
    ASSERT_GT(std::abs(1.0 - t[i] * m), 1e-3) << "test point sits on a hinge kink";
  }
  std::vector<double> gw;
  double gb = 0.0;
  svm_objective(w, b, z, t, 1.0, &gw, &gb);
  const auto f = [&] { return svm_objective(w, b, z, t, 1.0, nullptr, nullptr); };
  EXPECT_LT(max_fd_error(w, gw, f), 1e-4);
  std::vector<double> bv{b};
  const auto fb = [&] { return svm_objective(w, bv[0], z, t, 1.0, nullptr, nullptr); };
  EXPECT_LT(max_fd_error(bv, std::vector<double>{gb}, fb), 1e-4);
}

TEST(Svm, ProbaUnsupported) {
  const Dataset ds = blobs(5, 2, 2, 1);
  const Model m = train_linear_svm(ds);
  EXPECT_VTD_ERROR(predict_proba(m, ds.x.row(0)), ErrorCode::Unsupported);
  EXPECT_EQ(svm_margins(m, ds.x.row(0)).size(), 2u);
}

TEST(Mlp, LearnsXor) {
  const Dataset ds = make_dataset(Rows{{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {"a", "a", "b", "b"});
  const MlpConfig cfg;
  ASSERT_EQ(cfg.epochs, 2000u);
  EXPECT_EQ(accuracy_on(train_mlp(ds, cfg), ds), 1.0);
}

TEST(Mlp, ZeroEpochsGivesValidProbabilities) {
  const Dataset ds = blobs(5, 3, 2, 1);
  MlpConfig cfg;
  cfg.epochs = 0;
  const Model m = train_mlp(ds, cfg);
  const auto p = predict_proba(m, ds.x.row(0));
  ASSERT_EQ(p.size(), 3u);
  double sum = 0.0;
  for (double v : p) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(17);
  const RowMatrix z = random_matrix(5, 3, 18);
  const std::vector<std::size_t> y{1, 0, 2, 2, 0};
  MlpParams p{3, 4, 3, random_vector(12, gen), random_vector(4, gen), random_vector(12, gen),
              random_vector(3, gen)};
  MlpParams g;
  mlp_loss(p, z, y, &g);
  const auto f = [&] { return mlp_loss(p, z, y, nullptr); };
  EXPECT_LT(max_fd_error(p.w1, g.w1, f), 1e-5);
  EXPECT_LT(max_fd_error(p.b1, g.b1, f), 1e-5);
  EXPECT_LT(max_fd_error(p.w2, g.w2, f), 1e-5);
  EXPECT_LT(max_fd_error(p.b2, g.b2, f), 1e-5);
}

TEST(Predict, ProbabilitiesSumToOne) {
  const Dataset ds = blobs(10, 3, 3, 21);
  for (ModelKind k : {ModelKind::LogReg, ModelKind::Mlp, ModelKind::Tree, ModelKind::Knn}) {
    const Model m = train(k, ds, LearnerConfig{});
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto p = predict_proba(m, ds.x.row(i));
      double sum = 0.0;
      for (double v : p) sum += v;
      EXPECT_NEAR(sum, 1.0, 1e-9) << to_string(k);
      if (k == ModelKind::LogReg || k == ModelKind::Mlp) {
        EXPECT_EQ(static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()),
                  predict(m, ds.x.row(i)));
      }
    }
  }
}

TEST(Predict, UntrainedModelRejected) {
  const Model m;
  const std::vector<double> x{1, 2, 3};
  EXPECT_VTD_ERROR(predict(m, x), ErrorCode::UntrainedModel);
  EXPECT_VTD_ERROR(predict_proba(m, x), ErrorCode::UntrainedModel);
  EXPECT_VTD_ERROR(save_model(m), ErrorCode::UntrainedModel);
}

TEST(Persistence, RoundTripPredictionsForEveryKind) {
  const Dataset ds = blobs(12, 3, 3, 31);
  std::mt19937_64 gen(32);
  std::vector<std::vector<double>> queries;
  for (int i = 0; i < 100; ++i) {
    auto q = random_vector(3, gen);
    for (double& v : q) v *= 6;
    queries.push_back(q);
  }
  for (ModelKind k : kAllModelKinds) {
    const Model m = train(k, ds, LearnerConfig{});
    const std::string text = save_model(m);
    const Model back = load_model(text);
    EXPECT_EQ(back.kind, k);
    EXPECT_EQ(save_model(back), text);
    for (const auto& q : queries) EXPECT_EQ(predict(m, q), predict(back, q)) << to_string(k);
  }
}

TEST(Persistence, RejectsBadText) {
  const Model m = train_logreg(blobs(5, 2, 2, 1));
  const std::string text = save_model(m);
  EXPECT_VTD_ERROR(load_model(text.substr(0, text.size() / 2)), ErrorCode::MalformedModel);
  EXPECT_VTD_ERROR(load_model(""), ErrorCode::MalformedModel);

  std::string v2 = text;
  const std::string field = "\"version\": 1";
  const auto at = v2.find(field);
  ASSERT_NE(at, std::string::npos);
  v2.replace(at, field.size(), "\"version\": \"2\"");
  EXPECT_VTD_ERROR(load_model(v2), ErrorCode::BadVersion);

  std::string wrong_kind = text;
  const auto kat = wrong_kind.find("\"logreg\"");
  ASSERT_NE(kat, std::string::npos);
  wrong_kind.replace(kat, 8, "\"forest\"");
  EXPECT_VTD_ERROR(load_model(wrong_kind), ErrorCode::MalformedModel);
}

TEST(Determinism, RetrainingGivesIdenticalModels) {
  const Dataset ds = blobs(15, 3, 3, 41);
  LearnerConfig cfg;
  cfg.mlp.epochs = 200;
  for (ModelKind k : kAllModelKinds) EXPECT_EQ(save_model(train(k, ds, cfg)), save_model(train(k, ds, cfg)));
}

TEST(Learners, ConfigValidation) {
  LearnerConfig cfg;
  cfg.knn.k = 0;
  EXPECT_VTD_ERROR(cfg.validate(), ErrorCode::InvalidConfig);
  cfg = {};
  cfg.svm.c = 0;
  EXPECT_VTD_ERROR(cfg.validate(), ErrorCode::InvalidConfig);
  cfg = {};
  cfg.tree.min_split = 1;
  EXPECT_VTD_ERROR(train(ModelKind::Tree, blobs(5, 2, 2, 1), cfg), ErrorCode::InvalidConfig);
}

}  // namespace
}  // namespace vtd::classify
