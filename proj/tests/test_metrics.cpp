#include <gtest/gtest.h>

#include <cmath>

#include "openmix/error.hpp"
#include "openmix/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace openmix;

namespace {

std::vector<EvalRecord> make(std::initializer_list<std::pair<double, bool>> items) {
  std::vector<EvalRecord> r;
  for (auto [c, ok] : items) r.push_back({0, c, ok});
  return r;
}

}  // namespace

TEST(Aurc, HandCases) {
  EXPECT_EQ(aurc(make({{0.9, true}, {0.1, true}})), 0.0);
  EXPECT_EQ(aurc(make({{0.9, false}, {0.1, false}})), 1.0);
  EXPECT_DOUBLE_EQ(aurc(make({{0.9, true}, {0.8, false}})), 0.25);
  EXPECT_THROW(aurc({}), UsageError);
}

TEST(EAurc, HandCases) {
  EXPECT_NEAR(e_aurc(make({{0.9, true}, {0.8, true}, {0.2, false}})), 0.0, 1e-15);
  EXPECT_NEAR(e_aurc(make({{0.9, false}, {0.2, false}})), 0.0, 1e-15);
  EXPECT_NEAR(e_aurc(make({{0.9, true}, {0.8, false}})), 0.0, 1e-15);
  EXPECT_GT(e_aurc(make({{0.2, true}, {0.8, false}})), 0.0);
}

TEST(Auroc, HandCases) {
  EXPECT_EQ(auroc(make({{0.9, true}, {0.8, true}, {0.1, false}})), 1.0);
  EXPECT_DOUBLE_EQ(auroc(make({{0.9, true}, {0.6, true}, {0.7, false}})), 0.5);
  EXPECT_DOUBLE_EQ(auroc(make({{0.5, true}, {0.5, false}, {0.5, true}})), 0.5);
  EXPECT_THROW(auroc(make({{0.5, true}})), UndefinedMetricError);
}

TEST(Fpr95, HandCases) {
  EXPECT_EQ(fpr_at_95tpr(make({{0.9, true}, {0.8, true}, {0.1, false}})), 0.0);
  EXPECT_EQ(fpr_at_95tpr(make({{0.1, true}, {0.2, true}, {0.9, false}})), 1.0);
  std::vector<EvalRecord> r(20, EvalRecord{0, 1.0, true});
  r.push_back({0, 1.0, false});
  EXPECT_EQ(fpr_at_95tpr(r), 1.0);
}

TEST(Fpr95, SmallestQualifyingSet) {
  // 20 positives at distinct confidences; 19 of them suffice for TPR 0.95.
  std::vector<EvalRecord> r;
  for (int i = 0; i < 20; ++i) r.push_back({0, 1.0 - 0.01 * i, true});
  r.push_back({0, 0.815, false});  // between the 19th (0.82) and 20th (0.81) positive
  r.push_back({0, 0.5, false});
  EXPECT_EQ(fpr_at_95tpr(r), 0.0);
}

TEST(Aupr, HandCases) {
  EXPECT_DOUBLE_EQ(aupr(make({{0.9, true}, {0.8, true}, {0.1, false}})), 1.0);
  EXPECT_DOUBLE_EQ(aupr(make({{0.5, true}, {0.5, false}, {0.5, false}, {0.5, true}})), 0.5);
  EXPECT_DOUBLE_EQ(aupr(make({{0.9, true}, {0.8, false}, {0.7, false}})), 1.0);
  EXPECT_THROW(aupr(make({{0.9, false}})), UndefinedMetricError);
}

TEST(MetricReport, UndefinedBecomesNan) {
  const auto rep = metric_report(make({{0.9, true}, {0.8, true}}));
  EXPECT_TRUE(std::isnan(rep.auroc));
  EXPECT_TRUE(std::isnan(rep.fpr95));
  EXPECT_EQ(rep.acc, 100.0);
  EXPECT_EQ(rep.aurc, 0.0);
}

TEST(Metrics, MatchBruteForceOracles) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = oracle::random_records(2 + rng.index(499), rng);
    EXPECT_NEAR(auroc(r), oracle::auroc(r), 1e-9);
    EXPECT_NEAR(aurc(r), oracle::aurc(r), 1e-9);
    EXPECT_NEAR(fpr_at_95tpr(r), oracle::fpr_at_95tpr(r), 1e-9);
  }
}

TEST(Metrics, InvariantUnderMonotoneTransforms) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = oracle::random_records(50 + rng.index(200), rng);
    auto t = r;
    for (auto& x : t) x.confidence = std::exp(3.0 * x.confidence) - 7.0;
    EXPECT_DOUBLE_EQ(auroc(r), auroc(t));
    EXPECT_DOUBLE_EQ(aurc(r), aurc(t));
    EXPECT_DOUBLE_EQ(e_aurc(r), e_aurc(t));
    EXPECT_DOUBLE_EQ(fpr_at_95tpr(r), fpr_at_95tpr(t));
    EXPECT_DOUBLE_EQ(aupr(r), aupr(t));
    for (auto kind : {CurveKind::risk_coverage, CurveKind::accuracy_rejection, CurveKind::roc,
                      CurveKind::pr}) {
      EXPECT_EQ(curve(r, kind).points, curve(t, kind).points);
    }
  }
}

TEST(Metrics, EAurcBounds) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = oracle::random_records(2 + rng.index(300), rng);
    const double e = e_aurc(r);
    EXPECT_GE(e, -1e-15);
    EXPECT_LE(e, aurc(r) + 1e-15);
  }
}

TEST(Curves, Shapes) {
  const auto r = make({{0.9, true}, {0.8, false}, {0.7, true}, {0.1, true}});
  const auto arc = curve(r, CurveKind::accuracy_rejection);
  EXPECT_EQ(arc.points.front().first, 0.0);
  EXPECT_EQ(arc.points.front().second, accuracy(r));
  const auto rc = curve(r, CurveKind::risk_coverage);
  ASSERT_EQ(rc.points.size(), 4u);
  EXPECT_EQ(rc.points[1], std::make_pair(0.5, 0.5));
  const auto roc = curve(r, CurveKind::roc);
  EXPECT_EQ(roc.points.front(), std::make_pair(0.0, 0.0));
  EXPECT_EQ(roc.points.back(), std::make_pair(1.0, 1.0));
  const auto all_ok = make({{0.3, true}, {0.9, true}, {0.5, true}});
  for (auto [x, y] : curve(all_ok, CurveKind::accuracy_rejection).points) EXPECT_EQ(y, 1.0);
  for (auto [x, y] : curve(all_ok, CurveKind::risk_coverage).points) EXPECT_EQ(y, 0.0);
  EXPECT_THROW(parse_curve_kind("lift"), ConfigError);
  EXPECT_EQ(parse_curve_kind("pr"), CurveKind::pr);
}

TEST(Curves, RocAreaMatchesAuroc) {
  Rng rng(12);
  const auto r = oracle::random_records(300, rng);
  const auto roc = curve(r, CurveKind::roc);
  double area = 0;
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    area += (roc.points[i].first - roc.points[i - 1].first) *
            0.5 * (roc.points[i].second + roc.points[i - 1].second);
  }
  EXPECT_NEAR(area, auroc(r), 1e-12);
}

TEST(OodRecords, SeparatedAndSymmetric) {
  // Single affine layer: logits = (x, 0). ID rows have large x, OOD rows small.
  MlpModel model(std::vector<DenseLayer>{DenseLayer{Matrix{{1.0, 0.0}}, {0.0, 0.0}}});
  const Matrix id{{5.0}, {6.0}, {7.0}};
  const Matrix ood{{0.1}, {0.2}};
  const auto r = ood_records(model, id, ood, 2, {});
  EXPECT_EQ(auroc(r), 1.0);
  EXPECT_EQ(fpr_at_95tpr(r), 0.0);
  EXPECT_THROW(ood_records(model, Matrix(0, 1), ood, 2, {}), UsageError);

  Rng rng(4);
  const auto a = openmix::testing::random_matrix(400, 1, rng);
  const auto b = openmix::testing::random_matrix(300, 1, rng, 2.0);
  const auto ab = ood_records(model, a, b, 2, {});
  const auto ba = ood_records(model, b, a, 2, {});
  EXPECT_NEAR(auroc(ab), 1.0 - auroc(ba), 1e-12);
}

TEST(OodRecords, IdenticalDistributionsNearHalf) {
  MlpModel model(std::vector<DenseLayer>{DenseLayer{Matrix{{1.0, 0.0}}, {0.0, 0.0}}});
  Rng rng(17);
  const auto a = openmix::testing::random_matrix(5000, 1, rng);
  const auto b = openmix::testing::random_matrix(5000, 1, rng);
  EXPECT_NEAR(auroc(ood_records(model, a, b, 2, {})), 0.5, 0.02);
}
