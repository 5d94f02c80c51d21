#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace ebmedit;

namespace {

const EbmModel& learned() { return support::fixture().trained.model; }

const DomainEditResult& edited() {
  static const DomainEditResult r = apply_domain_edits(learned(), default_edit_spec());
  return r;
}

std::vector<CurvePoint> sigmoid_points(const SigmoidParams& p, double lo, double hi, std::size_t n) {
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back({x, p(x)});
  }
  return out;
}

Grid<double> random_grid(Rng& rng, std::size_t r, std::size_t c, double lo = -2, double hi = 2) {
  Grid<double> g(r, c);
  for (auto& v : g.values()) v = rng.uniform(lo, hi);
  return g;
}

bool nested(const Grid<std::uint8_t>& inner, const Grid<std::uint8_t>& outer) {
  for (std::size_t i = 0; i < inner.size(); ++i)
    if (inner.values()[i] && !outer.values()[i]) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// sample_curve

TEST(SampleCurve, TwoPointsAreEndpoints) {
  const auto& t = learned().term("GWD");
  const auto pts = sample_curve(learned(), "GWD", 2);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].x, t.range_lo);
  EXPECT_EQ(pts[1].x, t.range_hi);
  EXPECT_EQ(pts[0].score, t.lookup(t.range_lo));
}

TEST(SampleCurve, EvenSpacing) {
  auto m = support::worked_example_model();
  const auto pts = sample_curve(m, "x1", 100);
  ASSERT_EQ(pts.size(), 100u);
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_NEAR(pts[i].x - pts[i - 1].x, 10.0 / 99.0, 1e-12);
  for (const auto& p : pts) EXPECT_EQ(p.score, lookup_univariate(m.univariate[0], p.x));
}

TEST(SampleCurve, ConstantTerm) {
  auto m = support::worked_example_model();
  m.univariate[0].scores.assign(4, 0.3);
  for (const auto& p : sample_curve(m, "x1")) EXPECT_EQ(p.score, 0.3);
}

TEST(SampleCurve, Errors) {
  EXPECT_THROW(sample_curve(learned(), "nope"), ModelError);
  EXPECT_THROW(sample_curve(learned(), "GWD", 1), EditError);
}

TEST(SampleCurve, LearnedSourceIgnoresEdits) {
  const auto& m = edited().model;
  const auto a = sample_curve(m, "GWD", 50, CurveSource::Learned);
  const auto b = sample_curve(learned(), "GWD", 50);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].score, b[i].score);
}

// ---------------------------------------------------------------------------
// trusted regions

TEST(TrustRegion, HalfOpenExclusions) {
  std::vector<CurvePoint> pts;
  for (int i = 0; i <= 10; ++i) pts.push_back({double(i), 0.0});
  const auto tr = select_trusted("f", pts, {{-kInf, 2.0}, {5.0, 7.0}});
  // kept: 2, 3, 4, 7, 8, 9, 10
  EXPECT_EQ(tr.selected_count(), 7u);
  EXPECT_TRUE(tr.selected[2]);
  EXPECT_FALSE(tr.selected[5]);
  EXPECT_TRUE(tr.selected[7]);
}

TEST(TrustRegion, TooFewPoints) {
  std::vector<CurvePoint> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({double(i), 0.0});
  EXPECT_THROW(select_trusted("f", pts, {{1.0, kInf}}), InsufficientPointsError);
  EXPECT_NO_THROW(select_trusted("f", pts, {{4.0, kInf}}));
  EXPECT_THROW(select_trusted("f", pts, {{3.0, 3.0}}), EditError);
}

// ---------------------------------------------------------------------------
// fit_sigmoid

TEST(FitSigmoid, RecoversGeneratingCurve) {
  const SigmoidParams truth{2.0, 1.0, -3.0, 1.0};
  const auto pts = sigmoid_points(truth, -2.0, 4.0, 100);
  const auto fit = fit_sigmoid(pts);
  for (const auto& p : pts) EXPECT_NEAR(fit.params(p.x), p.score, 1e-6);
  EXPECT_LT(fit.sse, 1e-10);
}

TEST(FitSigmoid, RecoveryUnderMatchingDirection) {
  const SigmoidParams truth{2.0, 1.0, -3.0, 1.0};  // decreasing
  const auto pts = sigmoid_points(truth, -2.0, 4.0, 100);
  const auto fit = fit_sigmoid(pts, Direction::Decreasing);
  EXPECT_TRUE(fit.params.satisfies(Direction::Decreasing));
  for (const auto& p : pts) EXPECT_NEAR(fit.params(p.x), p.score, 1e-6);
}

TEST(FitSigmoid, RandomCurvesRecovered) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const SigmoidParams truth{rng.uniform(0.5, 4.0) * (rng.uniform(0, 1) < 0.5 ? -1 : 1), rng.uniform(2, 8),
                              rng.uniform(0.5, 3.0) * (rng.uniform(0, 1) < 0.5 ? -1 : 1), rng.uniform(-1, 1)};
    const auto pts = sigmoid_points(truth, 0.0, 10.0, 100);
    const auto fit = fit_sigmoid(pts);
    double worst = 0;
    for (const auto& p : pts) worst = std::max(worst, std::abs(fit.params(p.x) - p.score));
    EXPECT_LT(worst, 1e-6) << "trial " << trial;
  }
}

TEST(FitSigmoid, ConstantPoints) {
  std::vector<CurvePoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({double(i), 0.7});
  const auto fit = fit_sigmoid(pts, Direction::Decreasing);
  EXPECT_EQ(fit.params.c, 0.0);
  EXPECT_NEAR(fit.params.d, 0.7, 1e-12);
  EXPECT_LT(fit.sse, 1e-20);
}

TEST(FitSigmoid, DirectionAgainstTheData) {
  const auto pts = sigmoid_points({1.5, 5.0, 2.0, 0.0}, 0.0, 10.0, 60);  // increasing
  const auto fit = fit_sigmoid(pts, Direction::Decreasing);
  EXPECT_TRUE(fit.params.satisfies(Direction::Decreasing));
  EXPECT_LE(fit.params.a * fit.params.c, 0.0);
}

TEST(FitSigmoid, DegenerateInput) {
  const std::vector<CurvePoint> three{{0, 1}, {1, 2}, {2, 3}};
  EXPECT_THROW(fit_sigmoid(three), InsufficientPointsError);
  const std::vector<CurvePoint> same_x{{1, 1}, {1, 2}, {1, 3}, {1, 4}};
  EXPECT_THROW(fit_sigmoid(same_x), EditError);
  const std::vector<CurvePoint> nan_y{{0, 1}, {1, std::nan("")}, {2, 3}, {3, 4}};
  EXPECT_THROW(fit_sigmoid(nan_y), EditError);
}

TEST(FitSigmoid, GwdWithDefaultExclusionsDecreases) {
  UnivariateEdit e = default_edit_spec().univariate[0];
  ASSERT_EQ(e.feature, "GWD");
  const auto r = resolve_univariate_edit(learned(), e);
  const auto& p = std::get<SigmoidParams>(r.replacement);
  EXPECT_LT(p.a * p.c, 0.0);
  ASSERT_TRUE(r.trust.has_value());
  for (std::size_t i = 0; i < r.trust->samples.size(); ++i) {
    const double x = r.trust->samples[i].x;
    EXPECT_EQ(r.trust->selected[i], !(x < 0.7 || (x >= 1.0 && x < 1.5)));
  }
}

// ---------------------------------------------------------------------------
// univariate surgery

TEST(UnivariateEdit, IdenticalReplacementLeavesScores) {
  const auto& m = learned();
  const auto& t = m.term("PGA");
  // a step that reproduces the table at every bin center
  const auto centers = bin_centers(t.edges, t.range_lo, t.range_hi);
  StepFunctionSpec step;
  step.breakpoints = t.edges.cuts;
  step.levels = t.scores;
  for (std::size_t b = 0; b < centers.size(); ++b) ASSERT_EQ(step(centers[b]), t.scores[b]);
  const auto e = apply_univariate_edit(m, "PGA", step);
  const auto& et = e.term("PGA");
  for (std::size_t b = 0; b < t.scores.size(); ++b) EXPECT_NEAR(et.scores[b], t.scores[b], 1e-12);
  EXPECT_NEAR(e.intercept, m.intercept, 1e-12);
}

TEST(UnivariateEdit, StepForLIsNonIncreasing) {
  const auto& t = edited().model.term("L");
  for (std::size_t b = 1; b < t.scores.size(); ++b) EXPECT_LE(t.scores[b], t.scores[b - 1]) << b;
}

TEST(UnivariateEdit, SigmoidDirectionsExact) {
  const auto& m = edited().model;
  const auto& gwd = m.term("GWD");
  const auto& pga = m.term("PGA");
  for (std::size_t b = 1; b < gwd.scores.size(); ++b) EXPECT_LE(gwd.scores[b], gwd.scores[b - 1]) << b;
  for (std::size_t b = 1; b < pga.scores.size(); ++b) EXPECT_GE(pga.scores[b], pga.scores[b - 1]) << b;
}

TEST(UnivariateEdit, RecordsAndRecenters) {
  const auto& m = edited().model;
  EXPECT_EQ(m.provenance, Provenance::DomainInformed);
  EXPECT_EQ(m.edit_log.size(), 6u);
  for (const auto& t : m.univariate) EXPECT_NEAR(weighted_mean(t.scores, t.weights), 0.0, 1e-9) << t.feature;
  for (const auto& t : m.interactions)
    EXPECT_NEAR(weighted_mean(t.matrix.values(), t.weights.values()), 0.0, 1e-9) << term_name(t);
}

TEST(UnivariateEdit, PredictionsChangeOnlyThroughTheShape) {
  // prediction delta = replacement(center) - learned score(x), with intercept 0 of the raw curve
  const auto& m = learned();
  const SigmoidParams p{3.0, 0.3, 1.0, 0.2};
  const auto e = apply_univariate_edit(m, "PGA", p);
  const auto& t = m.term("PGA");
  const auto centers = bin_centers(t.edges, t.range_lo, t.range_hi);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(m.feature_names.size());
    for (std::size_t f = 0; f < x.size(); ++f) x[f] = rng.uniform(m.univariate[f].range_lo, m.univariate[f].range_hi);
    const auto b = t.edges.bin_of(x[1]);
    EXPECT_NEAR(score(e, x) - score(m, x), p(centers[b]) - t.scores[b], 1e-9);
  }
}

TEST(UnivariateEdit, OtherTermsBitIdentical) {
  const auto& m = learned();
  const auto e = apply_univariate_edit(m, "L", default_edit_spec().univariate[2].step);
  for (const auto& f : {"GWD", "PGA", "Slope", "Elevation"}) EXPECT_EQ(e.term(f).scores, m.term(f).scores);
  for (std::size_t k = 0; k < m.interactions.size(); ++k)
    EXPECT_EQ(e.interactions[k].matrix.values(), m.interactions[k].matrix.values());
}

TEST(UnivariateEdit, ReEditReplacesPreviousOffset) {
  const auto& m = learned();
  const StepFunctionSpec a{{}, {2.0}};
  const StepFunctionSpec b{{}, {-1.0}};
  const auto once = apply_univariate_edit(m, "Slope", a);
  const auto twice = apply_univariate_edit(once, "Slope", b);
  const auto direct = apply_univariate_edit(m, "Slope", b);
  EXPECT_NEAR(twice.intercept, direct.intercept, 1e-12);
  EXPECT_EQ(twice.term("Slope").scores, direct.term("Slope").scores);
}

TEST(UnivariateEdit, Errors) {
  EXPECT_THROW(apply_univariate_edit(learned(), "nope", StepFunctionSpec{{}, {1.0}}), ModelError);
  EXPECT_THROW(apply_univariate_edit(learned(), "L", StepFunctionSpec{{0.5}, {1.0}}), EditError);
  EXPECT_THROW(apply_univariate_edit(learned(), "L", SigmoidParams{0.0, 0, 1, 0}), EditError);
}

TEST(StepFunction, RightClosedPieces) {
  const StepFunctionSpec s{{0.1, 0.49}, {1.61, 0.5, -0.36}};
  EXPECT_EQ(s(0.0), 1.61);
  EXPECT_EQ(s(0.1), 1.61);
  EXPECT_EQ(s(0.2), 0.5);
  EXPECT_EQ(s(0.49), 0.5);
  EXPECT_EQ(s(0.5), -0.36);
}

// ---------------------------------------------------------------------------
// synthesis, rescaling, discrepancy

TEST(Synthesis, ZeroFirstCurveGivesRepeatedRows) {
  auto m = support::worked_example_model();
  m = apply_univariate_edit(m, "x1", StepFunctionSpec{{}, {0.0}});
  m = apply_univariate_edit(m, "x2", StepFunctionSpec{{0.5}, {-1.0, 2.0}});
  const auto g = synthesize_interaction(m, "x1", "x2");
  const auto cy = bin_centers(m.interactions[0].edges_y, 0.0, 1.0);
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) EXPECT_EQ(g(r, c), (cy[c] <= 0.5 ? -1.0 : 2.0));
}

TEST(Synthesis, DecreasingCurvesGiveDecreasingMatrix) {
  auto m = support::worked_example_model();
  m = apply_univariate_edit(m, "x1", SigmoidParams{1.0, 5.0, -2.0, 0.0});
  m = apply_univariate_edit(m, "x2", SigmoidParams{-4.0, 0.5, 1.0, 0.0});
  const auto g = synthesize_interaction(m, "x2", "x1");
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (r > 0) {
        EXPECT_LE(g(r, c), g(r - 1, c));
      }
      if (c > 0) {
        EXPECT_LE(g(r, c), g(r, c - 1));
      }
    }
}

TEST(Synthesis, GwdPgaMaximumAtShallowHighCorner) {
  const auto& m = edited().model;
  const auto k = m.find_interaction(m.feature_index("GWD"), m.feature_index("PGA"));
  const auto& term = m.interactions[k];
  const auto g = synthesize_interaction(m, "GWD", "PGA");
  const auto [lo, hi] = min_max(g);
  (void)lo;
  const bool gwd_first = term.features[0] == "GWD";
  const double corner = gwd_first ? g(0, g.cols() - 1) : g(g.rows() - 1, 0);
  EXPECT_EQ(corner, hi);
}

TEST(Synthesis, RequiresEditedCurves) {
  EXPECT_THROW(synthesize_interaction(learned(), "GWD", "PGA"), EditError);
  auto m = support::worked_example_model();
  m.interactions.clear();
  EXPECT_THROW(synthesize_interaction(m, "x1", "x2"), EditError);
}

TEST(Rescale, IdentityOnOwnRange) {
  Rng rng(8);
  const auto g = random_grid(rng, 30, 30);
  const auto [lo, hi] = min_max(g);
  const auto r = rescale_to_range(g, lo, hi);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(r.values()[i], g.values()[i], 1e-12);
}

TEST(Rescale, Midpoint) {
  Grid<double> g(1, 3);
  g.values() = {0.0, 0.5, 1.0};
  const auto r = rescale_to_range(g, -2.0, 2.0);
  EXPECT_EQ(r.values(), (std::vector<double>{-2.0, 0.0, 2.0}));
}

TEST(Rescale, EndpointsAttained) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_grid(rng, 1 + rng.index(30), 1 + rng.index(30), -rng.uniform(0, 100), rng.uniform(0, 100));
    if (g.size() < 2) continue;
    const double a = rng.uniform(-5, 5), b = a + rng.uniform(0, 10);
    const auto [lo, hi] = min_max(rescale_to_range(g, a, b));
    EXPECT_NEAR(lo, a, 1e-12);
    EXPECT_NEAR(hi, b, 1e-12);
  }
}

TEST(Rescale, ConstantMatrixIsAnError) {
  const Grid<double> g(3, 3, 1.0);
  try {
    rescale_to_range(g, 0, 1);
    FAIL();
  } catch (const EditError& e) {
    EXPECT_NE(std::string(e.what()).find("midpoint"), std::string::npos);
  }
  EXPECT_THROW(rescale_to_range(Grid<double>(2, 1, 0.0), 1, 0), EditError);
}

TEST(Discrepancy, HandArithmetic) {
  Grid<double> orig(1, 2), syn(1, 2);
  orig.values() = {0.1, 1.1};  // range 1.0
  syn.values() = {0.7, 1.1};
  const auto rel = discrepancy(orig, syn, DiscrepancyMetric::Relative);
  const auto rng = discrepancy(orig, syn, DiscrepancyMetric::Range);
  EXPECT_NEAR(rel(0, 0), 6.0, 1e-12);
  EXPECT_NEAR(rng(0, 0), 0.6, 1e-12);
  EXPECT_EQ(rel(0, 1), 0.0);
  EXPECT_EQ(rng(0, 1), 0.0);
}

TEST(Discrepancy, IdenticalIsZero) {
  Rng rng(2);
  const auto g = random_grid(rng, 30, 30);
  for (auto metric : {DiscrepancyMetric::Relative, DiscrepancyMetric::Range}) {
    const auto d = discrepancy(g, g, metric);
    for (double v : d.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Discrepancy, ZeroOriginalCell) {
  Grid<double> orig(1, 3), syn(1, 3);
  orig.values() = {0.0, 0.0, 1.0};
  syn.values() = {0.2, 0.0, 1.0};
  const auto rel = discrepancy(orig, syn, DiscrepancyMetric::Relative);
  EXPECT_TRUE(std::isinf(rel(0, 0)));
  EXPECT_EQ(rel(0, 1), 0.0);
  const auto [m, report] = selective_replace(orig, syn, {DiscrepancyMetric::Relative, 1e300, {"a", "b"}});
  EXPECT_EQ(report.mask(0, 0), 1);
  EXPECT_EQ(m(0, 0), 0.2);
}

TEST(Discrepancy, Errors) {
  EXPECT_THROW(discrepancy(Grid<double>(2, 2, 1.0), Grid<double>(2, 2, 0.0), DiscrepancyMetric::Range), EditError);
  EXPECT_THROW(discrepancy(Grid<double>(2, 2, 1.0), Grid<double>(2, 3, 0.0), DiscrepancyMetric::Relative), EditError);
}

// ---------------------------------------------------------------------------
// selective replacement

TEST(SelectiveReplace, Extremes) {
  Rng rng(5);
  const auto a = random_grid(rng, 30, 30);
  auto b = a;
  for (auto& v : b.values()) v += 0.5;
  for (auto metric : {DiscrepancyMetric::Relative, DiscrepancyMetric::Range}) {
    const auto [none, rn] = selective_replace(a, b, {metric, kInf, {"a", "b"}});
    EXPECT_EQ(none.values(), a.values());
    EXPECT_EQ(rn.replaced_fraction, 0.0);
    const auto [all, ra] = selective_replace(a, b, {metric, 0.0, {"a", "b"}});
    EXPECT_EQ(all.values(), b.values());
    EXPECT_EQ(ra.replaced_fraction, 1.0);
  }
  EXPECT_THROW(selective_replace(a, b, {DiscrepancyMetric::Range, -0.1, {"a", "b"}}), EditError);
}

TEST(SelectiveReplace, MaskMatchesThresholdExactly) {
  Rng rng(6);
  const auto a = random_grid(rng, 30, 30), b = random_grid(rng, 30, 30);
  const auto [m, r] = selective_replace(a, b, {DiscrepancyMetric::Range, 0.3, {"a", "b"}});
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool hit = r.delta.values()[i] > 0.3;
    EXPECT_EQ(r.mask.values()[i] == 1, hit);
    EXPECT_EQ(m.values()[i], hit ? b.values()[i] : a.values()[i]);
    count += hit;
  }
  EXPECT_EQ(r.replaced_fraction, static_cast<double>(count) / 900.0);
}

TEST(SelectiveReplace, MaskNestsOverEpsilon) {
  Rng rng(7);
  for (auto metric : {DiscrepancyMetric::Relative, DiscrepancyMetric::Range}) {
    const auto a = random_grid(rng, 30, 30), b = random_grid(rng, 30, 30);
    Grid<std::uint8_t> prev;
    double prev_frac = 2.0;
    for (double eps : {0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, kInf}) {
      const auto r = selective_replace(a, b, {metric, eps, {"a", "b"}}).second;
      if (!prev.empty()) {
        EXPECT_TRUE(nested(r.mask, prev)) << eps;
      }
      EXPECT_LE(r.replaced_fraction, prev_frac);
      prev = r.mask;
      prev_frac = r.replaced_fraction;
    }
  }
}

// ---------------------------------------------------------------------------
// interaction surgery and edit specs

TEST(InteractionEdit, ReportConsistentWithModel) {
  const auto& res = edited();
  ASSERT_EQ(res.reports.size(), 3u);
  for (const auto& r : res.reports) {
    EXPECT_EQ(r.mask.size(), r.before.size());
    const auto k = res.model.find_interaction(res.model.feature_index(r.pair[0]), res.model.feature_index(r.pair[1]));
    const auto& term = res.model.interactions[k];
    EXPECT_EQ(r.before.values(), term.reference_matrix().values());
    const auto [olo, ohi] = min_max(r.before);
    const auto [slo, shi] = min_max(r.synthesized);
    EXPECT_NEAR(slo, olo, 1e-12);
    EXPECT_NEAR(shi, ohi, 1e-12);
    // stored matrix is the mix, re-centered
    const double mean = weighted_mean(r.after.values(), term.weights.values());
    for (std::size_t i = 0; i < term.matrix.size(); ++i)
      EXPECT_NEAR(term.matrix.values()[i], r.after.values()[i] - mean, 1e-12);
    EXPECT_GT(r.replaced_fraction, 0.0);
    EXPECT_LT(r.replaced_fraction, 1.0);
  }
}

TEST(InteractionEdit, UntouchedPairsBitIdentical) {
  const auto& m = edited().model;
  const auto& base = learned();
  const std::set<std::string> edited_names = {"GWD", "PGA", "L"};
  for (std::size_t k = 0; k < m.interactions.size(); ++k) {
    const auto& t = m.interactions[k];
    if (edited_names.count(t.features[0]) && edited_names.count(t.features[1])) continue;
    EXPECT_EQ(t.matrix.values(), base.interactions[k].matrix.values()) << term_name(t);
  }
  EXPECT_EQ(m.term("Slope").scores, base.term("Slope").scores);
  EXPECT_EQ(m.term("Elevation").scores, base.term("Elevation").scores);
}

TEST(InteractionEdit, InfiniteEpsilonKeepsLearnedMatrix) {
  auto m = edited().model;
  m = apply_interaction_edit(m, "GWD", "PGA", DiscrepancyMetric::Range, kInf).first;
  const auto k = m.find_interaction(m.feature_index("GWD"), m.feature_index("PGA"));
  const auto& t = m.interactions[k];
  const double mean = weighted_mean(t.learned_matrix.values(), t.weights.values());
  for (std::size_t i = 0; i < t.matrix.size(); ++i)
    EXPECT_NEAR(t.matrix.values()[i], t.learned_matrix.values()[i] - mean, 1e-12);
}

TEST(EditSpec, EmptySpecLeavesModel) {
  const auto r = apply_domain_edits(learned(), EditSpec{});
  EXPECT_EQ(model_to_string(r.model), model_to_string(learned()));
  EXPECT_TRUE(r.reports.empty());
}

TEST(EditSpec, UnknownFeatureOrPairFailsAtomically) {
  auto spec = default_edit_spec();
  spec.univariate.push_back({});
  spec.univariate.back().feature = "Depth";
  EXPECT_THROW(apply_domain_edits(learned(), spec), ModelError);

  auto m = learned();
  m.interactions.erase(m.interactions.begin() + static_cast<std::ptrdiff_t>(
                                                      m.find_interaction(m.feature_index("GWD"), m.feature_index("L"))));
  EXPECT_THROW(apply_domain_edits(m, default_edit_spec()), EditError);
}

TEST(EditSpec, UneditedFeatureInSynthesis) {
  EditSpec spec;
  spec.interactions = {{{"Slope", "Elevation"}, DiscrepancyMetric::Range, 0.4}};
  try {
    apply_domain_edits(learned(), spec);
    FAIL();
  } catch (const EditError& e) {
    EXPECT_NE(std::string(e.what()).find("edited univariate"), std::string::npos);
  }
}

TEST(EditSpec, SecondApplicationIsNoOp) {
  const auto& once = edited();
  const auto twice = apply_domain_edits(once.model, default_edit_spec());
  for (const auto& f : once.model.feature_names)
    EXPECT_EQ(twice.model.term(f).scores, once.model.term(f).scores) << f;
  for (std::size_t k = 0; k < once.model.interactions.size(); ++k)
    EXPECT_EQ(twice.model.interactions[k].matrix.values(), once.model.interactions[k].matrix.values());
  EXPECT_EQ(twice.model.intercept, once.model.intercept);
  for (std::size_t i = 0; i < once.univariate.size(); ++i)
    EXPECT_EQ(to_json(twice.univariate[i].replacement), to_json(once.univariate[i].replacement));
}

TEST(EditSpec, Deterministic) {
  const auto again = apply_domain_edits(learned(), default_edit_spec());
  EXPECT_EQ(model_to_string(again.model), model_to_string(edited().model));
}

TEST(EditSpec, ReplayReproducesModel) {
  const auto& m = edited().model;
  const auto replayed = replay_edit_log(learned(), m.edit_log);
  EXPECT_EQ(model_to_string(replayed), model_to_string(m));
  const auto through_json = replay_edit_log(learned(), model_from_json(model_to_json(m)).edit_log);
  EXPECT_EQ(model_hash(through_json), model_hash(m));
}

TEST(EditSpec, RecordedReportMatches) {
  const auto& res = edited();
  for (const auto& r : res.reports) {
    const auto k = res.model.find_interaction(res.model.feature_index(r.pair[0]), res.model.feature_index(r.pair[1]));
    const auto rec = recorded_interaction_report(res.model, k);
    ASSERT_TRUE(rec.has_value());
    EXPECT_EQ(rec->mask.values(), r.mask.values());
    EXPECT_EQ(rec->replaced_fraction, r.replaced_fraction);
  }
  EXPECT_FALSE(recorded_interaction_report(learned(), 0).has_value());
}

TEST(EditSpec, JsonRoundTrip) {
  auto spec = default_edit_spec();
  spec.univariate[1].params = SigmoidParams{1, 2, 3, 4};
  spec.interactions[0].epsilon = kInf;
  const auto j = to_json(spec);
  EXPECT_TRUE(j["univariate"][0]["exclude"][0][0].is_null());
  EXPECT_EQ(to_json(edit_spec_from_json(j)), j);
  EXPECT_TRUE(std::isinf(edit_spec_from_json(j).interactions[0].epsilon));
}

TEST(EditSpec, ShippedFileMatchesDefault) {
  const auto spec = load_edit_spec(std::string(EBMEDIT_DATA_DIR) + "/default_edit_spec.json");
  EXPECT_EQ(to_json(spec), to_json(default_edit_spec()));
}

TEST(EditSpec, MalformedInput) {
  EXPECT_THROW(edit_spec_from_json({{"version", "ebmedit.editspec/9"}}), EditError);
  EXPECT_THROW(edit_spec_from_json({{"univariate", {{{"feature", "L"}, {"family", "spline"}}}}}), EditError);
  EXPECT_THROW(edit_spec_from_json({{"univariate", {{{"feature", "L"}, {"family", "step"}, {"breakpoints", {1.0}},
                                                     {"levels", {1.0}}}}}}),
               EditError);
  EXPECT_THROW(edit_spec_from_json({{"interactions", {{{"pair", {"a"}}}}}}), EditError);
  EXPECT_THROW(load_edit_spec("/nonexistent/spec.json"), EditError);
}

TEST(EditSpec, PresetParamsMustRespectDirection) {
  UnivariateEdit e;
  e.feature = "GWD";
  e.direction = Direction::Decreasing;
  e.params = SigmoidParams{1.0, 1.0, 1.0, 0.0};
  EXPECT_THROW(resolve_univariate_edit(learned(), e), EditError);
  e.params->c = -1.0;
  EXPECT_NO_THROW(resolve_univariate_edit(learned(), e));
}

TEST(EditReportCsv, OneRowPerCell) {
  const auto& res = edited();
  const auto& r = res.reports[0];
  const auto k = res.model.find_interaction(res.model.feature_index(r.pair[0]), res.model.feature_index(r.pair[1]));
  std::ostringstream out;
  write_edit_report_csv(out, r, res.model.interactions[k]);
  const auto text = out.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), r.before.size() + 1);
  const auto j = report_summary_json(r);
  EXPECT_EQ(j.at("replaced_fraction").get<double>(), r.replaced_fraction);
}
