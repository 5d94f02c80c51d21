#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace ebmedit;

TEST(WorkedExample, Lookups) {
  const auto m = support::worked_example_model();
  EXPECT_EQ(lookup_univariate(m.univariate[0], 5.0), -0.36);
  EXPECT_EQ(lookup_univariate(m.univariate[1], 0.5), 0.13);
  EXPECT_EQ(lookup_bivariate(m.interactions[0], 5.0, 0.5), 0.21);
  EXPECT_EQ(lookup_bivariate(support::worked_example_model(0.25).interactions[0], 5.0, 0.5), 0.25);
}

TEST(WorkedExample, ScoreProbabilityLabel) {
  const auto m = support::worked_example_model();
  const std::vector<double> x{5.0, 0.5};
  const double s = score(m, x);
  EXPECT_NEAR(s, -0.02, 1e-12);
  const double p = predict_proba(m, x);
  EXPECT_NEAR(p, 1.0 / (1.0 + std::exp(0.02)), 1e-15);
  EXPECT_NEAR(p, 0.495, 5e-4);
  EXPECT_EQ(predict_label(m, x), 0);
  EXPECT_NEAR(score(m, FeatureMap{{"x2", 0.5}, {"x1", 5.0}}), -0.02, 1e-12);
}

// -0.36 + 0.13 + 0.25 is +0.02; the score is the plain sum of the lookups.
TEST(WorkedExample, ListedContributionsSumExactly) {
  const auto m = support::worked_example_model(0.25);
  const std::vector<double> x{5.0, 0.5};
  EXPECT_NEAR(score(m, x), 0.02, 1e-12);
  EXPECT_EQ(predict_label(m, x), 1);
}

TEST(Lookup, SingleBin) {
  UnivariateTerm t;
  t.scores = {0.5};
  t.weights = {1};
  for (double x : {-1e9, 0.0, 3.0, 1e9}) EXPECT_EQ(t.lookup(x), 0.5);
}

TEST(Lookup, RightClosedBins) {
  UnivariateTerm t;
  t.edges.cuts = {1.0, 2.0};
  t.scores = {10, 20, 30};
  EXPECT_EQ(t.lookup(1.0), 10);
  EXPECT_EQ(t.lookup(std::nextafter(1.0, 2.0)), 20);
  EXPECT_EQ(t.lookup(2.0), 20);
  EXPECT_EQ(t.lookup(2.5), 30);
}

TEST(Lookup, BivariateClampsAndZero) {
  InteractionTerm t;
  t.edges_x.cuts.resize(29);
  t.edges_y.cuts.resize(29);
  for (int i = 0; i < 29; ++i) t.edges_x.cuts[i] = t.edges_y.cuts[i] = i;
  t.matrix = Grid<double>(30, 30, 0.0);
  EXPECT_EQ(t.lookup(3.3, -7.0), 0.0);
  t.matrix(29, 29) = 4.5;
  t.matrix(0, 0) = -1.5;
  EXPECT_EQ(t.lookup(1e6, 1e6), 4.5);
  EXPECT_EQ(t.lookup(-1e6, -1e6), -1.5);
}

TEST(Score, InterceptOnly) {
  auto m = support::worked_example_model();
  for (auto& t : m.univariate) std::fill(t.scores.begin(), t.scores.end(), 0.0);
  for (auto& t : m.interactions) std::fill(t.matrix.values().begin(), t.matrix.values().end(), 0.0);
  m.intercept = 1.7;
  EXPECT_EQ(score(m, std::vector<double>{3.0, 0.9}), 1.7);
}

TEST(Score, MissingFeatureInMap) { EXPECT_THROW(score(support::worked_example_model(), FeatureMap{{"x1", 1.0}}), ModelError); }

TEST(Link, Boundaries) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(40.0), 1.0);  // 1 - e^-40 rounds to 1 in double
  // high-precision reference for the lower tail
  const long double ref = std::exp(-40.0L) / (1.0L + std::exp(-40.0L));
  EXPECT_NEAR(sigmoid(-40.0), static_cast<double>(ref), 1e-15 * static_cast<double>(ref));
  EXPECT_TRUE(std::isfinite(sigmoid(1e6)));
  EXPECT_EQ(sigmoid(-1e6), 0.0);
  EXPECT_EQ(label_at(0.5), 1);
  EXPECT_EQ(label_at(0.8, 0.9), 0);
  EXPECT_THROW(label_at(0.5, 1.0), ModelError);
}

TEST(Centering, ConstantShiftMovesToIntercept) {
  auto m = support::worked_example_model();
  m.interactions.clear();
  m.univariate[1].scores = {2.0, 2.0, 2.0};
  m.univariate[0].scores = {0.0, 0.0, 0.0, 0.0};
  const auto c = center_terms(m);
  EXPECT_EQ(c.univariate[1].scores, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(c.intercept, 2.0);
}

TEST(Centering, Idempotent) {
  Rng rng(5);
  const auto once = center_terms(support::random_model(rng, 4, true));
  const auto twice = center_terms(once);
  for (std::size_t f = 0; f < once.univariate.size(); ++f)
    for (std::size_t b = 0; b < once.univariate[f].scores.size(); ++b)
      EXPECT_NEAR(once.univariate[f].scores[b], twice.univariate[f].scores[b], 1e-15);
  EXPECT_NEAR(once.intercept, twice.intercept, 1e-14);
}

TEST(Centering, ZeroMeanAndPredictionInvariance) {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = support::random_model(rng, 5, true);
    const auto c = center_terms(m);
    for (const auto& t : c.univariate) EXPECT_NEAR(weighted_mean(t.scores, t.weights), 0.0, 1e-9);
    for (const auto& t : c.interactions)
      EXPECT_NEAR(weighted_mean(t.matrix.values(), t.weights.values()), 0.0, 1e-9);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto x = support::random_point(rng, 5);
      worst = std::max(worst, std::abs(score(m, x) - score(c, x)));
    }
    EXPECT_LT(worst, 1e-9);
  }
}

TEST(Centering, ZeroWeightIsAnError) {
  auto m = support::worked_example_model();
  std::fill(m.univariate[0].weights.begin(), m.univariate[0].weights.end(), 0.0);
  EXPECT_THROW(center_terms(m), ModelError);
}

TEST(Validate, RejectsBadTables) {
  auto m = support::worked_example_model();
  EXPECT_NO_THROW(m.validate());
  m.univariate[0].scores.pop_back();
  EXPECT_THROW(m.validate(), ModelError);
  m = support::worked_example_model();
  m.univariate[0].edges.cuts = {3.0, 1.0, 5.0};
  EXPECT_THROW(m.validate(), ModelError);
  m = support::worked_example_model();
  m.interactions[0].matrix(1, 1) = std::nan("");
  EXPECT_THROW(m.validate(), ModelError);
}

TEST(Serialization, RoundTripScoresBitwise) {
  Rng rng(23);
  auto m = support::random_model(rng, 5, true);
  m.provenance = Provenance::DomainInformed;
  const auto path = (std::filesystem::temp_directory_path() / "ebmedit_model_roundtrip.json").string();
  save_model(m, path);
  const auto back = load_model(path);
  std::remove(path.c_str());
  EXPECT_EQ(back.provenance, Provenance::DomainInformed);
  for (int i = 0; i < 1000; ++i) {
    const auto x = support::random_point(rng, 5);
    EXPECT_EQ(score(m, x), score(back, x));
  }
  EXPECT_EQ(model_hash(m), model_hash(back));
}

TEST(Serialization, UnknownVersion) {
  auto j = model_to_json(support::worked_example_model());
  j["version"] = "ebmedit.model/99";
  try {
    model_from_json(j);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Serialization, MalformedInput) {
  auto j = model_to_json(support::worked_example_model());
  j["univariate"][0].erase("scores");
  EXPECT_THROW(model_from_json(j), ModelError);
  EXPECT_THROW(model_from_json(nlohmann::json::array()), ModelError);
}

TEST(Serialization, EditedTablesSurvive) {
  auto m = support::worked_example_model();
  m = apply_univariate_edit(m, "x1", StepFunctionSpec{{5.0}, {1.0, -1.0}});
  const auto back = model_from_json(model_to_json(m));
  EXPECT_EQ(back.univariate[0].learned_scores, m.univariate[0].learned_scores);
  EXPECT_EQ(back.univariate[0].edit_offset, m.univariate[0].edit_offset);
  EXPECT_EQ(back.edit_log, m.edit_log);
  EXPECT_EQ(model_to_string(back), model_to_string(m));
}
