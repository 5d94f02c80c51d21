#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ebmedit/ebmedit.hpp"

namespace ebmedit::support {

// Two features with f1(5) = -0.36, f2(0.5) = 0.13, f12(5, 0.5) = `f12`, intercept 0.
// The default 0.21 makes the total -0.02.
inline EbmModel worked_example_model(double f12_value = 0.21) {
  EbmModel m;
  m.feature_names = {"x1", "x2"};
  m.intercept = 0.0;
  UnivariateTerm f1;
  f1.feature = "x1";
  f1.feature_index = 0;
  f1.edges.cuts = {2.0, 4.0, 6.0};
  f1.scores = {0.4, 0.1, -0.36, -0.5};
  f1.weights = {1, 1, 1, 1};
  f1.range_lo = 0.0;
  f1.range_hi = 10.0;
  UnivariateTerm f2;
  f2.feature = "x2";
  f2.feature_index = 1;
  f2.edges.cuts = {0.25, 0.75};
  f2.scores = {-0.2, 0.13, 0.3};
  f2.weights = {1, 1, 1};
  f2.range_lo = 0.0;
  f2.range_hi = 1.0;
  InteractionTerm f12;
  f12.features = {"x1", "x2"};
  f12.feature_indices = {0, 1};
  f12.edges_x.cuts = {4.0, 6.0};
  f12.edges_y.cuts = {0.25, 0.75};
  f12.matrix = Grid<double>(3, 3, 0.0);
  f12.matrix(1, 1) = f12_value;
  f12.matrix(0, 0) = -0.1;
  f12.matrix(2, 2) = 0.05;
  f12.weights = Grid<double>(3, 3, 1.0);
  f12.range_lo = {0.0, 0.0};
  f12.range_hi = {10.0, 1.0};
  m.univariate = {f1, f2};
  m.interactions = {f12};
  return m;
}

// Random model over `nf` features on [0, 10], with every pair as an interaction
// when `pairs` is set.
inline EbmModel random_model(Rng& rng, std::size_t nf, bool pairs, std::size_t max_cuts = 12) {
  EbmModel m;
  m.intercept = rng.uniform(-1, 1);
  for (std::size_t f = 0; f < nf; ++f) m.feature_names.push_back("f" + std::to_string(f));
  const auto cuts = [&](std::size_t k) {
    std::vector<double> c;
    for (std::size_t i = 0; i < k; ++i) c.push_back(rng.uniform(0, 10));
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  };
  for (std::size_t f = 0; f < nf; ++f) {
    UnivariateTerm t;
    t.feature = m.feature_names[f];
    t.feature_index = f;
    t.edges.cuts = cuts(1 + rng.index(max_cuts));
    for (std::size_t b = 0; b < t.edges.bin_count(); ++b) {
      t.scores.push_back(rng.uniform(-2, 2));
      t.weights.push_back(1.0 + std::floor(rng.uniform(0, 50)));
    }
    t.range_lo = 0.0;
    t.range_hi = 10.0;
    m.univariate.push_back(std::move(t));
  }
  if (pairs)
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = i + 1; j < nf; ++j) {
        InteractionTerm t;
        t.features = {m.feature_names[i], m.feature_names[j]};
        t.feature_indices = {i, j};
        t.edges_x.cuts = cuts(1 + rng.index(max_cuts));
        t.edges_y.cuts = cuts(1 + rng.index(max_cuts));
        t.matrix = Grid<double>(t.edges_x.bin_count(), t.edges_y.bin_count());
        t.weights = Grid<double>(t.matrix.rows(), t.matrix.cols());
        for (auto& v : t.matrix.values()) v = rng.uniform(-1, 1);
        for (auto& v : t.weights.values()) v = 1.0 + std::floor(rng.uniform(0, 20));
        t.range_lo = {0.0, 0.0};
        t.range_hi = {10.0, 10.0};
        m.interactions.push_back(std::move(t));
      }
  return m;
}

inline std::vector<double> random_point(Rng& rng, std::size_t nf, double lo = -1.0, double hi = 11.0) {
  std::vector<double> x(nf);
  for (auto& v : x) v = rng.uniform(lo, hi);
  return x;
}

// Synthetic data set with all three splits assigned.
inline Dataset synthetic_split(std::size_t n, std::uint64_t seed) {
  return split_dataset(generate_synthetic(default_synthetic_config(), n, seed).data, SplitRatios{}, seed);
}

// Trained once per test binary: synthetic data, default configuration.
struct Fixture {
  Dataset data;
  TrainResult trained;
};

inline const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    out.data = synthetic_split(4000, 11);
    out.trained = train(out.data, TrainConfig{});
    return out;
  }();
  return f;
}

}  // namespace ebmedit::support
