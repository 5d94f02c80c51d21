#ifndef EBMEDIT_OPTIMIZE_HPP
#define EBMEDIT_OPTIMIZE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace ebmedit {

struct NelderMeadOptions {
  int max_evaluations = 20000;
  double f_tolerance = 1e-30;  // absolute spread of simplex values
  double x_tolerance = 1e-13;  // simplex diameter
  int restarts = 3;            // re-inflate the simplex around the best vertex
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

// Derivative-free simplex minimization.
template <typename F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, std::vector<double> step,
                             const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult result;
  const auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<double> start = std::move(x0);
  for (int attempt = 0; attempt <= opt.restarts; ++attempt) {
    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    while (result.evaluations < opt.max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

      double diameter = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t k = 0; k < n; ++k)
          diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
      if (fv[worst] - fv[best] <= opt.f_tolerance && diameter <= opt.x_tolerance) break;
      if (diameter <= opt.x_tolerance * 1e-3) break;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= n; ++i)
        if (i != worst)
          for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

      for (std::size_t k = 0; k < n; ++k) trial[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
      const double fr = eval(trial);
      if (fr < fv[best]) {
        for (std::size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
        const double fe = eval(trial2);
        if (fe < fr) {
          simplex[worst] = trial2;
          fv[worst] = fe;
        } else {
          simplex[worst] = trial;
          fv[worst] = fr;
        }
        continue;
      }
      if (fr < fv[second]) {
        simplex[worst] = trial;
        fv[worst] = fr;
        continue;
      }
      const bool outside = fr < fv[worst];
      for (std::size_t k = 0; k < n; ++k)
        trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                            : centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]);
      const double fc = eval(trial2);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = trial2;
        fv[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
        fv[i] = eval(simplex[i]);
      }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    if (fv[best] < result.value) {
      result.value = fv[best];
      result.x = simplex[best];
    }
    start = result.x;
    for (auto& s : step) s *= 0.1;
    if (result.evaluations >= opt.max_evaluations) break;
  }
  return result;
}

}  // namespace ebmedit

#endif  // EBMEDIT_OPTIMIZE_HPP
