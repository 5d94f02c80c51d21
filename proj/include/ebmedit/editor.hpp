#ifndef EBMEDIT_EDITOR_HPP
#define EBMEDIT_EDITOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "model.hpp"
#include "optimize.hpp"

namespace ebmedit {

inline constexpr const char* kEditSpecVersion = "ebmedit.editspec/1";
inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Direction { Free, Increasing, Decreasing };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::Increasing: return "increasing";
    case Direction::Decreasing: return "decreasing";
    case Direction::Free: break;
  }
  return "free";
}

inline Direction parse_direction(std::string_view s) {
  if (s == "increasing") return Direction::Increasing;
  if (s == "decreasing") return Direction::Decreasing;
  if (s == "free") return Direction::Free;
  throw EditError("unknown direction '" + std::string(s) + "'");
}

// f(x) = c / (1 + exp(-a (x - b))) + d
struct SigmoidParams {
  double a = 1.0;  // steepness, 1 / feature unit
  double b = 0.0;  // midpoint, feature units
  double c = 0.0;  // amplitude, log-odds
  double d = 0.0;  // offset, log-odds

  double operator()(double x) const { return c * sigmoid(a * (x - b)) + d; }

  void validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d))
      throw EditError("sigmoid parameters must be finite");
    if (a == 0.0) throw EditError("sigmoid steepness must be non-zero");
  }

  bool satisfies(Direction dir) const {
    if (dir == Direction::Free) return true;
    const double sign = a * c;
    return dir == Direction::Increasing ? sign >= 0.0 : sign <= 0.0;
  }
};

// Piecewise-constant curve. Piece k covers (breakpoints[k-1], breakpoints[k]],
// matching the right-closed bin convention.
struct StepFunctionSpec {
  std::vector<double> breakpoints;
  std::vector<double> levels;

  void validate() const {
    if (levels.size() != breakpoints.size() + 1) throw EditError("step function needs one more level than breakpoints");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      if (!std::isfinite(breakpoints[i])) throw EditError("step breakpoints must be finite");
      if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) throw EditError("step breakpoints must be increasing");
    }
    for (double l : levels)
      if (!std::isfinite(l)) throw EditError("step levels must be finite");
  }

  double operator()(double x) const {
    const auto k = std::lower_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin();
    return levels[static_cast<std::size_t>(k)];
  }
};

using Replacement = std::variant<SigmoidParams, StepFunctionSpec>;

inline double evaluate(const Replacement& r, double x) {
  return std::visit([x](const auto& f) { return f(x); }, r);
}

inline void validate(const Replacement& r) {
  std::visit([](const auto& f) { f.validate(); }, r);
}

inline nlohmann::json to_json(const Replacement& r) {
  if (const auto* s = std::get_if<SigmoidParams>(&r))
    return {{"family", "sigmoid"}, {"a", s->a}, {"b", s->b}, {"c", s->c}, {"d", s->d}};
  const auto& step = std::get<StepFunctionSpec>(r);
  return {{"family", "step"}, {"breakpoints", step.breakpoints}, {"levels", step.levels}};
}

inline Replacement replacement_from_json(const nlohmann::json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "sigmoid")
    return SigmoidParams{j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>(),
                         j.at("d").get<double>()};
  if (family == "step")
    return StepFunctionSpec{j.at("breakpoints").get<std::vector<double>>(), j.at("levels").get<std::vector<double>>()};
  throw EditError("unknown curve family '" + family + "'");
}

// ---------------------------------------------------------------------------
// Curve sampling and trusted regions

struct CurvePoint {
  double x = 0.0;
  double score = 0.0;
};

enum class CurveSource { Current, Learned };

// n evenly spaced points over the feature's training range.
inline std::vector<CurvePoint> sample_curve(const EbmModel& model, std::string_view feature, std::size_t n = 100,
                                            CurveSource source = CurveSource::Current) {
  const auto& term = model.term(feature);
  if (n < 2) throw EditError("need at least 2 sample points");
  const auto& table = source == CurveSource::Learned ? term.reference_scores() : term.scores;
  std::vector<CurvePoint> out;
  out.reserve(n);
  const double lo = term.range_lo, hi = term.range_hi;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back({x, table[term.edges.bin_of(x)]});
  }
  return out;
}

// Half-open [lo, hi); open ends are +-infinity.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool contains(double x) const noexcept { return x >= lo && x < hi; }
};

struct TrustRegion {
  std::string feature;
  std::vector<CurvePoint> samples;
  std::vector<Interval> excluded;
  std::vector<bool> selected;  // aligned with samples

  std::vector<CurvePoint> selected_points() const {
    std::vector<CurvePoint> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (selected[i]) out.push_back(samples[i]);
    return out;
  }
  std::size_t selected_count() const { return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true)); }
};

inline constexpr std::size_t kMinTrustedPoints = 4;

// Too few points survive the exclusions.
class InsufficientPointsError : public EditError {
 public:
  using EditError::EditError;
};

inline TrustRegion select_trusted(std::string feature, std::vector<CurvePoint> samples, std::vector<Interval> excluded) {
  for (const auto& iv : excluded)
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || !(iv.hi > iv.lo)) throw EditError("excluded interval must have lo < hi");
  TrustRegion tr{std::move(feature), std::move(samples), std::move(excluded), {}};
  for (const auto& p : tr.samples)
    tr.selected.push_back(std::none_of(tr.excluded.begin(), tr.excluded.end(),
                                       [&](const Interval& iv) { return iv.contains(p.x); }));
  if (tr.selected_count() < kMinTrustedPoints)
    throw InsufficientPointsError("trusted region for '" + tr.feature + "' keeps " + std::to_string(tr.selected_count()) +
                    " points; at least 4 are required");
  return tr;
}

// ---------------------------------------------------------------------------
// Sigmoid fitting

struct SigmoidFit {
  SigmoidParams params;
  double sse = 0.0;
  int evaluations = 0;
};

// Least-squares sigmoid through `points`. Multi-start Nelder-Mead on a
// normalized problem; a constrained direction is enforced by fixing the sign
// of a*c, so every start stays feasible.
inline SigmoidFit fit_sigmoid(std::span<const CurvePoint> points, Direction direction = Direction::Free) {
  if (points.size() < kMinTrustedPoints) throw InsufficientPointsError("sigmoid fit needs at least 4 points");
  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf, ysum = 0;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.score)) throw EditError("sigmoid fit points must be finite");
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.score);
    ymax = std::max(ymax, p.score);
    ysum += p.score;
  }
  if (!(xmax > xmin)) throw EditError("sigmoid fit needs distinct x values");
  const double mid = 0.5 * (xmin + xmax), half = 0.5 * (xmax - xmin);
  const double ymean = ysum / static_cast<double>(points.size());

  if (ymax == ymin) {
    // flat data: zero amplitude reproduces it exactly
    return {{1.0 / half, mid, 0.0, ymean}, 0.0, 0};
  }
  const double yscale = std::max(ymax - ymean, ymean - ymin);
  std::vector<double> u, v;
  for (const auto& p : points) {
    u.push_back((p.x - mid) / half);
    v.push_back((p.score - ymean) / yscale);
  }
  double cov = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) cov += u[i] * v[i];
  const double trend = cov >= 0.0 ? 1.0 : -1.0;
  const double vrange = (ymax - ymin) / yscale;

  std::vector<double> sorted_u = u;
  std::sort(sorted_u.begin(), sorted_u.end());

  struct Candidate {
    double sa, sc;  // sc == 0 means free amplitude
    std::vector<double> p;
    double value;
  };
  std::optional<Candidate> best;
  int evaluations = 0;

  for (double sa : {1.0, -1.0}) {
    for (double mag : {2.0, 10.0}) {
      for (double q : {0.2, 0.4, 0.6, 0.8}) {
        const double b0 = sorted_u[static_cast<std::size_t>(q * static_cast<double>(sorted_u.size() - 1))];
        double sc = 0.0;
        if (direction == Direction::Increasing) sc = sa;
        if (direction == Direction::Decreasing) sc = -sa;
        const double c_sign = sc != 0.0 ? sc : sa * trend;
        const double c0 = c_sign * vrange;
        const double d0 = (c_sign > 0 ? -1.0 : 1.0) * 0.5 * vrange;  // centers the curve on the data mean
        const std::vector<double> start = {std::log(mag), b0, sc != 0.0 ? std::log(vrange) : c0, d0};
        const auto objective = [&](const std::vector<double>& p) {
          if (std::abs(p[0]) > 30.0 || (sc != 0.0 && std::abs(p[2]) > 30.0)) return kInf;
          const double a = sa * std::exp(p[0]);
          const double c = sc != 0.0 ? sc * std::exp(p[2]) : p[2];
          double sse = 0.0;
          for (std::size_t i = 0; i < u.size(); ++i) {
            const double r = c * sigmoid(a * (u[i] - p[1])) + p[3] - v[i];
            sse += r * r;
          }
          return sse;
        };
        auto res = nelder_mead(objective, start, {0.5, 0.2, 0.3, 0.2});
        evaluations += res.evaluations;
        if (!best || res.value < best->value) best = Candidate{sa, sc, res.x, res.value};
      }
    }
  }
  if (!best || !std::isfinite(best->value)) throw EditError("sigmoid optimizer returned a non-finite result");

  const auto& p = best->p;
  SigmoidParams params;
  params.a = best->sa * std::exp(p[0]) / half;
  params.b = mid + p[1] * half;
  params.c = (best->sc != 0.0 ? best->sc * std::exp(p[2]) : p[2]) * yscale;
  params.d = ymean + p[3] * yscale;
  params.validate();

  SigmoidFit fit{params, 0.0, evaluations};
  for (const auto& pt : points) {
    const double r = params(pt.x) - pt.score;
    fit.sse += r * r;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Univariate surgery

namespace detail {

inline void mark_edited(EbmModel& model, nlohmann::json entry) {
  model.provenance = Provenance::DomainInformed;
  model.edit_log.push_back(std::move(entry));
}

}  // namespace detail

// Replaces a feature's table with `replacement` evaluated at bin centers, then
// re-centers it. The intercept absorbs the replacement's mean so predictions
// reflect the replacement's absolute levels.
inline EbmModel apply_univariate_edit(EbmModel model, std::string_view feature, const Replacement& replacement) {
  validate(replacement);
  auto& term = model.univariate.at(model.feature_index(feature));
  const auto centers = bin_centers(term.edges, term.range_lo, term.range_hi);
  std::vector<double> raw(centers.size());
  for (std::size_t b = 0; b < raw.size(); ++b) raw[b] = evaluate(replacement, centers[b]);
  const double mean = weighted_mean(raw, term.weights);
  if (!term.edited()) term.learned_scores = term.scores;
  for (std::size_t b = 0; b < raw.size(); ++b) term.scores[b] = raw[b] - mean;
  model.intercept += mean - term.edit_offset;
  term.edit_offset = mean;
  detail::mark_edited(model, {{"op", "univariate"}, {"feature", term.feature}, {"replacement", to_json(replacement)}});
  return model;
}

// Most recent replacement applied to `feature`, if any.
inline std::optional<Replacement> find_replacement(const EbmModel& model, std::string_view feature) {
  for (auto it = model.edit_log.rbegin(); it != model.edit_log.rend(); ++it)
    if (it->value("op", "") == "univariate" && it->value("feature", "") == feature)
      return replacement_from_json(it->at("replacement"));
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Interaction surgery

enum class DiscrepancyMetric { Relative, Range };

inline const char* to_string(DiscrepancyMetric m) { return m == DiscrepancyMetric::Relative ? "relative" : "range"; }

inline DiscrepancyMetric parse_metric(std::string_view s) {
  if (s == "relative") return DiscrepancyMetric::Relative;
  if (s == "range") return DiscrepancyMetric::Range;
  throw EditError("unknown discrepancy metric '" + std::string(s) + "'");
}

struct ReplacementPolicy {
  DiscrepancyMetric metric = DiscrepancyMetric::Range;
  double epsilon = 0.40;
  std::array<std::string, 2> pair;
};

struct EditReport {
  std::array<std::string, 2> pair;  // in the interaction term's axis order
  DiscrepancyMetric metric = DiscrepancyMetric::Range;
  double epsilon = 0.0;
  Grid<std::uint8_t> mask;  // 1 where the synthesized value was taken
  double replaced_fraction = 0.0;
  Grid<double> before;       // original (learned) matrix
  Grid<double> synthesized;  // rescaled synthesis
  Grid<double> after;        // mixed matrix before re-centering
  Grid<double> delta;
  double intercept_delta = 0.0;
};

namespace detail {

inline std::size_t interaction_for(const EbmModel& model, std::string_view a, std::string_view b) {
  const auto k = model.find_interaction(model.feature_index(a), model.feature_index(b));
  if (k == static_cast<std::size_t>(-1))
    throw EditError("model has no interaction term for pair " + std::string(a) + " x " + std::string(b));
  return k;
}

}  // namespace detail

// f'_i(center_m) + f'_j(center_n) on the interaction's own bin grid.
inline Grid<double> synthesize_interaction(const EbmModel& model, std::string_view a, std::string_view b) {
  const auto& term = model.interactions[detail::interaction_for(model, a, b)];
  const auto fx = find_replacement(model, term.features[0]);
  const auto fy = find_replacement(model, term.features[1]);
  if (!fx || !fy)
    throw EditError("synthesizing " + term_name(term) + " requires edited univariate curves for both features");
  const auto cx = bin_centers(term.edges_x, term.range_lo[0], term.range_hi[0]);
  const auto cy = bin_centers(term.edges_y, term.range_lo[1], term.range_hi[1]);
  Grid<double> out(cx.size(), cy.size());
  std::vector<double> vy(cy.size());
  for (std::size_t n = 0; n < cy.size(); ++n) vy[n] = evaluate(*fy, cy[n]);
  for (std::size_t m = 0; m < cx.size(); ++m) {
    const double vx = evaluate(*fx, cx[m]);
    for (std::size_t n = 0; n < cy.size(); ++n) out(m, n) = vx + vy[n];
  }
  return out;
}

inline std::pair<double, double> min_max(const Grid<double>& g) {
  const auto [lo, hi] = std::minmax_element(g.values().begin(), g.values().end());
  return {*lo, *hi};
}

// Affine map of [min, max] of `synth` onto [target_min, target_max].
inline Grid<double> rescale_to_range(const Grid<double>& synth, double target_min, double target_max) {
  if (synth.empty()) throw EditError("cannot rescale an empty matrix");
  if (!(target_max >= target_min)) throw EditError("rescale target range is inverted");
  const auto [smin, smax] = min_max(synth);
  if (!(smax > smin))
    throw EditError("synthesized matrix is constant; fill it with the target midpoint instead of rescaling");
  Grid<double> out = synth;
  const double scale = (target_max - target_min) / (smax - smin);
  for (auto& v : out.values()) v = v == smax ? target_max : target_min + (v - smin) * scale;
  return out;
}

inline Grid<double> discrepancy(const Grid<double>& original, const Grid<double>& synth, DiscrepancyMetric metric) {
  if (!original.same_shape(synth)) throw EditError("discrepancy needs matrices of the same shape");
  Grid<double> out(original.rows(), original.cols());
  double denom_range = 0.0;
  if (metric == DiscrepancyMetric::Range) {
    const auto [lo, hi] = min_max(original);
    denom_range = hi - lo;
    if (!(denom_range > 0.0)) throw EditError("range discrepancy is undefined for a constant original matrix");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double o = original.values()[i];
    const double diff = std::abs(synth.values()[i] - o);
    if (metric == DiscrepancyMetric::Range) {
      out.values()[i] = diff / denom_range;
    } else if (o == 0.0) {
      out.values()[i] = diff == 0.0 ? 0.0 : kInf;
    } else {
      out.values()[i] = diff / std::abs(o);
    }
  }
  return out;
}

inline std::pair<Grid<double>, EditReport> selective_replace(const Grid<double>& original, const Grid<double>& synth,
                                                             const ReplacementPolicy& policy) {
  if (!(policy.epsilon >= 0.0)) throw EditError("epsilon must be >= 0");
  EditReport report;
  report.pair = policy.pair;
  report.metric = policy.metric;
  report.epsilon = policy.epsilon;
  report.delta = discrepancy(original, synth, policy.metric);
  report.before = original;
  report.synthesized = synth;
  report.mask = Grid<std::uint8_t>(original.rows(), original.cols(), 0);
  Grid<double> out = original;
  std::size_t replaced = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (report.delta.values()[i] > policy.epsilon) {
      out.values()[i] = synth.values()[i];
      report.mask.values()[i] = 1;
      ++replaced;
    }
  }
  report.replaced_fraction = static_cast<double>(replaced) / static_cast<double>(out.size());
  report.after = out;
  return {std::move(out), std::move(report)};
}

// Synthesis, rescale to the learned matrix's range, selective replacement
// against the learned matrix, re-centering.
inline std::pair<EbmModel, EditReport> apply_interaction_edit(EbmModel model, std::string_view a, std::string_view b,
                                                              DiscrepancyMetric metric, double epsilon) {
  const auto k = detail::interaction_for(model, a, b);
  const auto synth = synthesize_interaction(model, a, b);
  auto& term = model.interactions[k];
  const auto& original = term.reference_matrix();
  const auto [omin, omax] = min_max(original);
  const auto rescaled = rescale_to_range(synth, omin, omax);
  auto [mixed, report] = selective_replace(original, rescaled, {metric, epsilon, term.features});

  const double mean = weighted_mean(mixed.values(), term.weights.values());
  if (!term.edited()) term.learned_matrix = term.matrix;
  for (auto& v : mixed.values()) v -= mean;
  term.matrix = std::move(mixed);
  report.intercept_delta = mean - term.edit_offset;
  model.intercept += report.intercept_delta;
  term.edit_offset = mean;
  detail::mark_edited(model, {{"op", "interaction"},
                              {"pair", {term.features[0], term.features[1]}},
                              {"metric", to_string(metric)},
                              {"epsilon", std::isinf(epsilon) ? nlohmann::json(nullptr) : nlohmann::json(epsilon)}});
  return {std::move(model), std::move(report)};
}

// ---------------------------------------------------------------------------
// Edit specs

struct UnivariateEdit {
  std::string feature;
  std::string family = "sigmoid";  // "sigmoid" or "step"
  Direction direction = Direction::Free;
  std::vector<Interval> excluded;
  std::size_t samples = 100;
  std::optional<SigmoidParams> params;  // pre-fitted sigmoid; skips fitting
  StepFunctionSpec step;
};

struct InteractionEdit {
  std::array<std::string, 2> pair;
  DiscrepancyMetric metric = DiscrepancyMetric::Range;
  double epsilon = 0.40;
};

struct EditSpec {
  std::vector<UnivariateEdit> univariate;
  std::vector<InteractionEdit> interactions;
  bool empty() const noexcept { return univariate.empty() && interactions.empty(); }
};

namespace detail {

inline nlohmann::json bound_to_json(double v) { return std::isinf(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

inline double bound_from_json(const nlohmann::json& j, double open) { return j.is_null() ? open : j.get<double>(); }

}  // namespace detail

inline nlohmann::json to_json(const Interval& iv) {
  return nlohmann::json::array({detail::bound_to_json(iv.lo), detail::bound_to_json(iv.hi)});
}

inline Interval interval_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw EditError("interval must be a [lo, hi] pair");
  return {detail::bound_from_json(j.at(0), -kInf), detail::bound_from_json(j.at(1), kInf)};
}

inline nlohmann::json to_json(const EditSpec& spec) {
  nlohmann::json j{{"version", kEditSpecVersion}, {"univariate", nlohmann::json::array()},
                   {"interactions", nlohmann::json::array()}};
  for (const auto& e : spec.univariate) {
    nlohmann::json ej{{"feature", e.feature}, {"family", e.family}};
    if (e.family == "sigmoid") {
      ej["direction"] = to_string(e.direction);
      ej["samples"] = e.samples;
      ej["exclude"] = nlohmann::json::array();
      for (const auto& iv : e.excluded) ej["exclude"].push_back(to_json(iv));
      if (e.params) ej["params"] = {{"a", e.params->a}, {"b", e.params->b}, {"c", e.params->c}, {"d", e.params->d}};
    } else {
      ej["breakpoints"] = e.step.breakpoints;
      ej["levels"] = e.step.levels;
    }
    j["univariate"].push_back(std::move(ej));
  }
  for (const auto& e : spec.interactions)
    j["interactions"].push_back({{"pair", {e.pair[0], e.pair[1]}},
                                 {"metric", to_string(e.metric)},
                                 {"epsilon", detail::bound_to_json(e.epsilon)}});
  return j;
}

inline EditSpec edit_spec_from_json(const nlohmann::json& j) {
  if (j.contains("version") && j.at("version") != kEditSpecVersion)
    throw EditError("unsupported edit spec version '" + j.at("version").get<std::string>() + "'");
  try {
    EditSpec spec;
    if (j.contains("univariate"))
      for (const auto& ej : j.at("univariate")) {
        UnivariateEdit e;
        e.feature = ej.at("feature").get<std::string>();
        e.family = ej.value("family", std::string("sigmoid"));
        if (e.family == "sigmoid") {
          e.direction = parse_direction(ej.value("direction", std::string("free")));
          e.samples = ej.value("samples", std::size_t{100});
          if (ej.contains("exclude"))
            for (const auto& iv : ej.at("exclude")) e.excluded.push_back(interval_from_json(iv));
          if (ej.contains("params")) {
            const auto& p = ej.at("params");
            e.params = SigmoidParams{p.at("a").get<double>(), p.at("b").get<double>(), p.at("c").get<double>(),
                                     p.at("d").get<double>()};
          }
        } else if (e.family == "step") {
          e.step = {ej.at("breakpoints").get<std::vector<double>>(), ej.at("levels").get<std::vector<double>>()};
          e.step.validate();
        } else {
          throw EditError("unknown curve family '" + e.family + "'");
        }
        spec.univariate.push_back(std::move(e));
      }
    if (j.contains("interactions"))
      for (const auto& ej : j.at("interactions")) {
        InteractionEdit e;
        e.pair = {ej.at("pair").at(0).get<std::string>(), ej.at("pair").at(1).get<std::string>()};
        e.metric = parse_metric(ej.value("metric", std::string("range")));
        e.epsilon = ej.contains("epsilon") ? detail::bound_from_json(ej.at("epsilon"), kInf) : 0.40;
        spec.interactions.push_back(std::move(e));
      }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw EditError(std::string("malformed edit spec: ") + e.what());
  }
}

inline EditSpec load_edit_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EditError("cannot open edit spec '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw EditError("malformed edit spec '" + path + "': " + e.what());
  }
  return edit_spec_from_json(j);
}

// GWD and PGA get monotone sigmoids over their plausible regions, L a
// near-river step; the three pairs among them are mixed at 40% of range.
inline EditSpec default_edit_spec() {
  EditSpec spec;
  UnivariateEdit gwd;
  gwd.feature = "GWD";
  gwd.direction = Direction::Decreasing;
  gwd.excluded = {{-kInf, 0.7}, {1.0, 1.5}};
  UnivariateEdit pga;
  pga.feature = "PGA";
  pga.direction = Direction::Increasing;
  pga.excluded = {{0.51, kInf}};
  UnivariateEdit l;
  l.feature = "L";
  l.family = "step";
  l.step = {{0.1, 0.49}, {1.61, 0.5, -0.36}};
  spec.univariate = {gwd, pga, l};
  spec.interactions = {{{"GWD", "PGA"}, DiscrepancyMetric::Range, 0.40},
                       {{"GWD", "L"}, DiscrepancyMetric::Range, 0.40},
                       {{"L", "PGA"}, DiscrepancyMetric::Range, 0.40}};
  return spec;
}

struct UnivariateEditResult {
  std::string feature;
  Replacement replacement;
  std::optional<TrustRegion> trust;  // sigmoid fits only
  double sse = 0.0;
};

struct DomainEditResult {
  EbmModel model;
  std::vector<UnivariateEditResult> univariate;
  std::vector<EditReport> reports;
};

// Resolves a univariate edit to a concrete replacement, fitting a sigmoid to
// the learned curve's trusted region when needed.
inline UnivariateEditResult resolve_univariate_edit(const EbmModel& model, const UnivariateEdit& e) {
  model.feature_index(e.feature);
  if (e.family == "step") return {e.feature, e.step, std::nullopt, 0.0};
  if (e.params) {
    if (!e.params->satisfies(e.direction)) throw EditError("sigmoid parameters for '" + e.feature + "' violate direction");
    return {e.feature, *e.params, std::nullopt, 0.0};
  }
  auto trust = select_trusted(e.feature, sample_curve(model, e.feature, e.samples, CurveSource::Learned), e.excluded);
  const auto pts = trust.selected_points();
  const auto fit = fit_sigmoid(pts, e.direction);
  return {e.feature, fit.params, std::move(trust), fit.sse};
}

inline DomainEditResult apply_domain_edits(EbmModel model, const EditSpec& spec) {
  // check references up front so a bad spec leaves nothing half-applied
  for (const auto& e : spec.univariate) model.feature_index(e.feature);
  for (const auto& e : spec.interactions) detail::interaction_for(model, e.pair[0], e.pair[1]);

  DomainEditResult result;
  for (const auto& e : spec.univariate) {
    auto resolved = resolve_univariate_edit(model, e);
    model = apply_univariate_edit(std::move(model), e.feature, resolved.replacement);
    result.univariate.push_back(std::move(resolved));
  }
  for (const auto& e : spec.interactions) {
    auto [next, report] = apply_interaction_edit(std::move(model), e.pair[0], e.pair[1], e.metric, e.epsilon);
    model = std::move(next);
    result.reports.push_back(std::move(report));
  }
  result.model = std::move(model);
  return result;
}

// Re-applies a recorded edit log on top of `original`.
inline EbmModel replay_edit_log(EbmModel original, const std::vector<nlohmann::json>& log) {
  for (const auto& entry : log) {
    const auto op = entry.at("op").get<std::string>();
    if (op == "univariate") {
      original = apply_univariate_edit(std::move(original), entry.at("feature").get<std::string>(),
                                       replacement_from_json(entry.at("replacement")));
    } else if (op == "interaction") {
      const auto& pair = entry.at("pair");
      const double eps = detail::bound_from_json(entry.at("epsilon"), kInf);
      original = apply_interaction_edit(std::move(original), pair.at(0).get<std::string>(),
                                        pair.at(1).get<std::string>(),
                                        parse_metric(entry.at("metric").get<std::string>()), eps)
                     .first;
    } else {
      throw EditError("unknown edit log operation '" + op + "'");
    }
  }
  return original;
}

// Rebuilds the replacement report of the most recent edit of an interaction.
inline std::optional<EditReport> recorded_interaction_report(const EbmModel& model, std::size_t k) {
  const auto& term = model.interactions.at(k);
  for (auto it = model.edit_log.rbegin(); it != model.edit_log.rend(); ++it) {
    if (it->value("op", "") != "interaction") continue;
    const auto& pair = it->at("pair");
    if (!term.involves(model.feature_index(pair.at(0).get<std::string>()),
                       model.feature_index(pair.at(1).get<std::string>())))
      continue;
    const auto synth = synthesize_interaction(model, term.features[0], term.features[1]);
    const auto& original = term.reference_matrix();
    const auto [omin, omax] = min_max(original);
    return selective_replace(original, rescale_to_range(synth, omin, omax),
                             {parse_metric(it->at("metric").get<std::string>()),
                              detail::bound_from_json(it->at("epsilon"), kInf), term.features})
        .second;
  }
  return std::nullopt;
}

// One row per cell: indices, bin centers, matrices, discrepancy and mask.
inline void write_edit_report_csv(std::ostream& out, const EditReport& r, const InteractionTerm& term) {
  const auto cx = bin_centers(term.edges_x, term.range_lo[0], term.range_hi[0]);
  const auto cy = bin_centers(term.edges_y, term.range_lo[1], term.range_hi[1]);
  out << "m,n," << r.pair[0] << "_center," << r.pair[1] << "_center,original,synthesized,mixed,delta,replaced\n";
  for (std::size_t m = 0; m < r.before.rows(); ++m)
    for (std::size_t n = 0; n < r.before.cols(); ++n)
      out << m << ',' << n << ',' << format_double(cx[m]) << ',' << format_double(cy[n]) << ','
          << format_double(r.before(m, n)) << ',' << format_double(r.synthesized(m, n)) << ','
          << format_double(r.after(m, n)) << ',' << format_double(r.delta(m, n)) << ','
          << static_cast<int>(r.mask(m, n)) << '\n';
}

inline nlohmann::json report_summary_json(const EditReport& r) {
  return {{"pair", {r.pair[0], r.pair[1]}},
          {"metric", to_string(r.metric)},
          {"epsilon", detail::bound_to_json(r.epsilon)},
          {"replaced_fraction", r.replaced_fraction},
          {"replaced_cells", static_cast<std::size_t>(std::llround(r.replaced_fraction * static_cast<double>(r.mask.size())))},
          {"intercept_delta", r.intercept_delta}};
}

}  // namespace ebmedit

#endif  // EBMEDIT_EDITOR_HPP
