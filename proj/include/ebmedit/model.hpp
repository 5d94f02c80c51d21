#ifndef EBMEDIT_MODEL_HPP
#define EBMEDIT_MODEL_HPP

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace ebmedit {

inline constexpr const char* kModelSchemaVersion = "ebmedit.model/1";

// Cut points of a binned feature. Bins are right-closed:
// (-inf, c0], (c0, c1], ..., (c_{k-1}, +inf).
struct BinEdges {
  std::vector<double> cuts;

  std::size_t bin_count() const noexcept { return cuts.size() + 1; }

  std::size_t bin_of(double x) const noexcept {
    return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
  }

  void validate(std::size_t max_cuts) const {
    if (cuts.size() > max_cuts) throw ModelError("too many bin cuts");
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      if (!std::isfinite(cuts[i])) throw ModelError("non-finite bin cut");
      if (i > 0 && !(cuts[i] > cuts[i - 1])) throw ModelError("bin cuts must be strictly increasing");
    }
  }

  friend bool operator==(const BinEdges&, const BinEdges&) = default;
};

// Representative x for each bin: interior bins use their midpoint, the two
// unbounded outer bins use the adjacent finite cut. A single-bin axis uses the
// midpoint of [lo, hi].
inline std::vector<double> bin_centers(const BinEdges& edges, double lo, double hi) {
  const auto& c = edges.cuts;
  if (c.empty()) return {0.5 * (lo + hi)};
  std::vector<double> out(edges.bin_count());
  out.front() = c.front();
  out.back() = c.back();
  for (std::size_t b = 1; b + 1 < out.size(); ++b) out[b] = 0.5 * (c[b - 1] + c[b]);
  return out;
}

inline constexpr std::size_t kMaxUnivariateCuts = 255;
inline constexpr std::size_t kInteractionBins = 30;

struct UnivariateTerm {
  std::string feature;
  std::size_t feature_index = 0;
  BinEdges edges;
  std::vector<double> scores;   // log-odds per bin
  std::vector<double> weights;  // training rows per bin
  double range_lo = 0, range_hi = 0;  // training min / max of the feature

  // Set once the term has been edited: the learned table the edits are
  // relative to, and the share of the intercept currently owed to the edit.
  std::vector<double> learned_scores;
  double edit_offset = 0.0;

  bool edited() const noexcept { return !learned_scores.empty(); }
  const std::vector<double>& reference_scores() const noexcept {
    return edited() ? learned_scores : scores;
  }

  double lookup(double x) const {
    if (!std::isfinite(x)) throw ModelError("non-finite value for feature '" + feature + "'");
    return scores[edges.bin_of(x)];
  }
};

struct InteractionTerm {
  std::array<std::string, 2> features;
  std::array<std::size_t, 2> feature_indices{};
  BinEdges edges_x, edges_y;
  Grid<double> matrix;   // rows index feature 0 bins, columns feature 1 bins
  Grid<double> weights;
  std::array<double, 2> range_lo{}, range_hi{};

  Grid<double> learned_matrix;
  double edit_offset = 0.0;

  bool edited() const noexcept { return !learned_matrix.empty(); }
  const Grid<double>& reference_matrix() const noexcept { return edited() ? learned_matrix : matrix; }

  bool involves(std::size_t a, std::size_t b) const noexcept {
    return (feature_indices[0] == a && feature_indices[1] == b) ||
           (feature_indices[0] == b && feature_indices[1] == a);
  }

  double lookup(double x, double y) const {
    if (!std::isfinite(x) || !std::isfinite(y))
      throw ModelError("non-finite value for interaction '" + features[0] + " x " + features[1] + "'");
    return matrix(edges_x.bin_of(x), edges_y.bin_of(y));
  }
};

enum class Provenance { Trained, DomainInformed };

inline const char* to_string(Provenance p) {
  return p == Provenance::Trained ? "trained" : "domain_informed";
}

struct EbmModel {
  double intercept = 0.0;
  std::vector<std::string> feature_names;
  std::vector<UnivariateTerm> univariate;  // one per feature, in feature order
  std::vector<InteractionTerm> interactions;
  Provenance provenance = Provenance::Trained;
  std::vector<nlohmann::json> edit_log;

  std::size_t feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return i;
    throw ModelError("unknown feature '" + std::string(name) + "'");
  }

  const UnivariateTerm& term(std::string_view feature) const { return univariate[feature_index(feature)]; }

  // Index of the interaction over the unordered pair, or npos.
  std::size_t find_interaction(std::size_t a, std::size_t b) const noexcept {
    for (std::size_t k = 0; k < interactions.size(); ++k)
      if (interactions[k].involves(a, b)) return k;
    return static_cast<std::size_t>(-1);
  }

  std::size_t term_count() const noexcept { return univariate.size() + interactions.size(); }

  // Structural invariants; throws ModelError on violation.
  void validate() const {
    if (univariate.size() != feature_names.size())
      throw ModelError("model needs exactly one univariate term per feature");
    if (!std::isfinite(intercept)) throw ModelError("non-finite intercept");
    for (std::size_t i = 0; i < univariate.size(); ++i) {
      const auto& t = univariate[i];
      if (t.feature != feature_names[i] || t.feature_index != i)
        throw ModelError("univariate term order does not match feature order");
      t.edges.validate(kMaxUnivariateCuts);
      if (t.scores.size() != t.edges.bin_count() || t.weights.size() != t.scores.size())
        throw ModelError("univariate term '" + t.feature + "' has inconsistent bin count");
      if (t.edited() && t.learned_scores.size() != t.scores.size())
        throw ModelError("univariate term '" + t.feature + "' learned table has wrong size");
      for (double s : t.scores)
        if (!std::isfinite(s)) throw ModelError("non-finite score in term '" + t.feature + "'");
    }
    for (std::size_t k = 0; k < interactions.size(); ++k) {
      const auto& t = interactions[k];
      const auto [a, b] = t.feature_indices;
      if (a == b || a >= feature_names.size() || b >= feature_names.size())
        throw ModelError("interaction references invalid features");
      if (t.features[0] != feature_names[a] || t.features[1] != feature_names[b])
        throw ModelError("interaction feature names do not match indices");
      for (std::size_t j = 0; j < k; ++j)
        if (interactions[j].involves(a, b)) throw ModelError("duplicate interaction pair");
      t.edges_x.validate(kInteractionBins - 1);
      t.edges_y.validate(kInteractionBins - 1);
      if (t.matrix.rows() != t.edges_x.bin_count() || t.matrix.cols() != t.edges_y.bin_count() ||
          !t.weights.same_shape(t.matrix))
        throw ModelError("interaction matrix shape does not match its bins");
      if (t.edited() && !t.learned_matrix.same_shape(t.matrix))
        throw ModelError("interaction learned matrix has wrong shape");
      for (double s : t.matrix.values())
        if (!std::isfinite(s)) throw ModelError("non-finite interaction score");
    }
  }
};

inline std::string term_name(const InteractionTerm& t) { return t.features[0] + " x " + t.features[1]; }

// ---------------------------------------------------------------------------
// Scoring

inline double lookup_univariate(const UnivariateTerm& term, double x) { return term.lookup(x); }

inline double lookup_bivariate(const InteractionTerm& term, double x, double y) { return term.lookup(x, y); }

// x is aligned with model.feature_names.
inline double score(const EbmModel& model, std::span<const double> x) {
  if (x.size() != model.feature_names.size()) throw ModelError("input has wrong number of features");
  double s = model.intercept;
  for (const auto& t : model.univariate) s += t.lookup(x[t.feature_index]);
  for (const auto& t : model.interactions) s += t.lookup(x[t.feature_indices[0]], x[t.feature_indices[1]]);
  return s;
}

using FeatureMap = std::map<std::string, double, std::less<>>;

inline std::vector<double> align_features(const EbmModel& model, const FeatureMap& x) {
  std::vector<double> out;
  out.reserve(model.feature_names.size());
  for (const auto& name : model.feature_names) {
    auto it = x.find(name);
    if (it == x.end()) throw ModelError("missing feature '" + name + "'");
    out.push_back(it->second);
  }
  return out;
}

inline double score(const EbmModel& model, const FeatureMap& x) { return score(model, align_features(model, x)); }

inline double predict_proba(const EbmModel& model, std::span<const double> x) { return sigmoid(score(model, x)); }

inline double predict_proba(const EbmModel& model, const FeatureMap& x) { return sigmoid(score(model, x)); }

inline int label_at(double probability, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ModelError("threshold must be in (0, 1)");
  return probability >= threshold ? 1 : 0;
}

inline int predict_label(const EbmModel& model, std::span<const double> x, double threshold = 0.5) {
  return label_at(predict_proba(model, x), threshold);
}

inline int predict_label(const EbmModel& model, const FeatureMap& x, double threshold = 0.5) {
  return label_at(predict_proba(model, x), threshold);
}

// ---------------------------------------------------------------------------
// Centering

inline double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  double sw = 0.0, swv = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sw += weights[i];
    swv += weights[i] * values[i];
  }
  if (!(sw > 0.0)) throw ModelError("term has zero total weight");
  return swv / sw;
}

// Shifts every term to zero weighted mean and moves the shift into the intercept.
inline EbmModel center_terms(EbmModel model) {
  for (auto& t : model.univariate) {
    const double m = weighted_mean(t.scores, t.weights);
    for (auto& s : t.scores) s -= m;
    model.intercept += m;
  }
  for (auto& t : model.interactions) {
    const double m = weighted_mean(t.matrix.values(), t.weights.values());
    for (auto& s : t.matrix.values()) s -= m;
    model.intercept += m;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline nlohmann::json grid_to_json(const Grid<double>& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t m = 0; m < g.rows(); ++m) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t n = 0; n < g.cols(); ++n) row.push_back(g(m, n));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Grid<double> grid_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ModelError("malformed matrix");
  Grid<double> g(j.size(), j.at(0).size());
  for (std::size_t m = 0; m < g.rows(); ++m) {
    if (j.at(m).size() != g.cols()) throw ModelError("ragged matrix");
    for (std::size_t n = 0; n < g.cols(); ++n) g(m, n) = j.at(m).at(n).get<double>();
  }
  return g;
}

}  // namespace detail

inline nlohmann::json model_to_json(const EbmModel& model) {
  nlohmann::json j;
  j["version"] = kModelSchemaVersion;
  j["intercept"] = model.intercept;
  j["feature_names"] = model.feature_names;
  j["provenance"] = to_string(model.provenance);
  j["univariate"] = nlohmann::json::array();
  for (const auto& t : model.univariate) {
    nlohmann::json tj = {{"feature", t.feature},
                         {"cuts", t.edges.cuts},
                         {"scores", t.scores},
                         {"weights", t.weights},
                         {"range", {t.range_lo, t.range_hi}}};
    if (t.edited()) {
      tj["learned_scores"] = t.learned_scores;
      tj["edit_offset"] = t.edit_offset;
    }
    j["univariate"].push_back(std::move(tj));
  }
  j["interactions"] = nlohmann::json::array();
  for (const auto& t : model.interactions) {
    nlohmann::json tj = {{"features", {t.features[0], t.features[1]}},
                         {"cuts_x", t.edges_x.cuts},
                         {"cuts_y", t.edges_y.cuts},
                         {"matrix", detail::grid_to_json(t.matrix)},
                         {"weights", detail::grid_to_json(t.weights)},
                         {"range_x", {t.range_lo[0], t.range_hi[0]}},
                         {"range_y", {t.range_lo[1], t.range_hi[1]}}};
    if (t.edited()) {
      tj["learned_matrix"] = detail::grid_to_json(t.learned_matrix);
      tj["edit_offset"] = t.edit_offset;
    }
    j["interactions"].push_back(std::move(tj));
  }
  j["edit_log"] = model.edit_log;
  return j;
}

inline EbmModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version")) throw ModelError("malformed model: no version field");
  const auto version = j.at("version").get<std::string>();
  if (version != kModelSchemaVersion)
    throw ModelError("unsupported model schema version '" + version + "' (expected " + kModelSchemaVersion + ")");
  try {
    EbmModel m;
    m.intercept = j.at("intercept").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto prov = j.at("provenance").get<std::string>();
    if (prov == "trained") m.provenance = Provenance::Trained;
    else if (prov == "domain_informed") m.provenance = Provenance::DomainInformed;
    else throw ModelError("unknown provenance '" + prov + "'");
    for (const auto& tj : j.at("univariate")) {
      UnivariateTerm t;
      t.feature = tj.at("feature").get<std::string>();
      t.feature_index = m.univariate.size();
      t.edges.cuts = tj.at("cuts").get<std::vector<double>>();
      t.scores = tj.at("scores").get<std::vector<double>>();
      t.weights = tj.at("weights").get<std::vector<double>>();
      t.range_lo = tj.at("range").at(0).get<double>();
      t.range_hi = tj.at("range").at(1).get<double>();
      if (tj.contains("learned_scores")) {
        t.learned_scores = tj.at("learned_scores").get<std::vector<double>>();
        t.edit_offset = tj.at("edit_offset").get<double>();
      }
      m.univariate.push_back(std::move(t));
    }
    for (const auto& tj : j.at("interactions")) {
      InteractionTerm t;
      t.features = {tj.at("features").at(0).get<std::string>(), tj.at("features").at(1).get<std::string>()};
      t.feature_indices = {m.feature_index(t.features[0]), m.feature_index(t.features[1])};
      t.edges_x.cuts = tj.at("cuts_x").get<std::vector<double>>();
      t.edges_y.cuts = tj.at("cuts_y").get<std::vector<double>>();
      t.matrix = detail::grid_from_json(tj.at("matrix"));
      t.weights = detail::grid_from_json(tj.at("weights"));
      t.range_lo = {tj.at("range_x").at(0).get<double>(), tj.at("range_y").at(0).get<double>()};
      t.range_hi = {tj.at("range_x").at(1).get<double>(), tj.at("range_y").at(1).get<double>()};
      if (tj.contains("learned_matrix")) {
        t.learned_matrix = detail::grid_from_json(tj.at("learned_matrix"));
        t.edit_offset = tj.at("edit_offset").get<double>();
      }
      m.interactions.push_back(std::move(t));
    }
    for (const auto& e : j.at("edit_log")) m.edit_log.push_back(e);
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model file: ") + e.what());
  }
}

inline std::string model_to_string(const EbmModel& model) { return model_to_json(model).dump(1); }

// Stable fingerprint of the serialized model.
inline std::string model_hash(const EbmModel& model) { return hex64(fnv1a64(model_to_json(model).dump())); }

inline void save_model(const EbmModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file '" + path + "'");
  out << model_to_string(model) << '\n';
  if (!out) throw ModelError("failed writing model file '" + path + "'");
}

inline EbmModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("malformed model file '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace ebmedit

#endif  // EBMEDIT_MODEL_HPP
