#ifndef EBMEDIT_EXPLAIN_HPP
#define EBMEDIT_EXPLAIN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "data.hpp"
#include "model.hpp"

namespace ebmedit {

// Dataset column for each model feature.
inline std::vector<std::size_t> data_feature_order(const EbmModel& model, const Dataset& data) {
  std::vector<std::size_t> cols;
  for (const auto& name : model.feature_names) cols.push_back(data.feature_index(name));
  return cols;
}

struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  // tp, tn, fp, fn over the total
  std::array<double, 4> fractions() const {
    const double n = static_cast<double>(total());
    if (n == 0) return {0, 0, 0, 0};
    return {tp / n, tn / n, fp / n, fn / n};
  }
};

inline Confusion confusion(std::span<const int> labels, std::span<const int> predicted) {
  if (labels.size() != predicted.size()) throw Error("label and prediction counts differ");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) (predicted[i] == 1 ? c.tp : c.fn)++;
    else (predicted[i] == 1 ? c.fp : c.tn)++;
  }
  return c;
}

// Mann-Whitney statistic with average ranks for ties. Empty optional when
// only one class is present.
inline std::optional<double> auc_rank(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("score and label counts differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum += avg;
    i = j;
  }
  for (int y : labels) pos += y == 1;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1) / 2.0) / (p * static_cast<double>(neg));
}

struct EvalReport {
  Split split = Split::Test;
  std::size_t n = 0;
  double threshold = 0.5;
  Confusion counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
  std::vector<std::string> flags;  // undefined metrics

  nlohmann::json to_json() const {
    const auto opt = [](double v, bool defined) { return defined ? nlohmann::json(v) : nlohmann::json(nullptr); };
    const auto has = [&](const char* f) { return std::find(flags.begin(), flags.end(), f) != flags.end(); };
    return {{"split", to_string(split)},
            {"n", n},
            {"threshold", threshold},
            {"tp", counts.tp},
            {"tn", counts.tn},
            {"fp", counts.fp},
            {"fn", counts.fn},
            {"fractions", {{"tp", counts.fractions()[0]}, {"tn", counts.fractions()[1]},
                           {"fp", counts.fractions()[2]}, {"fn", counts.fractions()[3]}}},
            {"accuracy", accuracy},
            {"precision", opt(precision, !has("precision_undefined"))},
            {"recall", opt(recall, !has("recall_undefined"))},
            {"f1", opt(f1, !has("f1_undefined"))},
            {"auc", auc ? nlohmann::json(*auc) : nlohmann::json(nullptr)},
            {"flags", flags}};
  }
};

inline EvalReport evaluate_scores(std::span<const double> probabilities, std::span<const int> labels,
                                  double threshold = 0.5) {
  EvalReport r;
  r.threshold = threshold;
  r.n = labels.size();
  if (r.n == 0) throw Error("cannot evaluate an empty split");
  std::vector<int> predicted(r.n);
  for (std::size_t i = 0; i < r.n; ++i) predicted[i] = label_at(probabilities[i], threshold);
  r.counts = confusion(labels, predicted);
  const auto& c = r.counts;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(r.n);
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  else r.flags.push_back("precision_undefined");
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  else r.flags.push_back("recall_undefined");
  if (r.precision + r.recall > 0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else r.flags.push_back("f1_undefined");
  r.auc = auc_rank(probabilities, labels);
  if (!r.auc) r.flags.push_back("auc_undefined_single_class");
  return r;
}

inline EvalReport evaluate(const EbmModel& model, const Dataset& data, Split split = Split::Test,
                           double threshold = 0.5) {
  const auto idx = data.indices(split);
  if (idx.empty()) throw Error(std::string("split '") + to_string(split) + "' has no rows");
  const auto cols = data_feature_order(model, data);
  std::vector<double> probs;
  std::vector<int> labels;
  std::vector<double> x(cols.size());
  for (auto i : idx) {
    const auto& row = data.rows[i];
    for (std::size_t k = 0; k < cols.size(); ++k) x[k] = row.x[cols[k]];
    probs.push_back(predict_proba(model, x));
    labels.push_back(row.label);
  }
  auto r = evaluate_scores(probs, labels, threshold);
  r.split = split;
  return r;
}

// ---------------------------------------------------------------------------
// Importance and local explanations

struct TermImportance {
  std::string term;
  double importance = 0.0;
};

// Mean |contribution| of every term over the rows of `split`, descending.
inline std::vector<TermImportance> importance(const EbmModel& model, const Dataset& data, Split split = Split::Train) {
  const auto idx = data.indices(split);
  if (idx.empty()) throw Error("importance needs at least one row");
  const auto cols = data_feature_order(model, data);
  std::vector<TermImportance> out;
  for (const auto& t : model.univariate) {
    double s = 0.0;
    for (auto i : idx) s += std::abs(t.lookup(data.rows[i].x[cols[t.feature_index]]));
    out.push_back({t.feature, s / static_cast<double>(idx.size())});
  }
  for (const auto& t : model.interactions) {
    double s = 0.0;
    for (auto i : idx) {
      const auto& x = data.rows[i].x;
      s += std::abs(t.lookup(x[cols[t.feature_indices[0]]], x[cols[t.feature_indices[1]]]));
    }
    out.push_back({term_name(t), s / static_cast<double>(idx.size())});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TermImportance& a, const TermImportance& b) { return a.importance > b.importance; });
  return out;
}

struct Contribution {
  std::string term;
  double value = 0.0;
};

struct LocalExplanation {
  std::optional<std::int64_t> site_id;
  double intercept = 0.0;
  std::vector<Contribution> contributions;  // sorted by |value| descending
  double logit = 0.0;
  double probability = 0.0;
  int predicted = 0;
  std::optional<int> label;

  nlohmann::json to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& c : contributions) terms.push_back({{"term", c.term}, {"value", c.value}});
    return {{"site_id", site_id ? nlohmann::json(*site_id) : nlohmann::json(nullptr)},
            {"intercept", intercept},
            {"contributions", terms},
            {"logit", logit},
            {"probability", probability},
            {"predicted", predicted},
            {"label", label ? nlohmann::json(*label) : nlohmann::json(nullptr)}};
  }
};

inline LocalExplanation local_explain(const EbmModel& model, std::span<const double> x, double threshold = 0.5) {
  if (x.size() != model.feature_names.size()) throw Error("feature vector has the wrong length");
  LocalExplanation e;
  e.intercept = model.intercept;
  for (const auto& t : model.univariate) e.contributions.push_back({t.feature, t.lookup(x[t.feature_index])});
  for (const auto& t : model.interactions)
    e.contributions.push_back({term_name(t), t.lookup(x[t.feature_indices[0]], x[t.feature_indices[1]])});
  e.logit = e.intercept;
  for (const auto& c : e.contributions) e.logit += c.value;
  std::stable_sort(e.contributions.begin(), e.contributions.end(),
                   [](const Contribution& a, const Contribution& b) { return std::abs(a.value) > std::abs(b.value); });
  e.probability = sigmoid(e.logit);
  e.predicted = label_at(e.probability, threshold);
  return e;
}

inline LocalExplanation local_explain(const EbmModel& model, const Dataset& data, std::int64_t site_id,
                                      double threshold = 0.5) {
  const Row* row = data.find_site(site_id);
  if (!row) throw DataError("unknown site id " + std::to_string(site_id));
  const auto cols = data_feature_order(model, data);
  std::vector<double> x(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) x[k] = row->x[cols[k]];
  auto e = local_explain(model, x, threshold);
  e.site_id = row->site_id;
  e.label = row->label;
  return e;
}

// ---------------------------------------------------------------------------
// Base vs edited comparison

enum class Outcome { TP = 0, TN = 1, FP = 2, FN = 3 };

inline const char* to_string(Outcome o) {
  static constexpr const char* names[] = {"TP", "TN", "FP", "FN"};
  return names[static_cast<int>(o)];
}

inline Outcome outcome_of(int label, int predicted) {
  if (label == 1) return predicted == 1 ? Outcome::TP : Outcome::FN;
  return predicted == 1 ? Outcome::FP : Outcome::TN;
}

struct SiteTransition {
  std::int64_t site_id = 0;
  Outcome before = Outcome::TN;
  Outcome after = Outcome::TN;
  double p_before = 0.0, p_after = 0.0;
  std::optional<std::array<double, 2>> coords;
};

struct TransitionMap {
  Split split = Split::Test;
  std::array<std::array<std::size_t, 4>, 4> counts{};  // [before][after]
  std::vector<SiteTransition> sites;

  std::size_t changed() const noexcept {
    std::size_t c = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) c += counts[i][j];
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json m = nlohmann::json::object();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        m[std::string(to_string(Outcome(i))) + "->" + to_string(Outcome(j))] = counts[i][j];
    return {{"split", to_string(split)}, {"n", sites.size()}, {"changed", changed()}, {"counts", m}};
  }
};

inline TransitionMap compare_models(const EbmModel& base, const EbmModel& edited, const Dataset& data,
                                    Split split = Split::Test, double threshold = 0.5) {
  if (base.feature_names != edited.feature_names) throw Error("models use different features");
  const auto idx = data.indices(split);
  const auto cols = data_feature_order(base, data);
  TransitionMap map;
  map.split = split;
  std::vector<double> x(cols.size());
  for (auto i : idx) {
    const auto& row = data.rows[i];
    for (std::size_t k = 0; k < cols.size(); ++k) x[k] = row.x[cols[k]];
    SiteTransition t;
    t.site_id = row.site_id;
    t.p_before = predict_proba(base, x);
    t.p_after = predict_proba(edited, x);
    t.before = outcome_of(row.label, label_at(t.p_before, threshold));
    t.after = outcome_of(row.label, label_at(t.p_after, threshold));
    t.coords = row.coords;
    ++map.counts[static_cast<int>(t.before)][static_cast<int>(t.after)];
    map.sites.push_back(std::move(t));
  }
  return map;
}

// ---------------------------------------------------------------------------
// CSV writers

inline void write_importance_csv(std::ostream& out, const std::vector<TermImportance>& ranking) {
  out << "rank,term,importance\n";
  for (std::size_t i = 0; i < ranking.size(); ++i)
    out << i + 1 << ',' << ranking[i].term << ',' << format_double(ranking[i].importance) << '\n';
}

inline void write_transitions_csv(std::ostream& out, const TransitionMap& map) {
  out << "site_id,before,after,p_before,p_after,x,y\n";
  for (const auto& s : map.sites) {
    out << s.site_id << ',' << to_string(s.before) << ',' << to_string(s.after) << ',' << format_double(s.p_before)
        << ',' << format_double(s.p_after) << ',';
    if (s.coords) out << format_double((*s.coords)[0]) << ',' << format_double((*s.coords)[1]);
    else out << ',';
    out << '\n';
  }
}

// Table layout used by the eval command.
inline void write_eval_table(std::ostream& out, const std::vector<std::pair<std::string, EvalReport>>& rows) {
  const auto cell = [](double v, bool defined) { return defined ? format_fixed(v, 3) : std::string("n/a"); };
  out << "model                 accuracy  precision  recall  f1     auc\n";
  for (const auto& [name, r] : rows) {
    const auto has = [&](const char* f) { return std::find(r.flags.begin(), r.flags.end(), f) != r.flags.end(); };
    std::string label = name;
    label.resize(std::max<std::size_t>(label.size(), 22), ' ');
    out << label << cell(r.accuracy, true) << "     " << cell(r.precision, !has("precision_undefined")) << "      "
        << cell(r.recall, !has("recall_undefined")) << "   " << cell(r.f1, !has("f1_undefined")) << "  "
        << cell(r.auc.value_or(0.0), r.auc.has_value()) << '\n';
  }
}

}  // namespace ebmedit

#endif  // EBMEDIT_EXPLAIN_HPP
