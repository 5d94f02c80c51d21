#ifndef EBMEDIT_DATA_HPP
#define EBMEDIT_DATA_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace ebmedit {

// Canonical feature order for the lateral-spreading table.
inline const std::vector<std::string>& default_feature_names() {
  static const std::vector<std::string> names = {"GWD", "PGA", "L", "Slope", "Elevation"};
  return names;
}

enum class Split { Unassigned, Train, Validation, Test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    case Split::Unassigned: break;
  }
  return "unassigned";
}

inline Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "validation" || text == "valid" || text == "val") return Split::Validation;
  if (text == "test") return Split::Test;
  if (text == "unassigned" || text.empty()) return Split::Unassigned;
  throw DataError("unknown split name '" + std::string(text) + "'");
}

struct Row {
  std::int64_t site_id = 0;
  std::vector<double> x;  // aligned with Dataset::feature_names
  int label = 0;
  Split split = Split::Unassigned;
  std::optional<std::array<double, 2>> coords;  // optional map coordinates (e.g. lon/lat)
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<Row> rows;

  std::size_t size() const noexcept { return rows.size(); }

  std::size_t feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return i;
    throw DataError("unknown feature '" + std::string(name) + "'");
  }

  // Row indices belonging to `split`; Unassigned selects every row.
  std::vector<std::size_t> indices(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (split == Split::Unassigned || rows[r].split == split) out.push_back(r);
    return out;
  }

  Dataset subset(Split split) const {
    Dataset out{feature_names, {}};
    for (auto r : indices(split)) out.rows.push_back(rows[r]);
    return out;
  }

  const Row* find_site(std::int64_t site_id) const {
    for (const auto& row : rows)
      if (row.site_id == site_id) return &row;
    return nullptr;
  }

  std::vector<double> column(std::size_t feature) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row.x[feature]);
    return out;
  }
};

// Maps CSV header names onto dataset roles. Exactly one of `label` and
// `displacement` must be set; empty `site_id` numbers rows from 0.
struct ColumnSchema {
  std::string site_id = "site_id";
  std::vector<std::pair<std::string, std::string>> features = {
      {"GWD", "GWD"}, {"PGA", "PGA"}, {"L", "L"}, {"Slope", "Slope"}, {"Elevation", "Elevation"}};
  std::string label = "label";
  std::string displacement;
  std::string split;  // optional column holding train/validation/test
  std::string coord_x;
  std::string coord_y;
};

// Schema of files produced by write_dataset().
inline ColumnSchema canonical_schema() {
  ColumnSchema s;
  s.split = "split";
  return s;
}

inline void to_json(nlohmann::json& j, const ColumnSchema& s) {
  nlohmann::json features = nlohmann::json::object();
  for (const auto& [name, column] : s.features) features[name] = column;
  j = {{"site_id", s.site_id}, {"features", features}, {"label", s.label},
       {"displacement", s.displacement}, {"split", s.split}, {"coord_x", s.coord_x},
       {"coord_y", s.coord_y}};
  // nlohmann objects are sorted by key; keep explicit order for features
  j["feature_order"] = nlohmann::json::array();
  for (const auto& f : s.features) j["feature_order"].push_back(f.first);
}

inline void from_json(const nlohmann::json& j, ColumnSchema& s) {
  s = ColumnSchema{};
  s.site_id = j.value("site_id", s.site_id);
  s.label = j.value("label", s.label);
  s.displacement = j.value("displacement", std::string{});
  if (!s.displacement.empty() && !j.contains("label")) s.label.clear();
  s.split = j.value("split", std::string{});
  s.coord_x = j.value("coord_x", std::string{});
  s.coord_y = j.value("coord_y", std::string{});
  if (j.contains("features")) {
    const auto& f = j.at("features");
    s.features.clear();
    if (j.contains("feature_order")) {
      for (const auto& name : j.at("feature_order"))
        s.features.emplace_back(name.get<std::string>(), f.at(name.get<std::string>()).get<std::string>());
    } else {
      // default ordering first, then any extra names
      for (const auto& name : default_feature_names())
        if (f.contains(name)) s.features.emplace_back(name, f.at(name).get<std::string>());
      for (auto it = f.begin(); it != f.end(); ++it)
        if (std::find(default_feature_names().begin(), default_feature_names().end(), it.key()) ==
            default_feature_names().end())
          s.features.emplace_back(it.key(), it.value().get<std::string>());
    }
  }
}

namespace csv {

// RFC-4180-ish field splitter: commas, optional double quotes, "" escapes.
inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::optional<double> parse_real(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace csv

// Displacement threshold in meters; at or above it a site counts as spreading.
inline constexpr double kSpreadingThresholdM = 0.3;

inline int label_from_displacement(double displacement_m) {
  if (!std::isfinite(displacement_m) || displacement_m < 0.0)
    throw DataError("displacement must be finite and non-negative");
  return displacement_m >= kSpreadingThresholdM ? 1 : 0;
}

inline Dataset load_dataset_stream(std::istream& in, const ColumnSchema& schema) {
  const bool has_label = !schema.label.empty();
  const bool has_disp = !schema.displacement.empty();
  if (has_label == has_disp)
    throw DataError("schema must map exactly one of 'label' and 'displacement'");
  if (schema.features.empty()) throw DataError("schema maps no features");

  std::string line;
  if (!std::getline(in, line)) throw DataError("no rows");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = csv::split_line(line);
  for (auto& h : header) h = csv::trim(h);

  const auto find_column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  Dataset ds;
  std::vector<std::size_t> feature_cols;
  for (const auto& [name, column] : schema.features) {
    ds.feature_names.push_back(name);
    feature_cols.push_back(find_column(column));
  }
  constexpr std::size_t kNoColumn = static_cast<std::size_t>(-1);
  const std::size_t id_col = schema.site_id.empty() ? kNoColumn : find_column(schema.site_id);
  const std::size_t target_col = find_column(has_label ? schema.label : schema.displacement);
  const std::optional<std::size_t> split_col =
      schema.split.empty() ? std::nullopt : std::optional(find_column(schema.split));
  std::optional<std::size_t> cx, cy;
  if (!schema.coord_x.empty() || !schema.coord_y.empty()) {
    cx = find_column(schema.coord_x);
    cy = find_column(schema.coord_y);
  }

  std::vector<std::string> errors;
  std::set<std::int64_t> seen_ids;
  std::size_t line_no = 1;
  std::int64_t next_id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_line(line);
    const std::string where = "row " + std::to_string(line_no);
    const auto cell = [&](std::size_t col, const std::string& name) -> std::optional<double> {
      if (col >= fields.size()) {
        errors.push_back(where + ", column '" + name + "': missing cell");
        return std::nullopt;
      }
      auto v = csv::parse_real(fields[col]);
      if (!v) errors.push_back(where + ", column '" + name + "': not a finite number: '" + fields[col] + "'");
      return v;
    };

    Row row;
    bool ok = true;
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      auto v = cell(feature_cols[f], schema.features[f].second);
      ok = ok && v.has_value();
      row.x.push_back(v.value_or(0.0));
    }
    if (id_col != kNoColumn) {
      auto v = cell(id_col, schema.site_id);
      if (v && (*v != std::floor(*v))) {
        errors.push_back(where + ", column '" + schema.site_id + "': site id is not an integer");
        v.reset();
      }
      ok = ok && v.has_value();
      row.site_id = v ? static_cast<std::int64_t>(*v) : 0;
    } else {
      row.site_id = next_id;
    }
    ++next_id;
    auto target = cell(target_col, has_label ? schema.label : schema.displacement);
    if (target) {
      if (has_label) {
        if (*target != 0.0 && *target != 1.0) {
          errors.push_back(where + ", column '" + schema.label + "': label must be 0 or 1");
          ok = false;
        } else {
          row.label = static_cast<int>(*target);
        }
      } else if (*target < 0.0) {
        errors.push_back(where + ", column '" + schema.displacement + "': negative displacement");
        ok = false;
      } else {
        row.label = label_from_displacement(*target);
      }
    } else {
      ok = false;
    }
    if (split_col) {
      if (*split_col >= fields.size()) {
        errors.push_back(where + ", column '" + schema.split + "': missing cell");
        ok = false;
      } else {
        try {
          row.split = parse_split(csv::trim(fields[*split_col]));
        } catch (const DataError& e) {
          errors.push_back(where + ", column '" + schema.split + "': " + e.what());
          ok = false;
        }
      }
    }
    if (cx) {
      auto x = cell(*cx, schema.coord_x);
      auto y = cell(*cy, schema.coord_y);
      if (x && y) row.coords = std::array<double, 2>{*x, *y};
      else ok = false;
    }
    if (ok && !seen_ids.insert(row.site_id).second) {
      errors.push_back(where + ": duplicate site id " + std::to_string(row.site_id));
      ok = false;
    }
    if (ok) ds.rows.push_back(std::move(row));
  }

  if (!errors.empty()) {
    std::string msg = std::to_string(errors.size()) + " invalid cell(s); first: " + errors.front();
    throw DataError(msg, std::move(errors));
  }
  if (ds.rows.empty()) throw DataError("no rows");
  return ds;
}

inline Dataset load_dataset(const std::string& path, const ColumnSchema& schema = canonical_schema()) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");
  return load_dataset_stream(in, schema);
}

inline void write_dataset_stream(std::ostream& out, const Dataset& ds) {
  const bool coords = !ds.rows.empty() && ds.rows.front().coords.has_value();
  out << "site_id";
  for (const auto& f : ds.feature_names) out << ',' << f;
  out << ",label,split";
  if (coords) out << ",x,y";
  out << '\n';
  for (const auto& row : ds.rows) {
    out << row.site_id;
    for (double v : row.x) out << ',' << format_double(v);
    out << ',' << row.label << ',' << to_string(row.split);
    if (coords && row.coords)
      out << ',' << format_double((*row.coords)[0]) << ',' << format_double((*row.coords)[1]);
    out << '\n';
  }
}

inline void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file '" + path + "'");
  write_dataset_stream(out, ds);
}

// Schema that reads back a file written by write_dataset() for `ds`.
inline ColumnSchema schema_for(const Dataset& ds) {
  ColumnSchema s = canonical_schema();
  s.features.clear();
  for (const auto& f : ds.feature_names) s.features.emplace_back(f, f);
  if (!ds.rows.empty() && ds.rows.front().coords) {
    s.coord_x = "x";
    s.coord_y = "y";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Distribution summaries

struct FeatureSummary {
  std::string feature;
  double q1 = 0, q3 = 0, iqr = 0;
  double lower_fence = 0, upper_fence = 0;
  std::size_t outlier_count = 0;
  double min = 0, max = 0;
};

// Linear interpolation between order statistics (h = (n-1)p).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  assert(!sorted.empty());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline FeatureSummary summarize_values(std::string feature, std::vector<double> values) {
  if (values.size() < 4) throw DataError("need at least 4 rows to summarize '" + feature + "'");
  std::sort(values.begin(), values.end());
  FeatureSummary s;
  s.feature = std::move(feature);
  s.q1 = quantile_sorted(values, 0.25);
  s.q3 = quantile_sorted(values, 0.75);
  s.iqr = s.q3 - s.q1;
  s.lower_fence = s.q1 - 1.5 * s.iqr;
  s.upper_fence = s.q3 + 1.5 * s.iqr;
  s.outlier_count = static_cast<std::size_t>(std::count_if(
      values.begin(), values.end(), [&](double v) { return v < s.lower_fence || v > s.upper_fence; }));
  s.min = values.front();
  s.max = values.back();
  return s;
}

inline FeatureSummary summarize_feature(const Dataset& ds, std::string_view feature) {
  const auto f = ds.feature_index(feature);
  return summarize_values(std::string(feature), ds.column(f));
}

// A feature is long-tailed when its outlier count exceeds the median count.
inline std::vector<bool> long_tail_flags(const std::vector<FeatureSummary>& summaries) {
  std::vector<double> counts;
  for (const auto& s : summaries) counts.push_back(static_cast<double>(s.outlier_count));
  std::vector<bool> out(summaries.size(), false);
  if (counts.empty()) return out;
  auto sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  const double median = quantile_sorted(sorted, 0.5);
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] > median;
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

namespace detail {

inline void assign_split(std::vector<Row*>& rows, const SplitRatios& r, Rng& rng) {
  rng.shuffle(rows);
  const auto n = static_cast<double>(rows.size());
  // validation/test take their rounded share; the remainder goes to train
  const auto n_val = static_cast<std::size_t>(std::llround(r.validation * n));
  const auto n_test = std::min(static_cast<std::size_t>(std::llround(r.test * n)), rows.size() - n_val);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i]->split = i < n_val ? Split::Validation : (i < n_val + n_test ? Split::Test : Split::Train);
  }
}

}  // namespace detail

inline Dataset split_dataset(Dataset ds, const SplitRatios& ratios, std::uint64_t seed,
                             bool stratify = false) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
    throw DataError("split ratios must be positive and sum to 1");
  Rng rng(seed);
  // rows are shuffled in site-id order so the result does not depend on file order
  std::vector<Row*> order;
  for (auto& row : ds.rows) order.push_back(&row);
  std::sort(order.begin(), order.end(), [](const Row* a, const Row* b) { return a->site_id < b->site_id; });
  if (!stratify) {
    detail::assign_split(order, ratios, rng);
  } else {
    for (int cls : {0, 1}) {
      std::vector<Row*> group;
      for (auto* r : order)
        if (r->label == cls) group.push_back(r);
      detail::assign_split(group, ratios, rng);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic surrogate

struct SyntheticFeature {
  std::string name;
  double lo = 0, hi = 1;
  double skew = 1.0;  // x = lo + (hi-lo) * u^skew; >1 gives a long right tail
  double coef = 0.0;  // ground-truth log-odds slope on the standardized scale
};

struct SyntheticInteraction {
  std::size_t first = 0, second = 1;
  double coef = 0.0;
};

struct SyntheticConfig {
  std::vector<SyntheticFeature> features;
  double intercept = -0.3;
  std::vector<SyntheticInteraction> interactions;
};

// Lateral-spreading-like surrogate: spreading more likely at shallow
// groundwater, strong shaking and near rivers.
inline SyntheticConfig default_synthetic_config() {
  SyntheticConfig c;
  c.features = {{"GWD", 0.2, 6.0, 2.5, -2.5},
                {"PGA", 0.30, 0.65, 1.0, 1.5},
                {"L", 0.0, 1.5, 1.2, -2.0},
                {"Slope", 0.0, 12.0, 3.0, 0.3},
                {"Elevation", 0.0, 8.0, 1.0, -0.8}};
  c.interactions = {{0, 1, -1.2}, {0, 2, 0.8}, {1, 2, -0.6}};
  c.intercept = -0.4;
  return c;
}

// Standardizes x to [-1, 1] over the configured range.
struct GroundTruth {
  SyntheticConfig config;

  double standardized(std::size_t f, double x) const {
    const auto& sf = config.features[f];
    return (2.0 * x - (sf.lo + sf.hi)) / (sf.hi - sf.lo);
  }

  double logit(const std::vector<double>& x) const {
    double s = config.intercept;
    for (std::size_t f = 0; f < config.features.size(); ++f)
      s += config.features[f].coef * standardized(f, x[f]);
    for (const auto& it : config.interactions)
      s += it.coef * standardized(it.first, x[it.first]) * standardized(it.second, x[it.second]);
    return s;
  }

  double probability(const std::vector<double>& x) const { return sigmoid(logit(x)); }
};

struct SyntheticDataset {
  Dataset data;
  GroundTruth truth;
};

inline SyntheticDataset generate_synthetic(const SyntheticConfig& config, std::size_t n,
                                           std::uint64_t seed) {
  if (n < 10) throw DataError("synthetic dataset needs n >= 10");
  if (config.features.empty()) throw DataError("synthetic config has no features");
  for (const auto& f : config.features)
    if (!(f.hi > f.lo) || !(f.skew > 0)) throw DataError("invalid range for synthetic feature '" + f.name + "'");
  for (const auto& it : config.interactions)
    if (it.first >= config.features.size() || it.second >= config.features.size() || it.first == it.second)
      throw DataError("invalid synthetic interaction pair");

  SyntheticDataset out{{}, GroundTruth{config}};
  for (const auto& f : config.features) out.data.feature_names.push_back(f.name);
  Rng rng(seed);
  out.data.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Row row;
    row.site_id = static_cast<std::int64_t>(i);
    for (const auto& f : config.features)
      row.x.push_back(f.lo + (f.hi - f.lo) * std::pow(rng.uniform(), f.skew));
    row.label = rng.uniform() < out.truth.probability(row.x) ? 1 : 0;
    out.data.rows.push_back(std::move(row));
  }
  return out;
}

inline void to_json(nlohmann::json& j, const SyntheticConfig& c) {
  j = nlohmann::json{{"intercept", c.intercept}, {"features", nlohmann::json::array()},
                     {"interactions", nlohmann::json::array()}};
  for (const auto& f : c.features)
    j["features"].push_back({{"name", f.name}, {"lo", f.lo}, {"hi", f.hi}, {"skew", f.skew}, {"coef", f.coef}});
  for (const auto& it : c.interactions)
    j["interactions"].push_back({{"first", it.first}, {"second", it.second}, {"coef", it.coef}});
}

inline void from_json(const nlohmann::json& j, SyntheticConfig& c) {
  c = SyntheticConfig{};
  c.intercept = j.value("intercept", c.intercept);
  for (const auto& f : j.at("features"))
    c.features.push_back({f.at("name").get<std::string>(), f.at("lo").get<double>(), f.at("hi").get<double>(),
                          f.value("skew", 1.0), f.value("coef", 0.0)});
  if (j.contains("interactions"))
    for (const auto& it : j.at("interactions"))
      c.interactions.push_back({it.at("first").get<std::size_t>(), it.at("second").get<std::size_t>(),
                                it.value("coef", 0.0)});
}

}  // namespace ebmedit

#endif  // EBMEDIT_DATA_HPP
