#ifndef EBMEDIT_TRAINER_HPP
#define EBMEDIT_TRAINER_HPP

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "data.hpp"
#include "model.hpp"

namespace ebmedit {

struct TrainConfig {
  double learning_rate = 0.01;
  int max_rounds = 5000;
  int max_leaves = 3;
  int early_stopping_rounds = 50;
  int n_interactions = 10;
  std::uint64_t seed = 0;
  int max_univariate_bins = 256;
  int interaction_bins = static_cast<int>(kInteractionBins);
  int interaction_max_leaves = 4;

  void validate() const {
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) throw TrainError("learning_rate must be in [0, 1]");
    if (max_rounds < 0) throw TrainError("max_rounds must be >= 0");
    if (max_leaves < 2) throw TrainError("max_leaves must be >= 2");
    if (early_stopping_rounds < 1) throw TrainError("early_stopping_rounds must be >= 1");
    if (max_univariate_bins < 2 || max_univariate_bins > static_cast<int>(kMaxUnivariateCuts) + 1)
      throw TrainError("max_univariate_bins must be in [2, 256]");
    if (interaction_bins < 2 || interaction_bins > static_cast<int>(kInteractionBins))
      throw TrainError("interaction_bins must be in [2, 30]");
    if (interaction_max_leaves < 2 || interaction_max_leaves > 4)
      throw TrainError("interaction_max_leaves must be in [2, 4]");
    if (n_interactions < 0) throw TrainError("n_interactions must be >= 0");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate},         {"max_rounds", c.max_rounds},
       {"max_leaves", c.max_leaves},               {"early_stopping_rounds", c.early_stopping_rounds},
       {"n_interactions", c.n_interactions},       {"seed", c.seed},
       {"max_univariate_bins", c.max_univariate_bins}, {"interaction_bins", c.interaction_bins},
       {"interaction_max_leaves", c.interaction_max_leaves}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c = TrainConfig{};
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_rounds = j.value("max_rounds", c.max_rounds);
  c.max_leaves = j.value("max_leaves", c.max_leaves);
  c.early_stopping_rounds = j.value("early_stopping_rounds", c.early_stopping_rounds);
  c.n_interactions = j.value("n_interactions", c.n_interactions);
  c.seed = j.value("seed", c.seed);
  c.max_univariate_bins = j.value("max_univariate_bins", c.max_univariate_bins);
  c.interaction_bins = j.value("interaction_bins", c.interaction_bins);
  c.interaction_max_leaves = j.value("interaction_max_leaves", c.interaction_max_leaves);
}

// ---------------------------------------------------------------------------
// Intercept and binning

inline double init_intercept(const Dataset& train) {
  std::size_t pos = 0;
  for (const auto& r : train.rows) pos += r.label == 1;
  if (pos == 0 || pos == train.size()) throw TrainError("training set must contain both classes");
  const double p = static_cast<double>(pos) / static_cast<double>(train.size());
  return std::log(p / (1.0 - p));
}

struct BinningResult {
  BinEdges edges;
  bool constant = false;  // feature has a single distinct value
};

// Equal-frequency cuts placed halfway between neighbouring distinct values.
// When there are no more distinct values than bins, every gap gets a cut.
inline BinningResult build_bins(std::span<const double> values, std::size_t max_bins) {
  if (max_bins < 2) throw TrainError("max_bins must be >= 2");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted)
    if (!std::isfinite(v)) throw TrainError("non-finite feature value while binning");
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  BinningResult out;
  if (distinct.size() < 2) {
    out.constant = true;
    return out;
  }
  auto& cuts = out.edges.cuts;
  const auto push = [&](double a, double b) {
    double c = a + 0.5 * (b - a);
    if (!(c < b)) c = a;  // adjacent doubles
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  };
  if (distinct.size() <= max_bins) {
    for (std::size_t i = 1; i < distinct.size(); ++i) push(distinct[i - 1], distinct[i]);
    return out;
  }
  const std::size_t n = sorted.size();
  for (std::size_t k = 1; k < max_bins; ++k) {
    const std::size_t idx = k * n / max_bins;
    if (idx == 0 || idx >= n) continue;
    const double a = sorted[idx - 1];
    auto next = std::upper_bound(distinct.begin(), distinct.end(), a);
    if (next == distinct.end()) continue;
    push(a, *next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stumps

struct StumpFit {
  std::vector<double> increments;        // per-bin leaf value
  std::vector<std::size_t> leaf_starts;  // first bin of each leaf
  double gain = 0.0;                     // SSE reduction versus a single leaf
};

// Least-squares regression tree over ordered bins with at most `max_leaves`
// contiguous leaves, solved exactly by dynamic programming over split points.
// `sum` and `count` are the per-bin residual sums and row counts.
inline StumpFit fit_stump_histogram(std::span<const double> sum, std::span<const double> count, int max_leaves) {
  if (sum.size() != count.size()) throw TrainError("histogram size mismatch");
  if (max_leaves < 1) throw TrainError("max_leaves must be >= 1");
  std::vector<std::size_t> occupied;
  for (std::size_t b = 0; b < count.size(); ++b)
    if (count[b] > 0) occupied.push_back(b);
  if (occupied.empty()) throw TrainError("cannot fit a stump to empty input");

  const std::size_t k = occupied.size();
  std::vector<double> ps(k + 1, 0.0), pn(k + 1, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    ps[i + 1] = ps[i] + sum[occupied[i]];
    pn[i + 1] = pn[i] + count[occupied[i]];
  }
  const auto seg = [&](std::size_t s, std::size_t e) {
    const double S = ps[e] - ps[s];
    return S * S / (pn[e] - pn[s]);
  };

  const auto leaves = std::min<std::size_t>(static_cast<std::size_t>(max_leaves), k);
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  // best[l][e]: max of sum S^2/N over partitions of [0, e) into l+1 segments
  std::vector<std::vector<double>> best(leaves, std::vector<double>(k + 1, kNone));
  std::vector<std::vector<std::size_t>> from(leaves, std::vector<std::size_t>(k + 1, 0));
  for (std::size_t e = 1; e <= k; ++e) best[0][e] = seg(0, e);
  for (std::size_t l = 1; l < leaves; ++l) {
    for (std::size_t e = l + 1; e <= k; ++e) {
      for (std::size_t s = l; s < e; ++s) {
        const double v = best[l - 1][s] + seg(s, e);
        if (v > best[l][e]) {
          best[l][e] = v;
          from[l][e] = s;
        }
      }
    }
  }
  std::size_t chosen = 0;
  for (std::size_t l = 1; l < leaves; ++l)
    if (best[l][k] > best[chosen][k]) chosen = l;

  std::vector<std::size_t> bounds{k};
  for (std::size_t l = chosen, e = k; l > 0; --l) {
    e = from[l][e];
    bounds.push_back(e);
  }
  bounds.push_back(0);
  std::reverse(bounds.begin(), bounds.end());

  StumpFit fit;
  fit.increments.assign(sum.size(), 0.0);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const std::size_t s = bounds[i], e = bounds[i + 1];
    const double value = (ps[e] - ps[s]) / (pn[e] - pn[s]);
    // empty bins belong to the leaf of the next occupied bin; trailing ones to the last leaf
    const std::size_t first = s == 0 ? 0 : occupied[s];
    const std::size_t last = e == k ? sum.size() : occupied[e];
    fit.leaf_starts.push_back(first);
    for (std::size_t b = first; b < last; ++b) fit.increments[b] = value;
  }
  fit.gain = std::max(0.0, best[chosen][k] - seg(0, k));
  return fit;
}

inline StumpFit fit_stump(std::span<const double> residuals, std::span<const double> values, const BinEdges& edges,
                          int max_leaves) {
  if (residuals.empty()) throw TrainError("cannot fit a stump to empty input");
  if (residuals.size() != values.size()) throw TrainError("residuals and feature values are not aligned");
  std::vector<double> sum(edges.bin_count(), 0.0), count(edges.bin_count(), 0.0);
  for (std::size_t r = 0; r < residuals.size(); ++r) {
    const auto b = edges.bin_of(values[r]);
    sum[b] += residuals[r];
    count[b] += 1.0;
  }
  return fit_stump_histogram(sum, count, max_leaves);
}

struct PairStumpFit {
  Grid<double> increments;
  double gain = 0.0;
};

namespace detail {

struct Split1d {
  double gain = 0.0;
  std::size_t position = 0;  // 0 means no split
};

// Best single split of a marginal histogram into [0, p) and [p, n).
inline Split1d best_split_1d(std::span<const double> s, std::span<const double> c) {
  double total_s = 0, total_n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total_s += s[i];
    total_n += c[i];
  }
  Split1d out;
  if (total_n <= 0) return out;
  const double base = total_s * total_s / total_n;
  double ls = 0, ln = 0;
  for (std::size_t p = 1; p < s.size(); ++p) {
    ls += s[p - 1];
    ln += c[p - 1];
    const double rn = total_n - ln;
    if (ln <= 0 || rn <= 0) continue;
    const double rs = total_s - ls;
    const double g = ls * ls / ln + rs * rs / rn - base;
    if (g > out.gain) out = {g, p};
  }
  return out;
}

}  // namespace detail

// Bivariate tree with up to four leaves: one split on either axis, then each
// half may split once on the other axis. Exhaustive over all such trees.
inline PairStumpFit fit_pair_stump(const Grid<double>& sum, const Grid<double>& count, int max_leaves = 4) {
  if (!sum.same_shape(count) || sum.empty()) throw TrainError("pair histogram shape mismatch");
  if (max_leaves < 1 || max_leaves > 4) throw TrainError("pair stump supports 1 to 4 leaves");
  const std::size_t rows = sum.rows(), cols = sum.cols();
  double total_s = 0, total_n = 0;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    total_s += sum.values()[i];
    total_n += count.values()[i];
  }
  if (total_n <= 0) throw TrainError("cannot fit a pair stump to empty input");
  const double base = total_s * total_s / total_n;

  struct Best {
    double gain = 0.0;
    int axis = -1;  // -1: single leaf
    std::size_t root = 0;
    detail::Split1d low, high;
  } best;

  for (int axis = 0; axis < 2 && max_leaves >= 2; ++axis) {
    const std::size_t outer = axis == 0 ? rows : cols;
    const std::size_t inner = axis == 0 ? cols : rows;
    const auto at = [&](const Grid<double>& g, std::size_t o, std::size_t i) {
      return axis == 0 ? g(o, i) : g(i, o);
    };
    std::vector<double> all_s(inner, 0.0), all_n(inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < inner; ++i) {
        all_s[i] += at(sum, o, i);
        all_n[i] += at(count, o, i);
      }
    std::vector<double> lo_s(inner, 0.0), lo_n(inner, 0.0), hi_s(inner), hi_n(inner);
    double ls = 0, ln = 0;
    for (std::size_t root = 1; root < outer; ++root) {
      for (std::size_t i = 0; i < inner; ++i) {
        lo_s[i] += at(sum, root - 1, i);
        lo_n[i] += at(count, root - 1, i);
        ls += at(sum, root - 1, i);
        ln += at(count, root - 1, i);
        hi_s[i] = all_s[i] - lo_s[i];
        hi_n[i] = all_n[i] - lo_n[i];
      }
      const double hn = total_n - ln;
      if (ln <= 0 || hn <= 0) continue;
      const double hs = total_s - ls;
      double gain = ls * ls / ln + hs * hs / hn - base;
      detail::Split1d low, high;
      if (max_leaves >= 3) {
        low = detail::best_split_1d(lo_s, lo_n);
        high = detail::best_split_1d(hi_s, hi_n);
        if (max_leaves == 3) {
          if (low.gain >= high.gain) high = {};
          else low = {};
        }
        gain += low.gain + high.gain;
      }
      if (gain > best.gain) best = {gain, axis, root, low, high};
    }
  }

  PairStumpFit fit{Grid<double>(rows, cols, total_s / total_n), best.gain};
  if (best.axis < 0) return fit;
  const int axis = best.axis;
  const std::size_t outer = axis == 0 ? rows : cols;
  const std::size_t inner = axis == 0 ? cols : rows;
  const auto cell = [&](std::size_t o, std::size_t i) -> std::pair<std::size_t, std::size_t> {
    return axis == 0 ? std::pair{o, i} : std::pair{i, o};
  };
  const auto fill = [&](std::size_t o0, std::size_t o1, std::size_t i0, std::size_t i1) {
    double s = 0, n = 0;
    for (std::size_t o = o0; o < o1; ++o)
      for (std::size_t i = i0; i < i1; ++i) {
        auto [m, k] = cell(o, i);
        s += sum(m, k);
        n += count(m, k);
      }
    const double v = s / n;
    for (std::size_t o = o0; o < o1; ++o)
      for (std::size_t i = i0; i < i1; ++i) {
        auto [m, k] = cell(o, i);
        fit.increments(m, k) = v;
      }
  };
  const auto fill_half = [&](std::size_t o0, std::size_t o1, const detail::Split1d& split) {
    if (split.position == 0) {
      fill(o0, o1, 0, inner);
    } else {
      fill(o0, o1, 0, split.position);
      fill(o0, o1, split.position, inner);
    }
  };
  fill_half(0, best.root, best.low);
  fill_half(best.root, outer, best.high);
  return fit;
}

// ---------------------------------------------------------------------------
// Early stopping

enum class StopDecision { Continue, Stop };

// Tracks the best validation loss; a round improves only if strictly lower.
struct EarlyStopper {
  int patience = 50;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_round = -1;
  int stall = 0;

  // Returns true when `round` set a new best.
  bool observe(int round, double loss) {
    if (loss < best_loss) {
      best_loss = loss;
      best_round = round;
      stall = 0;
      return true;
    }
    ++stall;
    return false;
  }

  StopDecision decision() const { return stall >= patience ? StopDecision::Stop : StopDecision::Continue; }
};

inline StopDecision early_stop_check(EarlyStopper& stopper, int round, double validation_loss) {
  stopper.observe(round, validation_loss);
  return stopper.decision();
}

// ---------------------------------------------------------------------------
// Boosting

struct TrainLogRecord {
  std::string stage;  // "univariate" or "interaction"
  int cycle = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

inline nlohmann::json to_json(const TrainLogRecord& r) {
  return {{"stage", r.stage}, {"cycle", r.cycle}, {"train_loss", r.train_loss}, {"validation_loss", r.validation_loss}};
}

struct CandidatePair {
  std::size_t first = 0, second = 1;
  double gain = 0.0;
};

// Interaction ranking comparator: larger gain first, ties by pair index.
inline bool rank_before(const CandidatePair& a, const CandidatePair& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  if (a.first != b.first) return a.first < b.first;
  return a.second < b.second;
}

struct BoostState {
  std::vector<double> train_score;
  std::vector<double> residuals;  // y - p on the training rows
  std::vector<double> validation_score;
  int round = 0;
  EarlyStopper stopper;
};

struct TrainResult {
  EbmModel model;
  std::vector<TrainLogRecord> log;
  std::vector<CandidatePair> ranking;  // every candidate pair, best first
  int univariate_best_round = 0;
  int interaction_best_round = 0;
  std::vector<std::string> warnings;
};

using TrainLogSink = std::function<void(const TrainLogRecord&)>;

// Owns the binned training/validation data and runs the two boosting stages.
class Trainer {
 public:
  Trainer(const Dataset& train, const Dataset& validation, TrainConfig config, TrainLogSink sink = {})
      : config_(config), sink_(std::move(sink)), names_(train.feature_names) {
    if (train.feature_names != validation.feature_names)
      throw TrainError("training and validation feature names differ");
    if (validation.rows.empty()) throw TrainError("validation set is empty");
    config_.validate();
    intercept_ = init_intercept(train);
    for (const auto& r : train.rows) y_.push_back(r.label);
    for (const auto& r : validation.rows) yv_.push_back(r.label);

    const std::size_t nf = names_.size();
    for (std::size_t f = 0; f < nf; ++f) {
      const auto col = train.column(f);
      auto uni = build_bins(col, static_cast<std::size_t>(config_.max_univariate_bins));
      if (uni.constant) warnings_.push_back("feature '" + names_[f] + "' is constant; it gets a single bin");
      uni_edges_.push_back(uni.edges);
      pair_edges_.push_back(build_bins(col, static_cast<std::size_t>(config_.interaction_bins)).edges);
      lo_.push_back(*std::min_element(col.begin(), col.end()));
      hi_.push_back(*std::max_element(col.begin(), col.end()));
    }
    const auto bin_rows = [&](const Dataset& ds, const std::vector<BinEdges>& edges) {
      std::vector<std::vector<std::uint16_t>> out(nf);
      for (std::size_t f = 0; f < nf; ++f) {
        out[f].reserve(ds.size());
        for (const auto& r : ds.rows) out[f].push_back(static_cast<std::uint16_t>(edges[f].bin_of(r.x[f])));
      }
      return out;
    };
    uni_bins_ = bin_rows(train, uni_edges_);
    uni_bins_val_ = bin_rows(validation, uni_edges_);
    pair_bins_ = bin_rows(train, pair_edges_);
    pair_bins_val_ = bin_rows(validation, pair_edges_);

    for (std::size_t f = 0; f < nf; ++f) {
      uni_tables_.emplace_back(uni_edges_[f].bin_count(), 0.0);
      std::vector<double> counts(uni_edges_[f].bin_count(), 0.0);
      for (auto b : uni_bins_[f]) counts[b] += 1.0;
      uni_counts_.push_back(std::move(counts));
    }
    reset_state();
  }

  const TrainConfig& config() const noexcept { return config_; }
  double intercept() const noexcept { return intercept_; }
  const BoostState& state() const noexcept { return state_; }
  const std::vector<std::vector<double>>& univariate_tables() const noexcept { return uni_tables_; }
  const std::vector<BinEdges>& univariate_edges() const noexcept { return uni_edges_; }
  const std::vector<BinEdges>& interaction_edges() const noexcept { return pair_edges_; }

  double validation_loss() const { return mean_loss(state_.validation_score, yv_); }
  double train_loss() const { return mean_loss(state_.train_score, y_); }

  // One round-robin cycle over all features in column order.
  void univariate_cycle() {
    for (std::size_t f = 0; f < names_.size(); ++f) {
      std::vector<double> sum(uni_tables_[f].size(), 0.0);
      const auto& bins = uni_bins_[f];
      for (std::size_t r = 0; r < y_.size(); ++r) sum[bins[r]] += state_.residuals[r];
      const auto stump = fit_stump_histogram(sum, uni_counts_[f], config_.max_leaves);
      std::vector<double> step(stump.increments.size());
      for (std::size_t b = 0; b < step.size(); ++b) {
        step[b] = config_.learning_rate * stump.increments[b];
        uni_tables_[f][b] += step[b];
      }
      apply_step(step, bins, uni_bins_val_[f]);
    }
    ++state_.round;
  }

  // Runs the univariate stage to max_rounds or early stop and restores the
  // best-validation snapshot.
  int boost_univariate() {
    state_.stopper = EarlyStopper{config_.early_stopping_rounds};
    state_.stopper.observe(0, validation_loss());
    auto snapshot = uni_tables_;
    for (int cycle = 1; cycle <= config_.max_rounds; ++cycle) {
      univariate_cycle();
      check_finite("univariate", cycle);
      const double vloss = validation_loss();
      emit({"univariate", cycle, train_loss(), vloss});
      if (state_.stopper.observe(cycle, vloss)) snapshot = uni_tables_;
      if (state_.stopper.decision() == StopDecision::Stop) break;
    }
    uni_tables_ = std::move(snapshot);
    recompute_scores();
    return state_.stopper.best_round;
  }

  // Fits one bivariate stump per candidate pair to the current residuals.
  std::vector<CandidatePair> rank_interactions() const {
    std::vector<CandidatePair> out;
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = i + 1; j < names_.size(); ++j) {
        auto [sum, count] = pair_histogram(i, j);
        out.push_back({i, j, fit_pair_stump(sum, count, config_.interaction_max_leaves).gain});
      }
    std::stable_sort(out.begin(), out.end(), rank_before);
    return out;
  }

  // Cyclic boosting over the selected pairs with univariate tables frozen.
  int boost_interactions(const std::vector<CandidatePair>& pairs) {
    pairs_ = pairs;
    pair_tables_.clear();
    for (const auto& p : pairs_)
      pair_tables_.emplace_back(pair_edges_[p.first].bin_count(), pair_edges_[p.second].bin_count(), 0.0);
    if (pairs_.empty()) return 0;
    state_.stopper = EarlyStopper{config_.early_stopping_rounds};
    state_.stopper.observe(0, validation_loss());
    auto snapshot = pair_tables_;
    for (int cycle = 1; cycle <= config_.max_rounds; ++cycle) {
      for (std::size_t k = 0; k < pairs_.size(); ++k) {
        const auto [i, j] = std::pair{pairs_[k].first, pairs_[k].second};
        auto [sum, count] = pair_histogram(i, j);
        const auto stump = fit_pair_stump(sum, count, config_.interaction_max_leaves);
        auto& table = pair_tables_[k];
        const std::size_t cols = table.cols();
        std::vector<double> step(table.size());
        for (std::size_t c = 0; c < step.size(); ++c) {
          step[c] = config_.learning_rate * stump.increments.values()[c];
          table.values()[c] += step[c];
        }
        for (std::size_t r = 0; r < y_.size(); ++r) {
          state_.train_score[r] += step[pair_bins_[i][r] * cols + pair_bins_[j][r]];
          state_.residuals[r] = y_[r] - sigmoid(state_.train_score[r]);
        }
        for (std::size_t r = 0; r < yv_.size(); ++r)
          state_.validation_score[r] += step[pair_bins_val_[i][r] * cols + pair_bins_val_[j][r]];
      }
      ++state_.round;
      check_finite("interaction", cycle);
      const double vloss = validation_loss();
      emit({"interaction", cycle, train_loss(), vloss});
      if (state_.stopper.observe(cycle, vloss)) snapshot = pair_tables_;
      if (state_.stopper.decision() == StopDecision::Stop) break;
    }
    pair_tables_ = std::move(snapshot);
    recompute_scores();
    return state_.stopper.best_round;
  }

  // Current (uncentered) model.
  EbmModel model() const {
    EbmModel m;
    m.intercept = intercept_;
    m.feature_names = names_;
    for (std::size_t f = 0; f < names_.size(); ++f) {
      UnivariateTerm t;
      t.feature = names_[f];
      t.feature_index = f;
      t.edges = uni_edges_[f];
      t.scores = uni_tables_[f];
      t.weights = uni_counts_[f];
      t.range_lo = lo_[f];
      t.range_hi = hi_[f];
      m.univariate.push_back(std::move(t));
    }
    for (std::size_t k = 0; k < pair_tables_.size(); ++k) {
      const auto i = pairs_[k].first, j = pairs_[k].second;
      InteractionTerm t;
      t.features = {names_[i], names_[j]};
      t.feature_indices = {i, j};
      t.edges_x = pair_edges_[i];
      t.edges_y = pair_edges_[j];
      t.matrix = pair_tables_[k];
      t.weights = pair_histogram(i, j).second;
      t.range_lo = {lo_[i], lo_[j]};
      t.range_hi = {hi_[i], hi_[j]};
      m.interactions.push_back(std::move(t));
    }
    return m;
  }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const std::vector<TrainLogRecord>& log() const noexcept { return log_; }

 private:
  static double mean_loss(const std::vector<double>& scores, const std::vector<int>& y) {
    double s = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) s += log_loss_from_logit(scores[r], y[r]);
    return s / static_cast<double>(y.size());
  }

  void emit(const TrainLogRecord& rec) {
    log_.push_back(rec);
    if (sink_) sink_(rec);
  }

  void apply_step(const std::vector<double>& step, const std::vector<std::uint16_t>& bins,
                  const std::vector<std::uint16_t>& val_bins) {
    for (std::size_t r = 0; r < y_.size(); ++r) {
      state_.train_score[r] += step[bins[r]];
      state_.residuals[r] = y_[r] - sigmoid(state_.train_score[r]);
    }
    for (std::size_t r = 0; r < yv_.size(); ++r) state_.validation_score[r] += step[val_bins[r]];
  }

  std::pair<Grid<double>, Grid<double>> pair_histogram(std::size_t i, std::size_t j) const {
    const std::size_t rows = pair_edges_[i].bin_count(), cols = pair_edges_[j].bin_count();
    Grid<double> sum(rows, cols, 0.0), count(rows, cols, 0.0);
    for (std::size_t r = 0; r < y_.size(); ++r) {
      const auto m = pair_bins_[i][r], n = pair_bins_[j][r];
      sum(m, n) += state_.residuals[r];
      count(m, n) += 1.0;
    }
    return {std::move(sum), std::move(count)};
  }

  void reset_state() {
    state_.train_score.assign(y_.size(), intercept_);
    state_.validation_score.assign(yv_.size(), intercept_);
    state_.residuals.resize(y_.size());
    for (std::size_t r = 0; r < y_.size(); ++r) state_.residuals[r] = y_[r] - sigmoid(intercept_);
    state_.round = 0;
  }

  // Rebuilds per-row scores from the tables so they match the model exactly.
  void recompute_scores() {
    const auto rebuild = [&](std::vector<double>& score, const std::vector<std::vector<std::uint16_t>>& ub,
                             const std::vector<std::vector<std::uint16_t>>& pb, std::size_t n) {
      for (std::size_t r = 0; r < n; ++r) {
        double s = intercept_;
        for (std::size_t f = 0; f < names_.size(); ++f) s += uni_tables_[f][ub[f][r]];
        for (std::size_t k = 0; k < pair_tables_.size(); ++k)
          s += pair_tables_[k](pb[pairs_[k].first][r], pb[pairs_[k].second][r]);
        score[r] = s;
      }
    };
    rebuild(state_.train_score, uni_bins_, pair_bins_, y_.size());
    rebuild(state_.validation_score, uni_bins_val_, pair_bins_val_, yv_.size());
    for (std::size_t r = 0; r < y_.size(); ++r) state_.residuals[r] = y_[r] - sigmoid(state_.train_score[r]);
  }

  void check_finite(const char* stage, int cycle) const {
    for (double s : state_.train_score)
      if (!std::isfinite(s))
        throw TrainError(std::string("non-finite score in ") + stage + " stage at round " + std::to_string(cycle));
  }

  TrainConfig config_;
  TrainLogSink sink_;
  std::vector<std::string> names_;
  double intercept_ = 0.0;
  std::vector<int> y_, yv_;
  std::vector<BinEdges> uni_edges_, pair_edges_;
  std::vector<double> lo_, hi_;
  std::vector<std::vector<std::uint16_t>> uni_bins_, uni_bins_val_, pair_bins_, pair_bins_val_;
  std::vector<std::vector<double>> uni_tables_, uni_counts_;
  std::vector<CandidatePair> pairs_;
  std::vector<Grid<double>> pair_tables_;
  BoostState state_;
  std::vector<TrainLogRecord> log_;
  std::vector<std::string> warnings_;
};

// Full pipeline: intercept, bins, univariate boosting, interaction ranking,
// interaction boosting, centering.
inline TrainResult train(const Dataset& train_set, const Dataset& validation_set, const TrainConfig& config,
                         TrainLogSink sink = {}) {
  Trainer trainer(train_set, validation_set, config, std::move(sink));
  TrainResult result;
  result.univariate_best_round = trainer.boost_univariate();
  result.ranking = trainer.rank_interactions();
  const auto m = std::min(result.ranking.size(), static_cast<std::size_t>(config.n_interactions));
  std::vector<CandidatePair> selected(result.ranking.begin(), result.ranking.begin() + static_cast<std::ptrdiff_t>(m));
  // keep the model's interaction list in pair order
  std::sort(selected.begin(), selected.end(), [](const CandidatePair& a, const CandidatePair& b) {
    return std::pair{a.first, a.second} < std::pair{b.first, b.second};
  });
  result.interaction_best_round = trainer.boost_interactions(selected);
  result.model = center_terms(trainer.model());
  result.model.provenance = Provenance::Trained;
  result.log = trainer.log();
  result.warnings = trainer.warnings();
  if (m < static_cast<std::size_t>(config.n_interactions))
    result.warnings.push_back("only " + std::to_string(m) + " candidate pairs; n_interactions clamped");
  return result;
}

// Convenience overload using the dataset's split assignment.
inline TrainResult train(const Dataset& ds, const TrainConfig& config, TrainLogSink sink = {}) {
  return train(ds.subset(Split::Train), ds.subset(Split::Validation), config, std::move(sink));
}

}  // namespace ebmedit

#endif  // EBMEDIT_TRAINER_HPP
