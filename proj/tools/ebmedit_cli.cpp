// ebmedit: ingest, train, edit, evaluate and explain additive liquefaction models.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ebmedit/ebmedit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ebmedit;

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

// Records inputs and outputs of one command and writes manifest.json.
class Run {
 public:
  Run(std::string command, fs::path dir, std::vector<std::string> argv)
      : command_(std::move(command)), dir_(std::move(dir)), argv_(std::move(argv)), started_(utc_now()) {
    fs::create_directories(dir_);
  }

  void input(const std::string& path) { inputs_[path] = file_hash(path); }
  void set(const std::string& key, json value) { config_[key] = std::move(value); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::ofstream open(const std::string& name) {
    const auto p = dir_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    outputs_.push_back(p.string());
    return out;
  }

  void wrote(const std::string& name) { outputs_.push_back(path(name)); }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

  // Checks every listed output exists, then writes the manifest.
  void finish(std::uint64_t seed) {
    json hashes = json::object();
    for (const auto& o : outputs_) {
      if (!fs::exists(o)) throw Error("output '" + o + "' was not written");
      hashes[o] = file_hash(o);
    }
    json m{{"command", command_},   {"argv", argv_},   {"config", config_},   {"seed", seed},
           {"inputs", inputs_},     {"outputs", hashes}, {"started", started_}, {"finished", utc_now()}};
    std::ofstream(dir_ / "manifest.json") << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  fs::path dir_;
  std::vector<std::string> argv_;
  std::string started_;
  json inputs_ = json::object();
  json config_ = json::object();
  std::vector<std::string> outputs_;
};

struct Globals {
  std::string config_path;
  std::uint64_t seed = 42;
  bool seed_set = false;
  std::string out_dir = "run";
  json config = json::object();

  void load() {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw Error("cannot open config '" + config_path + "'");
    config = json::parse(in);
  }
};

std::string safe_name(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

Dataset load_data(const std::string& path, Run& run) {
  run.input(path);
  return load_dataset(path, canonical_schema());
}

EbmModel load_model_input(const std::string& path, Run& run) {
  run.input(path);
  return load_model(path);
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string data;
  std::string schema_path;
  std::string site_col, label_col, displacement_col, split_col, x_col, y_col;
  std::vector<std::string> feature_cols;  // NAME=COLUMN
  std::size_t synthetic = 0;
  bool stratify = false;
  bool keep_split = false;
};

void cmd_ingest(const IngestArgs& a, Globals& g, Run& run) {
  Dataset ds;
  if (a.synthetic > 0) {
    SyntheticConfig sc = g.config.contains("synthetic") ? g.config.at("synthetic").get<SyntheticConfig>()
                                                        : default_synthetic_config();
    run.set("synthetic", sc);
    run.set("rows", a.synthetic);
    auto syn = generate_synthetic(sc, a.synthetic, g.seed);
    ds = std::move(syn.data);
  } else {
    if (a.data.empty()) throw Error("ingest needs --data or --synthetic");
    ColumnSchema schema;
    if (!a.schema_path.empty()) {
      run.input(a.schema_path);
      std::ifstream in(a.schema_path);
      schema = json::parse(in).get<ColumnSchema>();
    } else if (g.config.contains("schema")) {
      schema = g.config.at("schema").get<ColumnSchema>();
    }
    if (!a.site_col.empty()) schema.site_id = a.site_col == "-" ? "" : a.site_col;
    if (!a.label_col.empty()) schema.label = a.label_col;
    if (!a.displacement_col.empty()) {
      schema.displacement = a.displacement_col;
      if (a.label_col.empty()) schema.label.clear();
    }
    if (!a.split_col.empty()) schema.split = a.split_col;
    if (!a.x_col.empty()) schema.coord_x = a.x_col;
    if (!a.y_col.empty()) schema.coord_y = a.y_col;
    if (!a.feature_cols.empty()) {
      schema.features.clear();
      for (const auto& f : a.feature_cols) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) schema.features.emplace_back(f, f);
        else schema.features.emplace_back(f.substr(0, eq), f.substr(eq + 1));
      }
    }
    run.set("schema", schema);
    run.input(a.data);
    ds = load_dataset(a.data, schema);
  }

  const bool has_split = !ds.indices(Split::Train).empty();
  if (!(a.keep_split && has_split)) {
    SplitRatios ratios;
    if (g.config.contains("split")) {
      const auto& s = g.config.at("split");
      ratios = {s.value("train", ratios.train), s.value("validation", ratios.validation), s.value("test", ratios.test)};
    }
    ds = split_dataset(std::move(ds), ratios, g.seed, a.stratify);
    run.set("split", {{"train", ratios.train}, {"validation", ratios.validation}, {"test", ratios.test},
                      {"stratify", a.stratify}});
  }

  write_dataset(ds, run.path("dataset.csv"));
  run.wrote("dataset.csv");

  std::vector<FeatureSummary> summaries;
  for (const auto& f : ds.feature_names) summaries.push_back(summarize_feature(ds, f));
  const auto flags = long_tail_flags(summaries);
  auto csv = run.open("feature_summary.csv");
  csv << "feature,min,q1,q3,iqr,lower_fence,upper_fence,max,outlier_count,long_tail\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    csv << s.feature << ',' << format_double(s.min) << ',' << format_double(s.q1) << ',' << format_double(s.q3) << ','
        << format_double(s.iqr) << ',' << format_double(s.lower_fence) << ',' << format_double(s.upper_fence) << ','
        << format_double(s.max) << ',' << s.outlier_count << ',' << (flags[i] ? "true" : "false") << '\n';
  }
  std::cout << "rows " << ds.rows.size() << " (train " << ds.indices(Split::Train).size() << ", validation "
            << ds.indices(Split::Validation).size() << ", test " << ds.indices(Split::Test).size() << ")\n";
  for (std::size_t i = 0; i < summaries.size(); ++i)
    std::cout << "  " << summaries[i].feature << ": " << summaries[i].outlier_count << " outliers"
              << (flags[i] ? " [long-tail]" : "") << '\n';
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::optional<int> max_rounds, interactions, early_stopping;
  std::optional<double> learning_rate;
};

void cmd_train(const TrainArgs& a, Globals& g, Run& run) {
  TrainConfig cfg = g.config.contains("train") ? g.config.at("train").get<TrainConfig>() : TrainConfig{};
  if (a.max_rounds) cfg.max_rounds = *a.max_rounds;
  if (a.interactions) cfg.n_interactions = *a.interactions;
  if (a.early_stopping) cfg.early_stopping_rounds = *a.early_stopping;
  if (a.learning_rate) cfg.learning_rate = *a.learning_rate;
  if (g.seed_set) cfg.seed = g.seed;
  run.set("train", cfg);

  const auto ds = load_data(a.data, run);
  auto log = run.open("train_log.jsonl");
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = train(ds, cfg, [&](const TrainLogRecord& r) { log << to_json(r).dump() << '\n'; });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log.close();

  save_model(result.model, run.path("model.json"));
  run.wrote("model.json");

  auto rank = run.open("interaction_ranking.csv");
  rank << "rank,pair,gain\n";
  for (std::size_t i = 0; i < result.ranking.size(); ++i) {
    const auto& p = result.ranking[i];
    rank << i + 1 << ',' << ds.feature_names[p.first] << " x " << ds.feature_names[p.second] << ','
         << format_double(p.gain) << '\n';
  }
  rank.close();

  json ev = json::object();
  for (Split s : {Split::Train, Split::Validation, Split::Test})
    if (!ds.indices(s).empty()) ev[to_string(s)] = evaluate(result.model, ds, s).to_json();
  run.write_json("eval.json", ev);

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "model " << model_hash(result.model) << "  univariate best cycle " << result.univariate_best_round
            << ", interaction best cycle " << result.interaction_best_round << ", " << std::fixed
            << std::setprecision(1) << seconds << " s\n";
  if (ev.contains("test"))
    std::cout << "test accuracy " << format_fixed(ev["test"]["accuracy"].get<double>(), 3) << "  auc "
              << (ev["test"]["auc"].is_number() ? format_fixed(ev["test"]["auc"].get<double>(), 3) : "n/a") << '\n';
}

// ---------------------------------------------------------------------------

struct EditArgs {
  std::string model, spec = "default", data;
};

void cmd_edit(const EditArgs& a, Globals&, Run& run) {
  const auto model = load_model_input(a.model, run);
  EditSpec spec;
  if (a.spec == "default") {
    spec = default_edit_spec();
  } else {
    run.input(a.spec);
    spec = load_edit_spec(a.spec);
  }
  run.set("edit_spec", to_json(spec));
  const auto result = apply_domain_edits(model, spec);
  save_model(result.model, run.path("edited_model.json"));
  run.wrote("edited_model.json");

  json summary{{"model_hash", model_hash(result.model)}, {"univariate", json::array()}, {"interactions", json::array()}};
  for (const auto& u : result.univariate) {
    json j{{"feature", u.feature}, {"replacement", to_json(u.replacement)}, {"sse", u.sse}};
    if (u.trust) j["selected_points"] = u.trust->selected_count();
    summary["univariate"].push_back(std::move(j));
  }
  for (const auto& r : result.reports) {
    summary["interactions"].push_back(report_summary_json(r));
    const auto& term = result.model.interactions[result.model.find_interaction(
        result.model.feature_index(r.pair[0]), result.model.feature_index(r.pair[1]))];
    auto out = run.open("edit_reports/" + safe_name(r.pair[0] + "_x_" + r.pair[1]) + ".csv");
    write_edit_report_csv(out, r, term);
  }
  run.write_json("edit_summary.json", summary);

  if (!a.data.empty()) {
    const auto ds = load_data(a.data, run);
    std::vector<std::pair<std::string, EvalReport>> rows;
    for (Split s : {Split::Validation, Split::Test}) {
      if (ds.indices(s).empty()) continue;
      rows.emplace_back(std::string("original/") + to_string(s), evaluate(model, ds, s));
      rows.emplace_back(std::string("edited/") + to_string(s), evaluate(result.model, ds, s));
    }
    write_eval_table(std::cout, rows);
  }
  for (const auto& r : result.reports)
    std::cout << r.pair[0] << " x " << r.pair[1] << ": replaced " << format_fixed(100.0 * r.replaced_fraction, 1)
              << "% of cells\n";
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> models;  // [NAME=]PATH
  std::string data;
  std::vector<std::string> splits = {"validation", "test"};
  double threshold = 0.5;
};

void cmd_eval(const EvalArgs& a, Globals&, Run& run) {
  const auto ds = load_data(a.data, run);
  std::vector<std::pair<std::string, EvalReport>> rows;
  json out = json::object();
  for (const auto& spec : a.models) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const auto model = load_model_input(path, run);
    for (const auto& sname : a.splits) {
      const auto split = parse_split(sname);
      auto r = evaluate(model, ds, split, a.threshold);
      out[name][sname] = r.to_json();
      rows.emplace_back(name + "/" + sname, std::move(r));
    }
  }
  run.write_json("eval.json", out);
  auto table = run.open("eval_table.txt");
  write_eval_table(table, rows);
  write_eval_table(std::cout, rows);
}

// ---------------------------------------------------------------------------

struct ExplainArgs {
  std::string model, data;
  std::optional<std::int64_t> site;
  std::string split = "train";
};

void cmd_explain(const ExplainArgs& a, Globals&, Run& run) {
  const auto model = load_model_input(a.model, run);
  const auto ds = load_data(a.data, run);
  if (a.site) {
    const auto e = local_explain(model, ds, *a.site);
    const std::string name = "explain_site_" + std::to_string(*a.site);
    auto csv = run.open(name + ".csv");
    csv << "term,contribution\nintercept," << format_double(e.intercept) << '\n';
    for (const auto& c : e.contributions) csv << c.term << ',' << format_double(c.value) << '\n';
    csv.close();
    run.write_json(name + ".json", e.to_json());
    std::cout << "site " << *a.site << "  p=" << format_fixed(e.probability, 3) << "  predicted " << e.predicted
              << (e.label ? "  label " + std::to_string(*e.label) : "") << '\n';
    for (const auto& c : e.contributions) std::cout << "  " << std::setw(20) << std::left << c.term << format_fixed(c.value, 3) << '\n';
    std::cout << "  " << std::setw(20) << std::left << "intercept" << format_fixed(e.intercept, 3) << '\n';
  } else {
    const auto ranking = importance(model, ds, parse_split(a.split));
    auto csv = run.open("importance.csv");
    write_importance_csv(csv, ranking);
    csv.close();
    for (std::size_t i = 0; i < ranking.size(); ++i)
      std::cout << std::setw(3) << i + 1 << "  " << std::setw(20) << std::left << ranking[i].term << std::right
                << format_fixed(ranking[i].importance, 3) << '\n';
  }
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string base, edited, data, split = "test";
};

void cmd_compare(const CompareArgs& a, Globals&, Run& run) {
  const auto base = load_model_input(a.base, run);
  const auto edited = load_model_input(a.edited, run);
  const auto ds = load_data(a.data, run);
  const auto map = compare_models(base, edited, ds, parse_split(a.split));
  auto csv = run.open("transitions.csv");
  write_transitions_csv(csv, map);
  csv.close();
  run.write_json("transitions.json", map.to_json());
  std::cout << "before\\after    TP     TN     FP     FN\n";
  for (int i = 0; i < 4; ++i) {
    std::cout << std::setw(12) << std::left << to_string(Outcome(i)) << std::right;
    for (int j = 0; j < 4; ++j) std::cout << std::setw(7) << map.counts[i][j];
    std::cout << '\n';
  }
}

// ---------------------------------------------------------------------------

struct ExportArgs {
  std::string model;
  std::string feature;
};

void export_univariate(Run& run, const UnivariateTerm& t) {
  auto csv = run.open("curves/" + safe_name(t.feature) + ".csv");
  const auto centers = bin_centers(t.edges, t.range_lo, t.range_hi);
  csv << "bin,lower,upper,center,score,weight" << (t.edited() ? ",learned_score" : "") << '\n';
  for (std::size_t b = 0; b < t.scores.size(); ++b) {
    const double lo = b == 0 ? t.range_lo : t.edges.cuts[b - 1];
    const double hi = b == t.edges.cuts.size() ? t.range_hi : t.edges.cuts[b];
    csv << b << ',' << format_double(lo) << ',' << format_double(hi) << ',' << format_double(centers[b]) << ','
        << format_double(t.scores[b]) << ',' << format_double(t.weights[b]);
    if (t.edited()) csv << ',' << format_double(t.learned_scores[b]);
    csv << '\n';
  }
}

void export_interaction(Run& run, const EbmModel& model, std::size_t k) {
  const auto& t = model.interactions[k];
  const auto cx = bin_centers(t.edges_x, t.range_lo[0], t.range_hi[0]);
  const auto cy = bin_centers(t.edges_y, t.range_lo[1], t.range_hi[1]);
  const auto report = t.edited() ? recorded_interaction_report(model, k) : std::nullopt;
  auto csv = run.open("matrices/" + safe_name(t.features[0] + "_x_" + t.features[1]) + ".csv");
  csv << "m,n," << t.features[0] << "_center," << t.features[1] << "_center,score,weight"
      << (t.edited() ? ",learned_score" : "") << (report ? ",replaced" : "") << '\n';
  for (std::size_t m = 0; m < cx.size(); ++m)
    for (std::size_t n = 0; n < cy.size(); ++n) {
      csv << m << ',' << n << ',' << format_double(cx[m]) << ',' << format_double(cy[n]) << ','
          << format_double(t.matrix(m, n)) << ',' << format_double(t.weights(m, n));
      if (t.edited()) csv << ',' << format_double(t.learned_matrix(m, n));
      if (report) csv << ',' << static_cast<int>(report->mask(m, n));
      csv << '\n';
    }
}

void cmd_export(const ExportArgs& a, Globals&, Run& run) {
  const auto model = load_model_input(a.model, run);
  if (!a.feature.empty()) {
    export_univariate(run, model.term(a.feature));
    return;
  }
  for (const auto& t : model.univariate) export_univariate(run, t);
  for (std::size_t k = 0; k < model.interactions.size(); ++k) export_interaction(run, model, k);
  std::cout << model.univariate.size() << " curves, " << model.interactions.size() << " matrices\n";
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string model, data, host = "127.0.0.1", static_dir;
  int port = 8080;
};

void cmd_serve(const ServeArgs& a, Globals&) {
  ServiceConfig cfg;
  if (!a.model.empty()) cfg.default_model = a.model;
  if (!a.data.empty()) cfg.default_dataset = a.data;
  cfg.static_dir = a.static_dir;
  Service service(cfg);
  httplib::Server server;
  service.bind(server);
  std::cout << "listening on http://" << a.host << ':' << a.port << std::endl;
  if (!server.listen(a.host, a.port)) throw Error("cannot bind " + a.host + ":" + std::to_string(a.port));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train, edit and explain additive liquefaction models"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config with train/schema/split/synthetic sections");
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out-dir", g.out_dir, "Run directory for outputs");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load a CSV (or generate synthetic data), split it, summarize features");
  c_ingest->add_option("--data", ingest.data, "Input CSV");
  c_ingest->add_option("--schema", ingest.schema_path, "Column schema JSON");
  c_ingest->add_option("--site-col", ingest.site_col, "Site id column ('-' numbers rows)");
  c_ingest->add_option("--feature", ingest.feature_cols, "Feature NAME=COLUMN (repeatable)");
  c_ingest->add_option("--label-col", ingest.label_col, "Binary label column");
  c_ingest->add_option("--displacement-col", ingest.displacement_col, "Displacement column in metres");
  c_ingest->add_option("--split-col", ingest.split_col, "Existing split column");
  c_ingest->add_option("--x-col", ingest.x_col, "Easting column");
  c_ingest->add_option("--y-col", ingest.y_col, "Northing column");
  c_ingest->add_option("--synthetic", ingest.synthetic, "Generate N synthetic rows instead of reading a CSV");
  c_ingest->add_flag("--stratify", ingest.stratify, "Stratify the split by label");
  c_ingest->add_flag("--keep-split", ingest.keep_split, "Keep the split column from the input");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model on an ingested dataset");
  c_train->add_option("--data", tr.data, "Ingested dataset CSV")->required();
  c_train->add_option("--max-rounds", tr.max_rounds, "Boosting cycles per stage");
  c_train->add_option("--interactions", tr.interactions, "Number of interaction terms");
  c_train->add_option("--early-stopping", tr.early_stopping, "Patience in cycles");
  c_train->add_option("--learning-rate", tr.learning_rate, "Learning rate");

  EditArgs ed;
  auto* c_edit = app.add_subcommand("edit", "Apply an edit spec to a model");
  c_edit->add_option("--model", ed.model, "Model JSON")->required();
  c_edit->add_option("--spec", ed.spec, "Edit spec JSON, or 'default'");
  c_edit->add_option("--data", ed.data, "Dataset for a before/after metrics table");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate models");
  c_eval->add_option("--model", ev.models, "[NAME=]PATH (repeatable)")->required();
  c_eval->add_option("--data", ev.data, "Dataset CSV")->required();
  c_eval->add_option("--split", ev.splits, "Splits to evaluate");
  c_eval->add_option("--threshold", ev.threshold, "Decision threshold");

  ExplainArgs ex;
  auto* c_explain = app.add_subcommand("explain", "Local explanation for a site, or global importance");
  c_explain->add_option("--model", ex.model, "Model JSON")->required();
  c_explain->add_option("--data", ex.data, "Dataset CSV")->required();
  c_explain->add_option("--site", ex.site, "Site id");
  c_explain->add_option("--split", ex.split, "Split for importance");

  CompareArgs cmp;
  auto* c_compare = app.add_subcommand("compare", "Outcome transitions between two models");
  c_compare->add_option("--base", cmp.base, "Original model")->required();
  c_compare->add_option("--edited", cmp.edited, "Edited model")->required();
  c_compare->add_option("--data", cmp.data, "Dataset CSV")->required();
  c_compare->add_option("--split", cmp.split, "Split");

  ExportArgs exp;
  auto* c_export = app.add_subcommand("export-curves", "Write curve and matrix tables");
  c_export->add_option("--model", exp.model, "Model JSON")->required();
  c_export->add_option("--feature", exp.feature, "Only this feature's curve");

  ServeArgs sv;
  auto* c_serve = app.add_subcommand("serve", "Run the local HTTP service");
  c_serve->add_option("--model", sv.model, "Default model for new sessions");
  c_serve->add_option("--data", sv.data, "Default dataset for new sessions");
  c_serve->add_option("--host", sv.host, "Bind address");
  c_serve->add_option("--port", sv.port, "Port");
  c_serve->add_option("--static", sv.static_dir, "Directory served at /");

  CLI11_PARSE(app, argc, argv);

  try {
    g.load();
    g.seed_set = seed_opt->count() > 0;
    if (!g.seed_set && g.config.contains("seed")) {
      g.seed = g.config.at("seed").get<std::uint64_t>();
      g.seed_set = true;
    }
    if (c_serve->parsed()) {
      cmd_serve(sv, g);
      return 0;
    }
    const auto* sub = app.get_subcommands().front();
    Run run(sub->get_name(), g.out_dir, std::vector<std::string>(argv, argv + argc));
    if (!g.config.empty()) run.set("config_file", g.config);
    if (c_ingest->parsed()) cmd_ingest(ingest, g, run);
    else if (c_train->parsed()) cmd_train(tr, g, run);
    else if (c_edit->parsed()) cmd_edit(ed, g, run);
    else if (c_eval->parsed()) cmd_eval(ev, g, run);
    else if (c_explain->parsed()) cmd_explain(ex, g, run);
    else if (c_compare->parsed()) cmd_compare(cmp, g, run);
    else if (c_export->parsed()) cmd_export(exp, g, run);
    run.finish(g.seed);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& d : e.details()) std::cerr << "  " << d << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
