#ifndef EBMEDIT_SERVICE_HPP
#define EBMEDIT_SERVICE_HPP

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "data.hpp"
#include "editor.hpp"
#include "explain.hpp"
#include "model.hpp"

namespace ebmedit {

inline constexpr std::size_t kUndoDepth = 64;

struct Snapshot {
  std::vector<nlohmann::json> applied;
  EbmModel working;
};

struct Session {
  std::string id;
  EbmModel base;
  EbmModel working;
  std::vector<nlohmann::json> applied;  // edit specs in the order they were applied
  std::deque<Snapshot> undo;
  std::shared_ptr<const Dataset> data;

  std::mutex write;                  // held for the whole of a mutation
  mutable std::shared_mutex state;   // guards the fields above
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

inline Response error_response(int status, const std::string& message) { return {status, {{"error", message}}}; }

struct ServiceConfig {
  std::optional<std::string> default_model;    // used when POST /sessions names none
  std::optional<std::string> default_dataset;
  ColumnSchema schema = canonical_schema();
  std::string static_dir;                      // empty: no static route
};

class Service {
 public:
  explicit Service(ServiceConfig config = {}) : config_(std::move(config)) {}

  // Body: {"model": <path or inline model>, "dataset": <path>, "schema": {...}}.
  Response create_session(const nlohmann::json& body) {
    return guarded([&]() -> Response {
      EbmModel model;
      if (body.contains("model") && body.at("model").is_object()) model = model_from_json(body.at("model"));
      else if (body.contains("model")) model = load_model(body.at("model").get<std::string>());
      else if (config_.default_model) model = load_model(*config_.default_model);
      else return error_response(400, "no model given and no default model configured");
      model.validate();

      ColumnSchema schema = body.contains("schema") ? body.at("schema").get<ColumnSchema>() : config_.schema;
      std::shared_ptr<const Dataset> data;
      if (body.contains("dataset")) data = std::make_shared<Dataset>(load_dataset(body.at("dataset").get<std::string>(), schema));
      else if (config_.default_dataset) data = std::make_shared<Dataset>(load_dataset(*config_.default_dataset, schema));
      return create_session(std::move(model), std::move(data));
    });
  }

  Response create_session(EbmModel model, std::shared_ptr<const Dataset> data) {
    auto s = std::make_shared<Session>();
    s->base = model;
    s->working = std::move(model);
    s->data = std::move(data);
    {
      std::unique_lock lock(sessions_mutex_);
      s->id = "s" + std::to_string(++next_id_);
      sessions_[s->id] = s;
    }
    return {201, {{"session", s->id}, {"model_hash", model_hash(s->base)}, {"has_dataset", s->data != nullptr}}};
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  Response terms(const std::string& id) const {
    return with_session(id, [&](const Session& s) -> Response {
      std::shared_lock lock(s.state);
      auto j = model_to_json(s.working);
      for (auto& t : j["univariate"]) {
        t["kind"] = "univariate";
        t["name"] = t["feature"];
        t["edited"] = t.contains("learned_scores");
      }
      for (auto& t : j["interactions"]) {
        t["kind"] = "interaction";
        t["name"] = t["features"][0].get<std::string>() + " x " + t["features"][1].get<std::string>();
        t["edited"] = t.contains("learned_matrix");
      }
      j["session"] = s.id;
      j["model_hash"] = model_hash(s.working);
      j["term_count"] = s.working.term_count();
      return {200, std::move(j)};
    });
  }

  // Body: one univariate edit entry as in an edit spec. Side-effect free.
  Response fit_preview(const std::string& id, const nlohmann::json& body) const {
    return with_session(id, [&](const Session& s) -> Response {
      const auto spec = edit_spec_from_json({{"univariate", nlohmann::json::array({body})}});
      std::shared_lock lock(s.state);
      const auto resolved = resolve_univariate_edit(s.working, spec.univariate.at(0));
      nlohmann::json j{{"feature", resolved.feature}, {"replacement", to_json(resolved.replacement)}, {"sse", resolved.sse}};
      const auto& samples = resolved.trust ? resolved.trust->samples
                                           : sample_curve(s.working, resolved.feature, 100, CurveSource::Learned);
      nlohmann::json pts = nlohmann::json::array();
      for (std::size_t i = 0; i < samples.size(); ++i)
        pts.push_back({{"x", samples[i].x},
                       {"learned", samples[i].score},
                       {"fitted", evaluate(resolved.replacement, samples[i].x)},
                       {"selected", resolved.trust ? static_cast<bool>(resolved.trust->selected[i]) : true}});
      j["points"] = std::move(pts);
      if (resolved.trust) j["selected_count"] = resolved.trust->selected_count();
      return {200, std::move(j)};
    });
  }

  // Body: {"pair": [a, b], "metric": "range"|"relative", "epsilon": x|null}. Side-effect free.
  Response replacement_preview(const std::string& id, const nlohmann::json& body) const {
    return with_session(id, [&](const Session& s) -> Response {
      const auto spec = edit_spec_from_json({{"interactions", nlohmann::json::array({body})}});
      const auto& e = spec.interactions.at(0);
      std::shared_lock lock(s.state);
      const auto [model, report] = apply_interaction_edit(s.working, e.pair[0], e.pair[1], e.metric, e.epsilon);
      auto j = report_summary_json(report);
      nlohmann::json mask = nlohmann::json::array(), delta = nlohmann::json::array();
      double dmax = 0.0;
      std::size_t infinite = 0;
      for (std::size_t m = 0; m < report.mask.rows(); ++m) {
        nlohmann::json mrow = nlohmann::json::array(), drow = nlohmann::json::array();
        for (std::size_t n = 0; n < report.mask.cols(); ++n) {
          mrow.push_back(static_cast<int>(report.mask(m, n)));
          const double d = report.delta(m, n);
          if (std::isinf(d)) ++infinite;
          else dmax = std::max(dmax, d);
          drow.push_back(std::isinf(d) ? nlohmann::json(nullptr) : nlohmann::json(d));
        }
        mask.push_back(std::move(mrow));
        delta.push_back(std::move(drow));
      }
      j["mask"] = std::move(mask);
      j["delta"] = std::move(delta);
      j["delta_max_finite"] = dmax;
      j["delta_infinite_cells"] = infinite;
      j["synthesized"] = detail::grid_to_json(report.synthesized);
      j["mixed"] = detail::grid_to_json(report.after);
      return {200, std::move(j)};
    });
  }

  // Body: an edit spec. Applies it to the working model; 409 while another
  // mutation of the same session is running.
  Response apply_edit(const std::string& id, const nlohmann::json& body) {
    return with_mutable_session(id, [&](Session& s) -> Response {
      const auto spec = edit_spec_from_json(body);
      EbmModel before;
      {
        std::shared_lock lock(s.state);
        before = s.working;
      }
      auto result = apply_domain_edits(before, spec);
      nlohmann::json reports = nlohmann::json::array();
      for (const auto& r : result.reports) reports.push_back(report_summary_json(r));
      {
        std::unique_lock lock(s.state);
        s.undo.push_back({s.applied, s.working});
        if (s.undo.size() > kUndoDepth) s.undo.pop_front();
        s.applied.push_back(to_json(spec));
        s.working = std::move(result.model);
      }
      auto j = summary(s);
      j["reports"] = std::move(reports);
      j["evaluation"] = eval_payload(s, before);
      return {200, std::move(j)};
    });
  }

  Response undo(const std::string& id) {
    return with_mutable_session(id, [&](Session& s) -> Response {
      {
        std::unique_lock lock(s.state);
        if (s.undo.empty()) return error_response(409, "nothing to undo");
        s.applied = std::move(s.undo.back().applied);
        s.working = std::move(s.undo.back().working);
        s.undo.pop_back();
      }
      return {200, summary(s)};
    });
  }

  Response eval(const std::string& id) const {
    return with_session(id, [&](const Session& s) -> Response {
      if (!s.data) return error_response(409, "session has no dataset");
      std::shared_lock lock(s.state);
      return {200, eval_payload(s, s.base)};
    });
  }

  Response explain(const std::string& id, const std::string& site, const std::string& which) const {
    return with_session(id, [&](const Session& s) -> Response {
      if (!s.data) return error_response(409, "session has no dataset");
      if (which != "base" && which != "working") return error_response(400, "which must be 'base' or 'working'");
      std::int64_t site_id = 0;
      try {
        std::size_t used = 0;
        site_id = std::stoll(site, &used);
        if (used != site.size()) throw std::invalid_argument(site);
      } catch (const std::exception&) {
        return error_response(400, "site id must be an integer");
      }
      if (!s.data->find_site(site_id)) return error_response(404, "unknown site " + site);
      std::shared_lock lock(s.state);
      auto j = local_explain(which == "base" ? s.base : s.working, *s.data, site_id).to_json();
      j["which"] = which;
      return {200, std::move(j)};
    });
  }

  void bind(httplib::Server& server) {
    const auto send = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    const auto parse = [](const httplib::Request& req) {
      return req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
    };
    const auto with_body = [=](auto fn) {
      return [=](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
          body = parse(req);
        } catch (const nlohmann::json::exception& e) {
          send(res, error_response(400, std::string("malformed JSON body: ") + e.what()));
          return;
        }
        send(res, fn(req, body));
      };
    };
    server.Post("/sessions", with_body([this](const httplib::Request&, const nlohmann::json& b) { return create_session(b); }));
    server.Get("/sessions/:id/terms", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, terms(req.path_params.at("id")));
    });
    server.Post("/sessions/:id/fit-preview", with_body([this](const httplib::Request& req, const nlohmann::json& b) {
      return fit_preview(req.path_params.at("id"), b);
    }));
    server.Post("/sessions/:id/replacement-preview", with_body([this](const httplib::Request& req, const nlohmann::json& b) {
      return replacement_preview(req.path_params.at("id"), b);
    }));
    server.Post("/sessions/:id/edits", with_body([this](const httplib::Request& req, const nlohmann::json& b) {
      return apply_edit(req.path_params.at("id"), b);
    }));
    server.Post("/sessions/:id/undo", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, undo(req.path_params.at("id")));
    });
    server.Get("/sessions/:id/eval", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, eval(req.path_params.at("id")));
    });
    server.Get("/sessions/:id/explain/:site", [=, this](const httplib::Request& req, httplib::Response& res) {
      const auto which = req.has_param("which") ? req.get_param_value("which") : std::string("working");
      send(res, explain(req.path_params.at("id"), req.path_params.at("site"), which));
    });
    if (!config_.static_dir.empty()) server.set_mount_point("/", config_.static_dir);
  }

 private:
  template <typename F>
  static Response guarded(F&& fn) {
    try {
      return fn();
    } catch (const InsufficientPointsError& e) {
      return error_response(422, e.what());
    } catch (const EditError& e) {
      return error_response(422, e.what());
    } catch (const ModelError& e) {
      return error_response(422, e.what());
    } catch (const DataError& e) {
      return error_response(422, e.what());
    } catch (const nlohmann::json::exception& e) {
      return error_response(400, e.what());
    } catch (const std::exception& e) {
      return error_response(500, e.what());
    }
  }

  template <typename F>
  Response with_session(const std::string& id, F&& fn) const {
    const auto s = find(id);
    if (!s) return error_response(404, "unknown session '" + id + "'");
    return guarded([&] { return fn(*s); });
  }

  template <typename F>
  Response with_mutable_session(const std::string& id, F&& fn) {
    const auto s = find(id);
    if (!s) return error_response(404, "unknown session '" + id + "'");
    std::unique_lock write(s->write, std::try_to_lock);
    if (!write.owns_lock()) return error_response(409, "another edit is being applied to this session");
    return guarded([&] { return fn(*s); });
  }

  static nlohmann::json summary(const Session& s) {
    std::shared_lock lock(s.state);
    return {{"session", s.id},
            {"model_hash", model_hash(s.working)},
            {"base_hash", model_hash(s.base)},
            {"provenance", to_string(s.working.provenance)},
            {"edits_applied", s.applied.size()},
            {"edit_log_length", s.working.edit_log.size()},
            {"undo_depth", s.undo.size()}};
  }

  // Metrics of the working model against `reference`, per split.
  static nlohmann::json eval_payload(const Session& s, const EbmModel& reference) {
    if (!s.data) return nullptr;
    nlohmann::json out = nlohmann::json::object();
    for (Split split : {Split::Validation, Split::Test}) {
      if (s.data->indices(split).empty()) continue;
      const auto a = evaluate(reference, *s.data, split);
      const auto b = evaluate(s.working, *s.data, split);
      const auto aj = a.to_json(), bj = b.to_json();
      nlohmann::json delta;
      for (const char* k : {"accuracy", "precision", "recall", "f1", "auc"})
        delta[k] = aj[k].is_number() && bj[k].is_number() ? nlohmann::json(bj[k].get<double>() - aj[k].get<double>())
                                                           : nlohmann::json(nullptr);
      out[to_string(split)] = {{"reference", aj}, {"working", bj}, {"delta", delta}};
    }
    return out;
  }

  ServiceConfig config_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_id_ = 0;
};

}  // namespace ebmedit

#endif  // EBMEDIT_SERVICE_HPP
