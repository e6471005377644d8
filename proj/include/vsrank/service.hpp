#pragma once

// JSON-over-HTTP session API for answering queries by hand. Sessions are
// event-sourced: config plus answers, replayed on restart from a state dir.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

// Eigen must come before httplib: a system header pulled in by httplib
// defines a macro that collides with Eigen internals.
#include "vsrank/evalkit.hpp"
#include "vsrank/io.hpp"
#include "vsrank/learner.hpp"
#include "vsrank/measures.hpp"

#include <httplib.h>
#include <json.hpp>

namespace vsrank {

struct Reply {
  int status = 200;
  ojson body;
};

class Ruleset {
 public:
  explicit Ruleset(RuleTable table)
      : table_(std::move(table)), features_(normalize_features(table_.values, table_.measure_names)) {}

  const RuleTable& table() const { return table_; }
  const FeatureTable& features() const { return features_; }
  int dim() const { return static_cast<int>(features_.dim()); }

  std::shared_ptr<const LearningProblem> problem(int k) const {
    std::lock_guard lock(mu_);
    auto& slot = problems_[k];
    if (!slot) slot = std::make_shared<const LearningProblem>(make_problem(features_.normalized, k));
    return slot;
  }

  /// Rule payload for the UI: items, counts, raw and normalized values.
  ojson render(std::size_t local) const {
    const std::size_t id = features_.kept.at(local);
    const Rule& r = table_.rules.at(id);
    ojson j;
    j["id"] = id;
    j["antecedent"] = r.antecedent;
    j["consequent"] = r.consequent;
    j["counts"] = {{"n", r.counts.n}, {"n_x", r.counts.n_x}, {"n_y", r.counts.n_y}, {"n_xy", r.counts.n_xy}};
    ojson raw = ojson::object(), norm = ojson::object();
    for (std::size_t c = 0; c < features_.dim(); ++c) {
      raw[features_.names[c]] = features_.raw[local][c];
      norm[features_.names[c]] = features_.normalized[local][c];
    }
    j["raw"] = std::move(raw);
    j["normalized"] = std::move(norm);
    return j;
  }

 private:
  RuleTable table_;
  FeatureTable features_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const LearningProblem>> problems_;
};

class BadRequest : public Error {
 public:
  using Error::Error;
};

inline SessionConfig session_config_from_json(const ojson& b) {
  if (!b.is_object()) throw BadRequest("request body must be a JSON object");
  SessionConfig cfg;
  try {
    cfg.k = b.value("k", cfg.k);
    cfg.max_iterations = b.value("iterations", cfg.max_iterations);
    cfg.seed = b.value("seed", cfg.seed);
    cfg.stop_on_indifference = b.value("stop_on_indifference", cfg.stop_on_indifference);
    cfg.exact_cut_verification = b.value("exact_cut_verification", cfg.exact_cut_verification);
    cfg.search_ratio = b.value("search_ratio", cfg.search_ratio);
    cfg.leaf_capacity = b.value("leaf_capacity", cfg.leaf_capacity);
    if (b.contains("center")) {
      auto c = parse_center_kind(b.at("center").get<std::string>());
      if (!c) throw BadRequest("center must be chebyshev or minkowski");
      cfg.center_kind = *c;
    }
    if (b.contains("selection")) {
      auto s = parse_selection(b.at("selection").get<std::string>());
      if (!s) throw BadRequest("selection must be bnb or random");
      cfg.selection = *s;
    }
    if (b.contains("bound_mode")) {
      auto m = parse_bound_mode(b.at("bound_mode").get<std::string>());
      if (!m) throw BadRequest("bound_mode must be paper or exact");
      cfg.bound_mode = *m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw BadRequest(std::string("invalid session config: ") + e.what());
  }
  return cfg;
}

inline ojson session_config_to_json(const SessionConfig& cfg) {
  ojson j;
  j["k"] = cfg.k;
  j["center"] = to_string(cfg.center_kind);
  j["selection"] = to_string(cfg.selection);
  j["bound_mode"] = to_string(cfg.bound_mode);
  j["iterations"] = cfg.max_iterations;
  j["seed"] = cfg.seed;
  j["stop_on_indifference"] = cfg.stop_on_indifference;
  j["exact_cut_verification"] = cfg.exact_cut_verification;
  j["search_ratio"] = cfg.search_ratio;
  j["leaf_capacity"] = cfg.leaf_capacity;
  return j;
}

struct ServiceOptions {
  std::optional<std::filesystem::path> state_dir;  // event logs, replayed at startup
  std::optional<std::filesystem::path> static_dir;
};

class Service {
 public:
  explicit Service(ServiceOptions opt = {}) : opt_(std::move(opt)) { routes(); }

  void add_ruleset(const std::string& id, RuleTable table) {
    std::unique_lock lock(mu_);
    rulesets_[id] = std::make_shared<const Ruleset>(std::move(table));
  }

  /// Replays every session log in the state directory.
  void restore() {
    if (!opt_.state_dir) return;
    std::filesystem::create_directories(*opt_.state_dir);
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(*opt_.state_dir))
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) replay_file(f);
  }

  // -- handlers, callable without a socket ---------------------------------

  Reply create(const std::string& body) {
    ojson b;
    try {
      b = body.empty() ? ojson::object() : ojson::parse(body);
    } catch (const nlohmann::json::exception& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    try {
      const std::string rs_id = b.is_object() ? b.value("ruleset", std::string("default")) : "default";
      auto rs = ruleset(rs_id);
      if (!rs) return error(404, "unknown ruleset '" + rs_id + "'");
      const SessionConfig cfg = session_config_from_json(b);
      try {
        cfg.validate(rs->dim());
      } catch (const Error& e) {
        throw BadRequest(e.what());
      }
      auto entry = std::make_shared<Entry>();
      entry->ruleset_id = rs_id;
      entry->ruleset = rs;
      entry->session = std::make_unique<Session>(rs->problem(cfg.k), cfg);
      if (entry->session->state() != SessionState::awaiting_answer)
        return error(409, "no interesting query available: " + entry->session->status());
      const std::string id = "s" + std::to_string(next_id_++);
      entry->id = id;
      persist(*entry, {{"type", "create"}, {"id", id}, {"ruleset", rs_id}, {"config", session_config_to_json(cfg)}});
      Reply r{201, snapshot(*entry)};
      std::unique_lock lock(mu_);
      sessions_[id] = std::move(entry);
      return r;
    } catch (const BadRequest& e) {
      return error(400, e.what());
    } catch (const nlohmann::json::exception& e) {
      return error(400, e.what());
    }
  }

  Reply answer(const std::string& id, const std::string& body) {
    auto entry = find(id);
    if (!entry) return error(404, "unknown session '" + id + "'");
    int iteration = 0, preference = 0;
    try {
      const ojson b = ojson::parse(body);
      iteration = b.at("iteration").get<int>();
      preference = b.at("preference").get<int>();
    } catch (const nlohmann::json::exception& e) {
      return error(400, std::string("answer needs integer iteration and preference: ") + e.what());
    }
    if (preference < -1 || preference > 1) return error(400, "preference must be -1, 0 or 1");
    std::lock_guard lock(entry->mu);
    try {
      entry->session->answer(iteration, preference);
    } catch (const StaleAnswer& e) {
      return error(409, e.what());
    }
    persist(*entry, {{"type", "answer"}, {"iteration", iteration}, {"preference", preference}});
    return {200, snapshot(*entry)};
  }

  Reply get(const std::string& id) {
    auto entry = find(id);
    if (!entry) return error(404, "unknown session '" + id + "'");
    std::lock_guard lock(entry->mu);
    return {200, snapshot(*entry)};
  }

  Reply ranking(const std::string& id, std::optional<std::string> top_param) {
    auto entry = find(id);
    if (!entry) return error(404, "unknown session '" + id + "'");
    std::size_t top = 10;
    if (top_param) {
      try {
        std::size_t used = 0;
        const long long t = std::stoll(*top_param, &used);
        if (used != top_param->size() || t < 1) throw std::invalid_argument("top");
        top = static_cast<std::size_t>(t);
      } catch (const std::exception&) {
        return error(400, "top must be a positive integer");
      }
    }
    std::lock_guard lock(entry->mu);
    const Session& s = *entry->session;
    const auto& psi = s.problem().psi;
    const auto& w = s.center().point;
    const auto order = rank_by_capacity(MobiusCapacity{s.problem().index, w}, psi);
    ojson list = ojson::array();
    for (std::size_t r = 0; r < std::min(top, order.size()); ++r) {
      ojson item = entry->ruleset->render(order[r]);
      item["rank"] = r + 1;
      item["score"] = dot(w, psi[order[r]]);
      list.push_back(std::move(item));
    }
    ojson body;
    body["session_id"] = id;
    body["iteration"] = s.answered();
    body["ranking"] = std::move(list);
    return {200, std::move(body)};
  }

  Reply stats(const std::string& id) {
    auto entry = find(id);
    if (!entry) return error(404, "unknown session '" + id + "'");
    std::lock_guard lock(entry->mu);
    const Session& s = *entry->session;
    ojson recs = ojson::array();
    for (const auto& r : s.records()) {
      ojson j;
      j["iteration"] = r.iteration;
      j["rules"] = {entry->ruleset->features().kept.at(r.i), entry->ruleset->features().kept.at(r.j)};
      j["answer"] = r.answer;
      j["r_max"] = r.r_max;
      j["duration_ms"] = r.duration_ms;
      j["outcome"] = r.outcome;
      recs.push_back(std::move(j));
    }
    ojson body;
    body["session_id"] = id;
    body["state"] = to_string(s.state());
    body["records"] = std::move(recs);
    body["ties"] = s.ties();
    std::vector<Vec> rows;
    for (const auto& row : s.version_space().inequalities)
      if (row.provenance.kind == Provenance::Kind::preference) {
        Vec h = row.coeffs;
        for (double& v : h) v = -v;
        rows.push_back(std::move(h));
      }
    ojson angles;
    angles["constraints"] = rows.size();
    if (rows.size() >= 2) {
      auto rep = constraint_angles(rows);
      std::sort(rep.angles.begin(), rep.angles.end());
      angles["skipped"] = rep.skipped.size();
      if (!rep.angles.empty()) {
        angles["q10"] = quantile(rep.angles, 0.1);
        angles["median"] = quantile(rep.angles, 0.5);
        angles["q90"] = quantile(rep.angles, 0.9);
      }
    }
    body["angles"] = std::move(angles);
    return {200, std::move(body)};
  }

  // -- HTTP -----------------------------------------------------------------

  httplib::Server& server() { return server_; }

  /// Binds without SO_REUSEPORT so an occupied port is reported as such.
  bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
  int bind_any(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }

 private:
  struct Entry {
    std::mutex mu;
    std::string id;
    std::string ruleset_id;
    std::shared_ptr<const Ruleset> ruleset;
    std::unique_ptr<Session> session;
  };

  static Reply error(int status, std::string message) { return {status, ojson{{"error", std::move(message)}}}; }

  std::shared_ptr<const Ruleset> ruleset(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = rulesets_.find(id);
    return it == rulesets_.end() ? nullptr : it->second;
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  ojson snapshot(const Entry& e) const {
    const Session& s = *e.session;
    ojson j;
    j["session_id"] = e.id;
    j["ruleset"] = e.ruleset_id;
    j["state"] = to_string(s.state());
    j["iteration"] = s.pending() ? s.pending()->iteration : s.answered();
    j["answered"] = s.answered();
    j["r_max"] = s.center().radius;
    if (s.pending()) {
      ojson q;
      q["iteration"] = s.pending()->iteration;
      q["left"] = e.ruleset->render(s.pending()->i);
      q["right"] = e.ruleset->render(s.pending()->j);
      j["query"] = std::move(q);
    } else {
      j["query"] = nullptr;
      ojson sum;
      sum["status"] = s.status();
      sum["answered"] = s.answered();
      sum["ties"] = s.ties();
      sum["capacity"] = capacity_to_json(s.capacity());
      j["summary"] = std::move(sum);
    }
    return j;
  }

  void persist(const Entry& e, const ojson& event) {
    if (!opt_.state_dir || replaying_) return;
    std::filesystem::create_directories(*opt_.state_dir);
    std::ofstream out(*opt_.state_dir / (e.id + ".jsonl"), std::ios::app);
    out << event.dump() << '\n';
  }

  void replay_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string line;
    std::shared_ptr<Entry> entry;
    replaying_ = true;
    try {
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const ojson ev = ojson::parse(line);
        const std::string type = ev.at("type").get<std::string>();
        if (type == "create") {
          auto rs = ruleset(ev.at("ruleset").get<std::string>());
          if (!rs) break;
          const SessionConfig cfg = session_config_from_json(ev.at("config"));
          entry = std::make_shared<Entry>();
          entry->id = ev.at("id").get<std::string>();
          entry->ruleset_id = ev.at("ruleset").get<std::string>();
          entry->ruleset = rs;
          entry->session = std::make_unique<Session>(rs->problem(cfg.k), cfg);
        } else if (type == "answer" && entry) {
          entry->session->answer(ev.at("iteration").get<int>(), ev.at("preference").get<int>());
        }
      }
    } catch (const std::exception&) {
      // a truncated or inconsistent tail keeps the state reached so far
    }
    replaying_ = false;
    if (!entry) return;
    if (entry->id.size() > 1 && entry->id[0] == 's') {
      try {
        next_id_ = std::max<long long>(next_id_, std::stoll(entry->id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
    std::unique_lock lock(mu_);
    sessions_[entry->id] = std::move(entry);
  }

  void routes() {
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    auto send = [](httplib::Response& res, const Reply& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server_.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server_.Get("/health", [send](const httplib::Request&, httplib::Response& res) {
      send(res, {200, ojson{{"status", "ok"}}});
    });
    server_.Post("/sessions", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, create(req.body));
    });
    server_.Post(R"(/sessions/([^/]+)/answer)", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, answer(req.matches[1], req.body));
    });
    server_.Get(R"(/sessions/([^/]+)/ranking)", [this, send](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> top;
      if (req.has_param("top")) top = req.get_param_value("top");
      send(res, ranking(req.matches[1], top));
    });
    server_.Get(R"(/sessions/([^/]+)/stats)", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, stats(req.matches[1]));
    });
    server_.Get(R"(/sessions/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, get(req.matches[1]));
    });
    server_.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      send(res, error(500, what));
    });
    if (opt_.static_dir) server_.set_mount_point("/", opt_.static_dir->string());
  }

  ServiceOptions opt_;
  httplib::Server server_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const Ruleset>> rulesets_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::atomic<long long> next_id_{1};
  bool replaying_ = false;
};

}  // namespace vsrank
