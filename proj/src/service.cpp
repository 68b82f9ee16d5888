#include "icme/service.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <random>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

namespace icme::service {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

Response json_response(int status, const json& body) { return {status, "application/json", body.dump(), {}}; }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

bool truthy(const std::map<std::string, std::string>& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) return false;
  return it->second == "1" || it->second == "true" || it->second == "yes" || it->second.empty();
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json j = json::parse(body);
  if (!j.is_object()) throw std::invalid_argument("request body must be a JSON object");
  return j;
}

/// Maps exceptions to statuses; ordered from most to least specific.
Response from_exception(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const session::ActionRejected& e) {
    return error_response(403, e.what());
  } catch (const json::exception& e) {
    return error_response(400, e.what());
  } catch (const std::out_of_range& e) {
    return error_response(404, e.what());
  } catch (const std::invalid_argument& e) {
    return error_response(400, e.what());
  } catch (const std::domain_error& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

/// Claims the single-writer slot of a session for the lifetime of the guard.
class WriterGuard {
 public:
  explicit WriterGuard(std::atomic<bool>& flag) : flag_(&flag) {
    bool expected = false;
    owned_ = flag.compare_exchange_strong(expected, true);
  }
  WriterGuard(const WriterGuard&) = delete;
  WriterGuard& operator=(const WriterGuard&) = delete;
  ~WriterGuard() {
    if (owned_) flag_->store(false);
  }
  bool owned() const { return owned_; }
  /// Hands the claim to someone else (who must clear the flag).
  void release() { owned_ = false; }

 private:
  std::atomic<bool>* flag_;
  bool owned_ = false;
};

Response busy_response() { return error_response(409, "session busy: another operation is in progress"); }

}  // namespace

Response error_response(int status, const std::string& reason) {
  return json_response(status, {{"schema_version", kSchemaVersion}, {"status", status}, {"error", reason}});
}

json ServiceConfig::to_json() const {
  return {{"host", host}, {"port", port}, {"max_sessions", max_sessions}, {"defaults", defaults.to_json()}};
}

ServiceConfig ServiceConfig::from_json(const json& j) {
  ServiceConfig c;
  if (j.contains("host")) c.host = j.at("host").get<std::string>();
  if (j.contains("port")) c.port = j.at("port").get<int>();
  if (j.contains("max_sessions")) c.max_sessions = j.at("max_sessions").get<std::size_t>();
  if (j.contains("defaults")) c.defaults = session::SessionConfig::from_json(j.at("defaults"));
  c.defaults.validate();
  if (c.port < 0 || c.port > 65535) throw std::invalid_argument("port out of range");
  if (c.max_sessions == 0) throw std::invalid_argument("max_sessions must be positive");
  return c;
}

void ServiceConfig::apply_environment() {
  if (const char* bind = std::getenv("ICME_BIND"); bind && *bind) {
    std::string b(bind);
    const auto colon = b.rfind(':');
    if (colon == std::string::npos) {
      host = b;
    } else {
      if (colon > 0) host = b.substr(0, colon);
      port = std::stoi(b.substr(colon + 1));
    }
  }
  if (const char* h = std::getenv("ICME_HOST"); h && *h) host = h;
  if (const char* p = std::getenv("ICME_PORT"); p && *p) port = std::stoi(p);
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range");
}

std::shared_ptr<const session::Snapshot> Service::Entry::view() const {
  std::lock_guard lock(snapshot_mutex);
  return snapshot;
}

void Service::Entry::publish() {
  auto snap = std::make_shared<const session::Snapshot>(session->snapshot());
  std::lock_guard lock(snapshot_mutex);
  snapshot = std::move(snap);
}

json Service::Entry::handle_json() const {
  auto v = view();
  return {{"schema_version", kSchemaVersion},
          {"session_id", id},
          {"created_at", created_at},
          {"mode", std::string(session::to_string(v->config.mode))},
          {"seed", v->config.seed},
          {"iteration", v->iteration},
          {"emitter", v->emitter_name}};
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  std::random_device rd;
  id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

Service::~Service() {
  std::map<std::string, std::shared_ptr<Entry>> all;
  {
    std::lock_guard lock(sessions_mutex_);
    all = sessions_;
  }
  for (auto& [id, e] : all) {
    if (e->worker.joinable()) e->worker.join();
  }
}

std::size_t Service::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<Service::Entry> Service::add(std::unique_ptr<session::Session> s) {
  auto e = std::make_shared<Entry>();
  e->session = std::move(s);
  e->created_at = utc_now();
  e->publish();
  std::lock_guard lock(sessions_mutex_);
  if (sessions_.size() >= config_.max_sessions) throw std::length_error("session limit reached");
  const std::uint64_t n = next_session_++;
  char buf[40];
  std::snprintf(buf, sizeof buf, "s%llu-%08llx", static_cast<unsigned long long>(n),
                static_cast<unsigned long long>((id_salt_ ^ (n * 0x9E3779B97F4A7C15ULL)) & 0xffffffffULL));
  e->id = buf;
  sessions_[e->id] = e;
  return e;
}

Response Service::create_session(const Request& r) {
  const json body = parse_body(r.body);
  session::SessionConfig cfg = config_.defaults;
  if (body.contains("config")) {
    json merged = cfg.to_json();
    merged.merge_patch(body.at("config"));
    cfg = session::SessionConfig::from_json(merged);
  }
  if (body.contains("mode")) cfg.mode = session::mode_from_string(body.at("mode").get<std::string>());
  if (body.contains("seed")) cfg.seed = body.at("seed").get<std::uint64_t>();
  if (body.contains("emitter")) cfg.emitter = ple::EmitterConfig::from_json(body.at("emitter").is_string()
                                                                               ? json{{"name", body.at("emitter")}}
                                                                               : body.at("emitter"));
  cfg.validate();
  auto e = add(std::make_unique<session::Session>(cfg));
  json out = e->handle_json();
  out["grid"] = session::grid_json(*e->view());
  return json_response(201, out);
}

Response Service::load_session(const Request& r) {
  const json body = parse_body(r.body);
  auto s = std::make_unique<session::Session>(session::Session::load(body.contains("state") ? body.at("state") : body));
  auto e = add(std::move(s));
  return json_response(201, e->handle_json());
}

Response Service::list_sessions() const {
  json list = json::array();
  std::lock_guard lock(sessions_mutex_);
  for (const auto& [id, e] : sessions_) list.push_back(e->handle_json());
  return json_response(200, {{"schema_version", kSchemaVersion}, {"sessions", list}});
}

Response Service::get_session(Entry& e) const { return json_response(200, e.handle_json()); }

Response Service::get_grid(Entry& e) const { return json_response(200, session::grid_json(*e.view())); }

Response Service::get_solution(Entry& e, const std::string& bin, const Request& r) const {
  const BinIndex b = BinIndex::parse(bin);
  json out = session::solution_json(*e.view(), b, truthy(r.query, "interior"));
  out["schema_version"] = kSchemaVersion;
  // Counted into the next step's metrics; the body itself is unaffected.
  e.pending_inspections.fetch_add(1);
  return json_response(200, out);
}

Response Service::get_metrics(Entry& e, const Request& r) const {
  auto v = e.view();
  auto it = r.query.find("format");
  const std::string format = it == r.query.end() ? "json" : it->second;
  if (format == "csv") return {200, "text/csv", session::metrics_csv(*v), {}};
  if (format != "json") throw std::invalid_argument("format must be csv or json");
  return json_response(200, session::metrics_json(*v));
}

Response Service::get_job(Entry& e, const std::string& job) const {
  std::lock_guard lock(e.jobs_mutex);
  auto it = e.jobs.find(job);
  if (it == e.jobs.end()) return error_response(404, "unknown job " + job);
  const Job& j = it->second;
  json out{{"schema_version", kSchemaVersion}, {"job_id", job}, {"status", j.status}};
  if (j.status == "done") out["result"] = j.result;
  if (j.status == "failed") {
    out["error"] = j.error;
    out["error_status"] = j.http_status;
  }
  return json_response(200, out);
}

Response Service::get_state(Entry& e) {
  WriterGuard guard(e.busy);
  if (!guard.owned()) return busy_response();
  json out = e.session->save();
  return json_response(200, out);
}

Response Service::post_evolve(const std::shared_ptr<Entry>& e, const Request& r) {
  const json body = parse_body(r.body);
  std::string action = body.value("action", body.contains("bin") ? "selected" : "");
  if (action == "select" || action == "selected_bin") action = "selected";
  if (action == "reset") action = "reinitialise";
  std::optional<BinIndex> bin;
  if (action == "selected") {
    if (!body.contains("bin")) throw std::invalid_argument("action 'selected' needs a bin");
    bin = BinIndex::parse(body.at("bin").get<std::string>());
  } else if (action != "random" && action != "reinitialise") {
    throw std::invalid_argument("action must be selected, random or reinitialise");
  }
  const bool wait = truthy(r.query, "wait") || body.value("wait", false);

  WriterGuard guard(e->busy);
  if (!guard.owned()) return busy_response();

  auto run = [e, action, bin]() -> json {
    session::Session& s = *e->session;
    for (std::size_t n = e->pending_inspections.exchange(0); n > 0; --n) s.note_inspection();
    json result;
    if (action == "selected") {
      result = s.user_step(*bin).to_json();
    } else if (action == "random") {
      result = s.random_step().to_json();
    } else {
      s.reinitialise();
      result = {{"iteration", s.iteration()}, {"action", "reinitialise"}};
    }
    e->publish();
    result["schema_version"] = kSchemaVersion;
    return result;
  };

  if (wait) {
    try {
      return json_response(200, run());
    } catch (...) {
      return from_exception(std::current_exception());
    }
  }

  std::string job_id;
  {
    std::lock_guard lock(e->jobs_mutex);
    job_id = "j" + std::to_string(e->next_job++);
    e->jobs[job_id] = Job{};
  }
  if (e->worker.joinable()) e->worker.join();
  guard.release();
  e->worker = std::thread([e, run, job_id]() {
    Job done;
    try {
      done.result = run();
      done.status = "done";
    } catch (...) {
      Response err = from_exception(std::current_exception());
      done.status = "failed";
      done.http_status = err.status;
      done.error = json::parse(err.body).at("error").get<std::string>();
    }
    {
      std::lock_guard lock(e->jobs_mutex);
      e->jobs[job_id] = std::move(done);
    }
    e->busy.store(false);
  });
  return json_response(202, {{"schema_version", kSchemaVersion},
                              {"job_id", job_id},
                              {"status", "running"},
                              {"status_url", "/sessions/" + e->id + "/jobs/" + job_id}});
}

Response Service::post_export(Entry& e, const std::string& bin) {
  const BinIndex b = BinIndex::parse(bin);
  WriterGuard guard(e.busy);
  if (!guard.owned()) return busy_response();
  auto before = e.view();
  json blueprint = session::export_json(*before, b);
  json study;
  if (e.session->awaiting_favourite()) {
    e.session->choose_favourite(b);
    e.publish();
    study = {{"favourite_recorded", true}, {"phase", before->study_phase}};
  }
  blueprint["schema_version"] = kSchemaVersion;
  if (!study.is_null()) blueprint["study"] = study;
  Response out = json_response(200, blueprint);
  out.headers["Content-Disposition"] = "attachment; filename=\"ship-" + b.key() + ".json\"";
  return out;
}

Response Service::patch_config(Entry& e, const Request& r) {
  const json patch = parse_body(r.body);
  WriterGuard guard(e.busy);
  if (!guard.owned()) return busy_response();
  e.session->apply_config_patch(patch);
  e.publish();
  auto v = e.view();
  return json_response(200, {{"schema_version", kSchemaVersion}, {"config", v->config.to_json()}});
}

Response Service::delete_session(const std::string& id) {
  std::shared_ptr<Entry> e = find(id);
  if (!e) return error_response(404, "unknown session " + id);
  WriterGuard guard(e->busy);
  if (!guard.owned()) return busy_response();
  if (e->worker.joinable()) e->worker.join();
  std::lock_guard lock(sessions_mutex_);
  sessions_.erase(id);
  return json_response(200, {{"schema_version", kSchemaVersion}, {"deleted", id}});
}

Response Service::handle(const Request& r) {
  try {
    const auto p = split_path(r.path);
    const std::string& m = r.method;
    if (p.empty() || p[0] != "sessions") {
      if (p.size() == 1 && p[0] == "health" && m == "GET")
        return json_response(200, {{"schema_version", kSchemaVersion}, {"status", "ok"}});
      return error_response(404, "no route for " + r.path);
    }
    if (p.size() == 1) {
      if (m == "POST") return create_session(r);
      if (m == "GET") return list_sessions();
      return error_response(405, "method not allowed");
    }
    if (p.size() == 2 && p[1] == "load") {
      if (m == "POST") return load_session(r);
      return error_response(405, "method not allowed");
    }
    if (p.size() == 2 && m == "DELETE") return delete_session(p[1]);
    std::shared_ptr<Entry> e = find(p[1]);
    if (!e) return error_response(404, "unknown session " + p[1]);
    if (p.size() == 2) {
      if (m == "GET") return get_session(*e);
      return error_response(405, "method not allowed");
    }
    const std::string& what = p[2];
    auto method_is = [&](const char* want) { return m == want; };
    if (p.size() == 3) {
      if (what == "grid" && method_is("GET")) return get_grid(*e);
      if (what == "metrics" && method_is("GET")) return get_metrics(*e, r);
      if (what == "evolve" && method_is("POST")) return post_evolve(e, r);
      if (what == "config" && method_is("PATCH")) return patch_config(*e, r);
      if (what == "config" && method_is("GET"))
        return json_response(200, {{"schema_version", kSchemaVersion}, {"config", e->view()->config.to_json()}});
      if (what == "state" && method_is("GET")) return get_state(*e);
      if (what == "study" && method_is("GET"))
        return json_response(200, {{"schema_version", kSchemaVersion}, {"study", e->view()->study.to_json()}});
    } else if (p.size() == 4) {
      if (what == "solutions" && method_is("GET")) return get_solution(*e, p[3], r);
      if (what == "export" && method_is("POST")) return post_export(*e, p[3]);
      if (what == "jobs" && method_is("GET")) return get_job(*e, p[3]);
    }
    return error_response(404, "no route for " + m + " " + r.path);
  } catch (const std::length_error& ex) {
    return error_response(503, ex.what());
  } catch (...) {
    return from_exception(std::current_exception());
  }
}

void Service::mount(httplib::Server& server) {
  auto bridge = [this](const char* method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      Request r{method, req.path, {}, req.body};
      for (const auto& [k, v] : req.params) r.query[k] = v;
      Response out = handle(r);
      res.status = out.status;
      for (const auto& [k, v] : out.headers) res.set_header(k, v);
      res.set_content(out.body, out.content_type);
    };
  };
  server.Get(".*", bridge("GET"));
  server.Post(".*", bridge("POST"));
  server.Patch(".*", bridge("PATCH"));
  server.Delete(".*", bridge("DELETE"));
}

bool Service::listen() {
  owned_server_ = std::make_unique<httplib::Server>();
  server_ = owned_server_.get();
  mount(*server_);
  return server_->listen(config_.host, config_.port);
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace icme::service
