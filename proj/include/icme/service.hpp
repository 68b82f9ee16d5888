#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "icme/session.hpp"

namespace httplib {
class Server;
}

namespace icme::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Base configuration for new sessions; request bodies override it.
  session::SessionConfig defaults;
  std::size_t max_sessions = 64;

  nlohmann::json to_json() const;
  static ServiceConfig from_json(const nlohmann::json& j);
  /// Applies ICME_HOST, ICME_PORT and ICME_BIND ("host:port") when set.
  void apply_environment();
};

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Session registry plus the HTTP routes. `handle` is the whole router and
/// can be driven without a socket.
///
/// Each session has a single writer: a mutating request claims the session
/// or gets 409. Reads serve the snapshot published after the last mutation
/// and never wait for a running step.
class Service {
 public:
  explicit Service(ServiceConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response handle(const Request& request);

  /// Routes every method and path on `server` through `handle`.
  void mount(httplib::Server& server);
  /// Blocks serving on the configured host and port.
  bool listen();
  void stop();

  const ServiceConfig& config() const { return config_; }
  std::size_t session_count() const;

 private:
  struct Job {
    std::string status = "running";
    int http_status = 200;
    nlohmann::json result;
    std::string error;
  };

  struct Entry {
    std::string id;
    std::string created_at;
    std::unique_ptr<session::Session> session;
    std::atomic<bool> busy{false};
    std::atomic<std::size_t> pending_inspections{0};
    mutable std::mutex snapshot_mutex;
    std::shared_ptr<const session::Snapshot> snapshot;
    std::mutex jobs_mutex;
    std::map<std::string, Job> jobs;
    std::uint64_t next_job = 1;
    std::thread worker;

    std::shared_ptr<const session::Snapshot> view() const;
    void publish();
    nlohmann::json handle_json() const;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::shared_ptr<Entry> add(std::unique_ptr<session::Session> s);

  Response create_session(const Request& r);
  Response load_session(const Request& r);
  Response list_sessions() const;
  Response get_session(Entry& e) const;
  Response get_grid(Entry& e) const;
  Response get_solution(Entry& e, const std::string& bin, const Request& r) const;
  Response get_metrics(Entry& e, const Request& r) const;
  Response get_job(Entry& e, const std::string& job) const;
  Response get_state(Entry& e);
  Response post_evolve(const std::shared_ptr<Entry>& e, const Request& r);
  Response post_export(Entry& e, const std::string& bin);
  Response patch_config(Entry& e, const Request& r);
  Response delete_session(const std::string& id);

  ServiceConfig config_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_session_ = 1;
  std::uint64_t id_salt_;
  httplib::Server* server_ = nullptr;
  std::unique_ptr<httplib::Server> owned_server_;
};

/// JSON error body {"schema_version", "error", "status"}.
Response error_response(int status, const std::string& reason);

}  // namespace icme::service
