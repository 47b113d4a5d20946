#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mcsort/serialization.hpp"
#include "mcsort/session.hpp"

namespace httplib {
class Server;
}

namespace mcsort {

struct ServiceOptions {
  std::filesystem::path data_dir = "mcsort-data";
  /// Threads used for the LP solves inside one question selection.
  int jobs = 1;
  /// Select questions on a background thread; clients poll while the
  /// session reports "selecting".
  bool async = false;
};

/// JSON-over-HTTP facade for datasets and elicitation sessions. Datasets and
/// sessions are persisted under `data_dir` and reloaded on construction.
class Service {
 public:
  struct Reply {
    int status = 200;
    Json body;
  };

  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Transport-independent entry point; `path` excludes the query string.
  Reply handle(const std::string& method, const std::string& path, const std::string& body,
               const std::string& content_type = "application/json");

  /// Routes every request of `server` through handle().
  void mount(httplib::Server& server);

  /// Blocks until no background selection is running.
  void wait_idle();

 private:
  struct Dataset {
    std::string id;
    std::string name;
    std::string created_at;
    std::shared_ptr<const DecisionMatrix> matrix;
    std::optional<std::vector<int>> labels;
  };

  struct SessionEntry {
    std::mutex guard;
    std::string id;
    std::string dataset;
    std::string created_at;
    std::optional<Session> session;
    bool busy = false;
    std::optional<std::string> error;
    std::optional<std::pair<int, Json>> model_cache;
  };

  Reply create_dataset(const std::string& body, const std::string& content_type);
  Reply get_dataset(const std::string& id);
  Reply create_session(const std::string& body);
  Reply get_session(const std::string& id);
  Reply post_answer(const std::string& id, const std::string& body);
  Reply get_model(const std::string& id);
  Reply finalize(const std::string& id, const std::string& body);
  Reply get_candidates(const std::string& id);

  std::shared_ptr<Dataset> find_dataset(const std::string& id);
  std::shared_ptr<SessionEntry> find_session(const std::string& id);

  /// Runs the pending selection step, inline or on a background thread.
  /// Caller holds entry.guard.
  void advance(const std::shared_ptr<SessionEntry>& entry);
  Json view(SessionEntry& entry);
  void persist(const SessionEntry& entry);
  void persist(const Dataset& dataset);
  void load();

  ServiceOptions options_;
  std::mutex registry_;
  std::map<std::string, std::shared_ptr<Dataset>> datasets_;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;
  unsigned long next_dataset_ = 1;
  unsigned long next_session_ = 1;

  std::mutex workers_guard_;
  std::condition_variable idle_;
  int running_ = 0;
};

/// Blocking HTTP server on host:port.
int serve(const ServiceOptions& options, const std::string& host, int port);

}  // namespace mcsort
