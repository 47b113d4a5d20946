#include "mcsort/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <httplib.h>

#include "mcsort/dataset_csv.hpp"
#include "mcsort/error.hpp"

namespace mcsort {

namespace fs = std::filesystem;

namespace {

std::string now_utc() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::state_conflict: return 409;
    default: return 500;
  }
}

std::string_view envelope_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input:
    case ErrorCode::not_found:
    case ErrorCode::state_conflict: return to_string(code);
    default: return "solver_failure";
  }
}

Service::Reply error_reply(ErrorCode code, const std::string& message) {
  return {http_status(code), Json{{"code", envelope_code(code)}, {"message", message}}};
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    return Json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_input, std::string("request body is not valid JSON: ") + e.what());
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string part;
  for (char c : path) {
    if (c == '/') {
      if (!part.empty()) out.push_back(std::move(part));
      part.clear();
    } else {
      part += c;
    }
  }
  if (!part.empty()) out.push_back(std::move(part));
  return out;
}

void write_atomically(const fs::path& target, const std::string& text) {
  fs::create_directories(target.parent_path());
  const auto tmp = fs::path(target).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::internal, "cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, target);
}

unsigned long counter_of(const std::string& id, char prefix) {
  if (id.size() < 2 || id[0] != prefix) return 0;
  try {
    return std::stoul(id.substr(1));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  require(options_.jobs >= 1, "jobs must be at least 1");
  fs::create_directories(options_.data_dir / "datasets");
  fs::create_directories(options_.data_dir / "sessions");
  load();
}

Service::~Service() { wait_idle(); }

void Service::wait_idle() {
  std::unique_lock lock(workers_guard_);
  idle_.wait(lock, [&] { return running_ == 0; });
}

void Service::load() {
  for (const auto& file : fs::directory_iterator(options_.data_dir / "datasets")) {
    if (file.path().extension() != ".json") continue;
    try {
      std::ifstream in(file.path());
      const auto j = Json::parse(in);
      auto d = std::make_shared<Dataset>();
      d->id = j.at("id").get<std::string>();
      d->name = j.value("name", "");
      d->created_at = j.value("created_at", "");
      d->matrix = std::make_shared<const DecisionMatrix>(matrix_from_json(j.at("matrix")));
      if (!j.at("labels").is_null()) d->labels = labels_from_json(j.at("labels"), *d->matrix);
      next_dataset_ = std::max(next_dataset_, counter_of(d->id, 'd') + 1);
      datasets_[d->id] = std::move(d);
    } catch (const std::exception& e) {
      fmt::print(stderr, "skipping dataset file {}: {}\n", file.path().string(), e.what());
    }
  }
  for (const auto& file : fs::directory_iterator(options_.data_dir / "sessions")) {
    if (file.path().extension() != ".json") continue;
    try {
      std::ifstream in(file.path());
      const auto j = Json::parse(in);
      auto e = std::make_shared<SessionEntry>();
      e->id = j.at("id").get<std::string>();
      e->dataset = j.at("dataset").get<std::string>();
      e->created_at = j.value("created_at", "");
      e->session = session_restore(j.at("snapshot"));
      if (j.contains("error") && j.at("error").is_string()) e->error = j.at("error").get<std::string>();
      next_session_ = std::max(next_session_, counter_of(e->id, 's') + 1);
      sessions_[e->id] = std::move(e);
    } catch (const std::exception& e) {
      fmt::print(stderr, "skipping session file {}: {}\n", file.path().string(), e.what());
    }
  }
}

void Service::persist(const Dataset& d) {
  Json j = {{"id", d.id},
            {"name", d.name},
            {"created_at", d.created_at},
            {"matrix", matrix_to_json(*d.matrix)},
            {"labels", d.labels ? labels_to_json(*d.labels, *d.matrix) : Json(nullptr)}};
  write_atomically(options_.data_dir / "datasets" / (d.id + ".json"), j.dump());
}

void Service::persist(const SessionEntry& e) {
  Json j = {{"id", e.id},
            {"dataset", e.dataset},
            {"created_at", e.created_at},
            {"snapshot", session_snapshot(*e.session)},
            {"error", e.error ? Json(*e.error) : Json(nullptr)}};
  write_atomically(options_.data_dir / "sessions" / (e.id + ".json"), j.dump());
}

std::shared_ptr<Service::Dataset> Service::find_dataset(const std::string& id) {
  std::lock_guard lock(registry_);
  auto it = datasets_.find(id);
  if (it == datasets_.end()) fail(ErrorCode::not_found, "no dataset '" + id + "'");
  return it->second;
}

std::shared_ptr<Service::SessionEntry> Service::find_session(const std::string& id) {
  std::lock_guard lock(registry_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::not_found, "no session '" + id + "'");
  return it->second;
}

Service::Reply Service::handle(const std::string& method, const std::string& path,
                               const std::string& body, const std::string& content_type) {
  try {
    const auto parts = split_path(path);
    const bool get = method == "GET";
    const bool post = method == "POST";
    if (!parts.empty() && parts[0] == "datasets") {
      if (parts.size() == 1 && post) return create_dataset(body, content_type);
      if (parts.size() == 2 && get) return get_dataset(parts[1]);
    }
    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1 && post) return create_session(body);
      if (parts.size() == 2 && get) return get_session(parts[1]);
      if (parts.size() == 3) {
        if (parts[2] == "answer" && post) return post_answer(parts[1], body);
        if (parts[2] == "model" && get) return get_model(parts[1]);
        if (parts[2] == "finalize" && post) return finalize(parts[1], body);
        if (parts[2] == "candidates" && get) return get_candidates(parts[1]);
      }
    }
    return error_reply(ErrorCode::not_found, "no route for " + method + " " + path);
  } catch (const Error& e) {
    return error_reply(e.code(), e.what());
  } catch (const std::exception& e) {
    return error_reply(ErrorCode::internal, e.what());
  }
}

Service::Reply Service::create_dataset(const std::string& body, const std::string& content_type) {
  std::string csv;
  std::string name;
  if (content_type.starts_with("text/csv")) {
    csv = body;
  } else {
    const auto j = parse_body(body);
    require(j.contains("csv") && j.at("csv").is_string(), "body needs a 'csv' string");
    csv = j.at("csv").get<std::string>();
    name = j.value("name", "");
  }
  auto parsed = parse_dataset_csv(csv);
  auto d = std::make_shared<Dataset>();
  d->name = name;
  d->created_at = now_utc();
  d->matrix = std::make_shared<const DecisionMatrix>(std::move(parsed.matrix));
  d->labels = std::move(parsed.labels);
  {
    std::lock_guard lock(registry_);
    d->id = fmt::format("d{}", next_dataset_++);
    datasets_[d->id] = d;
  }
  persist(*d);
  return {201,
          {{"id", d->id},
           {"name", d->name},
           {"n", d->matrix->alternatives()},
           {"m", d->matrix->criteria()},
           {"criteria", d->matrix->criterion_names()},
           {"labeled", d->labels.has_value()}}};
}

Service::Reply Service::get_dataset(const std::string& id) {
  const auto d = find_dataset(id);
  Json alternatives = Json::array();
  for (std::size_t i = 0; i < d->matrix->alternatives(); ++i) {
    const auto row = d->matrix->row(i);
    Json a = {{"id", d->matrix->id(i)}, {"performances", std::vector<double>(row.begin(), row.end())}};
    if (d->labels) a["label"] = (*d->labels)[i];
    alternatives.push_back(std::move(a));
  }
  return {200,
          {{"id", d->id},
           {"name", d->name},
           {"created_at", d->created_at},
           {"n", d->matrix->alternatives()},
           {"m", d->matrix->criteria()},
           {"criteria", d->matrix->criterion_names()},
           {"alternatives", alternatives}}};
}

Service::Reply Service::create_session(const std::string& body) {
  const auto j = parse_body(body);
  require(j.contains("dataset") && j.at("dataset").is_string(), "body needs a 'dataset' id");
  const auto d = find_dataset(j.at("dataset").get<std::string>());
  require(j.contains("initial_examples"), "body needs 'initial_examples'");
  require(j.contains("config"), "body needs a 'config' object");
  auto examples = examples_from_json(j.at("initial_examples"));
  auto config = config_from_json(j.at("config"), *d->matrix);
  if (!config.labels && d->labels) config.labels = d->labels;
  config.jobs = options_.jobs;

  auto entry = std::make_shared<SessionEntry>();
  entry->dataset = d->id;
  entry->created_at = now_utc();
  entry->session = Session::start(d->matrix, std::move(examples), std::move(config));
  {
    std::lock_guard lock(registry_);
    entry->id = fmt::format("s{}", next_session_++);
    sessions_[entry->id] = entry;
  }
  std::unique_lock lock(entry->guard);
  persist(*entry);
  advance(entry);
  return {201, view(*entry)};
}

void Service::advance(const std::shared_ptr<SessionEntry>& entry) {
  auto& session = *entry->session;
  if (entry->busy) return;
  if (session.status() == SessionStatus::finished) {
    session.finalize();
    return;
  }
  if (session.status() != SessionStatus::selecting) return;

  if (!options_.async) {
    try {
      session.next_question();
      if (session.status() == SessionStatus::finished) session.finalize();
      entry->error.reset();
    } catch (const Error& e) {
      entry->error = e.what();
      persist(*entry);
      throw;
    }
    persist(*entry);
    return;
  }

  entry->busy = true;
  {
    std::lock_guard guard(workers_guard_);
    ++running_;
  }
  std::thread([this, entry, work = session]() mutable {
    std::optional<std::string> error;
    try {
      work.next_question();
      if (work.status() == SessionStatus::finished) work.finalize();
    } catch (const std::exception& e) {
      error = e.what();
    }
    {
      std::lock_guard entry_lock(entry->guard);
      if (!error) entry->session = std::move(work);
      entry->error = error;
      entry->busy = false;
      try {
        persist(*entry);
      } catch (const std::exception& e) {
        fmt::print(stderr, "failed to persist session {}: {}\n", entry->id, e.what());
      }
    }
    std::lock_guard guard(workers_guard_);
    --running_;
    idle_.notify_all();
  }).detach();
}

Json Service::view(SessionEntry& entry) {
  auto& s = *entry.session;
  const auto& matrix = s.matrix();
  const bool selecting = entry.busy || s.status() == SessionStatus::selecting;
  Json termination;
  if (const auto* budget = std::get_if<BudgetT>(&s.config().termination)) {
    termination = {{"type", "budget"}, {"T", budget->T}};
  } else {
    termination = {{"type", "target"}, {"target", std::get<TargetAccuracy>(s.config().termination).target}};
  }
  Json out = {{"id", entry.id},
              {"dataset", entry.dataset},
              {"created_at", entry.created_at},
              {"status", selecting ? "selecting" : std::string(to_string(s.status()))},
              {"iteration", s.iteration()},
              {"categories", s.config().categories},
              {"strategy", std::string(to_string(s.config().strategy.kind))},
              {"termination", termination},
              {"examples", examples_to_json(s.examples())},
              {"error", entry.error ? Json(*entry.error) : Json(nullptr)}};
  out["question"] = !entry.busy && s.pending() ? question_to_json(*s.pending(), matrix) : Json(nullptr);
  out["final"] = !entry.busy && s.status() == SessionStatus::finished
                     ? final_to_json(s.finalize(), matrix)
                     : Json(nullptr);
  return out;
}

Service::Reply Service::get_session(const std::string& id) {
  auto entry = find_session(id);
  std::unique_lock lock(entry->guard);
  if (entry->session->status() == SessionStatus::selecting) advance(entry);
  return {200, view(*entry)};
}

Service::Reply Service::post_answer(const std::string& id, const std::string& body) {
  const auto j = parse_body(body);
  require(j.contains("alternative") && j.at("alternative").is_string(),
          "body needs an 'alternative' id");
  require(j.contains("category") && j.at("category").is_number_integer(),
          "body needs an integer 'category'");
  auto entry = find_session(id);
  std::unique_lock lock(entry->guard);
  if (entry->busy) fail(ErrorCode::state_conflict, "the next question is still being selected");
  entry->session->submit_answer(j.at("alternative").get<std::string>(), j.at("category").get<int>());
  persist(*entry);
  advance(entry);
  return {200, view(*entry)};
}

Service::Reply Service::get_model(const std::string& id) {
  auto entry = find_session(id);
  std::unique_lock lock(entry->guard);
  auto& s = *entry->session;
  const int key = static_cast<int>(s.examples().size());
  if (!entry->model_cache || entry->model_cache->first != key) {
    Json out = {{"session", entry->id},
                {"iteration", s.iteration()},
                {"model", fitted_to_json(s.current_model(), s.matrix())}};
    entry->model_cache.emplace(key, std::move(out));
  }
  Json out = entry->model_cache->second;
  out["status"] = entry->busy ? "selecting" : std::string(to_string(s.status()));
  out["candidates"] = !entry->busy && s.pending() ? selection_to_json(s.pending()->selection)["scores"]
                                                  : Json::array();
  return {200, out};
}

Service::Reply Service::finalize(const std::string& id, const std::string& body) {
  const auto j = parse_body(body);
  const bool early = j.value("early", false);
  auto entry = find_session(id);
  std::unique_lock lock(entry->guard);
  if (entry->busy) fail(ErrorCode::state_conflict, "the next question is still being selected");
  auto& s = *entry->session;
  const auto result = s.finalize(early);
  persist(*entry);
  return {200, final_to_json(result, s.matrix())};
}

Service::Reply Service::get_candidates(const std::string& id) {
  auto entry = find_session(id);
  std::unique_lock lock(entry->guard);
  auto& s = *entry->session;
  Json out = {{"session", entry->id},
              {"iteration", s.iteration()},
              {"status", entry->busy ? "selecting" : std::string(to_string(s.status()))},
              {"strategy", std::string(to_string(s.config().strategy.kind))}};
  if (!entry->busy && s.pending()) {
    out["selection"] = selection_to_json(s.pending()->selection);
  } else {
    out["selection"] = nullptr;
  }
  return {200, out};
}

void Service::mount(httplib::Server& server) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const auto reply = handle(req.method, req.path, req.body, req.get_header_value("Content-Type"));
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Put(".*", forward);
  server.Delete(".*", forward);
  server.Patch(".*", forward);
}

int serve(const ServiceOptions& options, const std::string& host, int port) {
  Service service(options);
  httplib::Server server;
  service.mount(server);
  fmt::print("listening on {}:{} (data in {})\n", host, port, options.data_dir.string());
  std::fflush(stdout);
  if (!server.listen(host, port)) {
    fmt::print(stderr, "cannot listen on {}:{}\n", host, port);
    return 1;
  }
  return 0;
}

}  // namespace mcsort
