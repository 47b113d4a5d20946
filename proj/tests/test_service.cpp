#include <atomic>
#include <filesystem>
#include <random>
#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "mcsort/dataset_csv.hpp"
#include "mcsort/service.hpp"
#include "test_support.hpp"

using namespace mcsort;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("mcsort-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string credit_csv() {
  return format_dataset_csv({credit_rating::matrix(), credit_rating::labels()});
}

Json session_body(const std::string& dataset, int T, const std::string& strategy = "ES") {
  Json examples = Json::array();
  for (const auto& e : credit_rating::initial_examples()) {
    examples.push_back({{"alternative", e.alternative_id}, {"category", e.category}});
  }
  return {{"dataset", dataset},
          {"initial_examples", examples},
          {"config",
           {{"strategy", strategy},
            {"alpha", 0.1},
            {"categories", 4},
            {"subinterval_counts", 4},
            {"termination", {{"type", "budget"}, {"T", T}}}}}};
}

std::string create_dataset(Service& s) {
  const auto r = s.handle("POST", "/datasets", credit_csv(), "text/csv");
  REQUIRE(r.status == 201);
  return r.body.at("id").get<std::string>();
}

Json answer(const std::string& id, int category) {
  return {{"alternative", id}, {"category", category}};
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("dataset upload and lookup") {
    TempDir dir;
    Service s({dir.path});
    const auto id = create_dataset(s);
    const auto r = s.handle("GET", "/datasets/" + id, "");
    CHECK(r.status == 200);
    CHECK(r.body.at("n") == 20);
    CHECK(r.body.at("m") == 3);
    CHECK(r.body.at("alternatives")[16].at("id") == "a17");
    const auto json = s.handle("POST", "/datasets", Json{{"csv", credit_csv()}, {"name", "credit"}}.dump());
    CHECK(json.status == 201);
    CHECK(json.body.at("name") == "credit");
    CHECK(s.handle("GET", "/datasets/zz", "").status == 404);
    const auto bad = s.handle("POST", "/datasets", "id,g\na,x\n", "text/csv");
    CHECK(bad.status == 400);
    CHECK(bad.body.at("code") == "invalid_input");
  }

  TEST_CASE("a session asks a17 first and scores every candidate") {
    TempDir dir;
    Service s({dir.path});
    const auto d = create_dataset(s);
    const auto r = s.handle("POST", "/sessions", session_body(d, 8).dump());
    REQUIRE(r.status == 201);
    CHECK(r.body.at("status") == "awaiting_answer");
    CHECK(r.body.at("question").at("alternative") == "a17");
    CHECK(r.body.at("question").at("selection").at("scores").size() == 16);
    const auto sid = r.body.at("id").get<std::string>();
    const auto c = s.handle("GET", "/sessions/" + sid + "/candidates", "");
    CHECK(c.status == 200);
    CHECK(c.body.at("selection").at("chosen") == "a17");
  }

  TEST_CASE("a zero budget returns the final result at once") {
    TempDir dir;
    Service s({dir.path});
    const auto d = create_dataset(s);
    const auto r = s.handle("POST", "/sessions", session_body(d, 0).dump());
    REQUIRE(r.status == 201);
    CHECK(r.body.at("status") == "finished");
    CHECK(r.body.at("question").is_null());
    CHECK(r.body.at("final").at("iterations") == 0);
  }

  TEST_CASE("error mapping") {
    TempDir dir;
    Service s({dir.path});
    const auto d = create_dataset(s);
    CHECK(s.handle("POST", "/sessions", session_body("d99", 8).dump()).status == 404);
    auto unknown = session_body(d, 8);
    unknown["initial_examples"].push_back({{"alternative", "zz"}, {"category", 1}});
    CHECK(s.handle("POST", "/sessions", unknown.dump()).status == 400);
    CHECK(s.handle("POST", "/sessions", "{not json").status == 400);
    CHECK(s.handle("GET", "/nowhere", "").status == 404);
    CHECK(s.handle("DELETE", "/datasets/" + d, "").status == 404);
    CHECK(s.handle("GET", "/sessions/s42", "").status == 404);

    const auto created = s.handle("POST", "/sessions", session_body(d, 8).dump());
    const auto sid = created.body.at("id").get<std::string>();
    const auto path = "/sessions/" + sid + "/answer";
    CHECK(s.handle("POST", path, answer("a17", 7).dump()).status == 400);
    CHECK(s.handle("POST", path, answer("a1", 1).dump()).status == 409);
    CHECK(s.handle("POST", path, Json{{"alternative", "a17"}}.dump()).status == 400);
    CHECK(s.handle("POST", path, answer("a17", 4).dump()).status == 200);
    const auto repeat = s.handle("POST", path, answer("a17", 4).dump());
    CHECK(repeat.status == 409);
    CHECK(repeat.body.at("code") == "state_conflict");
    CHECK(s.handle("GET", "/sessions/" + sid, "").body.at("iteration") == 1);
  }

  TEST_CASE("full run through the service matches the final model") {
    TempDir dir;
    Service s({dir.path});
    const auto d = create_dataset(s);
    auto view = s.handle("POST", "/sessions", session_body(d, 8).dump()).body;
    const auto sid = view.at("id").get<std::string>();
    const auto expected = credit_rating::answers();
    for (const auto& e : expected) {
      REQUIRE(view.at("status") == "awaiting_answer");
      CHECK(view.at("question").at("alternative") == e.alternative_id);
      const auto r = s.handle("POST", "/sessions/" + sid + "/answer",
                              answer(e.alternative_id, e.category).dump());
      REQUIRE(r.status == 200);
      view = r.body;
    }
    CHECK(view.at("status") == "finished");
    const auto model = s.handle("GET", "/sessions/" + sid + "/model", "");
    REQUIRE(model.status == 200);
    CHECK(model.body.at("model") == view.at("final").at("model"));
    const auto fin = s.handle("POST", "/sessions/" + sid + "/finalize", "");
    CHECK(fin.status == 200);
    CHECK(fin.body.at("iterations") == 8);
  }

  TEST_CASE("early finalization") {
    TempDir dir;
    Service s({dir.path});
    const auto d = create_dataset(s);
    const auto sid = s.handle("POST", "/sessions", session_body(d, 8).dump()).body.at("id").get<std::string>();
    CHECK(s.handle("POST", "/sessions/" + sid + "/finalize", "").status == 409);
    const auto r = s.handle("POST", "/sessions/" + sid + "/finalize", R"({"early": true})");
    CHECK(r.status == 200);
    CHECK(r.body.at("early") == true);
    CHECK(s.handle("GET", "/sessions/" + sid, "").body.at("status") == "finished");
  }

  TEST_CASE("sessions survive a restart") {
    TempDir dir;
    std::string sid;
    Json before;
    {
      Service s({dir.path});
      const auto d = create_dataset(s);
      sid = s.handle("POST", "/sessions", session_body(d, 8).dump()).body.at("id").get<std::string>();
      s.handle("POST", "/sessions/" + sid + "/answer", answer("a17", 4).dump());
      before = s.handle("GET", "/sessions/" + sid, "").body;
    }
    Service again({dir.path});
    const auto after = again.handle("GET", "/sessions/" + sid, "");
    REQUIRE(after.status == 200);
    CHECK(after.body.at("question") == before.at("question"));
    CHECK(after.body.at("examples") == before.at("examples"));
    CHECK(again.handle("POST", "/sessions/" + sid + "/answer", answer("a14", 4).dump()).status == 200);
    // New identifiers do not collide with restored ones.
    const auto d2 = create_dataset(again);
    CHECK(d2 != before.at("dataset"));
  }

  TEST_CASE("asynchronous selection is polled until ready") {
    TempDir dir;
    Service s({dir.path, 2, true});
    const auto d = create_dataset(s);
    const auto created = s.handle("POST", "/sessions", session_body(d, 8).dump());
    REQUIRE(created.status == 201);
    const auto sid = created.body.at("id").get<std::string>();
    if (created.body.at("status") == "selecting") {
      CHECK(created.body.at("question").is_null());
    }
    s.wait_idle();
    const auto ready = s.handle("GET", "/sessions/" + sid, "");
    CHECK(ready.body.at("status") == "awaiting_answer");
    CHECK(ready.body.at("question").at("alternative") == "a17");
  }

  TEST_CASE("concurrent answers over HTTP: one accepted, one conflict") {
    TempDir dir;
    Service s({dir.path});
    httplib::Server server;
    s.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);
    const auto up = client.Post("/datasets", credit_csv(), "text/csv");
    REQUIRE(up);
    REQUIRE(up->status == 201);
    const auto d = Json::parse(up->body).at("id").get<std::string>();
    const auto created = client.Post("/sessions", session_body(d, 8).dump(), "application/json");
    REQUIRE(created);
    const auto sid = Json::parse(created->body).at("id").get<std::string>();

    std::atomic<int> ok{0};
    std::atomic<int> conflict{0};
    auto post = [&] {
      httplib::Client c("127.0.0.1", port);
      c.set_read_timeout(60, 0);
      const auto r = c.Post("/sessions/" + sid + "/answer", answer("a17", 4).dump(), "application/json");
      if (r && r->status == 200) ++ok;
      if (r && r->status == 409) ++conflict;
    };
    std::thread a(post);
    std::thread b(post);
    a.join();
    b.join();
    CHECK(ok == 1);
    CHECK(conflict == 1);

    const auto missing = client.Get("/sessions/" + sid + "/nothing");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    const auto view = client.Get("/sessions/" + sid);
    REQUIRE(view);
    CHECK(Json::parse(view->body).at("iteration") == 1);

    server.stop();
    listener.join();
  }
}
