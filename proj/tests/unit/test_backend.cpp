#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "lrl/error.hpp"
#include "lrl/harness.hpp"
#include "lrl/http_backend.hpp"
#include "lrl/mock_backend.hpp"

using namespace lrl;
using nlohmann::json;

namespace {

// Local OpenAI-style endpoint serving canned responses.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, false);
    });
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, true);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> fail_next{0};
  int fail_status = 503;
  std::vector<json> requests;
  std::vector<std::string> auth;

 private:
  void handle(const httplib::Request& req, httplib::Response& res, bool chat) {
    const auto body = json::parse(req.body);
    {
      std::lock_guard lock(mu_);
      requests.push_back(body);
      auth.push_back(req.get_header_value("Authorization"));
    }
    if (fail_next > 0) {
      --fail_next;
      res.status = fail_status;
      res.set_header("x-request-id", "req-fail");
      res.set_content(R"({"error": "busy"})", "application/json");
      return;
    }
    json out;
    if (chat) {
      out = {{"id", "chat-1"}, {"choices", {{{"message", {{"role", "assistant"}, {"content", "sports"}}}}}}};
    } else if (body.value("echo", false)) {
      // "hello world" as three tokens plus one generated token beyond the text.
      out = {{"id", "cmpl-2"},
             {"choices",
              {{{"text", body.at("prompt").get<std::string>() + "!"},
                {"logprobs",
                 {{"tokens", {"hel", "lo", " world", "!"}},
                  {"token_logprobs", {nullptr, -1.5, -0.25, -3.0}},
                  {"text_offset", {0, 3, 5, 11}}}}}}}};
    } else {
      out = {{"id", "cmpl-1"}, {"choices", {{{"text", " Topic option is: travel."}}}}};
    }
    res.set_content(out.dump(), "application/json");
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
};

}  // namespace

TEST_SUITE("backend") {
  TEST_CASE("completions wire contract") {
    FakeServer server;
    HttpBackend backend({server.base_url(), "m1", "secret", false, 10.0, 0});
    CHECK(backend.generate("prompt text", 16) == " Topic option is: travel.");
    const auto& req = server.requests.back();
    CHECK(req.at("model") == "m1");
    CHECK(req.at("max_tokens") == 16);
    CHECK(req.at("temperature") == 0);
    CHECK(req.at("prompt") == "prompt text");
    CHECK(server.auth.back() == "Bearer secret");
    CHECK(backend.identity().find("m1") != std::string::npos);
  }

  TEST_CASE("chat wire contract") {
    FakeServer server;
    HttpBackend backend({server.base_url(), "m1", "k", true, 10.0, 0});
    CHECK(backend.generate("hi", 4) == "sports");
    CHECK(server.requests.back().at("messages").at(0).at("content") == "hi");
  }

  TEST_CASE("echo scoring keeps only the text's own tokens") {
    FakeServer server;
    HttpBackend backend({server.base_url(), "m1", "k", false, 10.0, 0});
    const auto r = backend.score("hello world");
    CHECK(r.token_logprobs == std::vector<double>{-1.5, -0.25});
    CHECK(r.nll == doctest::Approx(1.75));
    CHECK(server.requests.back().at("echo") == true);
  }

  TEST_CASE("status codes map to error kinds") {
    FakeServer server;
    HttpBackend backend({server.base_url(), "m1", "k", false, 10.0, 0});
    server.fail_next = 1;
    try {
      backend.generate("x", 1);
      FAIL("expected an error");
    } catch (const BackendError& e) {
      CHECK(e.transient());
      CHECK(e.request_id() == "req-fail");
      CHECK(std::string(e.what()).find("req-fail") != std::string::npos);
    }
    server.fail_status = 400;
    server.fail_next = 1;
    try {
      backend.generate("x", 1);
      FAIL("expected an error");
    } catch (const BackendError& e) {
      CHECK_FALSE(e.transient());
    }
  }

  TEST_CASE("nothing listening is unreachable") {
    int port = 0;
    {
      httplib::Server probe;
      port = probe.bind_to_any_port("127.0.0.1");
    }
    HttpBackend backend({"http://127.0.0.1:" + std::to_string(port) + "/v1", "m", "k", false, 2.0, 0});
    CHECK_THROWS_AS(backend.generate("x", 1), BackendUnreachable);
  }

  TEST_CASE("harness retries transient failures then succeeds") {
    FakeServer server;
    HttpBackend backend({server.base_url(), "m1", "k", false, 10.0, 0});
    server.fail_next = 2;
    std::vector<LabeledExample> eval = {{"t1", "some text", std::nullopt, "travel", Split::test}};
    EvalOptions opts;
    opts.spec.language_name = "Xx";
    opts.concurrency = 1;
    opts.retry.backoff_scale = 0.0;
    const auto report = run_classification({}, eval, TaskLabelSet::sib_topics(), opts, backend);
    CHECK(report.records[0].attempts == 3);
    CHECK(report.accuracy == 1.0);
    CHECK(server.requests.size() == 3);
  }

  TEST_CASE("harness gives up after the retry budget") {
    FakeServer server;
    HttpBackend backend({server.base_url(), "m1", "k", false, 10.0, 0});
    server.fail_next = 100;
    std::vector<LabeledExample> eval = {{"t1", "a", std::nullopt, "travel", Split::test}};
    EvalOptions opts;
    opts.spec.language_name = "Xx";
    opts.retry.backoff_scale = 0.0;
    CHECK_THROWS_AS(run_classification({}, eval, TaskLabelSet::sib_topics(), opts, backend), Error);
    CHECK(server.requests.size() == 4);
  }

  TEST_CASE("mock backends") {
    const auto oracle = make_oracle_backend({{"abc", "x"}, {"abcd", "y"}, {"zz", "w"}});
    CHECK(oracle->generate("zz then abcd", 1) == "y");
    CHECK(oracle->generate("abcd zz", 1) == "w");
    CHECK(oracle->generate("nothing", 1).empty());
    CHECK(make_constant_backend("k")->generate("anything", 1) == "k");
    const auto kw = make_keyword_backend();
    CHECK(kw->generate("Text: the football team won the match. Topic option is:", 16) == "sports");
    const std::string mc = "Passage:\np\n###\nChoices:\n(A) a\n###\nAnswer:";
    CHECK(kw->generate(mc, 4) == kw->generate(mc, 4));
  }
}
