#include "invplan/remote_oracle.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <string>
#include <thread>

namespace invplan {
namespace {

// Minimal chat-completion endpoint running on loopback. `script` decides the
// reply for each successive request.
class FakeEndpoint {
 public:
  using Script = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit FakeEndpoint(Script script) : script_(std::move(script)) {
    server_.Post("/chat/completions", [this](const httplib::Request& req,
                                             httplib::Response& res) {
      requests_.fetch_add(1);
      last_auth_ = req.get_header_value("Authorization");
      script_(req, res);
    });
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      requests_.fetch_add(1);
      prefixed_requests_.fetch_add(1);
      script_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }
  int requests() const { return requests_.load(); }
  int prefixed_requests() const { return prefixed_requests_.load(); }
  std::string last_auth() const { return last_auth_; }

  static void reply(httplib::Response& res, const std::string& content,
                    long total_tokens = 0) {
    nlohmann::json body{
        {"choices",
         nlohmann::json::array(
             {{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
    if (total_tokens > 0) body["usage"] = {{"total_tokens", total_tokens}};
    res.set_content(body.dump(), "application/json");
  }

 private:
  httplib::Server server_;
  Script script_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> prefixed_requests_{0};
  std::string last_auth_;
};

OracleConfig remote_config(const std::string& base_url, int max_retries = 0) {
  OracleConfig cfg;
  cfg.backend = OracleBackend::Remote;
  cfg.remote.base_url = base_url;
  cfg.remote.model_name = "test-model";
  cfg.remote.max_retries = max_retries;
  cfg.remote.retry_base_ms = 1;
  return cfg;
}

Slots obs_slots() {
  return {{"state", "The roses are wilted."},
          {"inf_agent", "Kavya"},
          {"statement", "Kavya sees wilted roses."}};
}

TEST(RemoteOracle, VerdictA) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "A");
  });
  RemoteOracle oracle(remote_config(ep.base_url()));
  LikelihoodJudgment j = oracle.judge(PromptKind::LikelihoodObsGivenState,
                                      obs_slots());
  EXPECT_TRUE(j.likely);
  EXPECT_EQ(j.source, JudgmentSource::Remote);
  EXPECT_FALSE(j.numeric.has_value());
}

TEST(RemoteOracle, UnlikelyBeatsLikelySubstring) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "That would be Unlikely.");
  });
  RemoteOracle oracle(remote_config(ep.base_url()));
  EXPECT_FALSE(
      oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots()).likely);
}

TEST(RemoteOracle, NumericReply) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "0.42", 17);
  });
  RemoteOracle oracle(remote_config(ep.base_url()));
  LikelihoodJudgment j = oracle.judge(PromptKind::LikelihoodObsGivenState,
                                      obs_slots());
  ASSERT_TRUE(j.numeric.has_value());
  EXPECT_DOUBLE_EQ(*j.numeric, 0.42);
  EXPECT_EQ(oracle.tokens_used(), 17);
}

TEST(RemoteOracle, ProposeParsesJsonArray) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "Here are the hypotheses:\n[\"fresh\", \"Wilted\", \"fresh\"]");
  });
  RemoteOracle oracle(remote_config(ep.base_url()));
  std::vector<std::string> out =
      oracle.propose(PromptKind::SampleBelief,
                     {{"character", "Kavya"}, {"information", "roses"}}, 3);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], "fresh");
  EXPECT_EQ(out[1], "Wilted");
}

TEST(RemoteOracle, ProposeFallsBackToLines) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "alpha\n\n  beta  \n");
  });
  RemoteOracle oracle(remote_config(ep.base_url()));
  std::vector<std::string> out =
      oracle.propose(PromptKind::SampleBelief,
                     {{"character", "Kavya"}, {"information", "roses"}}, 5);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], "alpha");
  EXPECT_EQ(out[1], "beta");
}

TEST(RemoteOracle, RetriesTransientFailures) {
  std::atomic<int> calls{0};
  FakeEndpoint ep([&calls](const httplib::Request&, httplib::Response& res) {
    if (calls.fetch_add(1) < 2) {
      res.status = 500;
      res.set_content("boom", "text/plain");
      return;
    }
    FakeEndpoint::reply(res, "B");
  });
  RemoteOracle oracle(remote_config(ep.base_url(), /*max_retries=*/3));
  EXPECT_FALSE(
      oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots()).likely);
  EXPECT_EQ(ep.requests(), 3);
}

TEST(RemoteOracle, GivesUpAfterRetryBudget) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  RemoteOracle oracle(remote_config(ep.base_url(), /*max_retries=*/2));
  EXPECT_THROW(oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots()),
               RemoteUnavailable);
  EXPECT_EQ(ep.requests(), 3);
}

TEST(RemoteOracle, ClientErrorDoesNotRetry) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
  });
  RemoteOracle oracle(remote_config(ep.base_url(), /*max_retries=*/3));
  EXPECT_THROW(oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots()),
               RemoteUnavailable);
  EXPECT_EQ(ep.requests(), 1);
}

TEST(RemoteOracle, ApiKeyComesFromNamedEnvVar) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "A");
  });
  setenv("INVPLAN_TEST_KEY", "sk-test-sekrit-123", 1);
  OracleConfig cfg = remote_config(ep.base_url());
  cfg.remote.api_key_env_name = "INVPLAN_TEST_KEY";
  RemoteOracle oracle(cfg);
  oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots());
  EXPECT_EQ(ep.last_auth(), "Bearer sk-test-sekrit-123");
  unsetenv("INVPLAN_TEST_KEY");
}

TEST(RemoteOracle, TraceRedactsTheKey) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "A");
  });
  setenv("INVPLAN_TEST_KEY", "sk-test-sekrit-123", 1);
  OracleConfig cfg = remote_config(ep.base_url());
  cfg.remote.api_key_env_name = "INVPLAN_TEST_KEY";
  std::ostringstream trace;
  RemoteOracle oracle(cfg, &trace);
  oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots());
  const std::string log = trace.str();
  EXPECT_NE(log.find("/chat/completions"), std::string::npos);
  EXPECT_NE(log.find("\"status\":200"), std::string::npos);
  EXPECT_EQ(log.find("sk-test-sekrit-123"), std::string::npos);
  unsetenv("INVPLAN_TEST_KEY");
}

TEST(RemoteOracle, BaseUrlPathPrefixIsKept) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "A");
  });
  RemoteOracle oracle(remote_config(ep.base_url() + "/v1/"));
  oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots());
  EXPECT_EQ(ep.prefixed_requests(), 1);
}

TEST(RemoteOracle, MalformedBodyIsReported) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\": []}", "application/json");
  });
  RemoteOracle oracle(remote_config(ep.base_url()));
  EXPECT_THROW(oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots()),
               MalformedResponse);
}

TEST(RemoteOracle, GarbageContentIsReported) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    FakeEndpoint::reply(res, "the weather is nice");
  });
  RemoteOracle oracle(remote_config(ep.base_url()));
  EXPECT_THROW(oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots()),
               MalformedResponse);
}

TEST(RemoteOracle, RequestCarriesModelAndTemperature) {
  std::string seen_body;
  std::mutex m;
  FakeEndpoint ep([&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard<std::mutex> lock(m);
      seen_body = req.body;
    }
    FakeEndpoint::reply(res, "A");
  });
  OracleConfig cfg = remote_config(ep.base_url());
  cfg.remote.temperature = 0.25;
  cfg.seed = 7;
  RemoteOracle oracle(cfg);
  oracle.judge(PromptKind::LikelihoodObsGivenState, obs_slots());
  nlohmann::json body = nlohmann::json::parse(seen_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.25);
  EXPECT_EQ(body["seed"], 7);
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
}

TEST(RemoteOracle, RejectsBaseUrlWithoutScheme) {
  EXPECT_THROW(RemoteOracle(remote_config("localhost:8080")), ConfigError);
}

}  // namespace
}  // namespace invplan
