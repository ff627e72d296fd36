#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "seqbench/agent.hpp"
#include "seqbench/serialize.hpp"

using namespace seqbench;

TEST_CASE("scripted model resolves rules in order") {
  std::vector<ScriptedRule> rules;
  rules.push_back({"t1", 0, std::nullopt, "Action: Answer\nFinal Answer: [(1,)]"});
  rules.push_back({"t1", 1, std::nullopt, "second round"});
  rules.push_back({std::nullopt, std::nullopt, "group marker", "grouped reply"});
  auto model = std::make_shared<ScriptedModel>(rules, "Act: finish");

  ChatHistory history;
  history.add_user("question");

  model->set_context("t1", 0);
  CHECK(model->complete(history) == "Action: Answer\nFinal Answer: [(1,)]");
  model->set_context("t1", 1);
  CHECK(model->complete(history) == "second round");
  model->set_context("t2", 0);
  CHECK(model->complete(history) == "Act: finish");

  ChatHistory marked;
  marked.add_user("this prompt has the group marker inside");
  model->set_context("t9", 5);
  CHECK(model->complete(marked) == "grouped reply");
}

TEST_CASE("agent inference records prompt tokens and preflights the context limit") {
  auto model = std::make_shared<ScriptedModel>(std::vector<ScriptedRule>{}, "reply", 16);
  Agent agent(model, make_default_tokenizer());

  ChatHistory small;
  small.add_user("just a few words");
  InferenceResult ok = agent.inference(small);
  CHECK(ok.ok());
  CHECK(ok.text == "reply");
  CHECK(ok.prompt_tokens > 0);

  // limit+1 tokens trips the context check before any model call
  ChatHistory big;
  std::string words;
  for (int i = 0; i < 17; ++i) words += "w" + std::to_string(i) + " ";
  big.add_user(words);
  InferenceResult overflow = agent.inference(big);
  CHECK(overflow.failure == SampleStatus::agent_context_limit);

  // a multi-million-character observation in history blows the window too
  auto wide = std::make_shared<ScriptedModel>(std::vector<ScriptedRule>{}, "reply", 32768);
  Agent wide_agent(wide, make_default_tokenizer());
  ChatHistory flooded;
  flooded.add_user("task");
  std::string observation;
  observation.reserve(4'250'311);
  while (observation.size() < 4'250'311) observation += "chunk ";
  flooded.add_user(observation);
  InferenceResult blown = wide_agent.inference(flooded);
  CHECK(blown.failure == SampleStatus::agent_context_limit);
}

TEST_CASE("inference does not mutate the passed history") {
  auto model = std::make_shared<ScriptedModel>(std::vector<ScriptedRule>{}, "reply");
  Agent agent(model, make_default_tokenizer());
  ChatHistory history;
  history.add_user("q");
  ChatHistory copy = history;
  agent.inference(history);
  CHECK(history.size() == copy.size());
  CHECK(history.messages[0].content == copy.messages[0].content);
}

TEST_CASE("model pool constructs each model exactly once") {
  ModelPool pool;
  int constructions = 0;
  pool.define("m", [&constructions] {
    ++constructions;
    return std::make_shared<ScriptedModel>(std::vector<ScriptedRule>{}, "x");
  });
  pool.define("n", [] {
    return std::make_shared<ScriptedModel>(std::vector<ScriptedRule>{}, "y");
  });

  auto a = pool.get("m");
  auto b = pool.get("m");
  auto c = pool.get("m");
  CHECK(a.get() == b.get());
  CHECK(b.get() == c.get());
  CHECK(constructions == 1);
  CHECK(pool.construction_count("m") == 1);

  CHECK(pool.get("n").get() != a.get());
  CHECK_THROWS_AS(pool.get("unknown"), std::invalid_argument);
}

TEST_CASE("http model speaks the chat-completions shape") {
  httplib::Server server;
  std::string seen_body, seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    seen_auth = req.get_header_value("Authorization");
    Json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "Act: finish"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("SEQBENCH_TEST_KEY", "sekrit", 1);
  HttpModelConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port);
  config.model_name = "demo-model";
  config.api_key_env = "SEQBENCH_TEST_KEY";
  HttpChatModel model(config);

  ChatHistory history;
  history.add_user("hello");
  history.add_agent("OK.");
  history.add_user("do the task");
  CHECK(model.complete(history) == "Act: finish");

  Json body = Json::parse(seen_body);
  CHECK(body.at("model") == "demo-model");
  CHECK(body.at("messages").size() == 3);
  CHECK(body.at("messages")[1].at("role") == "assistant");
  CHECK(seen_auth == "Bearer sekrit");

  server.stop();
  listener.join();

  // transport failures surface as model errors after retries
  HttpModelConfig dead = config;
  dead.endpoint = "http://127.0.0.1:1";
  dead.retries = 0;
  dead.timeout_seconds = 1;
  HttpChatModel dead_model(dead);
  CHECK_THROWS_AS(dead_model.complete(history), ModelTransportError);
}
