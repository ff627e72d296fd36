#include "seqbench/model.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "seqbench/tokenizer.hpp"

namespace seqbench {

using Json = nlohmann::json;

ScriptedModel::ScriptedModel(std::vector<ScriptedRule> rules, std::string default_reply,
                             std::int64_t context_limit)
    : rules_(std::move(rules)),
      default_reply_(std::move(default_reply)),
      context_limit_(context_limit) {}

void ScriptedModel::set_context(const std::string& task_id, int round) {
  std::lock_guard lock(mutex_);
  current_task_ = task_id;
  current_round_ = round;
}

std::string ScriptedModel::complete(const ChatHistory& history) {
  std::lock_guard lock(mutex_);
  std::string rendered = render_history(history);
  for (const auto& rule : rules_) {
    if (rule.task_id && *rule.task_id != current_task_) continue;
    if (rule.round && *rule.round != current_round_) continue;
    if (rule.contains && rendered.find(*rule.contains) == std::string::npos) continue;
    return rule.reply;
  }
  return default_reply_;
}

std::shared_ptr<ScriptedModel> ScriptedModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scripted agent file: " + path);
  Json j = Json::parse(in);
  std::vector<ScriptedRule> rules;
  for (const auto& r : j.value("rules", Json::array())) {
    ScriptedRule rule;
    if (r.contains("task_id")) rule.task_id = r.at("task_id").get<std::string>();
    if (r.contains("round")) rule.round = r.at("round").get<int>();
    if (r.contains("contains")) rule.contains = r.at("contains").get<std::string>();
    rule.reply = r.at("reply").get<std::string>();
    rules.push_back(std::move(rule));
  }
  std::string default_reply = j.value("default", std::string("Act: finish"));
  std::int64_t limit = j.value("context_limit", std::int64_t{1'000'000'000});
  return std::make_shared<ScriptedModel>(std::move(rules), std::move(default_reply), limit);
}

HttpChatModel::HttpChatModel(HttpModelConfig config) : config_(std::move(config)) {}

std::string HttpChatModel::complete(const ChatHistory& history) {
  Json messages = Json::array();
  for (const auto& msg : history.messages) {
    messages.push_back({{"role", msg.role == Role::user ? "user" : "assistant"},
                        {"content", msg.content}});
  }
  Json body = {{"model", config_.model_name},
               {"messages", std::move(messages)},
               {"temperature", config_.temperature}};

  httplib::Client client(config_.endpoint);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      std::string detail = res->body;
      // Backend-reported resource failures map onto dedicated statuses.
      if (detail.find("out of memory") != std::string::npos ||
          detail.find("CUDA out of memory") != std::string::npos) {
        throw ModelOutOfMemory(detail);
      }
      if (detail.find("context length") != std::string::npos ||
          detail.find("maximum context") != std::string::npos) {
        throw ModelContextOverflow(detail);
      }
      last_error = "http " + std::to_string(res->status) + ": " + detail;
      continue;
    }
    try {
      Json reply = Json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      last_error = std::string("malformed completion response: ") + e.what();
    }
  }
  throw ModelTransportError(last_error.empty() ? "chat completion failed" : last_error);
}

void ModelPool::define(const std::string& name, Factory factory) {
  std::lock_guard lock(mutex_);
  entries_[name].factory = std::move(factory);
}

bool ModelPool::has(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return entries_.count(name) > 0;
}

std::shared_ptr<Model> ModelPool::get(const std::string& name) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::invalid_argument("model not configured: " + name);
  }
  if (!it->second.instance) {
    it->second.instance = it->second.factory();
    ++it->second.constructions;
  }
  return it->second.instance;
}

int ModelPool::construction_count(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(name);
  return it == entries_.end() ? 0 : it->second.constructions;
}

}  // namespace seqbench
