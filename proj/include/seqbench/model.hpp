#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqbench/types.hpp"

namespace seqbench {

// Raised when a model backend reports resource exhaustion or transport
// trouble; the controller maps these onto sample statuses.
struct ModelOutOfMemory : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelContextOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelTransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Model {
 public:
  virtual ~Model() = default;
  virtual std::string name() const = 0;
  // Completion for the rendered conversation. Stateless and safe to call from
  // concurrent group inferences.
  virtual std::string complete(const ChatHistory& history) = 0;
  // Declared context window in tokens of the configured tokenizer.
  virtual std::int64_t context_limit() const = 0;
};

struct ScriptedRule {
  std::optional<std::string> task_id;   // matches ChatHistory metadata key
  std::optional<int> round;             // 0-based inference index within the task
  std::optional<std::string> contains;  // substring predicate on the rendered prompt
  std::string reply;
};

// Deterministic test double. Rules are tried in order; the first whose
// predicates all hold wins, otherwise the default reply is returned.
// Task/round context is communicated through set_context, mirroring how the
// controller drives it.
class ScriptedModel : public Model {
 public:
  ScriptedModel(std::vector<ScriptedRule> rules, std::string default_reply,
                std::int64_t context_limit = 1'000'000'000);

  std::string name() const override { return "scripted"; }
  std::string complete(const ChatHistory& history) override;
  std::int64_t context_limit() const override { return context_limit_; }

  void set_context(const std::string& task_id, int round);

  static std::shared_ptr<ScriptedModel> load(const std::string& path);

 private:
  std::vector<ScriptedRule> rules_;
  std::string default_reply_;
  std::int64_t context_limit_;
  std::string current_task_;
  int current_round_ = 0;
  std::mutex mutex_;
};

struct HttpModelConfig {
  std::string endpoint;       // e.g. http://host:port
  std::string path = "/v1/chat/completions";
  std::string model_name;
  double temperature = 0.0;
  std::int64_t context_limit = 32768;
  int timeout_seconds = 120;
  int retries = 2;
  std::string api_key_env = "SEQBENCH_API_KEY";
};

// Chat-completions HTTP client. Bearer token read from the configured
// environment variable when present.
class HttpChatModel : public Model {
 public:
  explicit HttpChatModel(HttpModelConfig config);

  std::string name() const override { return config_.model_name; }
  std::string complete(const ChatHistory& history) override;
  std::int64_t context_limit() const override { return config_.context_limit; }

 private:
  HttpModelConfig config_;
};

// One live handle per name; agent and callbacks requesting the same name get
// the same object, so weights behind it load once.
class ModelPool {
 public:
  using Factory = std::function<std::shared_ptr<Model>()>;

  void define(const std::string& name, Factory factory);
  bool has(const std::string& name) const;
  std::shared_ptr<Model> get(const std::string& name);
  int construction_count(const std::string& name) const;

 private:
  struct Entry {
    Factory factory;
    std::shared_ptr<Model> instance;
    int constructions = 0;
  };
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

}  // namespace seqbench
