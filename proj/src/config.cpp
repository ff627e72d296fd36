#include "seqbench/config.hpp"

#include <filesystem>
#include <fstream>

#include "seqbench/digest.hpp"
#include "seqbench/env_db.hpp"
#include "seqbench/env_kg.hpp"
#include "seqbench/env_os.hpp"
#include "seqbench/replay.hpp"
#include "seqbench/sql_backend.hpp"
#include "seqbench/triple_store.hpp"

namespace seqbench {

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig config;
  config.dataset_path = j.at("dataset").get<std::string>();

  const Json& env = j.at("environment");
  config.environment.kind = env_kind_from_string(env.at("kind").get<std::string>());
  config.environment.backend = env.value("backend", std::string("embedded"));
  config.environment.kg_store = env.value("kg_store", std::string());
  config.environment.observation_limit = env.value("observation_limit", std::size_t{8192});
  for (const auto& r : env.value("mock_rules", Json::array())) {
    MockRule rule;
    rule.contains = r.at("contains").get<std::string>();
    rule.result.stdout_text = r.value("stdout", std::string());
    rule.result.exit_code = r.value("exit_code", 0);
    if (r.contains("stdout_repeat")) {
      // Large canned outputs are declared as {text, times} to keep configs small.
      const Json& rep = r.at("stdout_repeat");
      std::string unit = rep.at("text").get<std::string>();
      std::size_t times = rep.at("times").get<std::size_t>();
      std::string text;
      text.reserve(unit.size() * times);
      for (std::size_t i = 0; i < times; ++i) text += unit;
      rule.result.stdout_text = std::move(text);
    }
    const Json set_files = r.value("set_files", Json::object());
    for (const auto& [path, content] : set_files.items()) {
      rule.set_files[path] = content.get<std::string>();
    }
    for (const auto& path : r.value("remove_files", Json::array())) {
      rule.remove_files.push_back(path.get<std::string>());
    }
    config.environment.mock_rules.push_back(std::move(rule));
  }

  config.agent_model = j.at("agent").at("model").get<std::string>();

  for (const auto& m : j.at("models")) {
    ModelSpec spec;
    spec.name = m.at("name").get<std::string>();
    spec.kind = m.at("kind").get<std::string>();
    if (spec.kind == "scripted") {
      spec.scripted_path = m.at("path").get<std::string>();
    } else if (spec.kind == "http") {
      spec.http.endpoint = m.at("endpoint").get<std::string>();
      spec.http.model_name = m.value("model_name", spec.name);
      spec.http.path = m.value("path", spec.http.path);
      spec.http.temperature = m.value("temperature", 0.0);
      spec.http.context_limit = m.value("context_limit", std::int64_t{32768});
      spec.http.timeout_seconds = m.value("timeout_seconds", 120);
      spec.http.retries = m.value("retries", 2);
      spec.http.api_key_env = m.value("api_key_env", spec.http.api_key_env);
    } else {
      throw std::invalid_argument("unknown model kind: " + spec.kind);
    }
    config.models.push_back(std::move(spec));
  }

  for (const auto& c : j.value("callbacks", Json::array())) {
    CallbackSpec spec;
    spec.name = c.at("name").get<std::string>();
    spec.params = c.value("params", Json::object());
    config.callbacks.push_back(std::move(spec));
  }

  if (j.contains("round_limits")) {
    const Json& limits = j.at("round_limits");
    config.round_limits.db = limits.value("db", 3);
    config.round_limits.os = limits.value("os", 5);
    config.round_limits.kg = limits.value("kg", 15);
  }
  config.seed = j.value("seed", std::uint64_t{0});
  config.output_dir = j.value("output_dir", std::string("out"));

  if (j.contains("deployment")) {
    const Json& d = j.at("deployment");
    config.deployment.mode = d.value("mode", std::string("local"));
    config.deployment.controller_address = d.value("controller", std::string());
    config.deployment.auth_token = d.value("token", std::string());
  }
  if (config.deployment.mode == "distributed" && config.deployment.controller_address.empty()) {
    throw std::invalid_argument("distributed deployment requires a controller address");
  }
  if (config.deployment.mode != "local" && config.deployment.mode != "distributed") {
    throw std::invalid_argument("unknown deployment mode: " + config.deployment.mode);
  }
  return config;
}

Json config_to_json(const ExperimentConfig& config) {
  Json env = {{"kind", to_string(config.environment.kind)},
              {"backend", config.environment.backend},
              {"observation_limit", config.environment.observation_limit}};
  if (!config.environment.kg_store.empty()) env["kg_store"] = config.environment.kg_store;
  if (!config.environment.mock_rules.empty()) {
    Json rules = Json::array();
    for (const auto& r : config.environment.mock_rules) {
      Json rule = {{"contains", r.contains},
                   {"stdout", r.result.stdout_text},
                   {"exit_code", r.result.exit_code}};
      if (!r.set_files.empty()) rule["set_files"] = r.set_files;
      if (!r.remove_files.empty()) rule["remove_files"] = r.remove_files;
      rules.push_back(std::move(rule));
    }
    env["mock_rules"] = std::move(rules);
  }

  Json models = Json::array();
  for (const auto& m : config.models) {
    Json spec = {{"name", m.name}, {"kind", m.kind}};
    if (m.kind == "scripted") {
      spec["path"] = m.scripted_path;
    } else {
      spec["endpoint"] = m.http.endpoint;
      spec["model_name"] = m.http.model_name;
      spec["path"] = m.http.path;
      spec["temperature"] = m.http.temperature;
      spec["context_limit"] = m.http.context_limit;
      spec["timeout_seconds"] = m.http.timeout_seconds;
      spec["retries"] = m.http.retries;
      spec["api_key_env"] = m.http.api_key_env;
    }
    models.push_back(std::move(spec));
  }

  Json callbacks = Json::array();
  for (const auto& c : config.callbacks) {
    callbacks.push_back({{"name", c.name}, {"params", c.params}});
  }

  return Json{{"dataset", config.dataset_path},
              {"environment", std::move(env)},
              {"agent", {{"model", config.agent_model}}},
              {"models", std::move(models)},
              {"callbacks", std::move(callbacks)},
              {"round_limits",
               {{"db", config.round_limits.db},
                {"os", config.round_limits.os},
                {"kg", config.round_limits.kg}}},
              {"seed", config.seed},
              {"output_dir", config.output_dir},
              {"deployment",
               {{"mode", config.deployment.mode},
                {"controller", config.deployment.controller_address},
                {"token", config.deployment.auth_token}}}};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed config " + path + ": " + e.what());
  }
  ExperimentConfig config = config_from_json(j);

  std::filesystem::path dir = std::filesystem::absolute(path).parent_path();
  auto resolve = [&dir](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (dir / p).string();
  };
  resolve(config.dataset_path);
  resolve(config.environment.kg_store);
  for (auto& model : config.models) {
    if (model.kind == "scripted") resolve(model.scripted_path);
  }
  // The digest covers the resolved document, so a resume sees exactly the
  // experiment the snapshot was taken under.
  config.digest = config_digest(config);
  return config;
}

std::string config_digest(const ExperimentConfig& config) {
  // Where the run executes (deployment) and where its artifacts land
  // (output_dir) do not change what the experiment is.
  Json j = config_to_json(config);
  j.erase("deployment");
  j.erase("output_dir");
  return md5_hex(j.dump());
}

std::shared_ptr<Environment> build_environment(const ExperimentConfig& config,
                                               std::shared_ptr<HistoryItemFactory> factory) {
  const EnvironmentSpec& spec = config.environment;
  switch (spec.kind) {
    case EnvKind::db: {
      if (spec.backend != "embedded") {
        throw std::invalid_argument(
            "unsupported db backend '" + spec.backend +
            "' in this build; use 'embedded' or serve a SqlBackend over rpc");
      }
      return std::make_shared<DatabaseEnvironment>(make_embedded_sql_backend(), factory);
    }
    case EnvKind::os: {
      std::shared_ptr<ExecBackend> backend;
      if (spec.backend == "mock" || spec.backend == "embedded") {
        auto mock = std::make_shared<MockExecBackend>();
        for (const auto& rule : spec.mock_rules) mock->add_rule(rule);
        backend = mock;
      } else if (spec.backend == "local_shell") {
        backend = std::make_shared<LocalShellExecBackend>();
      } else {
        throw std::invalid_argument("unsupported os backend '" + spec.backend + "'");
      }
      OsEnvironmentOptions options;
      options.observation_limit = spec.observation_limit;
      return std::make_shared<OsEnvironment>(backend, factory, options);
    }
    case EnvKind::kg: {
      if (spec.kg_store.empty()) {
        throw std::invalid_argument("kg environment requires a kg_store fixture path");
      }
      auto store = std::make_shared<TripleStore>(TripleStore::load(spec.kg_store));
      return std::make_shared<KgEnvironment>(store, factory);
    }
  }
  throw std::logic_error("unreachable environment kind");
}

void define_models(const ExperimentConfig& config, ModelPool& pool) {
  for (const auto& spec : config.models) {
    if (spec.kind == "scripted") {
      std::string path = spec.scripted_path;
      pool.define(spec.name, [path] { return ScriptedModel::load(path); });
    } else {
      HttpModelConfig http = spec.http;
      pool.define(spec.name, [http] { return std::make_shared<HttpChatModel>(http); });
    }
  }
}

std::shared_ptr<Agent> build_agent(const ExperimentConfig& config, ModelPool& pool) {
  if (!pool.has(config.agent_model)) {
    throw std::invalid_argument("agent model '" + config.agent_model +
                                "' is not defined in the models section");
  }
  return std::make_shared<Agent>(pool.get(config.agent_model), make_default_tokenizer());
}

CallbackList build_callbacks(const ExperimentConfig& config) {
  CallbackList callbacks;
  for (const auto& spec : config.callbacks) {
    if (spec.name == "experience_replay") {
      callbacks.push_back(
          std::make_shared<ExperienceReplayCallback>(spec.params.value("n", std::size_t{0})));
    } else if (spec.name == "group_self_consistency") {
      callbacks.push_back(std::make_shared<GroupSelfConsistencyCallback>(
          spec.params.value("n", std::size_t{0}), spec.params.value("g", std::size_t{1})));
    } else {
      throw std::invalid_argument("unknown callback: " + spec.name);
    }
  }
  return callbacks;
}

}  // namespace seqbench
