#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqbench/agent.hpp"
#include "seqbench/callback.hpp"
#include "seqbench/controller.hpp"
#include "seqbench/environment.hpp"
#include "seqbench/exec_backend.hpp"
#include "seqbench/history_factory.hpp"
#include "seqbench/model.hpp"

namespace seqbench {

using Json = nlohmann::json;

struct ModelSpec {
  std::string name;
  std::string kind;  // "scripted" | "http"
  std::string scripted_path;
  HttpModelConfig http;
};

struct CallbackSpec {
  std::string name;
  Json params;
};

struct EnvironmentSpec {
  EnvKind kind = EnvKind::db;
  std::string backend = "embedded";  // db: embedded; os: mock | local_shell
  std::string kg_store;
  std::size_t observation_limit = 8192;
  std::vector<MockRule> mock_rules;
};

struct DeploymentSpec {
  std::string mode = "local";  // local | distributed
  std::string controller_address;
  std::string auth_token;
};

struct ExperimentConfig {
  std::string dataset_path;
  EnvironmentSpec environment;
  std::string agent_model;
  std::vector<ModelSpec> models;
  std::vector<CallbackSpec> callbacks;
  RoundLimits round_limits;
  std::uint64_t seed = 0;
  std::string output_dir;
  DeploymentSpec deployment;
  // Digest of the declarative document (set by load_config), used to refuse
  // resuming under a changed configuration.
  std::string digest;
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);

// Parses a config file, computes its digest and resolves relative data paths
// (dataset, kg fixture, scripted agent files) against the file's directory.
ExperimentConfig load_config(const std::string& path);

// Digest over the canonical config document; resuming against a snapshot
// produced by a different configuration is refused on mismatch.
std::string config_digest(const ExperimentConfig& config);

// Local component assembly from a config document.
std::shared_ptr<Environment> build_environment(const ExperimentConfig& config,
                                               std::shared_ptr<HistoryItemFactory> factory);
void define_models(const ExperimentConfig& config, ModelPool& pool);
std::shared_ptr<Agent> build_agent(const ExperimentConfig& config, ModelPool& pool);
CallbackList build_callbacks(const ExperimentConfig& config);

}  // namespace seqbench
