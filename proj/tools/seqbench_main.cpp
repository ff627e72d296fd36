#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "seqbench/config.hpp"
#include "seqbench/controller.hpp"
#include "seqbench/datagen.hpp"
#include "seqbench/demo_data.hpp"
#include "seqbench/metrics.hpp"
#include "seqbench/rpc/bootstrap.hpp"
#include "seqbench/rpc/remote.hpp"
#include "seqbench/serialize.hpp"

namespace fs = std::filesystem;
using namespace seqbench;

namespace {

std::string render_report(const MetricsReport& report) {
  std::ostringstream out;
  out << "sessions: " << report.session_count << "\n";
  out << "success_rate: " << report.success_rate << "\n";
  out << "total_reward: " << report.total_reward << "\n";
  out << "status breakdown:\n";
  for (const auto& [status, count] : report.status_counts) {
    out << "  " << to_string(status) << ": " << count << "\n";
  }
  if (!report.per_skill_success.empty()) {
    out << "per-skill success:\n";
    for (const auto& [skill, tally] : report.per_skill_success) {
      out << "  " << skill << ": " << tally.successes << "/" << tally.attempts << "\n";
    }
  }
  if (!report.per_difficulty.empty()) {
    out << "per-difficulty success:\n";
    for (const auto& [bucket, tally] : report.per_difficulty) {
      out << "  " << bucket << ": " << tally.successes << "/" << tally.attempts << "\n";
    }
  }
  out << "avg_input_tokens: " << report.avg_input_tokens << "\n";
  out << "max_prompt_tokens: " << report.max_prompt_tokens << "\n";
  return out.str();
}

int run_loaded_experiment(const ExperimentConfig& config, const std::string& digest) {
  std::vector<TaskInstance> tasks = load_dataset(config.dataset_path);

  fs::create_directories(config.output_dir);

  ModelPool pool;
  define_models(config, pool);
  auto agent = build_agent(config, pool);
  CallbackList callbacks = build_callbacks(config);

  RunOptions options;
  options.session_log_path = (fs::path(config.output_dir) / "sessions.jsonl").string();
  options.snapshot_path = (fs::path(config.output_dir) / "snapshot.json").string();
  options.config_digest = digest;
  options.round_limits = config.round_limits;

  MetricsReport report;
  if (config.deployment.mode == "distributed") {
    // Ask the server-side controller to bring the component servers up, run
    // against them, then shut them down; the controller itself stays alive.
    Json component_config = config_to_json(config);
    auto addresses = rpc::bootstrap_start(config.deployment.controller_address,
                                          component_config.dump(), config.deployment.auth_token);
    try {
      rpc::RemoteEnvironment environment(addresses.environment, 1, config.deployment.auth_token);
      report = run_experiment(options, tasks, *agent, environment, callbacks);
      environment.release();
    } catch (...) {
      rpc::bootstrap_stop(config.deployment.controller_address, config.deployment.auth_token);
      throw;
    }
    rpc::bootstrap_stop(config.deployment.controller_address, config.deployment.auth_token);
  } else {
    auto factory = std::make_shared<HistoryItemFactory>();
    auto environment = build_environment(config, factory);
    report = run_experiment(options, tasks, *agent, *environment, callbacks);
    environment->release();
  }

  std::ofstream metrics((fs::path(config.output_dir) / "metrics.json").string(), std::ios::trunc);
  metrics << metrics_to_json(report).dump(2) << "\n";
  std::cout << render_report(report);
  return 0;
}

int cmd_run(const std::string& config_path) {
  ExperimentConfig config = load_config(config_path);
  std::string digest = config.digest;

  // Fail on a broken dataset before any output exists.
  load_dataset(config.dataset_path);

  fs::create_directories(config.output_dir);
  {
    // The stored copy (with resolved paths) makes the run resumable from the
    // output directory alone; the digest pins the original document.
    Json stored = config_to_json(config);
    stored["config_digest"] = digest;
    std::ofstream out((fs::path(config.output_dir) / "config.json").string(), std::ios::trunc);
    out << stored.dump(2) << "\n";
  }
  return run_loaded_experiment(config, digest);
}

int cmd_resume(const std::string& output_dir) {
  fs::path config_path = fs::path(output_dir) / "config.json";
  if (!fs::exists(config_path)) {
    std::cerr << "no stored config at " << config_path << "; was this directory produced by run?\n";
    return 2;
  }
  std::ifstream in(config_path);
  Json stored = Json::parse(in);
  stored.erase("config_digest");
  ExperimentConfig config = config_from_json(stored);
  config.output_dir = output_dir;
  // Recomputed, not trusted: an edited stored config must be refused against
  // the snapshot digest.
  std::string digest = config_digest(config);

  if (!fs::exists(fs::path(output_dir) / "snapshot.json")) {
    std::cerr << "no snapshot in " << output_dir << "; nothing to resume\n";
    return 2;
  }
  return run_loaded_experiment(config, digest);
}

int cmd_report(const std::string& log_path, const std::string& dataset_path, bool normalize) {
  if (normalize) {
    std::ifstream in(log_path);
    if (!in) {
      std::cerr << "cannot open session log: " << log_path << "\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    std::cout << normalize_session_log(ss.str());
    return 0;
  }
  std::vector<Session> sessions = load_session_log(log_path);
  std::vector<TaskInstance> tasks;
  if (!dataset_path.empty()) tasks = load_dataset(dataset_path);
  std::cout << render_report(aggregate_metrics(sessions, tasks));
  return 0;
}

int serve_component(const std::string& host, int port, const std::string& token,
                    std::function<void(rpc::RpcServer&)> setup) {
  rpc::RpcServer server(host, port, token);
  setup(server);
  server.start();
  std::cout << "SEQBENCH_LISTENING " << server.address() << std::endl;
  for (;;) pause();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqbench: sequential lifelong-learning harness for language-model agents"};
  app.require_subcommand(1);

  std::string config_path, output_dir, log_path, dataset_path;
  bool normalize = false;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "experiment config (json)")->required();

  auto* resume = app.add_subcommand("resume", "resume an interrupted experiment");
  resume->add_option("--output", output_dir, "output directory of the interrupted run")
      ->required();

  auto* report = app.add_subcommand("report", "render metrics from a session log");
  report->add_option("--log", log_path, "session log (jsonl)")->required();
  report->add_option("--dataset", dataset_path, "dataset for per-skill/per-difficulty tables");
  report->add_flag("--normalize", normalize, "print the log with timestamps stripped instead");

  // dataset generation
  auto* datagen_cmd = app.add_subcommand("datagen", "dataset generation and ingestion");
  datagen_cmd->require_subcommand(1);

  std::string out_path, stats_path, sexpr_path, store_path;
  std::size_t candidates = 650, target = 500;
  std::int64_t min_per_skill = 20;
  std::uint64_t seed = 0;

  auto* gen_db = datagen_cmd->add_subcommand("db", "generate db tasks with the mock generator");
  gen_db->add_option("--output", out_path, "output dataset (jsonl)")->required();
  gen_db->add_option("--candidates", candidates, "candidates to generate");
  gen_db->add_option("--target", target, "dataset size to select");
  gen_db->add_option("--min-per-skill", min_per_skill, "minimum occurrences per skill");
  gen_db->add_option("--seed", seed, "rng seed");
  gen_db->add_option("--stats", stats_path, "pipeline stats output (json)");

  auto* ingest = datagen_cmd->add_subcommand("kg-ingest", "convert s-expressions into kg tasks");
  ingest->add_option("--sexpr", sexpr_path, "s-expression records (jsonl)")->required();
  ingest->add_option("--store", store_path, "triple store fixture (tsv)")->required();
  ingest->add_option("--output", out_path, "output dataset (jsonl)")->required();
  ingest->add_option("--stats", stats_path, "ingestion stats output (json)");

  auto* demo = datagen_cmd->add_subcommand("demo", "write the bundled demo datasets and configs");
  demo->add_option("--output", out_path, "target directory")->required();

  double review_fraction = 0.1;
  auto* review = datagen_cmd->add_subcommand(
      "review", "export a manual-review worksheet over a dataset sample");
  review->add_option("--dataset", dataset_path, "dataset to sample (jsonl)")->required();
  review->add_option("--output", out_path, "worksheet output path")->required();
  review->add_option("--fraction", review_fraction, "sample fraction (default 0.1)");
  review->add_option("--seed", seed, "rng seed");

  // component servers
  std::string host = "127.0.0.1", token;
  int port = 0;
  std::string factory_address;

  auto* serve_controller = app.add_subcommand(
      "serve-controller", "long-running server-side controller for distributed runs");
  serve_controller->add_option("--host", host);
  serve_controller->add_option("--port", port);
  serve_controller->add_option("--token", token);

  auto* serve_env = app.add_subcommand("serve-env", "serve an environment over rpc");
  serve_env->add_option("--config", config_path, "experiment config (json)")->required();
  serve_env->add_option("--factory", factory_address, "history factory server address")
      ->required();
  serve_env->add_option("--host", host);
  serve_env->add_option("--port", port);
  serve_env->add_option("--token", token);

  auto* serve_factory = app.add_subcommand("serve-factory", "serve a history factory over rpc");
  serve_factory->add_option("--host", host);
  serve_factory->add_option("--port", port);
  serve_factory->add_option("--token", token);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (resume->parsed()) return cmd_resume(output_dir);
    if (report->parsed()) return cmd_report(log_path, dataset_path, normalize);

    if (gen_db->parsed()) {
      datagen::MockDbTaskGenerator generator(seed);
      datagen::PipelineOptions options;
      options.candidate_count = candidates;
      options.target_size = target;
      options.min_per_skill = min_per_skill;
      options.seed = seed;
      datagen::PipelineResult result = datagen::run_db_pipeline(generator, options);
      if (!stats_path.empty()) {
        std::ofstream stats(stats_path, std::ios::trunc);
        stats << result.stats.to_json().dump(2) << "\n";
      }
      if (!result.feasible) {
        std::cerr << "selection infeasible; deficient skills:";
        for (const auto& skill : result.deficient_skills) std::cerr << " " << skill;
        std::cerr << "\n";
        return 3;
      }
      save_dataset(out_path, result.dataset);
      std::cout << result.stats.to_json().dump(2) << "\n";
      return 0;
    }

    if (ingest->parsed()) {
      TripleStore store = TripleStore::load(store_path);
      std::ifstream in(sexpr_path);
      if (!in) {
        std::cerr << "cannot open " << sexpr_path << "\n";
        return 2;
      }
      std::vector<TaskInstance> tasks;
      datagen::PipelineStats stats;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++stats.generated;
        Json record = Json::parse(line);
        std::vector<KgEntityRef> entities;
        for (const auto& e : record.value("entities", Json::array())) {
          entities.push_back({e.at("name").get<std::string>(), e.at("id").get<std::string>()});
        }
        auto outcome = datagen::kg_task_from_sexpr(
            record.at("id").get<std::string>(), record.at("question").get<std::string>(),
            entities, record.at("sexpr").get<std::string>(), store);
        if (outcome.accepted) {
          ++stats.validated;
          tasks.push_back(std::move(outcome.task));
        } else {
          ++stats.rejected_by_reason[outcome.reason.substr(0, outcome.reason.find(':'))];
        }
      }
      stats.selected = static_cast<std::int64_t>(tasks.size());
      save_dataset(out_path, tasks);
      if (!stats_path.empty()) {
        std::ofstream out(stats_path, std::ios::trunc);
        out << stats.to_json().dump(2) << "\n";
      }
      std::cout << stats.to_json().dump(2) << "\n";
      return 0;
    }

    if (demo->parsed()) {
      demo::write_demo_data(out_path);
      std::cout << "demo data written to " << out_path << "\n";
      return 0;
    }

    if (review->parsed()) {
      std::vector<TaskInstance> tasks = load_dataset(dataset_path);
      std::ofstream out(out_path, std::ios::trunc);
      if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return 2;
      }
      out << datagen::render_review_worksheet(tasks, review_fraction, seed);
      std::cout << "review worksheet written to " << out_path << "\n";
      return 0;
    }

    if (serve_controller->parsed()) {
      return serve_component(host, port, token, [&](rpc::RpcServer& server) {
        rpc::register_server_controller(server, std::make_shared<rpc::ServerController>(host));
      });
    }

    if (serve_factory->parsed()) {
      return serve_component(host, port, token, [&](rpc::RpcServer& server) {
        rpc::register_history_factory(server, std::make_shared<HistoryItemFactory>());
      });
    }

    if (serve_env->parsed()) {
      ExperimentConfig config = load_config(config_path);
      auto factory = std::make_shared<rpc::RemoteHistoryFactory>(
          rpc::WireHandle{"HistoryItemFactory", 1, factory_address}, token);
      auto environment = build_environment(config, factory);
      rpc::WireHandle factory_handle{"HistoryItemFactory", 1, factory_address};
      return serve_component(host, port, token, [&](rpc::RpcServer& server) {
        rpc::register_environment(server, environment, factory_handle);
      });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
