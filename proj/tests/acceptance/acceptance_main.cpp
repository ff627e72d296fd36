// Acceptance suite: runs every acceptance criterion end to end against the
// bundled demo data and prints one PASS/FAIL line per criterion.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "../kg_oracle.hpp"
#include "../toy_target.hpp"
#include "seqbench/config.hpp"
#include "seqbench/controller.hpp"
#include "seqbench/datagen.hpp"
#include "seqbench/env_db.hpp"
#include "seqbench/env_os.hpp"
#include "seqbench/metrics.hpp"
#include "seqbench/replay.hpp"
#include "seqbench/serialize.hpp"

namespace fs = std::filesystem;
using namespace seqbench;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kDataDir = SEQBENCH_DATA_DIR;
const std::string kCliPath = SEQBENCH_CLI_PATH;

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& what) {
  if (!condition) throw CheckFailure(what);
}

template <typename A, typename B>
void require_eq(const A& a, const B& b, const std::string& what) {
  if (!(a == b)) {
    std::ostringstream os;
    os << what << " (got " << a << ", expected " << b << ")";
    throw CheckFailure(os.str());
  }
}

fs::path scratch_dir() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("seqbench-acceptance-" + std::to_string(getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  static int counter = 0;
  fs::path dir = root / ("case" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- in-process experiment helpers -----------------------------------------

struct LoadedExperiment {
  ExperimentConfig config;
  std::vector<TaskInstance> tasks;
  ModelPool pool;
  std::shared_ptr<Agent> agent;
  std::shared_ptr<Environment> environment;
  CallbackList callbacks;
};

std::unique_ptr<LoadedExperiment> load_demo(const std::string& config_name) {
  auto exp = std::make_unique<LoadedExperiment>();
  exp->config = load_config(kDataDir + "/demo/" + config_name);
  exp->tasks = load_dataset(exp->config.dataset_path);
  define_models(exp->config, exp->pool);
  exp->agent = build_agent(exp->config, exp->pool);
  exp->environment = build_environment(exp->config, std::make_shared<HistoryItemFactory>());
  exp->callbacks = build_callbacks(exp->config);
  return exp;
}

MetricsReport run_demo(LoadedExperiment& exp, const fs::path& dir) {
  RunOptions options;
  options.session_log_path = (dir / "sessions.jsonl").string();
  options.snapshot_path = (dir / "snapshot.json").string();
  options.config_digest = exp.config.digest;
  options.round_limits = exp.config.round_limits;
  return run_experiment(options, exp.tasks, *exp.agent, *exp.environment, exp.callbacks);
}

// ---- subprocess helpers -----------------------------------------------------

int run_cli(const std::string& args, const std::string& extra_env = "") {
  std::string command = extra_env + " " + kCliPath + " " + args + " > /dev/null 2>&1";
  int status = std::system(command.c_str());
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

struct SpawnedServer {
  pid_t pid = -1;
  std::string address;

  ~SpawnedServer() {
    if (pid > 0) {
      kill(pid, SIGTERM);
      int status = 0;
      waitpid(pid, &status, 0);
    }
  }
};

SpawnedServer spawn_server(const std::vector<std::string>& args) {
  int fds[2];
  require(pipe(fds) == 0, "pipe failed");
  pid_t pid = fork();
  require(pid >= 0, "fork failed");
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(kCliPath.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execv(kCliPath.c_str(), argv.data());
    _exit(127);
  }
  close(fds[1]);
  SpawnedServer server;
  server.pid = pid;
  FILE* out = fdopen(fds[0], "r");
  char line[512];
  while (fgets(line, sizeof(line), out)) {
    std::string text(line);
    auto pos = text.find("SEQBENCH_LISTENING ");
    if (pos != std::string::npos) {
      server.address = text.substr(pos + strlen("SEQBENCH_LISTENING "));
      while (!server.address.empty() &&
             (server.address.back() == '\n' || server.address.back() == '\r')) {
        server.address.pop_back();
      }
      break;
    }
  }
  fclose(out);
  require(!server.address.empty(), "spawned server never reported an address");
  return server;
}

// ---- criteria ---------------------------------------------------------------

// 1. The bundled mini-dataset plus scripted agents reproduce the exact
//    expected success rates and status breakdowns.
void criterion_end_to_end() {
  auto db = load_demo("config_db.json");
  MetricsReport db_report = run_demo(*db, scratch_dir());
  require_eq(db_report.session_count, 12, "db demo session count");
  require_eq(db_report.total_reward, 9, "db demo reward total (9/12 = 0.75)");
  require(std::abs(db_report.success_rate - 0.75) < 1e-12, "db demo success rate");
  require_eq(db_report.status_counts.at(SampleStatus::completed), 10, "db completed count");
  require_eq(db_report.status_counts.at(SampleStatus::task_limit_reached), 1, "db limit count");
  require_eq(db_report.status_counts.at(SampleStatus::agent_validation_failed), 1,
             "db validation count");
  require_eq(db_report.status_counts.size(), std::size_t{3}, "db status kinds");

  auto kg = load_demo("config_kg.json");
  MetricsReport kg_report = run_demo(*kg, scratch_dir());
  require_eq(kg_report.session_count, 10, "kg demo session count");
  require_eq(kg_report.total_reward, 7, "kg demo reward total (7/10 = 0.7)");
  require_eq(kg_report.status_counts.at(SampleStatus::completed), 8, "kg completed count");
  require_eq(kg_report.status_counts.at(SampleStatus::task_limit_reached), 1, "kg limit count");
  require_eq(kg_report.status_counts.at(SampleStatus::agent_validation_failed), 1,
             "kg validation count");
  // per-length buckets mirror the dataset design: lengths 2..6 solved, 7..9 not
  for (int len = 2; len <= 6; ++len) {
    const auto& tally = kg_report.per_difficulty.at("length_" + std::to_string(len));
    require_eq(tally.successes, tally.attempts, "kg length bucket solved");
  }
  for (int len = 7; len <= 9; ++len) {
    require_eq(kg_report.per_difficulty.at("length_" + std::to_string(len)).successes, 0,
               "kg long bucket unsolved");
  }

  auto os = load_demo("config_os.json");
  MetricsReport os_report = run_demo(*os, scratch_dir());
  require_eq(os_report.session_count, 8, "os demo session count");
  require_eq(os_report.total_reward, 5, "os demo reward total (5/8 = 0.625)");
  require_eq(os_report.status_counts.at(SampleStatus::completed), 5, "os completed count");
  require_eq(os_report.status_counts.at(SampleStatus::task_limit_reached), 1, "os limit count");
  require_eq(os_report.status_counts.at(SampleStatus::agent_validation_failed), 1,
             "os validation count");
  require_eq(os_report.status_counts.at(SampleStatus::agent_context_limit), 1,
             "os context-limit count");
}

// 2. Four scripted agents deterministically hit the four failure modes.
void criterion_failure_taxonomy() {
  auto make_db_task = [] {
    TaskInstance task;
    task.task_id = "t";
    task.env_kind = EnvKind::db;
    task.instruction = "Query the table.";
    task.setup = DbSetup{"t", {"v"}, {{std::int64_t{1}}}};
    DbGroundTruth truth;
    truth.statement = "SELECT v FROM t;";
    truth.rows = std::vector<DbRow>{DbRow{std::int64_t{1}}};
    task.ground_truth = truth;
    task.skills = {"select"};
    return task;
  };
  auto run_db = [&](const std::string& reply) {
    auto model = std::make_shared<ScriptedModel>(std::vector<ScriptedRule>{}, reply);
    Agent agent(model, make_default_tokenizer());
    DatabaseEnvironment env(make_embedded_sql_backend(), std::make_shared<HistoryItemFactory>());
    std::vector<Session> history;
    return execute_task(make_db_task(), agent, env, {}, history, 3);
  };

  // completed but incorrect: well-formed answer, wrong content
  Session incorrect = run_db("Action: Answer\nFinal Answer: [(9,)]");
  require_eq(to_string(incorrect.status), "completed", "incorrect commit status");
  require_eq(incorrect.reward, 0, "incorrect commit reward");

  // task_limit_reached at the DB limit of 3
  Session limited = run_db("Action: Operation\n```sql\nSELECT v FROM t;\n```");
  require_eq(to_string(limited.status), "task_limit_reached", "db limit status");
  require_eq(limited.rounds_used, 3, "db limit is 3 rounds");

  // agent_validation_failed on the bare-SQL reply shape
  Session invalid = run_db("Action: Operation\nINSERT INTO t VALUES (2);");
  require_eq(to_string(invalid.status), "agent_validation_failed", "validation status");

  // task_limit_reached at the OS limit of 5
  {
    TaskInstance task;
    task.task_id = "os";
    task.env_kind = EnvKind::os;
    task.instruction = "touch the file";
    task.setup = OsSetup{""};
    OsGroundTruth truth;
    truth.eval_script = "test -f /done";
    task.ground_truth = truth;
    task.skills = {"touch"};
    auto model = std::make_shared<ScriptedModel>(
        std::vector<ScriptedRule>{}, "Act: bash\n```bash\nls /\n```");
    Agent agent(model, make_default_tokenizer());
    OsEnvironment env(std::make_shared<MockExecBackend>(),
                      std::make_shared<HistoryItemFactory>());
    std::vector<Session> history;
    Session session = execute_task(task, agent, env, {}, history, 5);
    require_eq(to_string(session.status), "task_limit_reached", "os limit status");
    require_eq(session.rounds_used, 5, "os limit is 5 rounds");
  }

  // agent_context_limit from an oversized observation
  {
    TaskInstance task;
    task.task_id = "os";
    task.env_kind = EnvKind::os;
    task.instruction = "scan everything";
    task.setup = OsSetup{""};
    OsGroundTruth truth;
    truth.eval_script = "test -f /done";
    task.ground_truth = truth;
    task.skills = {"find"};

    auto backend = std::make_shared<MockExecBackend>();
    std::string giant;
    giant.reserve(4'250'311);
    while (giant.size() < 4'250'311) giant += "path/entry ";
    backend->add_rule({"find / -print", {giant, 0}, {}, {}});

    OsEnvironmentOptions options;
    options.observation_limit = 10'000'000;  // let the flood through
    OsEnvironment env(backend, std::make_shared<HistoryItemFactory>(), options);

    std::vector<ScriptedRule> rules{{std::nullopt, 0, std::nullopt,
                                     "Act: bash\n```bash\nfind / -print\n```"}};
    auto model = std::make_shared<ScriptedModel>(rules, "Act: finish", 32768);
    Agent agent(model, make_default_tokenizer());
    std::vector<Session> history;
    Session session = execute_task(task, agent, env, {}, history, 5);
    require_eq(to_string(session.status), "agent_context_limit", "context limit status");
  }
}

// 3. 1,000 random action sequences agree with the brute-force reference.
void criterion_kg_oracle() {
  std::mt19937_64 rng(20240811);
  int sequences = 0;
  while (sequences < 1000) {
    TripleStore store = kg_oracle::random_store(rng, 50);
    require(static_cast<int>(store.triples().size()) <= 50, "store stays within 50 triples");

    std::vector<std::string> entities;
    {
      std::set<std::string> all;
      for (const auto& t : store.triples()) {
        all.insert(t.subject);
        all.insert(t.object);
      }
      entities.assign(all.begin(), all.end());
    }
    auto random_entity = [&] { return entities[rng() % entities.size()]; };

    for (int seq = 0; seq < 5 && sequences < 1000; ++seq, ++sequences) {
      std::vector<KgVariable> vars;
      std::vector<std::set<std::string>> mirror;  // brute-force variable table
      int steps = 1 + static_cast<int>(rng() % 8);
      for (int step = 0; step < steps; ++step) {
        std::string source = (!mirror.empty() && rng() % 2 == 0)
                                 ? "#" + std::to_string(rng() % mirror.size())
                                 : random_entity();
        std::set<std::string> source_set =
            source[0] == '#' ? mirror[std::stoul(source.substr(1))]
                             : std::set<std::string>{source};

        switch (rng() % 6) {
          case 0: {
            auto result = kg_apply(*parse_kg_call("get_relations(" + source + ")"), store, vars);
            auto expected = kg_oracle::brute_relations(store, source_set);
            require(std::set<std::string>(result.names.begin(), result.names.end()) == expected,
                    "get_relations matches brute force");
            break;
          }
          case 1: {
            std::string rel = "rel.r" + std::to_string(rng() % 7);
            kg_apply(*parse_kg_call("get_neighbors(" + source + "," + rel + ")"), store, vars);
            mirror.push_back(kg_oracle::brute_neighbors(store, source_set, rel));
            require(vars.back().entities == mirror.back(), "get_neighbors matches brute force");
            break;
          }
          case 2: {
            if (mirror.empty()) break;
            std::size_t a = rng() % mirror.size(), b = rng() % mirror.size();
            kg_apply(*parse_kg_call("intersection(#" + std::to_string(a) + ",#" +
                                    std::to_string(b) + ")"),
                     store, vars);
            mirror.push_back(kg_oracle::brute_intersection(mirror[a], mirror[b]));
            require(vars.back().entities == mirror.back(), "intersection matches brute force");
            break;
          }
          case 3: {
            auto result = kg_apply(*parse_kg_call("get_attributes(" + source + ")"), store, vars);
            auto expected = kg_oracle::brute_attributes(store, source_set);
            require(std::set<std::string>(result.names.begin(), result.names.end()) == expected,
                    "get_attributes matches brute force");
            break;
          }
          case 4: {
            std::string attr = "attr.a" + std::to_string(rng() % 4);
            bool want_max = rng() % 2 == 0;
            std::string name = want_max ? "argmax" : "argmin";
            kg_apply(*parse_kg_call(name + "(" + source + "," + attr + ")"), store, vars);
            mirror.push_back(kg_oracle::brute_arg_extremum(store, source_set, attr, want_max));
            require(vars.back().entities == mirror.back(), name + " matches brute force");
            break;
          }
          case 5: {
            auto result = kg_apply(*parse_kg_call("count(" + source + ")"), store, vars);
            require_eq(result.count, static_cast<std::int64_t>(source_set.size()),
                       "count matches brute force");
            break;
          }
        }
        require(vars.size() == mirror.size(), "variable tables stay aligned");
        for (std::size_t i = 0; i < vars.size(); ++i) {
          require_eq(vars[i].name, "#" + std::to_string(i), "variable names stay dense");
        }
      }
    }
  }
}

// 4. Digest collides on content-equal permutations and differs on single-cell
//    perturbations, over 500 random tables.
void criterion_db_digest() {
  std::mt19937_64 rng(7777);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t cols = 1 + rng() % 5;
    std::size_t rows = 1 + rng() % 10;
    DbSetup setup;
    setup.table_name = "r";
    for (std::size_t c = 0; c < cols; ++c) setup.headers.push_back("c" + std::to_string(c));
    for (std::size_t r = 0; r < rows; ++r) {
      DbRow row;
      for (std::size_t c = 0; c < cols; ++c) {
        switch (rng() % 3) {
          case 0: row.push_back(static_cast<std::int64_t>(rng() % 500)); break;
          case 1: row.push_back(static_cast<double>(rng() % 1000) / 8.0); break;
          default: row.push_back("s" + std::to_string(rng() % 200));
        }
      }
      setup.rows.push_back(std::move(row));
    }

    DbSetup shuffled = setup;
    std::shuffle(shuffled.rows.begin(), shuffled.rows.end(), rng);
    SqliteBackend a, b;
    create_task_table(a, setup);
    create_task_table(b, shuffled);
    require_eq(db_state_digest(a, "r"), db_state_digest(b, "r"),
               "permuted contents share the digest");

    DbSetup perturbed = setup;
    std::size_t pr = rng() % rows, pc = rng() % cols;
    perturbed.rows[pr][pc] = std::string("perturbed_") + std::to_string(rng() % 1000000);
    SqliteBackend c;
    create_task_table(c, perturbed);
    require(db_state_digest(a, "r") != db_state_digest(c, "r"),
            "single-cell perturbation changes the digest (md5 collisions aside)");
  }
}

// 5. Replay and grouping identities.
void criterion_replay_identities() {
  auto normalized_run = [&](CallbackList callbacks) {
    auto exp = load_demo("config_db.json");
    fs::path dir = scratch_dir();
    RunOptions options;
    options.session_log_path = (dir / "sessions.jsonl").string();
    options.config_digest = exp->config.digest;
    run_experiment(options, exp->tasks, *exp->agent, *exp->environment, callbacks);
    return normalize_session_log(read_file(dir / "sessions.jsonl"));
  };

  // n=0 equals the baseline byte-exact
  require_eq(normalized_run({std::make_shared<ExperienceReplayCallback>(0)}), normalized_run({}),
             "replay n=0 equals no callback");

  // g=1 equals plain replay byte-exact
  require_eq(normalized_run({std::make_shared<GroupSelfConsistencyCallback>(4, 1)}),
             normalized_run({std::make_shared<ExperienceReplayCallback>(4)}),
             "group self-consistency g=1 equals plain replay");

  // partition/flatten identity and size bounds over randomized inputs
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Session> experiences(rng() % 24);
    for (std::size_t i = 0; i < experiences.size(); ++i) {
      experiences[i].task_id = "e" + std::to_string(i);
    }
    std::size_t g = 1 + rng() % 8;
    auto groups = partition_groups(experiences, g);
    std::vector<std::string> flat;
    std::size_t min_size = SIZE_MAX, max_size = 0;
    for (const auto& group : groups) {
      require(!group.empty(), "no empty groups survive");
      min_size = std::min(min_size, group.size());
      max_size = std::max(max_size, group.size());
      for (const auto& s : group) flat.push_back(s.task_id);
    }
    std::vector<std::string> expected;
    for (const auto& s : experiences) expected.push_back(s.task_id);
    require(flat == expected, "flatten(groups) == input");
    if (!groups.empty()) require(max_size - min_size <= 1, "group sizes differ by at most 1");
  }
}

// 6. Token trend under grouping: the largest per-inference prompt shrinks as
//    the group count grows (16 synthetic experiences, g in {1,4,16}).
void criterion_token_trend() {
  ExperienceStore store;
  for (int i = 0; i < 16; ++i) {
    Session s;
    s.task_id = "syn" + std::to_string(i);
    s.status = SampleStatus::completed;
    s.reward = 1;
    s.outcome = EvaluationOutcome::correct;
    s.history.add_user("preamble");
    s.history.add_agent("OK.");
    std::string filler = "experience " + std::to_string(i);
    for (int w = 0; w < 40; ++w) filler += " token" + std::to_string(w);
    s.history.add_user(filler);
    s.history.add_agent("Action: Answer\nFinal Answer: [(1,)]");
    store.append(s);
  }
  std::string store_bytes = store.serialize();

  TaskInstance task;
  task.task_id = "probe";
  task.env_kind = EnvKind::db;
  task.instruction = "Query it.";
  task.setup = DbSetup{"p", {"v"}, {{std::int64_t{1}}}};
  DbGroundTruth truth;
  truth.statement = "SELECT v FROM p;";
  truth.rows = std::vector<DbRow>{DbRow{std::int64_t{1}}};
  task.ground_truth = truth;
  task.skills = {"select"};

  auto max_prompt = [&](std::size_t g) {
    auto callback = std::make_shared<GroupSelfConsistencyCallback>(16, g);
    // seed the experience memory through the official persistence channel
    std::map<std::string, std::string> states{{callback->name(), store_bytes}};
    CallbackContext ctx;
    ctx.callback_states = &states;
    CallbackList callbacks{callback};
    dispatch_event(CallbackEvent::restore_state, ctx, callbacks);

    auto model = std::make_shared<ScriptedModel>(std::vector<ScriptedRule>{},
                                                 "Action: Answer\nFinal Answer: [(1,)]");
    Agent agent(model, make_default_tokenizer());
    DatabaseEnvironment env(make_embedded_sql_backend(), std::make_shared<HistoryItemFactory>());
    std::vector<Session> history;
    Session session = execute_task(task, agent, env, callbacks, history, 3);
    require_eq(session.reward, 1, "probe task solved");
    return session.max_prompt_tokens;
  };

  std::int64_t g1 = max_prompt(1);
  std::int64_t g4 = max_prompt(4);
  std::int64_t g16 = max_prompt(16);
  require(g16 < g1, "max per-inference prompt at g=16 is strictly below g=1");
  require(g4 <= g1 && g16 <= g4, "max prompt tokens monotone non-increasing in g");
}

// 7. Voting invariants over exhaustive candidate multisets of size <= 4.
void criterion_voting() {
  const std::vector<std::string> alphabet = {"A", "B", "C", "D"};
  for (std::size_t len = 1; len <= 4; ++len) {
    std::vector<std::size_t> idx(len, 0);
    while (true) {
      std::vector<std::string> candidates;
      for (std::size_t i = 0; i < len; ++i) candidates.push_back(alphabet[idx[i]]);
      std::string winner = majority_vote(candidates);
      auto count = [&](const std::string& v) {
        return std::count(candidates.begin(), candidates.end(), v);
      };
      for (const auto& c : candidates) {
        require(count(winner) >= count(c), "winner is modal");
        if (count(c) == count(winner)) {
          require(std::find(candidates.begin(), candidates.end(), winner) <=
                      std::find(candidates.begin(), candidates.end(), c),
                  "ties break toward the lowest-index group");
        }
      }
      if (2 * count(winner) > static_cast<long>(len)) {
        std::vector<std::string> shuffled = candidates;
        std::sort(shuffled.begin(), shuffled.end());
        do {
          require_eq(majority_vote(shuffled), winner, "strict majority is permutation invariant");
        } while (std::next_permutation(shuffled.begin(), shuffled.end()));
      }
      std::size_t pos = 0;
      while (pos < len && ++idx[pos] == alphabet.size()) idx[pos++] = 0;
      if (pos == len) break;
    }
  }
}

// 8. RPC transparency: randomized differential sequences plus the full demo
//    run local vs 3-process distributed with byte-identical normalized logs.
void criterion_rpc_transparency() {
  {
    rpc::RpcServer server("127.0.0.1", 0);
    auto remote_target = std::make_shared<toy::Accumulator>();
    std::int64_t id = toy::register_accumulator(server, remote_target);
    server.start();

    auto local = std::make_shared<toy::Accumulator>();
    std::vector<std::shared_ptr<toy::Accumulator>> local_stack{local};
    std::vector<toy::AccumulatorClient> remote_stack{
        toy::AccumulatorClient(rpc::WireHandle{"Accumulator", id, server.address()})};

    std::mt19937_64 rng(314159);
    for (int step = 0; step < 1000; ++step) {
      auto& l = *local_stack.back();
      auto& r = remote_stack.back();
      switch (rng() % 6) {
        case 0: {
          std::int64_t x = static_cast<std::int64_t>(rng() % 200) - 100;
          require_eq(l.add(x), r.add(x), "remote add equals local add");
          break;
        }
        case 1: {
          std::int64_t x = static_cast<std::int64_t>(rng() % 4);
          require_eq(l.mul(x), r.mul(x), "remote mul equals local mul");
          break;
        }
        case 2: {
          std::string label = "L" + std::to_string(rng() % 997);
          l.label = label;
          r.set_label(label);
          break;
        }
        case 3:
          require_eq(l.label, r.label(), "remote label equals local label");
          require_eq(l.value, r.value(), "remote value equals local value");
          break;
        case 4:
          if (local_stack.size() < 5) {
            std::string label = "c" + std::to_string(step);
            local_stack.push_back(l.make_child(label));
            remote_stack.push_back(r.make_child(label));
          }
          break;
        case 5:
          if (local_stack.size() > 1) {
            local_stack.pop_back();
            remote_stack.pop_back();
          }
          break;
      }
    }
    server.stop();
  }

  // full demo experiment: local process vs controller + env + factory servers
  fs::path dir = scratch_dir();
  fs::path local_out = dir / "local";
  fs::path dist_out = dir / "dist";

  {
    Json config = Json::parse(read_file(kDataDir + "/demo/config_db.json"));
    config["output_dir"] = local_out.string();
    config["dataset"] = kDataDir + "/demo/db_tasks.jsonl";
    config["models"][0]["path"] = kDataDir + "/demo/agent_db.json";
    std::ofstream out(dir / "config_local.json");
    out << config.dump(2);
  }
  require(run_cli("run --config " + (dir / "config_local.json").string()) == 0,
          "local demo run succeeds");

  SpawnedServer controller = spawn_server({"serve-controller", "--host", "127.0.0.1", "--port", "0"});
  {
    Json config = Json::parse(read_file(kDataDir + "/demo/config_db.json"));
    config["output_dir"] = dist_out.string();
    config["deployment"] = {{"mode", "distributed"}, {"controller", controller.address}};
    // the component servers run elsewhere; give them absolute paths
    config["dataset"] = kDataDir + "/demo/db_tasks.jsonl";
    config["models"][0]["path"] = kDataDir + "/demo/agent_db.json";
    std::ofstream out(dir / "config_dist.json");
    out << config.dump(2);
  }
  require(run_cli("run --config " + (dir / "config_dist.json").string()) == 0,
          "distributed demo run succeeds");

  require_eq(normalize_session_log(read_file(local_out / "sessions.jsonl")),
             normalize_session_log(read_file(dist_out / "sessions.jsonl")),
             "local and distributed session logs are identical after normalization");
}

// 9. Crash recovery: killing after every task index and resuming reproduces
//    the uninterrupted log exactly.
void criterion_crash_recovery() {
  fs::path dir = scratch_dir();

  auto config_for = [&](const fs::path& out) {
    Json config = Json::parse(read_file(kDataDir + "/demo/config_db.json"));
    config["output_dir"] = out.string();
    config["dataset"] = kDataDir + "/demo/db_tasks.jsonl";
    config["models"][0]["path"] = kDataDir + "/demo/agent_db.json";
    fs::path path = out.string() + "_config.json";
    std::ofstream o(path);
    o << config.dump(2);
    return path.string();
  };

  fs::path reference_out = dir / "reference";
  require(run_cli("run --config " + config_for(reference_out)) == 0, "reference run succeeds");
  std::string reference = normalize_session_log(read_file(reference_out / "sessions.jsonl"));

  for (int k = 0; k < 12; ++k) {
    fs::path out = dir / ("crash" + std::to_string(k));
    std::string config = config_for(out);
    int code = run_cli("run --config " + config,
                       "SEQBENCH_CRASH_AFTER_TASK=" + std::to_string(k));
    require(code != 0, "the fault injection killed the run");
    require(load_session_log((out / "sessions.jsonl").string()).size() ==
                static_cast<std::size_t>(k + 1),
            "exactly k+1 sessions persisted before the crash");
    require(run_cli("resume --output " + out.string()) == 0, "resume succeeds");
    require_eq(normalize_session_log(read_file(out / "sessions.jsonl")), reference,
               "resumed log equals the uninterrupted log (k=" + std::to_string(k) + ")");
  }
}

// 10. Datagen: balance constraint on a mock pool, relatedness properties and
//     seeded pipeline determinism.
void criterion_datagen() {
  datagen::MockDbTaskGenerator generator(424242, 101);
  datagen::PipelineOptions options;
  options.candidate_count = 620;
  options.target_size = 500;
  options.min_per_skill = 20;
  options.seed = 3;
  datagen::PipelineResult result = datagen::run_db_pipeline(generator, options);
  require(result.stats.generated >= 600, "pool of at least 600 candidates");
  require(result.feasible, "selection satisfied the constraint (or must report infeasibility)");
  require_eq(result.dataset.size(), std::size_t{500}, "500 tasks selected");
  datagen::SkillStats stats = datagen::SkillStats::over(EnvKind::db, result.dataset);
  for (const auto& [skill, count] : stats.counts) {
    require(count >= 20, "skill " + skill + " occurs at least 20 times");
  }

  // relatedness symmetry, range and identity over random skill sets
  std::mt19937_64 rng(6);
  const auto& all = db_skill_set();
  for (int trial = 0; trial < 300; ++trial) {
    auto pick = [&] {
      TaskInstance t;
      t.task_id = "x";
      t.env_kind = EnvKind::db;
      std::size_t k = 1 + rng() % 6;
      for (std::size_t i = 0; i < k; ++i) t.skills.push_back(all[rng() % all.size()]);
      return t;
    };
    TaskInstance a = pick(), b = pick();
    double ab = datagen::relatedness(a, b);
    require(std::abs(ab - datagen::relatedness(b, a)) < 1e-12, "relatedness is symmetric");
    require(ab >= 0.0 && ab <= 1.0, "relatedness stays in [0,1]");
    require(std::abs(datagen::relatedness(a, a) - 1.0) < 1e-12, "relatedness(t,t) = 1");
  }

  // seeded determinism of the full pipeline
  datagen::PipelineOptions small;
  small.candidate_count = 120;
  small.target_size = 60;
  small.min_per_skill = 0;
  small.seed = 9;
  datagen::MockDbTaskGenerator g1(77), g2(77);
  auto r1 = datagen::run_db_pipeline(g1, small);
  auto r2 = datagen::run_db_pipeline(g2, small);
  require_eq(r1.dataset.size(), r2.dataset.size(), "deterministic dataset size");
  for (std::size_t i = 0; i < r1.dataset.size(); ++i) {
    require_eq(task_to_json(r1.dataset[i]).dump(), task_to_json(r2.dataset[i]).dump(),
               "deterministic dataset contents");
  }
}

struct Criterion {
  std::string name;
  std::function<void()> run;
  double time_budget_seconds;  // 0 = no budget
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"1 end-to-end scripted runs reproduce the expected rates and breakdowns",
       criterion_end_to_end, 30.0},
      {"2 failure taxonomy triggers all four agent failure modes", criterion_failure_taxonomy, 0},
      {"3 kg actions match the brute-force oracle over 1000 random sequences",
       criterion_kg_oracle, 10.0},
      {"4 db digest properties over 500 random tables", criterion_db_digest, 10.0},
      {"5 replay and grouping identities", criterion_replay_identities, 0},
      {"6 group self-consistency shrinks the largest prompt", criterion_token_trend, 0},
      {"7 voting invariants over exhaustive candidate multisets", criterion_voting, 0},
      {"8 rpc transparency locally and across three processes", criterion_rpc_transparency, 60.0},
      {"9 crash recovery reproduces the uninterrupted log", criterion_crash_recovery, 0},
      {"10 datagen balance, relatedness and determinism", criterion_datagen, 0},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    auto start = Clock::now();
    std::string failure;
    try {
      criterion.run();
    } catch (const std::exception& e) {
      failure = e.what();
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (failure.empty() && criterion.time_budget_seconds > 0 &&
        elapsed > criterion.time_budget_seconds) {
      failure = "exceeded time budget of " + std::to_string(criterion.time_budget_seconds) + "s";
    }
    char line[32];
    snprintf(line, sizeof(line), "%6.2fs", elapsed);
    if (failure.empty()) {
      std::cout << "[PASS] criterion " << criterion.name << " (" << line << ")\n";
    } else {
      ++failures;
      std::cout << "[FAIL] criterion " << criterion.name << " (" << line << "): " << failure
                << "\n";
    }
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
