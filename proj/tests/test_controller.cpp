#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "seqbench/controller.hpp"
#include "seqbench/env_db.hpp"
#include "seqbench/env_os.hpp"
#include "seqbench/replay.hpp"
#include "seqbench/serialize.hpp"

using namespace seqbench;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("seqbench-test-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TaskInstance db_query_task(const std::string& id, const std::string& marker) {
  TaskInstance task;
  task.task_id = id;
  task.env_kind = EnvKind::db;
  task.instruction = "Question " + marker + ": what is in the table?";
  task.setup = DbSetup{"tbl_" + id, {"v"}, {{std::int64_t{1}}, {std::int64_t{2}}}};
  DbGroundTruth truth;
  truth.statement = "SELECT v FROM tbl_" + id + ";";
  truth.rows = std::vector<DbRow>{DbRow{std::int64_t{1}}, DbRow{std::int64_t{2}}};
  task.ground_truth = truth;
  task.skills = {"select"};
  task.difficulty = DifficultyLevel::easy;
  return task;
}

const char* kCorrectReply = "Action: Answer\nFinal Answer: [(1,), (2,)]";
const char* kWrongReply = "Action: Answer\nFinal Answer: [(7,), (8,)]";

std::shared_ptr<Agent> scripted_agent(std::vector<ScriptedRule> rules,
                                      std::string default_reply = "no action") {
  auto model = std::make_shared<ScriptedModel>(std::move(rules), std::move(default_reply));
  return std::make_shared<Agent>(model, make_default_tokenizer());
}

std::shared_ptr<DatabaseEnvironment> db_env() {
  return std::make_shared<DatabaseEnvironment>(make_embedded_sql_backend(),
                                               std::make_shared<HistoryItemFactory>());
}

// Records every event it sees plus ordering facts the invariants need.
struct SpyCallback : Callback {
  std::vector<std::string> events;
  std::string log_path;
  bool flags_all_set_at_inference = true;
  std::vector<std::size_t> persisted_at_create;

  std::string name() const override { return "spy"; }

  void restore_state(CallbackContext&) override { events.push_back("restore_state"); }
  void on_session_create(CallbackContext& ctx) override {
    events.push_back("on_session_create");
    if (!log_path.empty()) {
      persisted_at_create.push_back(load_session_log(log_path).size());
    }
    if (ctx.history && !log_path.empty()) {
      // sequential execution: everything before us is already persisted
      CHECK(ctx.history->size() == load_session_log(log_path).size());
    }
  }
  void on_environment_reset(CallbackContext& ctx) override {
    events.push_back("on_environment_reset");
    check_session(ctx);
  }
  void on_agent_inference(CallbackContext& ctx) override {
    events.push_back("on_agent_inference");
    if (ctx.flags && !ctx.flags->all_set()) flags_all_set_at_inference = false;
    check_session(ctx);
  }
  void on_environment_interact(CallbackContext& ctx) override {
    events.push_back("on_environment_interact");
    check_session(ctx);
  }
  void on_environment_complete(CallbackContext& ctx) override {
    events.push_back("on_environment_complete");
    check_session(ctx);
  }

  // the reward/outcome coupling must hold after every controller transition
  void check_session(CallbackContext& ctx) const {
    if (!ctx.session) return;
    auto violations = validate_session(*ctx.session, -1);
    CHECK_MESSAGE(violations.empty(),
                  (violations.empty() ? "" : violations.front()));
  }
  void on_state_save(CallbackContext&) override { events.push_back("on_state_save"); }

  long count(const std::string& event) const {
    return std::count(events.begin(), events.end(), event);
  }
};

}  // namespace

TEST_CASE("a correct scripted answer completes in one round") {
  auto agent = scripted_agent({{"t1", 0, std::nullopt, kCorrectReply}});
  auto env = db_env();
  std::vector<Session> history;
  Session session = execute_task(db_query_task("t1", "m1"), *agent, *env, {}, history, 3);

  CHECK(session.status == SampleStatus::completed);
  CHECK(session.reward == 1);
  CHECK(session.outcome == EvaluationOutcome::correct);
  CHECK(session.rounds_used == 1);
  CHECK(session.input_tokens_total > 0);
  CHECK(validate_session(session, 3).empty());
}

TEST_CASE("an agent that never commits hits the round limit") {
  // valid operations every round, but no Action: Answer
  auto agent = scripted_agent({}, "Action: Operation\n```sql\nSELECT * FROM tbl_t1;\n```");
  auto env = db_env();
  std::vector<Session> history;
  Session session = execute_task(db_query_task("t1", "m1"), *agent, *env, {}, history, 3);

  CHECK(session.status == SampleStatus::task_limit_reached);
  CHECK(session.rounds_used == 3);
  CHECK(session.reward == 0);
  CHECK(validate_session(session, 3).empty());
}

TEST_CASE("bare sql without the markdown block fails validation") {
  auto agent = scripted_agent({}, "Action: Operation\nSELECT * FROM tbl_t1;");
  auto env = db_env();
  std::vector<Session> history;
  Session session = execute_task(db_query_task("t1", "m1"), *agent, *env, {}, history, 3);

  CHECK(session.status == SampleStatus::agent_validation_failed);
  CHECK(session.reward == 0);
  CHECK(session.rounds_used == 1);
}

TEST_CASE("event cardinality and order per task") {
  auto spy = std::make_shared<SpyCallback>();
  auto agent = scripted_agent({{"t1", 1, std::nullopt, kCorrectReply}},
                              "Action: Operation\n```sql\nSELECT 1;\n```");
  auto env = db_env();
  std::vector<Session> history;
  execute_task(db_query_task("t1", "m1"), *agent, *env, {spy}, history, 3);

  CHECK(spy->count("restore_state") == 0);
  CHECK(spy->count("on_session_create") == 1);
  CHECK(spy->count("on_environment_reset") == 1);
  CHECK(spy->count("on_environment_complete") == 1);
  CHECK(spy->count("on_state_save") == 1);
  CHECK(spy->count("on_agent_inference") == 2);
  CHECK(spy->count("on_environment_interact") == 2);
  CHECK(spy->flags_all_set_at_inference);

  CHECK(spy->events.front() == "on_session_create");
  CHECK(spy->events[1] == "on_environment_reset");
  CHECK(spy->events.back() == "on_state_save");
  CHECK(spy->events[spy->events.size() - 2] == "on_environment_complete");
}

TEST_CASE("callbacks run sequentially over the same session object") {
  struct Tagger : Callback {
    std::string tag;
    std::string seen;
    explicit Tagger(std::string t) : tag(std::move(t)) {}
    std::string name() const override { return "tagger_" + tag; }
    void on_session_create(CallbackContext& ctx) override {
      seen = ctx.session->task_id;
      ctx.session->task_id += "+" + tag;
    }
  };
  auto first = std::make_shared<Tagger>("a");
  auto second = std::make_shared<Tagger>("b");
  auto agent = scripted_agent({}, kCorrectReply);
  auto env = db_env();
  std::vector<Session> history;
  Session session = execute_task(db_query_task("t1", "m"), *agent, *env, {first, second}, history, 3);

  CHECK(first->seen == "t1");
  CHECK(second->seen == "t1+a");  // second observes the first's mutation
  CHECK(session.task_id == "t1+a+b");

  // empty callback list is a no-op
  auto env2 = db_env();
  Session plain = execute_task(db_query_task("t1", "m"), *agent, *env2, {}, history, 3);
  CHECK(plain.task_id == "t1");
}

TEST_CASE("flipping should_environment_interact skips the step and allows regeneration") {
  // The agent emits garbage on round 0 and the correct answer on round 1. A
  // callback detects the garbage and suppresses the interact step, so the
  // loop regenerates instead of failing validation.
  struct Regenerator : Callback {
    int suppressed = 0;
    std::string name() const override { return "regenerator"; }
    void on_agent_inference(CallbackContext& ctx) override {
      const auto& last = ctx.session->history.messages.back();
      if (parse_action(EnvKind::db, last.content).kind == ActionKind::invalid) {
        ctx.flags->should_environment_interact = false;
        ctx.session->history.messages.pop_back();  // drop the invalid attempt
        ++suppressed;
      }
    }
  };
  auto regenerator = std::make_shared<Regenerator>();
  auto agent = scripted_agent({{"t1", 0, std::nullopt, "thinking out loud, no action"},
                               {"t1", 1, std::nullopt, kCorrectReply}});
  auto env = db_env();
  std::vector<Session> history;
  Session session =
      execute_task(db_query_task("t1", "m"), *agent, *env, {regenerator}, history, 3);

  CHECK(regenerator->suppressed == 1);
  CHECK(session.status == SampleStatus::completed);
  CHECK(session.reward == 1);
  CHECK(session.rounds_used == 2);
}

TEST_CASE("a throwing callback maps to agent_unknown_error and the run continues") {
  struct Bomb : Callback {
    std::string name() const override { return "bomb"; }
    void on_environment_reset(CallbackContext& ctx) override {
      if (ctx.session->task_id == "t1") throw std::runtime_error("boom");
    }
  };
  TempDir dir;
  RunOptions options;
  options.session_log_path = dir.file("sessions.jsonl");
  options.config_digest = "d";
  auto agent = scripted_agent({}, kCorrectReply);
  auto env = db_env();
  std::vector<TaskInstance> tasks = {db_query_task("t1", "m1"), db_query_task("t2", "m2")};

  MetricsReport report = run_experiment(options, tasks, *agent, *env, {std::make_shared<Bomb>()});

  auto sessions = load_session_log(options.session_log_path);
  REQUIRE(sessions.size() == 2);
  CHECK(sessions[0].status == SampleStatus::agent_unknown_error);
  CHECK(sessions[0].reward == 0);
  CHECK(sessions[1].status == SampleStatus::completed);
  CHECK(sessions[1].reward == 1);
  CHECK(report.session_count == 2);
}

TEST_CASE("run_experiment executes tasks in order and persists before moving on") {
  TempDir dir;
  RunOptions options;
  options.session_log_path = dir.file("sessions.jsonl");
  options.snapshot_path = dir.file("snapshot.json");
  options.config_digest = "digest-1";

  auto spy = std::make_shared<SpyCallback>();
  spy->log_path = options.session_log_path;

  auto agent = scripted_agent({}, kCorrectReply);
  auto env = db_env();
  std::vector<TaskInstance> tasks = {db_query_task("t1", "m1"), db_query_task("t2", "m2"),
                                     db_query_task("t3", "m3")};

  MetricsReport report = run_experiment(options, tasks, *agent, *env, {spy});

  CHECK(report.success_rate == doctest::Approx(1.0));
  auto sessions = load_session_log(options.session_log_path);
  REQUIRE(sessions.size() == 3);
  CHECK(sessions[0].task_id == "t1");
  CHECK(sessions[1].task_id == "t2");
  CHECK(sessions[2].task_id == "t3");
  CHECK(spy->persisted_at_create == std::vector<std::size_t>{0, 1, 2});
  CHECK(spy->count("restore_state") == 0);  // no snapshot existed at startup

  ExperimentState state = restore_snapshot(options.snapshot_path);
  CHECK(state.next_task_index == 3);
  CHECK(state.config_digest == "digest-1");
}

TEST_CASE("snapshots round trip and refuse corruption or digest mismatch") {
  TempDir dir;
  ExperimentState state;
  state.config_digest = "abc";
  state.next_task_index = 2;
  state.session_log_path = "log.jsonl";
  state.callback_states["replay"] = std::string("\x00\x01\x02binary", 9);

  std::string path = dir.file("snap.json");
  save_snapshot(state, path);
  ExperimentState back = restore_snapshot(path);
  CHECK(back.config_digest == state.config_digest);
  CHECK(back.next_task_index == state.next_task_index);
  CHECK(back.session_log_path == state.session_log_path);
  CHECK(back.callback_states == state.callback_states);

  std::ofstream(dir.file("corrupt.json")) << "not a snapshot at all\n{}";
  CHECK_THROWS_WITH_AS(restore_snapshot(dir.file("corrupt.json")),
                       doctest::Contains("unsupported header"), std::runtime_error);

  // digest mismatch refuses resume
  RunOptions options;
  options.session_log_path = dir.file("sessions.jsonl");
  options.snapshot_path = path;
  options.config_digest = "different";
  auto agent = scripted_agent({}, kCorrectReply);
  auto env = db_env();
  std::vector<TaskInstance> tasks = {db_query_task("t1", "m1")};
  CHECK_THROWS_WITH_AS(run_experiment(options, tasks, *agent, *env, {}),
                       doctest::Contains("different configuration"), std::runtime_error);
}

TEST_CASE("an interrupted run resumes into an identical log") {
  auto rules = std::vector<ScriptedRule>{{"t2", std::nullopt, std::nullopt, kWrongReply}};
  std::vector<TaskInstance> tasks = {db_query_task("t1", "m1"), db_query_task("t2", "m2"),
                                     db_query_task("t3", "m3")};

  // uninterrupted reference run
  TempDir full_dir;
  RunOptions full;
  full.session_log_path = full_dir.file("sessions.jsonl");
  full.snapshot_path = full_dir.file("snapshot.json");
  full.config_digest = "d";
  {
    auto agent = scripted_agent(rules, kCorrectReply);
    auto env = db_env();
    CallbackList callbacks = {std::make_shared<ExperienceReplayCallback>(2)};
    run_experiment(full, tasks, *agent, *env, callbacks);
  }

  // interrupted after each task index, then resumed
  for (std::size_t k = 0; k < tasks.size() - 1; ++k) {
    TempDir dir;
    RunOptions options;
    options.session_log_path = dir.file("sessions.jsonl");
    options.snapshot_path = dir.file("snapshot.json");
    options.config_digest = "d";
    {
      // the "crash": only the first k+1 tasks ran before the process died
      std::vector<TaskInstance> prefix(tasks.begin(), tasks.begin() + k + 1);
      auto agent = scripted_agent(rules, kCorrectReply);
      auto env = db_env();
      CallbackList callbacks = {std::make_shared<ExperienceReplayCallback>(2)};
      run_experiment(options, prefix, *agent, *env, callbacks);
      ExperimentState state = restore_snapshot(options.snapshot_path);
      CHECK(state.next_task_index == k + 1);
    }
    {
      auto agent = scripted_agent(rules, kCorrectReply);
      auto env = db_env();
      CallbackList callbacks = {std::make_shared<ExperienceReplayCallback>(2)};
      auto spy = std::make_shared<SpyCallback>();
      callbacks.push_back(spy);
      run_experiment(options, tasks, *agent, *env, callbacks);
      CHECK(spy->count("restore_state") == 1);  // fired exactly once at startup
    }
    CHECK(normalize_session_log(read_file(options.session_log_path)) ==
          normalize_session_log(read_file(full.session_log_path)));
  }

  // resuming a finished run is a no-op with an unchanged log
  {
    auto agent = scripted_agent(rules, kCorrectReply);
    auto env = db_env();
    CallbackList callbacks = {std::make_shared<ExperienceReplayCallback>(2)};
    std::string before = read_file(full.session_log_path);
    run_experiment(full, tasks, *agent, *env, callbacks);
    CHECK(read_file(full.session_log_path) == before);
  }
}

TEST_CASE("replay with n=0 matches a run without callbacks byte for byte") {
  std::vector<TaskInstance> tasks = {db_query_task("t1", "m1"), db_query_task("t2", "m2")};

  auto run = [&](CallbackList callbacks) {
    TempDir dir;
    RunOptions options;
    options.session_log_path = dir.file("sessions.jsonl");
    options.config_digest = "d";
    auto agent = scripted_agent({}, kCorrectReply);
    auto env = db_env();
    run_experiment(options, tasks, *agent, *env, callbacks);
    return normalize_session_log(read_file(options.session_log_path));
  };

  CHECK(run({}) == run({std::make_shared<ExperienceReplayCallback>(0)}));
}

TEST_CASE("replay injects prior successes without touching the stored history") {
  std::vector<TaskInstance> tasks = {db_query_task("t1", "marker_one"),
                                     db_query_task("t2", "marker_two")};

  // the t2 answer depends on seeing t1's transcript in the prompt
  auto rules = std::vector<ScriptedRule>{
      {"t1", std::nullopt, std::nullopt, kCorrectReply},
      {std::nullopt, std::nullopt, "marker_one", kCorrectReply},
  };

  TempDir dir;
  RunOptions options;
  options.session_log_path = dir.file("sessions.jsonl");
  options.config_digest = "d";
  auto agent = scripted_agent(rules, kWrongReply);
  auto env = db_env();
  run_experiment(options, tasks, *agent, *env, {std::make_shared<ExperienceReplayCallback>(4)});

  auto sessions = load_session_log(options.session_log_path);
  REQUIRE(sessions.size() == 2);
  CHECK(sessions[0].reward == 1);
  // with replay the t2 prompt contained marker_one, so the contains-rule hit
  CHECK(sessions[1].reward == 1);
  // the persisted history stays clean: exactly preamble, OK, question, answer
  CHECK(sessions[1].history.size() == 4);
  // but the prompt tokens grew beyond the bare history
  CHECK(sessions[1].input_tokens_total > sessions[0].input_tokens_total);

  // without replay the same script fails t2
  TempDir dir2;
  RunOptions bare;
  bare.session_log_path = dir2.file("sessions.jsonl");
  bare.config_digest = "d";
  auto agent2 = scripted_agent(rules, kWrongReply);
  auto env2 = db_env();
  run_experiment(bare, tasks, *agent2, *env2, {});
  auto plain = load_session_log(bare.session_log_path);
  CHECK(plain[1].reward == 0);
}

TEST_CASE("group self consistency with g=1 equals plain replay") {
  std::vector<TaskInstance> tasks = {db_query_task("t1", "m1"), db_query_task("t2", "m2"),
                                     db_query_task("t3", "m3")};

  auto run = [&](CallbackList callbacks) {
    TempDir dir;
    RunOptions options;
    options.session_log_path = dir.file("sessions.jsonl");
    options.config_digest = "d";
    auto agent = scripted_agent({}, kCorrectReply);
    auto env = db_env();
    run_experiment(options, tasks, *agent, *env, callbacks);
    return normalize_session_log(read_file(options.session_log_path));
  };

  CHECK(run({std::make_shared<GroupSelfConsistencyCallback>(2, 1)}) ==
        run({std::make_shared<ExperienceReplayCallback>(2)}));
}

TEST_CASE("group self consistency votes across group-specific prompts") {
  // three prior successes carry distinct markers; groups of one experience
  // each produce answers A, B, A, so A wins the vote
  std::vector<TaskInstance> tasks = {
      db_query_task("e1", "marker_one"), db_query_task("e2", "marker_two"),
      db_query_task("e3", "marker_three"), db_query_task("vote", "the_vote")};

  auto rules = std::vector<ScriptedRule>{
      {"e1", std::nullopt, std::nullopt, kCorrectReply},
      {"e2", std::nullopt, std::nullopt, kCorrectReply},
      {"e3", std::nullopt, std::nullopt, kCorrectReply},
      // group prompts for the vote task (selection order: e3=group0, e2=group1, e1=group2)
      {"vote", std::nullopt, std::string("marker_three"), kCorrectReply},   // group 0 -> A
      {"vote", std::nullopt, std::string("marker_two"), kWrongReply},       // group 1 -> B
      {"vote", std::nullopt, std::string("marker_one"), kCorrectReply},     // group 2 -> A
  };

  TempDir dir;
  RunOptions options;
  options.session_log_path = dir.file("sessions.jsonl");
  options.config_digest = "d";
  auto agent = scripted_agent(rules, "no action");
  auto env = db_env();
  auto gsc = std::make_shared<GroupSelfConsistencyCallback>(3, 3);
  run_experiment(options, tasks, *agent, *env, {gsc});

  auto sessions = load_session_log(options.session_log_path);
  REQUIRE(sessions.size() == 4);
  const Session& vote = sessions[3];
  CHECK(vote.reward == 1);  // A (the correct answer) won 2-1
  CHECK(vote.history.messages.back().content == kCorrectReply);
  // tokens account for all three group prompts
  CHECK(vote.input_tokens_total > 3 * sessions[0].input_tokens_total);
}

TEST_CASE("larger group counts shrink the biggest prompt") {
  // 8 prior successes, then one task run with g=1 vs g=4
  std::vector<TaskInstance> tasks;
  for (int i = 0; i < 8; ++i) tasks.push_back(db_query_task("p" + std::to_string(i), "mk"));
  tasks.push_back(db_query_task("probe", "probe_marker"));

  auto max_tokens = [&](std::size_t g) {
    TempDir dir;
    RunOptions options;
    options.session_log_path = dir.file("sessions.jsonl");
    options.config_digest = "d";
    auto agent = scripted_agent({}, kCorrectReply);
    auto env = db_env();
    run_experiment(options, tasks, *agent, *env,
                   {std::make_shared<GroupSelfConsistencyCallback>(8, g)});
    auto sessions = load_session_log(options.session_log_path);
    return sessions.back().max_prompt_tokens;
  };

  CHECK(max_tokens(4) < max_tokens(1));
}

TEST_CASE("an unreachable backend marks only the current task") {
  // the backend dies before task 1 and recovers for task 2
  struct FlakyBackend : ExecBackend {
    int calls = 0;
    MockExecBackend inner;
    void fresh() override {
      if (++calls == 1) throw std::runtime_error("container runtime unreachable");
      inner.fresh();
    }
    ExecResult run(const std::string& script) override { return inner.run(script); }
    void destroy() override { inner.destroy(); }
  };

  TaskInstance task;
  task.task_id = "os_a";
  task.env_kind = EnvKind::os;
  task.instruction = "touch the flag";
  task.setup = OsSetup{""};
  OsGroundTruth truth;
  truth.eval_script = "test -f /flag";
  task.ground_truth = truth;
  task.skills = {"touch"};
  TaskInstance task2 = task;
  task2.task_id = "os_b";

  TempDir dir;
  RunOptions options;
  options.session_log_path = dir.file("sessions.jsonl");
  options.config_digest = "d";
  auto rules = std::vector<ScriptedRule>{{std::nullopt, 1, std::nullopt, "Act: finish"}};
  auto model = std::make_shared<ScriptedModel>(rules, "Act: bash\n```bash\ntouch /flag\n```");
  Agent flaky_agent(model, make_default_tokenizer());
  OsEnvironment env(std::make_shared<FlakyBackend>(), std::make_shared<HistoryItemFactory>());

  run_experiment(options, {task, task2}, flaky_agent, env, {});
  auto sessions = load_session_log(options.session_log_path);
  REQUIRE(sessions.size() == 2);
  CHECK(sessions[0].status == SampleStatus::task_environment_error);
  CHECK(sessions[0].reward == 0);
  CHECK(sessions[1].status == SampleStatus::completed);
  CHECK(sessions[1].reward == 1);
}

TEST_CASE("all groups unparseable ends in a validation failure") {
  // three prior successes feed three groups; every vote-task reply is junk
  std::vector<TaskInstance> tasks = {
      db_query_task("e1", "marker_one"), db_query_task("e2", "marker_two"),
      db_query_task("e3", "marker_three"), db_query_task("vote", "the_vote")};
  auto rules = std::vector<ScriptedRule>{
      {"e1", std::nullopt, std::nullopt, kCorrectReply},
      {"e2", std::nullopt, std::nullopt, kCorrectReply},
      {"e3", std::nullopt, std::nullopt, kCorrectReply},
      {"vote", std::nullopt, std::nullopt, "rambling with no action at all"},
  };

  TempDir dir;
  RunOptions options;
  options.session_log_path = dir.file("sessions.jsonl");
  options.config_digest = "d";
  auto agent = scripted_agent(rules, "no action");
  auto env = db_env();
  run_experiment(options, tasks, *agent, *env,
                 {std::make_shared<GroupSelfConsistencyCallback>(3, 3)});

  auto sessions = load_session_log(options.session_log_path);
  REQUIRE(sessions.size() == 4);
  CHECK(sessions[3].status == SampleStatus::agent_validation_failed);
  CHECK(sessions[3].reward == 0);
}
