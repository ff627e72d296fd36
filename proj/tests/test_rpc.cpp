#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "seqbench/controller.hpp"
#include "seqbench/env_db.hpp"
#include "seqbench/rpc/bootstrap.hpp"
#include "seqbench/rpc/remote.hpp"
#include "seqbench/rpc/rpc.hpp"
#include "seqbench/serialize.hpp"
#include "toy_target.hpp"

using namespace seqbench;
using namespace seqbench::rpc;
using toy::Accumulator;
using toy::AccumulatorClient;
using toy::register_accumulator;


TEST_CASE("wire values round trip through the codec") {
  std::vector<WireValue> samples = {
      WireValue::null(),
      WireValue::boolean(true),
      WireValue::integer(-9223372036854775807LL),
      WireValue::decimal("250.0000"),
      WireValue::text("hello\nworld \xe4\xb8\xad"),
      WireValue::list({WireValue::integer(1), WireValue::text("two"),
                       WireValue::list({WireValue::boolean(false)})}),
      WireValue::map({{"a", WireValue::integer(1)},
                      {"b", WireValue::map({{"c", WireValue::decimal("0.5")}})}}),
      WireValue::enumeration("SampleStatus", "completed"),
      WireValue::handle({"Environment", 17, "127.0.0.1:9000"}),
  };
  for (const auto& v : samples) {
    WireValue back = decode_value(encode_value(v), WireSchema::any_value());
    CHECK(back == v);
  }

  // enum round trip preserves the type name
  WireValue e = decode_value(encode_value(WireValue::enumeration("Kind", "db")),
                             WireSchema::enumeration("Kind"));
  CHECK(e.as_enum().type_name == "Kind");
  CHECK(e.as_enum().variant == "db");

  CHECK_THROWS_AS(decode_value("not json", WireSchema::any_value()), std::invalid_argument);
  CHECK_THROWS_AS(decode_value(encode_value(WireValue::text("x")), WireSchema::integer()),
                  std::invalid_argument);
}

TEST_CASE("schema validation names the mismatch") {
  auto err = validate_value(WireValue::text("x"), WireSchema::integer());
  REQUIRE(err);
  CHECK(err->find("expected int") != std::string::npos);

  auto list_err = validate_value(
      WireValue::list({WireValue::integer(1), WireValue::text("x")}),
      WireSchema::list_of(WireSchema::integer()));
  REQUIRE(list_err);
  CHECK(list_err->find("list element 1") != std::string::npos);

  CHECK_FALSE(validate_value(WireValue::handle({"T", 1, "a:1"}), WireSchema::handle_to("T")));
  CHECK(validate_value(WireValue::handle({"U", 1, "a:1"}), WireSchema::handle_to("T")));
}

TEST_CASE("serve and call a toy target") {
  RpcServer server("127.0.0.1", 0);
  auto acc = std::make_shared<Accumulator>();
  std::int64_t id = register_accumulator(server, acc);
  server.start();

  RpcClient client(server.address());
  CHECK(client.call(id, "add", {WireValue::integer(2)}).as_int() == 2);
  CHECK(client.call(id, "add", {WireValue::integer(3)}).as_int() == 5);

  // argument of the wrong kind is rejected with a validation error
  CHECK_THROWS_WITH_AS(client.call(id, "add", {WireValue::text("two")}),
                       doctest::Contains("argument 0"), RemoteError);
  CHECK_THROWS_WITH_AS(client.call(id, "add", {}), doctest::Contains("expects 1"), RemoteError);
  CHECK_THROWS_WITH_AS(client.call(id, "frobnicate", {}), doctest::Contains("unknown method"),
                       RemoteError);
  CHECK_THROWS_WITH_AS(client.call(99, "add", {WireValue::integer(1)}),
                       doctest::Contains("unknown target"), RemoteError);

  server.stop();
  CHECK_THROWS_AS(client.call(id, "add", {WireValue::integer(1)}), TransportError);
}

TEST_CASE("chained calls cross instances without caller-side construction") {
  RpcServer server("127.0.0.1", 0);
  auto acc = std::make_shared<Accumulator>();
  std::int64_t id = register_accumulator(server, acc);
  server.start();

  AccumulatorClient root(WireHandle{"Accumulator", id, server.address()});
  root.add(10);
  AccumulatorClient child = root.make_child("branch");
  CHECK(child.value() == 10);          // the child saw the parent's state
  CHECK(child.add(5) == 15);           // follow-up call hits the same remote instance
  CHECK(child.add(1) == 16);
  CHECK(child.label() == "branch");
  child.set_label("renamed");
  CHECK(child.label() == "renamed");
  CHECK(acc->children[0]->label == "renamed");  // the server-side object mutated
  CHECK(root.value() == 10);                    // parent untouched

  server.stop();
}

TEST_CASE("local and remote execution agree over randomized call sequences") {
  RpcServer server("127.0.0.1", 0);
  auto acc = std::make_shared<Accumulator>();
  std::int64_t id = register_accumulator(server, acc);
  server.start();

  auto local = std::make_shared<Accumulator>();
  AccumulatorClient remote(WireHandle{"Accumulator", id, server.address()});

  std::mt19937_64 rng(42);
  std::vector<std::shared_ptr<Accumulator>> local_stack{local};
  std::vector<AccumulatorClient> remote_stack{remote};

  for (int step = 0; step < 300; ++step) {
    auto& l = *local_stack.back();
    auto& r = remote_stack.back();
    switch (rng() % 6) {
      case 0: {
        std::int64_t x = static_cast<std::int64_t>(rng() % 100) - 50;
        CHECK(l.add(x) == r.add(x));
        break;
      }
      case 1: {
        std::int64_t x = static_cast<std::int64_t>(rng() % 5);
        CHECK(l.mul(x) == r.mul(x));
        break;
      }
      case 2: {
        std::string label = "L" + std::to_string(rng() % 1000);
        l.label = label;
        r.set_label(label);
        break;
      }
      case 3:
        CHECK(l.label == r.label());
        CHECK(l.value == r.value());
        break;
      case 4: {
        if (local_stack.size() < 4) {
          std::string label = "child" + std::to_string(step);
          local_stack.push_back(l.make_child(label));
          remote_stack.push_back(r.make_child(label));
        }
        break;
      }
      case 5:
        if (local_stack.size() > 1) {
          local_stack.pop_back();
          remote_stack.pop_back();
        }
        break;
    }
  }
  CHECK(local->value == AccumulatorClient(WireHandle{"Accumulator", id, server.address()}).value());

  server.stop();
}

TEST_CASE("requests against one instance are serialized") {
  RpcServer server("127.0.0.1", 0);
  auto acc = std::make_shared<Accumulator>();
  std::int64_t id = register_accumulator(server, acc);
  server.start();

  // 8 threads x 50 increments; per-instance locking keeps the final count exact
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&server, id] {
      RpcClient client(server.address());
      for (int i = 0; i < 50; ++i) client.call(id, "add", {WireValue::integer(1)});
    });
  }
  for (auto& t : threads) t.join();
  CHECK(acc->value == 400);

  server.stop();
}

TEST_CASE("auth tokens gate every request") {
  RpcServer server("127.0.0.1", 0, "sekrit");
  auto acc = std::make_shared<Accumulator>();
  std::int64_t id = register_accumulator(server, acc);
  server.start();

  RpcClient good(server.address(), "sekrit");
  CHECK(good.call(id, "add", {WireValue::integer(1)}).as_int() == 1);

  RpcClient bad(server.address(), "wrong");
  CHECK_THROWS_AS(bad.call(id, "add", {WireValue::integer(1)}), RemoteError);

  server.stop();
}

TEST_CASE("remote environment behaves like the local one") {
  auto factory = std::make_shared<HistoryItemFactory>();

  RpcServer server("127.0.0.1", 0);
  std::int64_t factory_id = register_history_factory(server, factory);
  auto served_env = std::make_shared<DatabaseEnvironment>(make_embedded_sql_backend(), factory);
  WireHandle factory_handle{"HistoryItemFactory", factory_id, ""};
  server.start();
  factory_handle.address = server.address();
  std::int64_t env_id = register_environment(server, served_env, factory_handle);

  RemoteEnvironment remote(server.address(), env_id);
  CHECK(remote.kind() == EnvKind::db);

  TaskInstance task;
  task.task_id = "t";
  task.env_kind = EnvKind::db;
  task.instruction = "Query it.";
  task.setup = DbSetup{"t", {"v"}, {{std::int64_t{4}}}};
  DbGroundTruth truth;
  truth.statement = "SELECT v FROM t;";
  truth.rows = std::vector<DbRow>{DbRow{std::int64_t{4}}};
  task.ground_truth = truth;
  task.skills = {"select"};

  ChatHistory history = remote.reset(task);
  CHECK(history.size() == 3);
  auto obs = remote.interact({ActionKind::db_operation, "SELECT v FROM t;", std::nullopt});
  CHECK(*obs.observation == "[(4,)]");
  auto committed = remote.interact({ActionKind::db_answer, "[(4,)]", std::nullopt});
  CHECK(committed.terminal);
  CHECK(remote.complete() == 1);

  // chained factory access: a mutation through the handle is visible in the
  // serving process and in subsequent resets
  auto chained_factory = remote.history_factory();
  chained_factory->set_preamble_suffix("EXTRA RULE");
  CHECK(factory->preamble_suffix() == "EXTRA RULE");
  ChatHistory with_suffix = remote.reset(task);
  CHECK(with_suffix.messages[0].content.find("EXTRA RULE") != std::string::npos);
  remote.interact({ActionKind::db_answer, "[(4,)]", std::nullopt});
  remote.complete();

  server.stop();
}

TEST_CASE("remote sql and exec backends mirror their local counterparts") {
  RpcServer server("127.0.0.1", 0);
  auto sql = make_embedded_sql_backend();
  std::int64_t sql_id = register_sql_backend(server, sql);
  auto exec = std::make_shared<MockExecBackend>();
  std::int64_t exec_id = register_exec_backend(server, exec);
  server.start();

  RemoteSqlBackend remote_sql(WireHandle{"SqlBackend", sql_id, server.address()});
  CHECK(remote_sql.dialect() == "sqlite");
  CHECK(remote_sql.execute("CREATE TABLE x (a);").ok);
  CHECK(remote_sql.execute("INSERT INTO x VALUES (7);").ok);
  SqlResult rows = remote_sql.execute("SELECT a FROM x;");
  CHECK(rows.is_read);
  REQUIRE(rows.rows.size() == 1);
  CHECK(std::get<std::int64_t>(rows.rows[0][0]) == 7);
  SqlResult bad = remote_sql.execute("SELEC nonsense");
  CHECK_FALSE(bad.ok);
  CHECK(bad.error.find("syntax error") != std::string::npos);

  RemoteExecBackend remote_exec(WireHandle{"ExecBackend", exec_id, server.address()});
  remote_exec.fresh();
  CHECK(remote_exec.run("touch /f && test -f /f").exit_code == 0);
  CHECK(exec->file_exists("/f"));
  remote_exec.destroy();

  server.stop();
}

TEST_CASE("bootstrap starts fresh components and survives stop") {
  const std::string component_config =
      Json{{"dataset", std::string(SEQBENCH_DATA_DIR) + "/demo/db_tasks.jsonl"},
           {"environment", {{"kind", "db"}, {"backend", "embedded"}}},
           {"agent", {{"model", "scripted"}}},
           {"models",
            Json::array({{{"name", "scripted"},
                          {"kind", "scripted"},
                          {"path", std::string(SEQBENCH_DATA_DIR) + "/demo/agent_db.json"}}})}}
          .dump();

  auto controller = std::make_shared<ServerController>("127.0.0.1", SEQBENCH_CLI_PATH);
  auto addresses = controller->start_components(component_config);

  RemoteHistoryFactory factory(WireHandle{"HistoryItemFactory", 1, addresses.history_factory});
  ChatHistory history = factory.construct(EnvKind::db, "probe question");
  CHECK(history.size() == 3);
  factory.set_preamble_suffix("round one");
  CHECK(factory.preamble_suffix() == "round one");

  controller->stop_components();
  controller->stop_components();  // idempotent
  CHECK_FALSE(controller->components_running());
  CHECK_THROWS_AS(factory.construct(EnvKind::db, "gone"), EnvironmentBackendError);

  // a second start yields fresh instances while the controller object lives on
  auto addresses2 = controller->start_components(component_config);
  RemoteHistoryFactory fresh(WireHandle{"HistoryItemFactory", 1, addresses2.history_factory});
  CHECK(fresh.preamble_suffix().empty());  // state did not leak across restarts
  RemoteEnvironment env(addresses2.environment, 1);
  CHECK(env.kind() == EnvKind::db);
  controller->stop_components();
}
