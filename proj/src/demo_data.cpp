#include "seqbench/demo_data.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "seqbench/action.hpp"
#include "seqbench/datagen.hpp"
#include "seqbench/serialize.hpp"
#include "seqbench/triple_store.hpp"

namespace seqbench::demo {

namespace {

namespace fs = std::filesystem;
using datagen::kg_task_from_sexpr;
using datagen::validate_db_task;
using datagen::validate_os_task;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// ---- knowledge graph fixture ------------------------------------------------

TripleStore build_store() {
  TripleStore store;
  // wine institute and its parent university
  store.add_triple("m.03hd1z", "education.educational_institution.parent_institution", "m.0f1x1");
  store.add_triple("m.03hd1z", "location.location.containedby", "m.0adl");
  // comic issue with five cover characters
  for (int i = 1; i <= 5; ++i) {
    store.add_triple("m.02ll5h", "comic_books.comic_book_issue.characters_on_cover",
                     "m.0c0" + std::to_string(i));
  }
  // cyclones grouped by category, with formation years
  store.add_triple("m.04dn799", "meteorology.tropical_cyclone.category", "m.0cat4");
  store.add_triple("m.0cat4", "meteorology.tropical_cyclone_category.tropical_cyclones", "m.0cy1");
  store.add_triple("m.0cat4", "meteorology.tropical_cyclone_category.tropical_cyclones", "m.0cy2");
  store.add_triple("m.0cat4", "meteorology.tropical_cyclone_category.tropical_cyclones", "m.0cy3");
  store.add_attribute("m.0cy1", "meteorology.tropical_cyclone.formed", 1998);
  store.add_attribute("m.0cy2", "meteorology.tropical_cyclone.formed", 2008);
  store.add_attribute("m.0cy3", "meteorology.tropical_cyclone.formed", 2005);
  // a shared fictional universe with dated works
  store.add_triple("m.0ch8hcq", "fictional_universe.fictional_universe.works_set_here", "m.0w1");
  store.add_triple("m.0ch8hcq", "fictional_universe.fictional_universe.works_set_here", "m.0w2");
  store.add_triple("m.0ch8hcq", "fictional_universe.fictional_universe.works_set_here", "m.0w3");
  store.add_attribute("m.0w1", "book.written_work.copyright_date", 1981);
  store.add_attribute("m.0w2", "book.written_work.copyright_date", 1979);
  store.add_attribute("m.0w3", "book.written_work.copyright_date", 1985);
  // two character creators with one shared creation
  store.add_triple("m.0279q8n",
                   "fictional_universe.fictional_character_creator.fictional_characters_created",
                   "m.0chA");
  store.add_triple("m.0279q8n",
                   "fictional_universe.fictional_character_creator.fictional_characters_created",
                   "m.0chB");
  store.add_triple("m.02gn9g",
                   "fictional_universe.fictional_character_creator.fictional_characters_created",
                   "m.0chB");
  store.add_triple("m.02gn9g",
                   "fictional_universe.fictional_character_creator.fictional_characters_created",
                   "m.0chC");
  // cheeses by milk source and texture, with weights
  store.add_triple("m.07bgp", "food.cheese_milk_source.cheeses", "m.0z1");
  store.add_triple("m.07bgp", "food.cheese_milk_source.cheeses", "m.0z2");
  store.add_triple("m.03fwl", "food.cheese_milk_source.cheeses", "m.0z2");
  store.add_triple("m.03fwl", "food.cheese_milk_source.cheeses", "m.0z3");
  store.add_triple("m.02h82t0", "food.cheese_texture.cheeses", "m.0z2");
  store.add_triple("m.02h82t0", "food.cheese_texture.cheeses", "m.0z4");
  store.add_attribute("m.0z1", "food.cheese.weight", 1.1);
  store.add_attribute("m.0z2", "food.cheese.weight", 2.5);
  store.add_attribute("m.0z3", "food.cheese.weight", 3.0);
  // a radio genre, a show, its producer and the producer's catalogue
  store.add_triple("m.07dn1", "broadcast.genre.content", "m.0r1");
  store.add_triple("m.07dn1", "broadcast.genre.content", "m.0r2");
  store.add_triple("m.07dn1", "broadcast.genre.content", "m.0r3");
  store.add_triple("m.0t4t10s", "broadcast.content.producer", "m.0prd");
  store.add_triple("m.0prd", "broadcast.producer.produces", "m.0r2");
  store.add_triple("m.0prd", "broadcast.producer.produces", "m.0r3");
  store.add_triple("m.0prd", "broadcast.producer.produces", "m.0r9");
  // car classes and related models
  store.add_triple("m.0gdk70", "automotive.model.automotive_class", "m.0cls");
  store.add_triple("m.0cls", "automotive.automotive_class.examples", "m.0car1");
  store.add_triple("m.0cls", "automotive.automotive_class.examples", "m.0car2");
  store.add_triple("m.02p04r", "automotive.model.related_models", "m.0rel1");
  store.add_triple("m.0rel1", "automotive.similar_automobile_models.related_model", "m.0car2");
  store.add_triple("m.0rel1", "automotive.similar_automobile_models.related_model", "m.0car3");
  return store;
}

struct KgSpec {
  std::string id;
  std::string question;
  std::vector<KgEntityRef> entities;
  std::string sexpr;
};

std::vector<KgSpec> kg_specs() {
  return {
      {"kg_01",
       "Which organization is the parent institution of the wine institute?",
       {{"Riverside Wine Institute", "m.03hd1z"}},
       "(JOIN (R education.educational_institution.parent_institution) m.03hd1z)"},
      {"kg_02",
       "Which category does the listed cyclone belong to?",
       {{"Cyclone Marra", "m.04dn799"}},
       "(JOIN (R meteorology.tropical_cyclone.category) m.04dn799)"},
      {"kg_03",
       "How many characters appear on the cover of the first issue?",
       {{"First Issue", "m.02ll5h"}},
       "(COUNT (JOIN (R comic_books.comic_book_issue.characters_on_cover) m.02ll5h))"},
      {"kg_04",
       "How many producers does the weekend show have?",
       {{"Weekend Show", "m.0t4t10s"}},
       "(COUNT (JOIN (R broadcast.content.producer) m.0t4t10s))"},
      {"kg_05",
       "Which work set in the shared universe has the earliest copyright date?",
       {{"Shared Universe", "m.0ch8hcq"}},
       "(ARGMIN (JOIN (R fictional_universe.fictional_universe.works_set_here) m.0ch8hcq) "
       "book.written_work.copyright_date)"},
      {"kg_06",
       "Which character did both listed creators work on?",
       {{"Creator One", "m.0279q8n"}, {"Creator Two", "m.02gn9g"}},
       "(AND (JOIN (R fictional_universe.fictional_character_creator.fictional_characters_created)"
       " m.0279q8n) (JOIN (R "
       "fictional_universe.fictional_character_creator.fictional_characters_created) m.02gn9g))"},
      {"kg_07",
       "What is the most recently formed cyclone in the same category as the listed one?",
       {{"Cyclone Marra", "m.04dn799"}},
       "(ARGMAX (JOIN (R meteorology.tropical_cyclone_category.tropical_cyclones) (JOIN (R "
       "meteorology.tropical_cyclone.category) m.04dn799)) meteorology.tropical_cyclone.formed)"},
      {"kg_08",
       "What is the heaviest cheese made from both listed milk sources?",
       {{"Ewe Milk", "m.07bgp"}, {"Goat Milk", "m.03fwl"}},
       "(ARGMAX (AND (JOIN (R food.cheese_milk_source.cheeses) m.07bgp) (JOIN (R "
       "food.cheese_milk_source.cheeses) m.03fwl)) food.cheese.weight)"},
      {"kg_09",
       "How much of the genre's content comes from the producer of the weekend show?",
       {{"Talk Genre", "m.07dn1"}, {"Weekend Show", "m.0t4t10s"}},
       "(COUNT (AND (JOIN (R broadcast.genre.content) m.07dn1) (JOIN (R "
       "broadcast.producer.produces) (JOIN (R broadcast.content.producer) m.0t4t10s))))"},
      {"kg_10",
       "Is any model in the same class as the first car related to the second car?",
       {{"First Car", "m.0gdk70"}, {"Second Car", "m.02p04r"}},
       "(AND (JOIN (R automotive.automotive_class.examples) (JOIN (R "
       "automotive.model.automotive_class) m.0gdk70)) (JOIN (R "
       "automotive.similar_automobile_models.related_model) (JOIN (R "
       "automotive.model.related_models) m.02p04r)))"},
  };
}

// ---- db demo tasks ----------------------------------------------------------

struct DbSpec {
  std::string id;
  std::string question;
  DbSetup setup;
  std::string statement;
  std::vector<Skill> skills;
  DifficultyLevel difficulty;
};

std::vector<DbSpec> db_specs() {
  auto i = [](std::int64_t v) { return DbValue{v}; };
  auto s = [](const char* v) { return DbValue{std::string(v)}; };
  return {
      {"db_01",
       "Which staff members work in the IT department? Return the name only.",
       {"staff", {"id", "name", "dept"},
        {{i(1), s("Ava"), s("IT")}, {i(2), s("Ben"), s("HR")}, {i(3), s("Cy"), s("IT")},
         {i(4), s("Dot"), s("Ops")}}},
       "SELECT name FROM staff WHERE dept = 'IT';",
       {"select", "where_single_condition"},
       DifficultyLevel::easy},
      {"db_02",
       "List the racers from fastest to slowest. Return the racer only.",
       {"races", {"racer", "seconds"},
        {{s("Mo"), i(62)}, {s("Lena"), i(58)}, {s("Kim"), i(71)}}},
       "SELECT racer FROM races ORDER BY seconds ASC;",
       {"select", "order_by_single_column"},
       DifficultyLevel::easy},
      {"db_03",
       "Which regions placed more than one order? Return the region and its order count.",
       {"orders", {"region", "total"},
        {{s("east"), i(100)}, {s("east"), i(50)}, {s("west"), i(30)}, {s("north"), i(200)},
         {s("west"), i(70)}}},
       "SELECT region, COUNT(*) AS order_count FROM orders GROUP BY region HAVING COUNT(*) > 1;",
       {"select", "column_alias", "group_by_single_column",
        "having_single_condition_with_aggregate"},
       DifficultyLevel::medium},
      {"db_04",
       "Return the players ordered by points then level, both ascending, skipping the first "
       "entry and returning the next two. Return the player only.",
       {"scores", {"player", "pts", "lvl"},
        {{s("ana"), i(12), i(3)}, {s("bo"), i(9), i(1)}, {s("cal"), i(15), i(2)},
         {s("dee"), i(12), i(1)}, {s("eli"), i(20), i(4)}}},
       "SELECT player FROM scores ORDER BY pts ASC, lvl ASC LIMIT 2 OFFSET 1;",
       {"select", "order_by_multiple_columns_same_direction", "limit_and_offset"},
       DifficultyLevel::medium},
      {"db_05",
       "Which routes are longer than the average distance but shorter than the maximum? "
       "Return the route id.",
       {"routes", {"rid", "km"},
        {{i(1), i(120)}, {i(2), i(80)}, {i(3), i(200)}, {i(4), i(150)}, {i(5), i(60)}}},
       "SELECT rid FROM routes WHERE km > (SELECT AVG(km) FROM routes) AND km < (SELECT MAX(km) "
       "FROM routes);",
       {"select", "subquery_multiple", "where_multiple_conditions"},
       DifficultyLevel::hard},
      {"db_06",
       "Which items are either plentiful tools or gifts? Return the item name.",
       {"inv", {"item", "qty", "cat"},
        {{s("hammer"), i(9), s("tool")}, {s("wrench"), i(2), s("tool")},
         {s("ribbon"), i(1), s("gift")}, {s("saw"), i(7), s("tool")}}},
       "SELECT i.item AS name FROM inv AS i WHERE (i.qty > 5 AND i.cat = 'tool') OR i.cat = "
       "'gift';",
       {"select", "column_alias", "table_alias", "where_nested_conditions"},
       DifficultyLevel::hard},
      {"db_07",
       "Which books were published after 2000? Return the title only.",
       {"books", {"title", "year"},
        {{s("Tides"), i(1998)}, {s("Orbit"), i(2011)}, {s("Dunes"), i(2005)}}},
       "SELECT title FROM books WHERE year > 2000;",
       {"select", "where_single_condition"},
       DifficultyLevel::easy},
      {"db_08",
       "Return the three cities with the warmest highs; break ties by the cooler low first. "
       "Return the city only.",
       {"temps", {"city", "high", "low"},
        {{s("kyo"), i(31), i(22)}, {s("oslo"), i(18), i(9)}, {s("lima"), i(24), i(17)},
         {s("doha"), i(41), i(29)}, {s("reyk"), i(13), i(6)}}},
       "SELECT city FROM temps ORDER BY high DESC, low ASC LIMIT 3;",
       {"select", "order_by_multiple_columns_different_directions", "limit_only"},
       DifficultyLevel::medium},
      {"db_09",
       "Which pets are dogs? Return the name only.",
       {"pets", {"name", "kind"},
        {{s("Rex"), s("dog")}, {s("Mia"), s("cat")}, {s("Taro"), s("dog")}}},
       "SELECT name FROM pets WHERE kind = 'dog';",
       {"select", "where_single_condition"},
       DifficultyLevel::easy},
      {"db_10",
       "Raise every fee under 50 by 10.",
       {"fees", {"fid", "amount"},
        {{i(1), i(30)}, {i(2), i(70)}, {i(3), i(45)}, {i(4), i(50)}}},
       "UPDATE fees SET amount = amount + 10 WHERE amount < 50;",
       {"update", "where_single_condition"},
       DifficultyLevel::easy},
      {"db_11",
       "Delete every log entry at the debug level.",
       {"logs2", {"lid", "level"},
        {{i(1), s("info")}, {i(2), s("debug")}, {i(3), s("error")}, {i(4), s("debug")}}},
       "DELETE FROM logs2 WHERE level = 'debug';",
       {"delete", "where_single_condition"},
       DifficultyLevel::easy},
      {"db_12",
       "Which parcels are still in transit? Return the parcel id.",
       {"parcels", {"pid", "state"},
        {{i(1), s("transit")}, {i(2), s("done")}, {i(3), s("transit")}}},
       "SELECT pid FROM parcels WHERE state = 'transit';",
       {"select", "where_single_condition"},
       DifficultyLevel::easy},
  };
}

std::string table_suffix(const DbSetup& setup) {
  std::string headers;
  for (std::size_t i = 0; i < setup.headers.size(); ++i) {
    if (i > 0) headers += ", ";
    headers += setup.headers[i];
  }
  return "\nThe name of this table is " + setup.table_name +
         ", and the headers of this table are " + headers + ".";
}

// ---- os demo tasks ----------------------------------------------------------

struct OsSpec {
  std::string id;
  std::string question;
  std::string init_script;
  std::string solution;
  std::string eval_script;
  std::vector<Skill> skills;
};

std::vector<OsSpec> os_specs() {
  return {
      {"os_01", "Create the readiness flag file /srv/app/ready.flag.",
       "mkdir -p /srv/app", "touch /srv/app/ready.flag", "test -f /srv/app/ready.flag",
       {"touch"}},
      {"os_02", "Remove the stale lock file /srv/app/stale.lock.",
       "mkdir -p /srv/app && touch /srv/app/stale.lock", "rm -f /srv/app/stale.lock",
       "test ! -f /srv/app/stale.lock", {"rm"}},
      {"os_03", "Append the word finished to the log /var/run2/app.log.",
       "mkdir -p /var/run2 && echo started > /var/run2/app.log",
       "echo finished >> /var/run2/app.log", "grep -q finished /var/run2/app.log", {"echo"}},
      {"os_04", "Copy /srv/data/payload.txt into /srv/backup/ keeping the name.",
       "mkdir -p /srv/data /srv/backup && echo payload > /srv/data/payload.txt",
       "cp /srv/data/payload.txt /srv/backup/payload.txt",
       "test -f /srv/backup/payload.txt && grep -q payload /srv/backup/payload.txt",
       {"cp"}},
      {"os_05", "Create the two report files /srv/reports/a.txt and /srv/reports/b.txt.",
       "mkdir -p /srv/reports", "touch /srv/reports/a.txt /srv/reports/b.txt",
       "test -f /srv/reports/a.txt && test -f /srv/reports/b.txt", {"touch"}},
      {"os_06", "Write the word ready into /srv/state/ready.txt.",
       "mkdir -p /srv/state", "echo ready > /srv/state/ready.txt",
       "grep -q ready /srv/state/ready.txt", {"echo"}},
      {"os_07", "Create the marker directory /srv/markers/done.",
       "mkdir -p /srv/markers", "mkdir -p /srv/markers/done", "test -d /srv/markers/done",
       {"mkdir"}},
      {"os_08", "Write the filesystem scan summary into /var/scan/all.txt.",
       "mkdir -p /var/scan", "echo scan-summary > /var/scan/all.txt", "test -s /var/scan/all.txt",
       {"echo"}},
  };
}

// ---- scripted agents --------------------------------------------------------

Json rule(const std::string& task_id, int round, const std::string& reply) {
  return Json{{"task_id", task_id}, {"round", round}, {"reply", reply}};
}

std::string db_answer_reply(const TaskInstance& task) {
  return "Action: Answer\nFinal Answer: " + render_rows_literal(*task.db_truth().rows);
}

std::string db_operation_reply(const std::string& sql) {
  return "Action: Operation\n```sql\n" + sql + "\n```";
}

std::string os_bash_reply(const std::string& script) {
  return "Act: bash\n```bash\n" + script + "\n```";
}

}  // namespace

void write_demo_data(const std::string& dir) {
  fs::create_directories(dir);
  fs::path root(dir);

  // knowledge graph fixture and tasks
  TripleStore store = build_store();
  store.save((root / "kg_store.tsv").string());

  std::string sexpr_lines;
  std::vector<TaskInstance> kg_tasks;
  for (const auto& spec : kg_specs()) {
    Json entities = Json::array();
    for (const auto& e : spec.entities) entities.push_back({{"name", e.name}, {"id", e.id}});
    sexpr_lines += Json{{"id", spec.id},
                        {"question", spec.question},
                        {"entities", entities},
                        {"sexpr", spec.sexpr}}
                       .dump() +
                   "\n";
    auto outcome = kg_task_from_sexpr(spec.id, spec.question, spec.entities, spec.sexpr, store);
    if (!outcome.accepted) {
      throw std::runtime_error("demo kg task " + spec.id + " failed validation: " + outcome.reason);
    }
    kg_tasks.push_back(std::move(outcome.task));
  }
  write_file(root / "kg_sexpr.jsonl", sexpr_lines);
  save_dataset((root / "kg_tasks.jsonl").string(), kg_tasks);

  // db tasks, ground truth verified by execution
  std::vector<TaskInstance> db_tasks;
  for (const auto& spec : db_specs()) {
    TaskInstance candidate;
    candidate.task_id = spec.id;
    candidate.env_kind = EnvKind::db;
    candidate.instruction = spec.question + table_suffix(spec.setup);
    candidate.setup = spec.setup;
    DbGroundTruth truth;
    truth.statement = spec.statement;
    candidate.ground_truth = truth;
    candidate.skills = spec.skills;
    candidate.difficulty = spec.difficulty;
    auto outcome = validate_db_task(std::move(candidate));
    if (!outcome.accepted) {
      throw std::runtime_error("demo db task " + spec.id + " failed validation: " + outcome.reason);
    }
    db_tasks.push_back(std::move(outcome.task));
  }
  save_dataset((root / "db_tasks.jsonl").string(), db_tasks);

  // os tasks validated against the mock backend
  std::vector<TaskInstance> os_tasks;
  {
    MockExecBackend backend;
    for (const auto& spec : os_specs()) {
      TaskInstance candidate;
      candidate.task_id = spec.id;
      candidate.env_kind = EnvKind::os;
      candidate.instruction = spec.question;
      candidate.setup = OsSetup{spec.init_script};
      OsGroundTruth truth;
      truth.eval_script = spec.eval_script;
      truth.solution_script = spec.solution;
      candidate.ground_truth = truth;
      candidate.skills = spec.skills;
      auto outcome = validate_os_task(std::move(candidate), backend);
      if (!outcome.accepted) {
        throw std::runtime_error("demo os task " + spec.id +
                                 " failed validation: " + outcome.reason);
      }
      os_tasks.push_back(std::move(outcome.task));
    }
  }
  save_dataset((root / "os_tasks.jsonl").string(), os_tasks);

  // scripted agents pinning each task's outcome
  {
    Json rules = Json::array();
    for (std::size_t i = 0; i < 9; ++i) {  // db_01..db_09 answer immediately
      const TaskInstance& task = db_tasks[i];
      std::string reply = task.task_id == "db_09"
                              ? "Action: Answer\nFinal Answer: [(\"Mia\",)]"  // wrong on purpose
                              : db_answer_reply(task);
      rules.push_back(rule(task.task_id, 0, reply));
    }
    // db_10: apply the correct mutation, then commit
    rules.push_back(rule("db_10", 0, db_operation_reply(db_tasks[9].db_truth().statement)));
    rules.push_back(rule("db_10", 1, "Action: Answer\nFinal Answer: done"));
    // db_11: keep issuing a harmless no-op until the round limit trips
    for (int r = 0; r < 3; ++r) {
      rules.push_back(rule("db_11", r, db_operation_reply("UPDATE logs2 SET level = level;")));
    }
    // db_12: bare SQL without the markdown block
    rules.push_back(rule("db_12", 0, "Action: Operation\nSELECT pid FROM parcels;"));
    write_file(root / "agent_db.json",
               Json{{"default", "Action: Answer\nFinal Answer: []"}, {"rules", rules}}.dump(2) +
                   "\n");
  }

  {
    Json rules = Json::array();
    for (const auto& task : kg_tasks) {
      const auto& truth = task.kg_truth();
      if (task.task_id == "kg_09") {
        // never commits: burns all rounds on a valid exploratory action
        continue;
      }
      if (task.task_id == "kg_10") {
        rules.push_back(rule(task.task_id, 0, "I think the answer is the blue one."));
        continue;
      }
      int round = 0;
      int vars = 0;
      for (const auto& action : truth.actions) {
        rules.push_back(rule(task.task_id, round++, action));
        auto call = parse_kg_call(action);
        if (call && (call->name == "get_neighbors" || call->name == "intersection" ||
                     call->name == "argmax" || call->name == "argmin")) {
          ++vars;
        }
      }
      std::string final_answer;
      if (truth.answer_count) {
        final_answer = "Final Answer: " + std::to_string(*truth.answer_count);
      } else {
        final_answer = "Final Answer: #" + std::to_string(vars - 1);
      }
      if (task.task_id == "kg_08") final_answer = "Final Answer: m.0z1";  // wrong on purpose
      rules.push_back(rule(task.task_id, round, final_answer));
    }
    write_file(root / "agent_kg.json",
               Json{{"default", "get_relations(m.07dn1)"}, {"rules", rules}}.dump(2) + "\n");
  }

  {
    Json rules = Json::array();
    auto specs = os_specs();
    for (const auto& spec : specs) {
      if (spec.id == "os_05") {
        rules.push_back(rule(spec.id, 0, os_bash_reply(spec.solution)));
        // keeps poking around instead of finishing; the limit ends the task
        for (int r = 1; r < 5; ++r) rules.push_back(rule(spec.id, r, os_bash_reply("ls /srv")));
        continue;
      }
      if (spec.id == "os_06") {
        rules.push_back(rule(spec.id, 0, "Act: finish"));  // finishes without doing the work
        continue;
      }
      if (spec.id == "os_07") {
        rules.push_back(rule(spec.id, 0, "Act: bash\nmkdir -p /srv/markers/done"));  // no block
        continue;
      }
      if (spec.id == "os_08") {
        rules.push_back(rule(spec.id, 0, os_bash_reply("find / -print")));
        rules.push_back(rule(spec.id, 1, "Act: finish"));
        continue;
      }
      rules.push_back(rule(spec.id, 0, os_bash_reply(spec.solution)));
      rules.push_back(rule(spec.id, 1, "Act: finish"));
    }
    write_file(root / "agent_os.json",
               Json{{"default", "Act: finish"}, {"context_limit", 4096}, {"rules", rules}}.dump(2) +
                   "\n");
  }

  // ready-to-run configs; relative paths resolve against this directory
  auto base_config = [&](const std::string& kind, const std::string& dataset,
                         const std::string& agent_file) {
    Json models = Json::array();
    models.push_back({{"name", "scripted"}, {"kind", "scripted"}, {"path", agent_file}});
    Json j = {{"dataset", dataset},
              {"environment", {{"kind", kind}, {"backend", kind == "os" ? "mock" : "embedded"}}},
              {"agent", {{"model", "scripted"}}},
              {"models", std::move(models)},
              {"callbacks", Json::array()},
              {"seed", 7},
              {"output_dir", "out/demo_" + kind}};
    return j;
  };

  write_file(root / "config_db.json", base_config("db", "db_tasks.jsonl", "agent_db.json").dump(2) + "\n");

  {
    Json j = base_config("kg", "kg_tasks.jsonl", "agent_kg.json");
    j["environment"]["kg_store"] = "kg_store.tsv";
    write_file(root / "config_kg.json", j.dump(2) + "\n");
  }

  {
    Json j = base_config("os", "os_tasks.jsonl", "agent_os.json");
    // let the flood from os_08 through to the model, as the overflow case needs
    j["environment"]["observation_limit"] = 10000000;
    Json rules = Json::array();
    rules.push_back({{"contains", "find / -print"},
                     {"exit_code", 0},
                     {"stdout_repeat", {{"text", "scan/entry "}, {"times", 400000}}}});
    j["environment"]["mock_rules"] = std::move(rules);
    write_file(root / "config_os.json", j.dump(2) + "\n");
  }

  {
    Json j = base_config("db", "db_tasks.jsonl", "agent_db.json");
    j["callbacks"] = Json::array({{{"name", "experience_replay"}, {"params", {{"n", 4}}}}});
    j["output_dir"] = "out/demo_db_replay";
    write_file(root / "config_db_replay.json", j.dump(2) + "\n");
  }

  {
    Json j = base_config("db", "db_tasks.jsonl", "agent_db.json");
    j["deployment"] = {{"mode", "distributed"}, {"controller", "127.0.0.1:9700"}};
    j["output_dir"] = "out/demo_db_distributed";
    write_file(root / "config_db_distributed.json", j.dump(2) + "\n");
  }
}

}  // namespace seqbench::demo
