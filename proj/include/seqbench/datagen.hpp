#pragma once

#include <random>
#include <span>

#include <json.hpp>

#include "seqbench/exec_backend.hpp"
#include "seqbench/model.hpp"
#include "seqbench/triple_store.hpp"
#include "seqbench/types.hpp"

namespace seqbench::datagen {

using seqbench::Skill;
using Json = nlohmann::json;

// Skill occurrence counts over a (growing) task pool; covers the whole skill
// set of the environment, zeros included.
struct SkillStats {
  EnvKind env_kind = EnvKind::db;
  std::map<Skill, std::int64_t> counts;

  static SkillStats over(EnvKind kind, std::span<const TaskInstance> tasks);
  void record(const TaskInstance& task);
};

// Harmonic mean of the two tasks' shared-skill proportions; 0 when the skill
// sets are disjoint, 1 when they coincide.
double relatedness(const TaskInstance& a, const TaskInstance& b);

// Weighted sampling without replacement, weight 1/(count+1), so rare skills
// surface more often. Deterministic under a seeded rng.
std::vector<Skill> sample_skill_subset(const SkillStats& stats, std::size_t k,
                                       std::mt19937_64& rng);

// Syntactic skill detection over ground-truth statements/scripts; dataset
// validation rejects candidates claiming skills their ground truth lacks.
std::vector<Skill> detect_db_skills(const std::string& statement);
std::vector<Skill> detect_os_skills(const std::string& script);

struct ValidationOutcome {
  bool accepted = false;
  std::string reason;  // rejection reason code when !accepted
  TaskInstance task;   // with the verified ground-truth payload attached
};

// Execution-based validation: the ground truth runs in a fresh environment
// instance and must reproduce the claimed answer (or produce the digest /
// exit code the dataset will assert later).
ValidationOutcome validate_db_task(TaskInstance candidate);
ValidationOutcome validate_os_task(TaskInstance candidate, ExecBackend& backend);
ValidationOutcome validate_kg_task(TaskInstance candidate, const TripleStore& store);

struct SelectionResult {
  bool feasible = false;
  std::vector<TaskInstance> subset;       // in pool order
  std::vector<Skill> deficient_skills;    // named when infeasible
};

// Greedy coverage selection: repeatedly takes the task covering the most
// currently-deficient skills (ties by pool order) until `target_size` tasks
// are chosen, then checks every skill reached `min_per_skill`.
SelectionResult select_balanced_subset(const std::vector<TaskInstance>& pool,
                                       std::size_t target_size, std::int64_t min_per_skill);

// Candidate producer behind the generation pipeline. Returns the parsed
// candidate document, or nothing for a malformed reply (counted and skipped).
class TaskGenerator {
 public:
  virtual ~TaskGenerator() = default;
  virtual std::optional<Json> generate(EnvKind env_kind, const std::vector<Skill>& skills) = 0;
};

// Deterministic template-based generator used by tests and the bundled demo
// pipeline. Produces DB candidates whose statements exercise the requested
// skills.
class MockDbTaskGenerator : public TaskGenerator {
 public:
  explicit MockDbTaskGenerator(std::uint64_t seed, int malformed_every = 0);
  std::optional<Json> generate(EnvKind env_kind, const std::vector<Skill>& skills) override;

 private:
  std::mt19937_64 rng_;
  int malformed_every_;
  int generated_ = 0;
};

// Prompts a chat-completions endpoint and parses the JSON candidate out of
// the reply; retries are the caller's policy.
class HttpTaskGenerator : public TaskGenerator {
 public:
  explicit HttpTaskGenerator(std::shared_ptr<Model> model);
  std::optional<Json> generate(EnvKind env_kind, const std::vector<Skill>& skills) override;

 private:
  std::shared_ptr<Model> model_;
};

// Builds a TaskInstance draft from a generator reply document.
std::optional<TaskInstance> candidate_from_reply(EnvKind env_kind, const Json& reply,
                                                 const std::string& task_id);

struct PipelineStats {
  std::int64_t generated = 0;
  std::int64_t validated = 0;
  std::int64_t selected = 0;
  std::map<std::string, std::int64_t> rejected_by_reason;

  Json to_json() const;
};

struct PipelineOptions {
  std::size_t candidate_count = 600;
  std::size_t target_size = 500;
  std::int64_t min_per_skill = 20;
  std::size_t min_skills_per_task = 1;
  std::size_t max_skills_per_task = 5;
  std::uint64_t seed = 0;
};

struct PipelineResult {
  std::vector<TaskInstance> dataset;
  PipelineStats stats;
  bool feasible = false;
  std::vector<Skill> deficient_skills;
};

PipelineResult run_db_pipeline(TaskGenerator& generator, const PipelineOptions& options);

// Renders a manual-review worksheet over a seeded sample of the dataset
// (task recap plus empty verdict lines); the review itself happens offline.
std::string render_review_worksheet(const std::vector<TaskInstance>& tasks, double fraction,
                                    std::uint64_t seed);

// S-expression ingestion for the knowledge graph: maps the supported forms
// (entity literals, JOIN with reversed relations, AND, COUNT, ARGMAX/ARGMIN)
// onto action sequences and rejects everything else.
struct SexprConversion {
  bool ok = false;
  std::string error;
  std::vector<std::string> actions;
};

SexprConversion convert_sexpr(const std::string& sexpr);

ValidationOutcome kg_task_from_sexpr(const std::string& task_id, const std::string& question,
                                     const std::vector<KgEntityRef>& entities,
                                     const std::string& sexpr, const TripleStore& store);

}  // namespace seqbench::datagen
