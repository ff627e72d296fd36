#pragma once

#include <memory>
#include <string>
#include <vector>

#include "seqbench/values.hpp"

namespace seqbench {

struct SqlResult {
  bool ok = false;
  bool is_read = false;        // statement produced a row set
  std::vector<DbRow> rows;     // filled for reads
  std::string error;           // backend error text when !ok
};

// One statement per call. Reads come back as tuples of primitive values in
// column order; writes as an empty result. SQL errors are data (they become
// the agent's observation), transport trouble throws.
class SqlBackend {
 public:
  virtual ~SqlBackend() = default;
  virtual std::string dialect() const = 0;
  virtual SqlResult execute(const std::string& statement) = 0;
};

// Embedded engine used by tests and the acceptance suite. A container-backed
// MySQL client can slot in behind the same interface via the RPC toolkit.
class SqliteBackend : public SqlBackend {
 public:
  explicit SqliteBackend(const std::string& path = ":memory:");
  ~SqliteBackend() override;

  SqliteBackend(const SqliteBackend&) = delete;
  SqliteBackend& operator=(const SqliteBackend&) = delete;

  std::string dialect() const override { return "sqlite"; }
  SqlResult execute(const std::string& statement) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::shared_ptr<SqlBackend> make_embedded_sql_backend();

}  // namespace seqbench
