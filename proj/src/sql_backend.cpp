#include "seqbench/sql_backend.hpp"

#include <sqlite3.h>

#include <stdexcept>

namespace seqbench {

struct SqliteBackend::Impl {
  sqlite3* db = nullptr;
};

SqliteBackend::SqliteBackend(const std::string& path) : impl_(std::make_unique<Impl>()) {
  if (sqlite3_open(path.c_str(), &impl_->db) != SQLITE_OK) {
    std::string msg = impl_->db ? sqlite3_errmsg(impl_->db) : "out of memory";
    throw std::runtime_error("cannot open sqlite database: " + msg);
  }
}

SqliteBackend::~SqliteBackend() {
  if (impl_ && impl_->db) sqlite3_close(impl_->db);
}

SqlResult SqliteBackend::execute(const std::string& statement) {
  SqlResult result;
  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  int rc = sqlite3_prepare_v2(impl_->db, statement.c_str(), -1, &stmt, &tail);
  if (rc != SQLITE_OK) {
    result.error = sqlite3_errmsg(impl_->db);
    return result;
  }
  if (stmt == nullptr) {
    result.error = "empty statement";
    return result;
  }

  result.is_read = sqlite3_column_count(stmt) > 0;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    DbRow row;
    int cols = sqlite3_column_count(stmt);
    for (int c = 0; c < cols; ++c) {
      switch (sqlite3_column_type(stmt, c)) {
        case SQLITE_INTEGER:
          row.push_back(static_cast<std::int64_t>(sqlite3_column_int64(stmt, c)));
          break;
        case SQLITE_FLOAT:
          row.push_back(sqlite3_column_double(stmt, c));
          break;
        case SQLITE_NULL:
          row.push_back(nullptr);
          break;
        default: {
          const unsigned char* text = sqlite3_column_text(stmt, c);
          int len = sqlite3_column_bytes(stmt, c);
          row.push_back(std::string(reinterpret_cast<const char*>(text), len));
        }
      }
    }
    result.rows.push_back(std::move(row));
  }
  if (rc != SQLITE_DONE) {
    result.error = sqlite3_errmsg(impl_->db);
    sqlite3_finalize(stmt);
    return result;
  }
  sqlite3_finalize(stmt);
  result.ok = true;
  return result;
}

std::shared_ptr<SqlBackend> make_embedded_sql_backend() {
  return std::make_shared<SqliteBackend>();
}

}  // namespace seqbench
