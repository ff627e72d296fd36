#include "seqbench/exec_backend.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seqbench {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Whitespace tokenization with single/double quote grouping.
std::vector<std::string> tokenize(const std::string& command) {
  std::vector<std::string> tokens;
  std::string current;
  char quote = '\0';
  bool any = false;
  for (char c : command) {
    if (quote != '\0') {
      if (c == quote) quote = '\0';
      else current += c;
      continue;
    }
    if (c == '"' || c == '\'') { quote = c; any = true; continue; }
    if (c == ' ' || c == '\t') {
      if (any || !current.empty()) tokens.push_back(current);
      current.clear();
      any = false;
      continue;
    }
    current += c;
  }
  if (any || !current.empty()) tokens.push_back(current);
  return tokens;
}

std::string parent_dir(const std::string& path) {
  auto pos = path.find_last_of('/');
  if (pos == std::string::npos || pos == 0) return "/";
  return path.substr(0, pos);
}

std::vector<std::string> split_commands(const std::string& script) {
  std::vector<std::string> commands;
  std::string current;
  char quote = '\0';
  for (std::size_t i = 0; i < script.size(); ++i) {
    char c = script[i];
    if (quote != '\0') {
      current += c;
      if (c == quote) quote = '\0';
      continue;
    }
    if (c == '"' || c == '\'') { quote = c; current += c; continue; }
    if (c == '\n' || c == ';') {
      commands.push_back(current);
      current.clear();
      continue;
    }
    if (c == '&' && i + 1 < script.size() && script[i + 1] == '&') {
      commands.push_back(current);
      current.clear();
      ++i;
      continue;
    }
    current += c;
  }
  commands.push_back(current);
  std::vector<std::string> out;
  for (auto& cmd : commands) {
    std::string t = trim(cmd);
    if (!t.empty() && t[0] != '#') out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

void MockExecBackend::fresh() {
  files_.clear();
  dirs_.clear();
  modes_.clear();
  owners_.clear();
  users_.clear();
  groups_.clear();
  history_.clear();
  alive_ = true;
  ++fresh_count_;
}

void MockExecBackend::destroy() {
  alive_ = false;
  files_.clear();
  dirs_.clear();
}

bool MockExecBackend::file_exists(const std::string& path) const {
  return files_.count(path) > 0;
}

std::optional<std::string> MockExecBackend::file_content(const std::string& path) const {
  auto it = files_.find(path);
  if (it == files_.end()) return std::nullopt;
  return it->second;
}

ExecResult MockExecBackend::run(const std::string& script) {
  if (!alive_) throw std::logic_error("exec backend has no live instance; call fresh() first");
  history_.push_back(script);

  for (const auto& rule : rules_) {
    if (script.find(rule.contains) != std::string::npos) {
      for (const auto& [path, content] : rule.set_files) files_[path] = content;
      for (const auto& path : rule.remove_files) files_.erase(path);
      return rule.result;
    }
  }

  ExecResult last{"", 0};
  std::string output;
  for (const auto& command : split_commands(script)) {
    last = run_command(command);
    output += last.stdout_text;
    if (last.exit_code != 0) break;
  }
  return {output, last.exit_code};
}

ExecResult MockExecBackend::run_command(const std::string& command) {
  // echo with redirect keeps its payload intact, so handle it before
  // tokenization flattens the quoting.
  if (command.rfind("echo ", 0) == 0) {
    auto redir = command.find(">>");
    bool append = redir != std::string::npos;
    if (!append) redir = command.find('>');
    if (redir != std::string::npos) {
      std::string payload = strip_quotes(trim(command.substr(5, redir - 5)));
      std::string path = trim(command.substr(redir + (append ? 2 : 1)));
      if (append && files_.count(path)) files_[path] += payload + "\n";
      else files_[path] = payload + "\n";
      return {"", 0};
    }
    return {strip_quotes(trim(command.substr(5))) + "\n", 0};
  }

  std::vector<std::string> tokens = tokenize(command);
  if (tokens.empty()) return {"", 0};
  const std::string& cmd = tokens[0];

  auto args_from = [&](std::size_t i) {
    return std::vector<std::string>(tokens.begin() + i, tokens.end());
  };

  if (cmd == "true" || cmd == "sleep" || cmd == "cd" || cmd == "sync") return {"", 0};
  if (cmd == "false") return {"", 1};
  if (cmd == "exit") {
    int code = tokens.size() > 1 ? std::atoi(tokens[1].c_str()) : 0;
    return {"", code};
  }
  if (cmd == "mkdir") {
    bool parents = tokens.size() > 1 && tokens[1] == "-p";
    for (const auto& path : args_from(parents ? 2 : 1)) {
      if (!parents && dirs_.count(path)) {
        return {"mkdir: cannot create directory '" + path + "': File exists\n", 1};
      }
      std::string p = path;
      while (p != "/" && !p.empty()) {
        dirs_.insert(p);
        p = parent_dir(p);
      }
    }
    return {"", 0};
  }
  if (cmd == "touch") {
    for (const auto& path : args_from(1)) {
      if (!files_.count(path)) files_[path] = "";
    }
    return {"", 0};
  }
  if (cmd == "rm") {
    std::size_t i = 1;
    bool force = false, recursive = false;
    while (i < tokens.size() && !tokens[i].empty() && tokens[i][0] == '-') {
      force = force || tokens[i].find('f') != std::string::npos;
      recursive = recursive || tokens[i].find('r') != std::string::npos;
      ++i;
    }
    for (const auto& path : args_from(i)) {
      if (recursive) {
        dirs_.erase(path);
        for (auto it = files_.begin(); it != files_.end();) {
          if (it->first == path || it->first.rfind(path + "/", 0) == 0) it = files_.erase(it);
          else ++it;
        }
        continue;
      }
      if (!files_.count(path) && !force) {
        return {"rm: cannot remove '" + path + "': No such file or directory\n", 1};
      }
      files_.erase(path);
    }
    return {"", 0};
  }
  if (cmd == "cp" && tokens.size() >= 3) {
    auto it = files_.find(tokens[tokens.size() - 2]);
    if (it == files_.end()) {
      return {"cp: cannot stat '" + tokens[tokens.size() - 2] + "': No such file or directory\n", 1};
    }
    files_[tokens.back()] = it->second;
    return {"", 0};
  }
  if (cmd == "mv" && tokens.size() >= 3) {
    auto it = files_.find(tokens[tokens.size() - 2]);
    if (it == files_.end()) {
      return {"mv: cannot stat '" + tokens[tokens.size() - 2] + "': No such file or directory\n", 1};
    }
    files_[tokens.back()] = it->second;
    files_.erase(tokens[tokens.size() - 2]);
    return {"", 0};
  }
  if (cmd == "cat" && tokens.size() >= 2) {
    auto it = files_.find(tokens[1]);
    if (it == files_.end()) {
      return {"cat: " + tokens[1] + ": No such file or directory\n", 1};
    }
    return {it->second, 0};
  }
  if (cmd == "test" || cmd == "[") {
    std::vector<std::string> expr = args_from(1);
    if (cmd == "[" && !expr.empty() && expr.back() == "]") expr.pop_back();
    bool negate = false;
    if (!expr.empty() && expr[0] == "!") {
      negate = true;
      expr.erase(expr.begin());
    }
    bool value = false;
    if (expr.size() == 2 && expr[0] == "-f") value = files_.count(expr[1]) > 0;
    else if (expr.size() == 2 && expr[0] == "-d") value = dirs_.count(expr[1]) > 0;
    else if (expr.size() == 2 && expr[0] == "-s") {
      auto it = files_.find(expr[1]);
      value = it != files_.end() && !it->second.empty();
    } else if (expr.size() == 2 && expr[0] == "-e") {
      value = files_.count(expr[1]) > 0 || dirs_.count(expr[1]) > 0;
    } else if (expr.size() == 3 && expr[1] == "=") {
      value = strip_quotes(expr[0]) == strip_quotes(expr[2]);
    } else {
      return {"test: unsupported expression\n", 2};
    }
    if (negate) value = !value;
    return {"", value ? 0 : 1};
  }
  if (cmd == "grep") {
    bool quiet = false;
    std::size_t i = 1;
    while (i < tokens.size() && !tokens[i].empty() && tokens[i][0] == '-') {
      quiet = quiet || tokens[i].find('q') != std::string::npos;
      ++i;
    }
    if (i + 1 >= tokens.size()) return {"grep: missing operands\n", 2};
    std::string pattern = strip_quotes(tokens[i]);
    auto it = files_.find(tokens[i + 1]);
    if (it == files_.end()) {
      return {"grep: " + tokens[i + 1] + ": No such file or directory\n", 2};
    }
    std::string matched;
    std::istringstream lines(it->second);
    std::string line;
    bool any = false;
    while (std::getline(lines, line)) {
      if (line.find(pattern) != std::string::npos) {
        any = true;
        matched += line + "\n";
      }
    }
    return {quiet ? "" : matched, any ? 0 : 1};
  }
  if (cmd == "wc" && tokens.size() >= 3) {
    auto it = files_.find(tokens[2]);
    if (it == files_.end()) return {"wc: " + tokens[2] + ": No such file or directory\n", 1};
    if (tokens[1] == "-l") {
      std::int64_t lines = 0;
      for (char c : it->second) lines += c == '\n';
      return {std::to_string(lines) + " " + tokens[2] + "\n", 0};
    }
    if (tokens[1] == "-c") {
      return {std::to_string(it->second.size()) + " " + tokens[2] + "\n", 0};
    }
    return {"wc: unsupported flag\n", 1};
  }
  if (cmd == "chmod" && tokens.size() >= 3) {
    for (const auto& path : args_from(2)) modes_[path] = tokens[1];
    return {"", 0};
  }
  if ((cmd == "chown" || cmd == "chgrp") && tokens.size() >= 3) {
    std::size_t i = 1;
    if (tokens[i] == "-R") ++i;
    std::string owner = tokens[i++];
    for (const auto& path : args_from(i)) owners_[path] = owner;
    return {"", 0};
  }
  if (cmd == "useradd" && !tokens.empty()) {
    users_.insert(tokens.back());
    return {"", 0};
  }
  if (cmd == "groupadd" || cmd == "addgroup") {
    groups_.insert(tokens.back());
    return {"", 0};
  }
  if (cmd == "usermod" || cmd == "gpasswd" || cmd == "chage" || cmd == "chsh") return {"", 0};
  if (cmd == "ln" && tokens.size() >= 3) {
    auto it = files_.find(tokens[tokens.size() - 2]);
    files_[tokens.back()] = it == files_.end() ? "" : it->second;
    return {"", 0};
  }
  if (cmd == "ls") {
    std::string prefix = tokens.size() > 1 ? tokens.back() : "/";
    std::string out;
    for (const auto& [path, _] : files_) {
      if (path.rfind(prefix, 0) == 0) out += path + "\n";
    }
    return {out, 0};
  }
  if (cmd == "id" && tokens.size() >= 2) {
    bool known = users_.count(tokens.back()) > 0;
    if (known) return {"uid=1000(" + tokens.back() + ")\n", 0};
    return {"id: '" + tokens.back() + "': no such user\n", 1};
  }
  if (cmd == "getent" && tokens.size() >= 3 && tokens[1] == "group") {
    bool known = groups_.count(tokens.back()) > 0;
    return {known ? tokens.back() + ":x:1001:\n" : "", known ? 0 : 2};
  }
  return {"bash: " + cmd + ": command not found\n", 127};
}

LocalShellExecBackend::LocalShellExecBackend(std::string scratch_root)
    : scratch_root_(std::move(scratch_root)) {
  if (scratch_root_.empty()) {
    scratch_root_ = std::filesystem::temp_directory_path() / "seqbench-exec";
  }
}

LocalShellExecBackend::~LocalShellExecBackend() { destroy(); }

void LocalShellExecBackend::fresh() {
  destroy();
  std::filesystem::create_directories(scratch_root_);
  std::string templ = scratch_root_ + "/instance-XXXXXX";
  std::vector<char> buf(templ.begin(), templ.end());
  buf.push_back('\0');
  if (mkdtemp(buf.data()) == nullptr) {
    throw std::runtime_error("cannot create exec instance directory under " + scratch_root_);
  }
  instance_dir_ = buf.data();
}

ExecResult LocalShellExecBackend::run(const std::string& script) {
  if (instance_dir_.empty()) {
    throw std::logic_error("exec backend has no live instance; call fresh() first");
  }
  std::string script_path = instance_dir_ + "/.script.sh";
  {
    std::ofstream out(script_path, std::ios::trunc);
    out << script << "\n";
  }
  std::string cmd = "cd '" + instance_dir_ + "' && /bin/bash '" + script_path + "' 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("cannot spawn shell");
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
  return {output, code};
}

void LocalShellExecBackend::destroy() {
  if (!instance_dir_.empty()) {
    std::error_code ec;
    std::filesystem::remove_all(instance_dir_, ec);
    instance_dir_.clear();
  }
}

}  // namespace seqbench
