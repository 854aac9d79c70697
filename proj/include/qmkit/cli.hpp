#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace qmkit::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "qmkit";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { kOk = 0, kComputation = 1, kUsage = 2 };

struct RunConfig {
  std::vector<std::string> command;  // e.g. {"qm", "eval"}
  std::string group_file;
  std::string model;  // inline declaration such as "free 2"
  int radius = -1;    // -1: command default
  std::uint64_t budget = 0;  // 0: QMKIT_VERTEX_BUDGET or the built-in default
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::map<std::string, std::string> params;
  std::string out;
  std::map<std::string, std::string> csv;  // table name -> path
  std::string dot;
  std::vector<std::string> argv;
};

struct Report {
  Json doc;
  int exit_code = kOk;
};

Json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const Json& j);

// Runs one command in-process. Never writes files.
Report execute(const RunConfig& cfg);

// RFC 4180 text of a table in the report; throws on an unknown name.
std::string emit_csv(const Report& report, const std::string& table);

// Report to cfg.out (or stdout), CSV tables and DOT export.
void write_outputs(const Report& report, const RunConfig& cfg);

// Parses argv; on usage errors prints the CLI11 message and returns false
// with exit_code set.
bool parse_args(int argc, const char* const* argv, RunConfig& cfg, int& exit_code);

int run(int argc, const char* const* argv);

}  // namespace qmkit::cli
