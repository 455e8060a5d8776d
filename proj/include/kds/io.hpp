#pragma once

// Configuration parsing, deterministic JSON/CSV emission and atomic writes.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kds/geometry.hpp"

namespace kds::io {

using json = nlohmann::ordered_json;

std::string tool_version();

// Throws ConfigError with "line L, column C" for malformed input.
json parse_config(const std::string& text, const std::string& source = "<config>");
json load_config(const std::filesystem::path& path);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double x);
// Serializer with format_double for every float and fixed key order;
// non-finite numbers become null.
std::string dump(const json& value, int indent = 2);

// Writes to a sibling temporary file and renames it over path.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Accessors that throw ConfigError naming the offending key.
double get_number(const json& obj, const std::string& key, double fallback);
double require_number(const json& obj, const std::string& key);
long get_integer(const json& obj, const std::string& key, long fallback);
bool get_bool(const json& obj, const std::string& key, bool fallback);
std::string get_string(const json& obj, const std::string& key, const std::string& fallback);
const json& get_object(const json& obj, const std::string& key);  // empty object if absent

// r0 from a number or one of "r_e", "r_c", "mid" / "midpoint", "critical".
// Throws ConfigError outside [r_e, r_c].
double resolve_r0(const SpacetimeParams& params, const json& value);
std::string frame_label(const SpacetimeParams& params, double r0);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return out_; }

  static std::string cell(double x) { return format_double(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(const std::string& s);

 private:
  std::size_t columns_;
  std::string out_;
};

/// ISO-8601 UTC; SOURCE_DATE_EPOCH pins it for reproducible builds and runs.
std::string timestamp();

struct RunManifest {
  std::string version = tool_version();
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::string started, finished;
  std::map<std::string, std::string> verdicts;
  std::vector<std::string> outputs;

  json to_json() const;
  // Accepts a manifest written by to_json.
  static RunManifest from_json(const json& j);
  static bool looks_like_manifest(const json& j);
};

}  // namespace kds::io
