#include "kds/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "kds/errors.hpp"

#ifndef KDS_VERSION
#define KDS_VERSION "0.0.0"
#endif

namespace kds::io {

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  // nlohmann reports the byte after the offending character
  if (col > 1) --col;
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void escape_string(std::string& out, const std::string& s) {
  out += '"';
  for (unsigned char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (ch < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += char(ch);
        }
    }
  }
  out += '"';
}

void write_value(std::string& out, const json& v, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent <= 0) return;
    out += '\n';
    out.append(std::size_t(indent * d), ' ');
  };
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        escape_string(out, it.key());
        out += indent > 0 ? ": " : ":";
        write_value(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        write_value(out, e, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case json::value_t::string: escape_string(out, v.get<std::string>()); return;
    case json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; return;
    case json::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); return;
    case json::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); return;
    case json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default: out += "null"; return;
  }
}

const json& member(const json& obj, const std::string& key) {
  static const json null_value;
  if (!obj.is_object()) return null_value;
  auto it = obj.find(key);
  return it == obj.end() ? null_value : *it;
}

}  // namespace

std::string tool_version() { return KDS_VERSION; }

json parse_config(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    throw Error(ErrorCode::ConfigError, source + ": " + line_column(text, e.byte) + ": " +
                                            (pos == std::string::npos ? msg : msg.substr(pos)));
  }
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string format_double(double x) {
  if (x == 0.0) return std::signbit(x) ? "-0.0" : "0.0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, res.ptr);
  // keep a float looking like a float so it round-trips through JSON types
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump(const json& value, int indent) {
  std::string out;
  write_value(out, value, indent, 0);
  out += '\n';
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::ConfigError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::ConfigError, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

double get_number(const json& obj, const std::string& key, double fallback) {
  const json& v = member(obj, key);
  if (v.is_null()) return fallback;
  if (!v.is_number()) throw Error(ErrorCode::ConfigError, "'" + key + "' must be a number");
  return v.get<double>();
}

double require_number(const json& obj, const std::string& key) {
  const json& v = member(obj, key);
  if (v.is_null()) throw Error(ErrorCode::ConfigError, "missing required key '" + key + "'");
  return get_number(obj, key, 0.0);
}

long get_integer(const json& obj, const std::string& key, long fallback) {
  const json& v = member(obj, key);
  if (v.is_null()) return fallback;
  if (!v.is_number_integer()) throw Error(ErrorCode::ConfigError, "'" + key + "' must be an integer");
  return v.get<long>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
  const json& v = member(obj, key);
  if (v.is_null()) return fallback;
  if (!v.is_boolean()) throw Error(ErrorCode::ConfigError, "'" + key + "' must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback) {
  const json& v = member(obj, key);
  if (v.is_null()) return fallback;
  if (!v.is_string()) throw Error(ErrorCode::ConfigError, "'" + key + "' must be a string");
  return v.get<std::string>();
}

const json& get_object(const json& obj, const std::string& key) {
  static const json empty = json::object();
  const json& v = member(obj, key);
  if (v.is_null()) return empty;
  if (!v.is_object()) throw Error(ErrorCode::ConfigError, "'" + key + "' must be an object");
  return v;
}

double resolve_r0(const SpacetimeParams& p, const json& value) {
  double r0 = 0;
  if (value.is_number()) {
    r0 = value.get<double>();
  } else if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "r_e") r0 = p.r_e();
    else if (s == "r_c") r0 = p.r_c();
    else if (s == "mid" || s == "midpoint") r0 = 0.5 * (p.r_e() + p.r_c());
    else if (s == "critical") r0 = p.mu_critical_radius();
    else throw Error(ErrorCode::ConfigError, "unknown frame '" + s + "' (use r_e, r_c, mid, critical or a number)");
  } else {
    throw Error(ErrorCode::ConfigError, "r0 must be a number or a frame name");
  }
  if (!(r0 >= p.r_e() && r0 <= p.r_c())) {
    throw Error(ErrorCode::ConfigError, "r0 = " + format_double(r0) + " lies outside [r_e, r_c] = [" +
                                            format_double(p.r_e()) + ", " + format_double(p.r_c()) + "]");
  }
  return r0;
}

std::string frame_label(const SpacetimeParams& p, double r0) {
  if (r0 == p.r_e()) return "r_e";
  if (r0 == p.r_c()) return "r_c";
  if (r0 == 0.5 * (p.r_e() + p.r_c())) return "mid";
  if (r0 == p.mu_critical_radius()) return "critical";
  return format_double(r0);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  std::vector<std::string> cells;
  for (auto& h : header) cells.push_back(cell(h));
  columns_ = cells.size();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error(ErrorCode::InvalidArgument, "CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
}

std::string CsvWriter::cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string timestamp() {
  std::time_t t;
  if (const char* e = std::getenv("SOURCE_DATE_EPOCH"); e && *e) {
    t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json RunManifest::to_json() const {
  json j;
  j["kind"] = "kds-manifest";
  j["version"] = version;
  j["command"] = command;
  j["seed"] = seed;
  j["started"] = started;
  j["finished"] = finished;
  j["config"] = config;
  json v = json::object();
  for (const auto& [k, s] : verdicts) v[k] = s;
  j["verdicts"] = v;
  j["outputs"] = outputs;
  return j;
}

bool RunManifest::looks_like_manifest(const json& j) {
  return j.is_object() && j.contains("kind") && j["kind"] == "kds-manifest";
}

RunManifest RunManifest::from_json(const json& j) {
  if (!looks_like_manifest(j)) throw Error(ErrorCode::ConfigError, "not a kds manifest");
  RunManifest m;
  m.version = get_string(j, "version", "");
  m.command = get_string(j, "command", "");
  m.seed = static_cast<std::uint64_t>(get_integer(j, "seed", 0));
  m.started = get_string(j, "started", "");
  m.finished = get_string(j, "finished", "");
  if (!j.contains("config") || !j["config"].is_object())
    throw Error(ErrorCode::ConfigError, "manifest has no config object");
  m.config = j["config"];
  for (const auto& [k, v] : get_object(j, "verdicts").items()) m.verdicts[k] = v.get<std::string>();
  return m;
}

}  // namespace kds::io
