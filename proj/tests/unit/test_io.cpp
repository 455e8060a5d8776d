#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <sys/wait.h>

#include "kds/commands.hpp"
#include "kds/errors.hpp"
#include "kds/io.hpp"
#include "kds/random.hpp"

using namespace kds;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("kds_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("format_double round-trips") {
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::ldexp(rng.normal(), int(rng.uniform(-60, 60)));
    CHECK(std::strtod(io::format_double(x).c_str(), nullptr) == x);
  }
  CHECK(io::format_double(1.0) == "1.0");
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(-0.0) == "-0.0");
  CHECK(io::format_double(1e300) == "1e+300");
}

TEST_CASE("dump: fixed order, floats stay floats, non-finite becomes null") {
  io::json j;
  j["z"] = 1;
  j["a"] = 2.0;
  j["n"] = std::numeric_limits<double>::quiet_NaN();
  j["s"] = "x\"y";
  CHECK(io::dump(j, 0) == "{\"z\":1,\"a\":2.0,\"n\":null,\"s\":\"x\\\"y\"}\n");
  const auto back = io::json::parse(io::dump(j));
  CHECK(back["a"].is_number_float());
}

TEST_CASE("config errors carry line and column") {
  try {
    (void)io::parse_config("{\n  \"a\": 1,\n  \"b\": ]\n}");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("column") != std::string::npos);
  }
  const auto j = io::parse_config(R"({"n": 2, "s": "x", "o": {"k": true}})");
  CHECK(io::get_integer(j, "n", 0) == 2);
  CHECK(io::get_number(j, "missing", 4.5) == 4.5);
  CHECK(io::get_bool(io::get_object(j, "o"), "k", false));
  CHECK_THROWS_AS(io::get_number(j, "s", 0), Error);
  CHECK_THROWS_AS(io::require_number(j, "missing"), Error);
}

TEST_CASE("r0 names") {
  const auto p = SpacetimeParams::make(0.06, 0.3, 1.0);
  CHECK(io::resolve_r0(p, "r_e") == p.r_e());
  CHECK(io::resolve_r0(p, "r_c") == p.r_c());
  CHECK(io::resolve_r0(p, "critical") == p.mu_critical_radius());
  CHECK(io::resolve_r0(p, 3.0) == 3.0);
  CHECK(io::frame_label(p, p.r_e()) == "r_e");
  CHECK_THROWS_AS(io::resolve_r0(p, 7.0), Error);
  CHECK_THROWS_AS(io::resolve_r0(p, "nowhere"), Error);
}

TEST_CASE("csv quoting") {
  io::CsvWriter w({"a", "b,c"});
  w.row({"1", io::CsvWriter::cell(std::string("say \"hi\""))});
  CHECK(w.str() == "a,\"b,c\"\n1,\"say \"\"hi\"\"\"\n");
  CHECK_THROWS_AS(w.row({"1"}), Error);
}

TEST_CASE("manifest round trip and pinned timestamps") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(io::timestamp() == "2023-11-14T22:13:20Z");
  io::RunManifest m;
  m.command = "params";
  m.seed = 5;
  m.config = io::parse_config(R"({"params": {"lambda": 0.06}})");
  m.verdicts["x"] = "PASS";
  const auto back = io::RunManifest::from_json(m.to_json());
  CHECK(back.command == "params");
  CHECK(back.seed == 5);
  CHECK(back.verdicts.at("x") == "PASS");
  CHECK(back.version == io::tool_version());
  CHECK_THROWS_AS(io::RunManifest::from_json(io::json::object()), Error);
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("params command in process") {
  const auto dir = scratch("params");
  std::ostringstream log;
  const auto cfg = io::parse_config(R"({"params": {"lambda": 0.06, "a": 0.0, "mass": 1.0}})");
  CHECK(cli::run_command("params", cfg, {std::nullopt, dir}, log) == cli::kPass);
  const auto out = io::json::parse(slurp(dir / "params.json"));
  CHECK(out.dump().find("roots") != std::string::npos);
  const auto man = io::json::parse(slurp(dir / "manifest.json"));
  CHECK(man["kind"] == "kds-manifest");

  const auto bad = io::parse_config(R"({"params": {"lambda": 0.2, "a": 0.0, "mass": 1.0}})");
  CHECK(cli::run_command("params", bad, {std::nullopt, dir}, log) == cli::kPrecondition);
  CHECK(cli::run_command("nonsense", cfg, {std::nullopt, dir}, log) == cli::kUsage);
  CHECK(cli::run_command("trap", io::parse_config(R"({"params": {"lambda": 0.06, "a": 0.3, "mass": 1.0},
      "orthogonal": {"count": 0}})"), {std::nullopt, dir}, log) == cli::kUsage);
}

#ifdef KDS_EXE
TEST_CASE("kds executable exit codes") {
  const auto dir = scratch("exe");
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(KDS_EXE) + " " + args + " > " + (dir / "log.txt").string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  {
    std::ofstream(dir / "bad.json") << "{\"params\": {\"lambda\": 0.06,, }";
    std::ofstream(dir / "big.json") << R"({"params": {"lambda": 0.2, "a": 0.0, "mass": 1.0}})";
  }
  CHECK(run("params --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 1);
  CHECK(slurp(dir / "log.txt").find("line 1") != std::string::npos);
  CHECK(run("params --config " + (dir / "big.json").string() + " --out " + dir.string()) == 2);
  CHECK(run(std::string("params --config ") + KDS_CONFIG_DIR + "/params.json --out " + dir.string()) == 0);
  CHECK(run("params --config /nonexistent.json") == 1);
  CHECK(run("frobnicate") == 1);
}
#endif
