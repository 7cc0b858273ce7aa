#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

using Json = nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string fixture(const std::string& name) {
  return std::string(AUCTION_FIXTURE_DIR) + "/" + name;
}

// Runs the CLI with stderr silenced; stdout and the exit code come back.
RunResult run(const std::string& args) {
  std::string cmd = std::string(AUCTION_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Json strip_timing(const std::string& text) {
  Json doc = Json::parse(text);
  doc.erase("timing_ms");
  return doc;
}

}  // namespace

TEST_CASE("check flags the overdemanding pair with its certificate") {
  auto r = run("check " + fixture("intro2.json") + " " + fixture("ruleAA.json"));
  CHECK(r.exit_code == 1);
  Json doc = Json::parse(r.out);
  CHECK(doc["feasible"] == false);
  CHECK(doc["certificate"]["set"] == Json::array({"1:H", "2:H"}));
  CHECK(doc["certificate"]["slack"].get<double>() == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("check passes both feasible pairs") {
  CHECK(run("check " + fixture("intro2.json") + " " + fixture("ruleAB.json")).exit_code == 0);
  CHECK(run("check " + fixture("intro2.json") + " " + fixture("ruleBB.json")).exit_code == 0);
}

TEST_CASE("solve reports the known optimum and repeats byte-for-byte") {
  auto first = run("solve " + fixture("intro2-ql.json") + " --seed 7");
  auto second = run("solve " + fixture("intro2-ql.json") + " --seed 7");
  CHECK(first.exit_code == 0);
  Json doc = strip_timing(first.out);
  CHECK(doc["revenue"].get<double>() == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(doc["mechanism"]["kind"] == "transition-table");
  CHECK(doc == strip_timing(second.out));
}

TEST_CASE("csv output carries the scalars and the interim table") {
  auto r = run("solve " + fixture("intro2-ql.json") + " --output csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("revenue,1.5\n") != std::string::npos);
  CHECK(r.out.find("\nxbar\n") != std::string::npos);
  CHECK(r.out.find("1:H") != std::string::npos);
}

TEST_CASE("implement hands back a table for a feasible rule and refuses otherwise") {
  auto good = run("implement " + fixture("intro2.json") + " " + fixture("ruleAB.json"));
  CHECK(good.exit_code == 0);
  Json doc = Json::parse(good.out);
  CHECK(doc["mechanism"]["kind"] == "transition-table");
  CHECK(doc["verification"]["max_abs_error"].get<double>() <= 1e-7);

  auto bad = run("implement " + fixture("intro2.json") + " " + fixture("ruleAA.json"));
  CHECK(bad.exit_code == 1);
  CHECK(Json::parse(bad.out)["certificate"]["set"] == Json::array({"1:H", "2:H"}));
}

TEST_CASE("implement uses priority rounding for block-limited supply") {
  auto r = run("implement " + fixture("partition.json") + " " + fixture("ruleBB.json"));
  CHECK(r.exit_code == 0);
  CHECK(Json::parse(r.out)["mechanism"]["kind"] == "priority-rounding");
}

TEST_CASE("simulate passes its own optimum and repeats with the seed") {
  auto first = run("simulate " + fixture("intro2-ql.json") + " --samples 20000 --seed 3");
  auto second = run("simulate " + fixture("intro2-ql.json") + " --samples 20000 --seed 3");
  CHECK(first.exit_code == 0);
  Json doc = strip_timing(first.out);
  CHECK(doc["pass"] == true);
  CHECK(doc["interim"].size() == 4);
  CHECK(doc == strip_timing(second.out));

  auto other = run("simulate " + fixture("intro2-ql.json") + " --samples 20000 --seed 4");
  CHECK(other.exit_code == 0);  // different stream, same verdict
}

TEST_CASE("simulate covers the rounding allocator too") {
  auto r = run("simulate " + fixture("partition.json") + " --samples 15000 --seed 9");
  CHECK(r.exit_code == 0);
  CHECK(Json::parse(r.out)["pass"] == true);
}

TEST_CASE("verify modes agree on the solved instance") {
  CHECK(run("verify " + fixture("intro2-ql.json") + " --mode exact").exit_code == 0);
  CHECK(run("verify " + fixture("intro2-ql.json") + " --mode flow").exit_code == 0);
  CHECK(run("verify " + fixture("intro2-ql.json") + " --mode mc --samples 10000 --seed 2")
            .exit_code == 0);
  // Rounding mechanisms have no exact interim; the flow network needs unit supply.
  CHECK(run("verify " + fixture("partition.json") + " --mode exact").exit_code == 2);
  CHECK(run("verify " + fixture("partition.json") + " --mode flow").exit_code == 2);
  CHECK(run("verify " + fixture("partition.json") + " --mode mc --samples 12000 --seed 2")
            .exit_code == 0);
}

TEST_CASE("budget instances solve through the same surface") {
  auto r = run("solve " + fixture("budget.json"));
  CHECK(r.exit_code == 0);
  CHECK(Json::parse(r.out)["revenue"].get<double>() == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("usage problems exit with code 2") {
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("solve").exit_code == 2);                      // missing positional
  CHECK(run("solve /nonexistent/file.json").exit_code == 2);
  CHECK(run("solve " + fixture("intro2.json") + " --output yaml").exit_code == 2);
  CHECK(run("check " + fixture("intro2.json")).exit_code == 2);

  auto bad = std::filesystem::temp_directory_path() / "auction_bad_instance.json";
  std::ofstream(bad) << "{\"agents\": 3}";
  CHECK(run("solve " + bad.string()).exit_code == 2);
  std::filesystem::remove(bad);
}
