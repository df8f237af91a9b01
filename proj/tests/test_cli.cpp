// Exercises the built CLI end to end: argv[1] is the binary, argv[2] the
// directory of shipped JSON schemas.

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using nlohmann::json;

namespace {

std::string g_cli;
std::string g_schema_dir;
std::filesystem::path g_scratch;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::filesystem::path out = g_scratch / "stdout.txt";
  std::string cmd = env_prefix + g_cli + " " + args + " > " + out.string() + " 2> " +
                    (g_scratch / "stderr.txt").string();
  int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.output = slurp(out);
  return result;
}

json load_schema(const std::string& name) {
  return json::parse(slurp(std::filesystem::path(g_schema_dir) / name));
}

// Structural validator for the schema subset the repo ships: type checks,
// required keys, per-property recursion, array items, local $ref.
bool matches_schema(const json& value, const json& schema, const json& root) {
  if (schema.contains("$ref")) {
    std::string ref = schema["$ref"];
    const std::string prefix = "#/definitions/";
    REQUIRE(ref.rfind(prefix, 0) == 0);
    return matches_schema(value, root["definitions"][ref.substr(prefix.size())], root);
  }
  std::string type = schema.value("type", "");
  if (type == "object") {
    if (!value.is_object()) return false;
    for (const auto& key : schema.value("required", json::array()))
      if (!value.contains(key.get<std::string>())) return false;
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema["properties"].items())
        if (value.contains(key) && !matches_schema(value[key], sub, root)) return false;
    }
    return true;
  }
  if (type == "array") {
    if (!value.is_array()) return false;
    if (schema.contains("items"))
      for (const auto& item : value)
        if (!matches_schema(item, schema["items"], root)) return false;
    return true;
  }
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  return false;
}

bool matches_schema(const json& value, const json& schema) {
  return matches_schema(value, schema, schema);
}

}  // namespace

TEST_CASE("eppf prints the exact rational and a float") {
  RunResult run = run_cli("eppf --alpha 1/2 --theta 0 --shape 1,1");
  REQUIRE(run.exit_code == 0);
  json out = json::parse(run.output);
  CHECK(out["eppf"] == "1/2");
  CHECK(out["eppf_float"] == 0.5);
  CHECK(out["alpha"] == "1/2");
  CHECK(out["theta"] == "0");
  CHECK(matches_schema(out, load_schema("eppf.schema.json")));

  run = run_cli("eppf --alpha 1/2 --theta 1/2 --shape 2");
  REQUIRE(run.exit_code == 0);
  CHECK(json::parse(run.output)["eppf"] == "1/3");
}

TEST_CASE("usage and domain errors exit with code 1") {
  CHECK(run_cli("eppf --alpha 3/2 --theta 1 --shape 2").exit_code == 1);   // alpha out of range
  CHECK(run_cli("eppf --alpha 0.5 --theta 1 --shape 2").exit_code == 1);   // not a rational literal
  CHECK(run_cli("eppf --alpha 1/2 --theta -3/4 --shape 2").exit_code == 1);
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("eppf").exit_code == 1);  // missing required flags
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("verify-db reports an exactly zero violation and exits 0") {
  RunResult run = run_cli("verify-db --alpha 1/2 --theta 1/2 --n 4");
  REQUIRE(run.exit_code == 0);
  json out = json::parse(run.output);
  CHECK(out["max_violation"] == "0");
  CHECK(out["exact"] == true);
  CHECK(out["n"] == 4);
  CHECK(out["pairs_checked"].get<int>() > 0);
  CHECK(matches_schema(out, load_schema("verify_db.schema.json")));

  // Negative theta in (-alpha, 0) is inside the supported domain.
  run = run_cli("verify-db --alpha 1/2 --theta -1/4 --n 3");
  REQUIRE(run.exit_code == 0);
  CHECK(json::parse(run.output)["max_violation"] == "0");
}

TEST_CASE("stationary reports zero distance to the restricted law") {
  RunResult run = run_cli("stationary --alpha 1/2 --theta 1/2 --n 3");
  REQUIRE(run.exit_code == 0);
  json out = json::parse(run.output);
  CHECK(out["exact"] == true);
  CHECK(out["tv_to_pd"] == 0.0);
  CHECK(out["tv_to_pd_exact"] == "0");
  CHECK(matches_schema(out, load_schema("stationary.schema.json")));

  // Forced float path, labelled as such.
  run = run_cli("stationary --alpha 1/2 --theta 1/2 --n 4 --exact-max 3");
  REQUIRE(run.exit_code == 0);
  out = json::parse(run.output);
  CHECK(out["exact"] == false);
  CHECK(out["tv_to_pd"].get<double>() < 1e-8);
  CHECK(matches_schema(out, load_schema("stationary.schema.json")));
}

TEST_CASE("rates emits the CSV table") {
  RunResult run = run_cli("rates --alpha 1/2 --theta 1/2 --n 3");
  REQUIRE(run.exit_code == 0);
  std::istringstream lines(run.output);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "kind,args,rate_exact,rate_float");
  bool saw_coag = false, saw_split = false, saw_total = false;
  while (std::getline(lines, line)) {
    saw_coag |= line == "coag,l=2;k=2,1/2,0.5";
    saw_split |= line.rfind("split,1+1,1,", 0) == 0;
    saw_total |= line.rfind("split_total,k=3,4/3,", 0) == 0;
  }
  CHECK(saw_coag);
  CHECK(saw_split);
  CHECK(saw_total);
}

TEST_CASE("sample emits schema-conforming JSON lines and is reproducible") {
  std::string args = "sample crp --alpha 1/2 --theta 1/2 --n 3 --replicas 5 --seed 7";
  RunResult first = run_cli(args);
  REQUIRE(first.exit_code == 0);
  RunResult second = run_cli(args);
  CHECK(first.output == second.output);  // byte-identical reruns

  json schema = load_schema("sample_partition_record.schema.json");
  std::istringstream lines(first.output);
  std::string line;
  int records = 0;
  while (std::getline(lines, line)) {
    json record = json::parse(line);
    CHECK(matches_schema(record, schema));
    CHECK(record["replica"] == records);
    ++records;
  }
  CHECK(records == 5);

  RunResult gem = run_cli("sample gem --theta 1 --replicas 3 --seed 11 --trunc 100");
  REQUIRE(gem.exit_code == 0);
  json sticks_schema = load_schema("sample_sticks_record.schema.json");
  std::istringstream gem_lines(gem.output);
  records = 0;
  while (std::getline(gem_lines, line)) {
    json record = json::parse(line);
    CHECK(matches_schema(record, sticks_schema));
    CHECK(record["dust"].get<double>() >= 0.0);
    ++records;
  }
  CHECK(records == 3);

  RunResult pd = run_cli("sample pd --alpha 1/3 --theta 2 --replicas 2 --seed 3 --trunc 50");
  CHECK(pd.exit_code == 0);

  RunResult box = run_cli("sample paintbox --x 1/2,1/2 --n 4 --replicas 4 --seed 13");
  REQUIRE(box.exit_code == 0);
  std::istringstream box_lines(box.output);
  records = 0;
  while (std::getline(box_lines, line)) {
    CHECK(matches_schema(json::parse(line), schema));
    ++records;
  }
  CHECK(records == 4);

  // Default paint-box route: sticks are drawn, ranked and renormalized.
  RunResult box_sticks =
      run_cli("sample paintbox --alpha 1/2 --theta 1 --n 4 --replicas 3 --seed 21 --trunc 2000");
  REQUIRE(box_sticks.exit_code == 0);
  std::istringstream box_sticks_lines(box_sticks.output);
  records = 0;
  while (std::getline(box_sticks_lines, line)) {
    CHECK(matches_schema(json::parse(line), schema));
    ++records;
  }
  CHECK(records == 3);

  CHECK(run_cli("sample paintbox --x 1/2,1/3 --n 2 --replicas 1").exit_code == 1);
  CHECK(run_cli("sample nonsense --replicas 1").exit_code == 1);
}

TEST_CASE("simulate emits the TV curve as CSV") {
  std::string args =
      "simulate --alpha 1/2 --theta 1/2 --n 2 --t-end 2 --grid 3 --replicas 2000 --seed 5";
  RunResult run = run_cli(args);
  REQUIRE(run.exit_code == 0);
  RunResult again = run_cli(args);
  CHECK(run.output == again.output);

  std::istringstream lines(run.output);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "t,tv,se");
  std::vector<double> times;
  while (std::getline(lines, line)) {
    std::stringstream row(line);
    std::string t;
    std::getline(row, t, ',');
    times.push_back(std::stod(t));
  }
  CHECK(times == std::vector<double>{0.0, 1.0, 2.0});
}

TEST_CASE("split-merge emits a schema-conforming summary") {
  RunResult run = run_cli("split-merge --steps 20000 --burn-in 2000 --thin 10 --seed 9");
  REQUIRE(run.exit_code == 0);
  json out = json::parse(run.output);
  CHECK(matches_schema(out, load_schema("split_merge.schema.json")));
  CHECK(out["p_top_above_half"]["value"].get<double>() > 0.0);
  CHECK(out["p_top_above_half"]["value"].get<double>() < 1.0);
  CHECK(out["mean_sum_squares"]["value"].get<double>() > 0.0);
  CHECK(out["samples"] == 1800);
}

TEST_CASE("--out writes files, honoring EFC_OUTPUT_DIR for relative paths") {
  std::filesystem::path direct = g_scratch / "eppf_direct.json";
  RunResult run = run_cli("eppf --alpha 1/2 --theta 1/2 --shape 2 --out " + direct.string());
  REQUIRE(run.exit_code == 0);
  CHECK(run.output.empty());
  CHECK(json::parse(slurp(direct))["eppf"] == "1/3");

  RunResult env_run = run_cli("eppf --alpha 1/2 --theta 1/2 --shape 1,1 --out eppf_rel.json",
                              "EFC_OUTPUT_DIR=" + g_scratch.string() + " ");
  REQUIRE(env_run.exit_code == 0);
  CHECK(json::parse(slurp(g_scratch / "eppf_rel.json"))["eppf"] == "2/3");
}

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: test_cli <cli-binary> <schema-dir>\n");
    return 1;
  }
  g_cli = argv[1];
  g_schema_dir = argv[2];
  g_scratch = std::filesystem::temp_directory_path() / "efc_cli_test";
  std::filesystem::create_directories(g_scratch);

  doctest::Context context;
  context.applyCommandLine(argc - 2, argv + 2);
  return context.run();
}
