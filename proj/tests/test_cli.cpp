#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string command =
      std::string(ACTIONSCORE_CLI_PATH) + " " + args + " 2>&1";
  RunResult result;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.out.append(buffer, got);
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Unique scratch directory per test case, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("actionscore_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::string kConstantTrace =
    "{\"h\":1,\"run\":\"r\",\"split\":\"test\",\"components\":[\"loss\"]}\n"
    "{\"e\":0,\"s\":\"s1\",\"c\":\"loss\",\"l\":1}\n"
    "{\"e\":1,\"s\":\"s1\",\"c\":\"loss\",\"l\":1}\n"
    "{\"e\":2,\"s\":\"s1\",\"c\":\"loss\",\"l\":1}\n"
    "{\"e\":0,\"s\":\"s2\",\"c\":\"loss\",\"l\":1}\n"
    "{\"e\":1,\"s\":\"s2\",\"c\":\"loss\",\"l\":1}\n"
    "{\"e\":2,\"s\":\"s2\",\"c\":\"loss\",\"l\":1}\n";

}  // namespace

TEST_CASE("validate: exit codes per contract") {
  TempDir dir("validate");
  write_file(dir.file("ok.aclt"), kConstantTrace);

  const RunResult ok = run_cli("validate " + dir.file("ok.aclt"));
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("status: VALID") != std::string::npos);
  CHECK(ok.out.find("records: 6") != std::string::npos);

  write_file(dir.file("dup.aclt"),
             kConstantTrace + "{\"e\":1,\"s\":\"s1\",\"c\":\"loss\",\"l\":9}\n");
  const RunResult dup = run_cli("validate " + dir.file("dup.aclt"));
  CHECK(dup.exit_code == 1);
  CHECK(dup.out.find("status: INVALID") != std::string::npos);
  CHECK(dup.out.find("epoch 1") != std::string::npos);

  const RunResult missing = run_cli("validate " + dir.file("no_such.aclt"));
  CHECK(missing.exit_code == 2);

  write_file(dir.file("empty.aclt"), "");
  const RunResult empty = run_cli("validate " + dir.file("empty.aclt"));
  CHECK(empty.exit_code == 1);
  CHECK(empty.out.find("missing header") != std::string::npos);
}

TEST_CASE("score: sum and mean policies on a constant trace") {
  TempDir dir("score");
  write_file(dir.file("t.aclt"), kConstantTrace);

  const RunResult sum = run_cli("score " + dir.file("t.aclt") + " -o " +
                                dir.file("sum.acts"));
  CHECK(sum.exit_code == 0);
  const std::string sum_table = read_file(dir.file("sum.acts"));
  CHECK(sum_table.find("{\"s\":\"s1\",\"a\":{\"loss\":3},\"t\":3,\"n\":3}") !=
        std::string::npos);
  CHECK(sum_table.find("{\"s\":\"s2\",\"a\":{\"loss\":3},\"t\":3,\"n\":3}") !=
        std::string::npos);

  const RunResult mean = run_cli("score " + dir.file("t.aclt") +
                                 " --policy mean -o " + dir.file("mean.acts"));
  CHECK(mean.exit_code == 0);
  CHECK(read_file(dir.file("mean.acts"))
            .find("{\"s\":\"s1\",\"a\":{\"loss\":1},\"t\":1,\"n\":3}") !=
        std::string::npos);
}

TEST_CASE("score: multi-component totals equal the per-component sum") {
  TempDir dir("score_multi");
  std::string trace =
      "{\"h\":1,\"run\":\"r\",\"split\":\"test\",\"components\":[\"local\",\"positive\"]}\n";
  double value = 0.1;
  for (int s = 0; s < 3; ++s) {
    for (int e = 0; e < 4; ++e) {
      for (const char* c : {"local", "positive"}) {
        trace += "{\"e\":" + std::to_string(e) + ",\"s\":\"s" +
                 std::to_string(s) + "\",\"c\":\"" + c +
                 "\",\"l\":" + std::to_string(value) + "}\n";
        value += 0.7;
      }
    }
  }
  write_file(dir.file("t.aclt"), trace);
  const RunResult result = run_cli("score " + dir.file("t.aclt") + " -o " +
                                   dir.file("t.acts"));
  CHECK(result.exit_code == 0);

  std::ifstream in(dir.file("t.acts"));
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    REQUIRE(j.contains("a"));
    CHECK(j["a"].contains("local"));
    CHECK(j["a"].contains("positive"));
    const double total = j["t"].get<double>();
    const double resummed =
        j["a"]["local"].get<double>() + j["a"]["positive"].get<double>();
    CHECK(total == resummed);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("score: invalid traces write nothing and exit 1") {
  TempDir dir("score_bad");
  write_file(dir.file("bad.aclt"),
             kConstantTrace + "{\"e\":0,\"s\":\"s1\",\"c\":\"loss\",\"l\":9}\n");
  const RunResult result = run_cli("score " + dir.file("bad.aclt") + " -o " +
                                   dir.file("bad.acts"));
  CHECK(result.exit_code == 1);
  CHECK(result.out.find("duplicate") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.file("bad.acts")));

  const RunResult coverage =
      run_cli("score " + dir.file("bad.aclt") + " --coverage full -o " +
              dir.file("bad2.acts"));
  CHECK(coverage.exit_code == 1);

  const RunResult missing = run_cli("score " + dir.file("none.aclt") + " -o " +
                                    dir.file("x.acts"));
  CHECK(missing.exit_code == 2);
}

TEST_CASE("rank: ordering, k overflow, captions") {
  TempDir dir("rank");
  write_file(dir.file("t.acts"),
             "{\"h\":1,\"policy\":\"sum\",\"coverage\":\"allow\",\"components\":[\"loss\"]}\n"
             "{\"s\":\"a\",\"a\":{\"loss\":0.073},\"t\":0.073,\"n\":1}\n"
             "{\"s\":\"b\",\"a\":{\"loss\":1015.903},\"t\":1015.903,\"n\":1}\n"
             "{\"s\":\"c\",\"a\":{\"loss\":2.5},\"t\":2.5,\"n\":1}\n");
  write_file(dir.file("l.aclm"),
             "{\"s\":\"a\",\"y\":\"Horse\"}\n"
             "{\"s\":\"b\",\"y\":\"Dog\"}\n"
             "{\"s\":\"c\",\"y\":\"Cat\"}\n");

  const RunResult hardest = run_cli("rank " + dir.file("t.acts") +
                                    " --labels " + dir.file("l.aclm") + " -k 2");
  CHECK(hardest.exit_code == 0);
  CHECK(hardest.out.find("Dog 1015.9") != std::string::npos);
  CHECK(hardest.out.find("\"rank\":1,\"s\":\"b\"") != std::string::npos);
  CHECK(hardest.out.find("\"rank\":2,\"s\":\"c\"") != std::string::npos);
  CHECK(hardest.out.find("\"s\":\"a\"") == std::string::npos);

  const RunResult easiest =
      run_cli("rank " + dir.file("t.acts") + " --labels " + dir.file("l.aclm") +
              " --direction easiest -k 100");
  CHECK(easiest.exit_code == 0);
  CHECK(easiest.out.find("Horse 0.1") != std::string::npos);  // 0.073 at 1dp
  CHECK(easiest.out.find("\"rank\":3,\"s\":\"b\"") != std::string::npos);

  const RunResult unknown =
      run_cli("rank " + dir.file("t.acts") + " --component negative");
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.out.find("available") != std::string::npos);
}

TEST_CASE("report: balanced classes split the expected count evenly") {
  TempDir dir("report");
  std::string table =
      "{\"h\":1,\"policy\":\"sum\",\"coverage\":\"allow\",\"components\":[\"loss\"]}\n";
  std::string labels;
  for (int i = 0; i < 8; ++i) {
    const std::string id = "s" + std::to_string(i);
    table += "{\"s\":\"" + id + "\",\"a\":{\"loss\":" + std::to_string(i) +
             "},\"t\":" + std::to_string(i) + ",\"n\":1}\n";
    labels += "{\"s\":\"" + id + "\",\"y\":\"" +
              (i % 2 == 0 ? "even" : "odd") + "\"}\n";
  }
  write_file(dir.file("t.acts"), table);
  write_file(dir.file("l.aclm"), labels);

  const RunResult result = run_cli("report " + dir.file("t.acts") +
                                   " --labels " + dir.file("l.aclm") + " -k 4");
  CHECK(result.exit_code == 0);
  // expected = k * m / N = 4 * 4 / 8 = 2 for both classes.
  CHECK(result.out.find("\"y\":\"even\",\"m\":4,\"k_obs\":2,\"expected\":2") !=
        std::string::npos);
  CHECK(result.out.find("\"y\":\"odd\",\"m\":4,\"k_obs\":2,\"expected\":2") !=
        std::string::npos);
  CHECK(result.out.find("class stats by total") != std::string::npos);
}

TEST_CASE("report: one class filling the extremes is maximally enriched") {
  TempDir dir("report_extreme");
  std::string table =
      "{\"h\":1,\"policy\":\"sum\",\"coverage\":\"allow\",\"components\":[\"loss\"]}\n";
  std::string labels;
  // Class "x" holds the 2 hardest of 4; ratio caps at N/m = 2.
  const char* ids[] = {"a", "b", "c", "d"};
  const double actions[] = {9.0, 8.0, 1.0, 2.0};
  const char* classes[] = {"x", "x", "y", "y"};
  for (int i = 0; i < 4; ++i) {
    table += "{\"s\":\"" + std::string(ids[i]) +
             "\",\"a\":{\"loss\":" + std::to_string(actions[i]) +
             "},\"t\":" + std::to_string(actions[i]) + ",\"n\":1}\n";
    labels += "{\"s\":\"" + std::string(ids[i]) + "\",\"y\":\"" + classes[i] +
              "\"}\n";
  }
  write_file(dir.file("t.acts"), table);
  write_file(dir.file("l.aclm"), labels);

  const RunResult result = run_cli("report " + dir.file("t.acts") +
                                   " --labels " + dir.file("l.aclm") + " -k 2");
  CHECK(result.exit_code == 0);
  // Shared worked example: p = 1/6 for the filled class, hardest direction.
  const auto pos = result.out.find(
      "\"direction\":\"hardest\",\"k\":2,\"population\":4,\"y\":\"x\",\"m\":2,"
      "\"k_obs\":2,\"expected\":1,\"ratio\":2,\"p\":0.1666666666666666");
  CHECK(pos != std::string::npos);
}

TEST_CASE("gallery: two full rows, truncation warning, asset passthrough") {
  TempDir dir("gallery");
  std::string table =
      "{\"h\":1,\"policy\":\"sum\",\"coverage\":\"allow\",\"components\":[\"loss\"]}\n";
  std::string labels;
  for (int i = 0; i < 14; ++i) {
    const std::string id = std::string("s") + (i < 10 ? "0" : "") + std::to_string(i);
    table += "{\"s\":\"" + id + "\",\"a\":{\"loss\":" + std::to_string(i) +
             "},\"t\":" + std::to_string(i) + ",\"n\":1}\n";
    labels += "{\"s\":\"" + id + "\",\"y\":\"c\",\"asset\":\"img/" + id +
              ".png\"}\n";
  }
  write_file(dir.file("t.acts"), table);
  write_file(dir.file("l.aclm"), labels);

  const RunResult full = run_cli("gallery " + dir.file("t.acts") +
                                 " --labels " + dir.file("l.aclm") + " -k 7");
  CHECK(full.exit_code == 0);
  int hardest_rows = 0, easiest_rows = 0;
  std::istringstream lines(full.out);
  for (std::string line; std::getline(lines, line);) {
    if (line.find("\"row\":\"hardest\"") != std::string::npos) ++hardest_rows;
    if (line.find("\"row\":\"easiest\"") != std::string::npos) ++easiest_rows;
  }
  CHECK(hardest_rows == 7);
  CHECK(easiest_rows == 7);
  CHECK(full.out.find("\"asset\":\"img/s13.png\"") != std::string::npos);
  CHECK(full.out.find("warning") == std::string::npos);

  // 10 samples, k=7: hardest row 7, easiest row 3, warning emitted.
  std::string small_table =
      "{\"h\":1,\"policy\":\"sum\",\"coverage\":\"allow\",\"components\":[\"loss\"]}\n";
  for (int i = 0; i < 10; ++i) {
    const std::string id = std::string("s") + (i < 10 ? "0" : "") + std::to_string(i);
    small_table += "{\"s\":\"" + id + "\",\"a\":{\"loss\":" + std::to_string(i) +
                   "},\"t\":" + std::to_string(i) + ",\"n\":1}\n";
  }
  write_file(dir.file("small.acts"), small_table);
  const RunResult small =
      run_cli("gallery " + dir.file("small.acts") + " -k 7 -o " +
              dir.file("m.jsonl"));
  CHECK(small.exit_code == 0);
  CHECK(small.out.find("warning") != std::string::npos);
  const std::string manifest = read_file(dir.file("m.jsonl"));
  int hardest_count = 0, easiest_count = 0;
  std::istringstream manifest_lines(manifest);
  for (std::string line; std::getline(manifest_lines, line);) {
    const auto j = nlohmann::json::parse(line);
    if (j["row"] == "hardest") ++hardest_count;
    if (j["row"] == "easiest") {
      ++easiest_count;
      CHECK(j["asset"] == "");  // no label map given
    }
  }
  CHECK(hardest_count == 7);
  CHECK(easiest_count == 3);
}

TEST_CASE("demo: pipeline files, determinism, noise enrichment") {
  TempDir dir("demo");
  // Small multitask run keeps this test quick.
  const std::string out_a = dir.file("a");
  const std::string out_b = dir.file("b");
  const RunResult a =
      run_cli("demo --preset multitask --seed 5 -o " + out_a);
  CHECK(a.exit_code == 0);
  const RunResult b =
      run_cli("demo --preset multitask --seed 5 -o " + out_b);
  CHECK(b.exit_code == 0);

  const std::vector<std::string> files = {
      "trace.aclt",        "labels.aclm",     "noise_flagged.txt",
      "table.acts",        "rank_hardest.txt", "rank_easiest.txt",
      "report_classes.txt", "report_noise.txt"};
  for (const auto& name : files) {
    CAPTURE(name);
    REQUIRE(fs::exists(fs::path(out_a) / name));
    CHECK(read_file((fs::path(out_a) / name).string()) ==
          read_file((fs::path(out_b) / name).string()));
  }

  const RunResult validated =
      run_cli("validate " + (fs::path(out_a) / "trace.aclt").string());
  CHECK(validated.exit_code == 0);

  // Multitask trace carries both components and their totals add up.
  const RunResult scored =
      run_cli("score " + (fs::path(out_a) / "trace.aclt").string() +
              " --coverage full -o " + dir.file("rescored.acts"));
  CHECK(scored.exit_code == 0);

  // Noise-flagged pseudo-label dominates the hardest extreme.
  const std::string noise_report =
      read_file((fs::path(out_a) / "report_noise.txt").string());
  const auto hardest_pos = noise_report.find("enrichment (hardest");
  REQUIRE(hardest_pos != std::string::npos);
  const auto easiest_pos = noise_report.find("enrichment (easiest");
  const std::string hardest_block =
      noise_report.substr(hardest_pos, easiest_pos - hardest_pos);
  // "noisy" row: ratio printed above 1 means over-representation.
  const auto noisy_pos = hardest_block.find("\nnoisy");
  REQUIRE(noisy_pos != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("unknown_subcommand").exit_code == 2);
  CHECK(run_cli("rank").exit_code == 2);                 // missing table
  CHECK(run_cli("score x.aclt").exit_code == 2);         // missing -o
  CHECK(run_cli("demo --preset nope -o /tmp/x").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}
