#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

const fs::path kBinary = SPECSCHED_BIN;
const fs::path kConfigs = SPECSCHED_CONFIGS;

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("specsched_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = kBinary.string() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("run on fig1 under FCFS") {
  Sandbox box;
  REQUIRE(run("run --trace builtin:fig1 --policy fcfs --out " + (box / "out").string(), box / "log") == 0);
  const auto csv = slurp(box / "out" / "report.csv");
  CHECK(csv.find("\nfcfs,1,0,3,600000,") != std::string::npos);
  CHECK(fs::exists(box / "out" / "report.json"));
}

TEST_CASE("run on fig1 with oracle estimates") {
  Sandbox box;
  const auto cfg = (kConfigs / "fig1-oracle.json").string();
  REQUIRE(run("run --trace builtin:fig1 --policy laps-sd --config " + cfg + " --out " +
                  (box / "out").string(),
              box / "log") == 0);
  CHECK(slurp(box / "out" / "report.csv").find(",500000,") != std::string::npos);
}

TEST_CASE("fig1 four-policy ordering") {
  Sandbox box;
  const auto cfg = (kConfigs / "fig1-oracle.json").string();
  REQUIRE(run("compare --trace builtin:fig1 --policies fcfs,lp-sjf,las,laps-sd --seeds 1 --config " +
                  cfg + " --out " + (box / "c").string(),
              box / "log") == 0);
  const auto csv = slurp(box / "c" / "compare_summary.csv");
  CHECK(csv.find("\nfcfs,600000,") != std::string::npos);
  CHECK(csv.find("\nlaps-sd,500000,") != std::string::npos);
  CHECK(csv.find("\nlas,566666.6666666666,") != std::string::npos);
  CHECK(csv.find("\nlp-sjf,700000,") != std::string::npos);
}

TEST_CASE("repeated runs write identical files") {
  Sandbox box;
  for (const char* out : {"a", "b"})
    REQUIRE(run("run --trace builtin:stabilizing-demo --policy laps-sd --seed 3 --out " +
                    (box / out).string(),
                box / "log") == 0);
  for (const char* f : {"report.csv", "report.json"})
    CHECK(slurp(box / "a" / f) == slurp(box / "b" / f));
}

TEST_CASE("usage errors exit with 2") {
  Sandbox box;
  CHECK(run("run --trace builtin:fig1 --policy srpt --out " + (box / "a").string(), box / "log") == 2);
  CHECK(slurp(box / "log").find("srpt") != std::string::npos);
  CHECK(run("run --trace builtin:nope --policy fcfs --out " + (box / "a").string(), box / "log") != 0);
  CHECK(run("frobnicate", box / "log") == 2);
  CHECK(run("generate --out " + (box / "t.jsonl").string() +
                " --set workload.acceptance_profile.stable_rate=[0.1,1.5]",
            box / "log") == 2);
  CHECK(slurp(box / "log").find("workload.acceptance_profile.stable_rate") != std::string::npos);
}

TEST_CASE("missing trace fields are reported") {
  Sandbox box;
  std::ofstream(box / "bad.jsonl") << "{\"id\": 1}\n";
  CHECK(run("run --trace " + (box / "bad.jsonl").string() + " --policy fcfs --out " +
                (box / "a").string(),
            box / "log") == 1);
  CHECK(slurp(box / "log").find("line 1") != std::string::npos);
}

TEST_CASE("generate, compare and sweep-k") {
  Sandbox box;
  const auto trace = (box / "t.jsonl").string();
  REQUIRE(run("generate --out " + trace, box / "log") == 0);
  CHECK(line_count(trace) == 50);

  REQUIRE(run("compare --trace " + trace + " --policies fcfs,lp-sjf,las,laps-sd --seeds 2 --out " +
                  (box / "c1").string(),
              box / "log") == 0);
  REQUIRE(run("compare --trace " + trace + " --policies fcfs,lp-sjf,las,laps-sd --seeds 2 --out " +
                  (box / "c2").string(),
              box / "log") == 0);
  CHECK(slurp(box / "c1" / "compare.csv") == slurp(box / "c2" / "compare.csv"));
  CHECK(slurp(box / "c1" / "compare.json") == slurp(box / "c2" / "compare.json"));
  CHECK(line_count(box / "c1" / "compare.csv") == 2 + 4 * 2);

  REQUIRE(run("sweep-k --trace " + trace + " --seeds 1 --out " + (box / "k").string(), box / "log") == 0);
  CHECK(line_count(box / "k" / "ksweep_summary.csv") == 2 + 9);

  REQUIRE(run("estimator --trace " + trace + " --out " + (box / "e").string(), box / "log") == 0);
  CHECK(line_count(box / "e" / "estimator.csv") == 2 + 50);
}
