// Exercises the installed binary end to end: exit codes, determinism,
// file outputs. Run from any directory; artifacts land in a scratch dir.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "[ok]   " << what << "\n";
  } else {
    std::cout << "[FAIL] " << what << "\n";
    ++failures;
  }
}

int run(const std::string& args) {
  const std::string cmd = std::string(PDELEARN_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "pdelearn_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return (dir / name).string(); };

  // generate: row count and byte determinism
  check(run("generate --out " + p("w1.csv") + " --n 300 --k-max 8") == 0, "generate succeeds");
  check(run("generate --out " + p("w2.csv") + " --n 300 --k-max 8") == 0, "generate again");
  {
    std::ifstream in(p("w1.csv"));
    std::string line;
    int rows = -1;  // header
    while (std::getline(in, line)) ++rows;
    check(rows == 300, "generate writes the requested row count");
  }
  check(slurp(p("w1.csv")) == slurp(p("w2.csv")), "generated CSVs are byte-identical");

  // config errors exit with 4
  check(run("generate --out " + p("bad.csv") + " --n 1") == 4, "n=1 exits with config code 4");

  // input errors exit with 2
  check(run("train --data " + p("w1.csv") + " --target missing --single --out " + p("m.json")) ==
            2,
        "missing target column exits with input code 2");
  check(run("train --data " + p("nofile.csv") + " --target y --single --out " + p("m.json")) == 2,
        "missing file exits with input code 2");

  // train single deterministically
  const std::string train_args =
      " --data " + p("w1.csv") +
      " --target y --single --lhs-order 2"
      " --term d2y/dx1 --term d2y/dx2 --term y --lambda 3e-3 --epochs 1 --seed 11";
  check(run("train" + train_args + " --out " + p("m1.json") + " --report " + p("r1.json")) == 0,
        "train --single succeeds");
  check(run("train" + train_args + " --out " + p("m2.json") + " --report " + p("r2.json")) == 0,
        "train --single again");
  check(slurp(p("m1.json")) == slurp(p("m2.json")), "model JSON is byte-identical across runs");
  check(slurp(p("r1.json")) == slurp(p("r2.json")), "report JSON is byte-identical across runs");

  // predict and discover run on the trained model
  check(run("predict --data " + p("w1.csv") + " --target y --model " + p("m1.json") +
            " --horizon 5 --anchor 250 --out " + p("pred.csv")) == 0,
        "predict succeeds");
  {
    std::ifstream in(p("pred.csv"));
    std::string header;
    std::getline(in, header);
    check(header == "time,prediction,truth,abs_error", "prediction CSV carries truth columns");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    check(rows == 5, "predict writes horizon rows");
  }
  check(run("discover --data " + p("w1.csv") + " --target y --model " + p("m1.json") +
            " --ascii --out " + p("eq.json")) == 0,
        "discover succeeds");
  check(slurp(p("eq.json")).find("d2y/dx") != std::string::npos,
        "equation document names the derivative terms");

  // eval on the test split
  check(run("eval --data " + p("w1.csv") + " --target y --model " + p("m1.json") +
            " --horizon 5 --stride 7 --report " + p("ev.json")) == 0,
        "eval succeeds");
  check(slurp(p("ev.json")).find("relative_mse") != std::string::npos,
        "eval report carries the metric");

  // eval without a model or --ablate is a config error
  check(run("eval --data " + p("w1.csv") + " --target y") == 4,
        "eval without model exits with config code 4");

  std::cout << (failures == 0 ? "ALL CLI CHECKS PASSED\n" : "CLI CHECKS FAILED\n");
  return failures == 0 ? 0 : 1;
}
