// Exercises the installed binary end to end: exit codes, file outputs and
// byte-level determinism. The binary path arrives via the DYNGAME_CLI
// environment variable set by CTest.

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* env = std::getenv("DYNGAME_CLI");
  REQUIRE(env != nullptr);
  return env;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dyngame_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("export-scenario and check") {
  TempDir tmp;
  const std::string cfg = tmp.file("platooning.json");
  REQUIRE(run("export-scenario --scenario platooning --out " + cfg) == 0);
  REQUIRE(fs::exists(cfg));
  REQUIRE(fs::exists(cfg + ".manifest.json"));

  SECTION("closed-loop assumptions hold on the platooning instance") {
    REQUIRE(run("check --config " + cfg + " --for cl") == 0);
  }
  SECTION("the open-loop H-matrix condition fails on the singular platooning A") {
    REQUIRE(run("check --config " + cfg + " --for ol") == 2);
  }
  SECTION("malformed file exits with the parse code") {
    const std::string bad = tmp.file("bad.json");
    std::ofstream(bad) << "{ not json";
    REQUIRE(run("check --config " + bad) == 1);
  }
  SECTION("missing file exits with the parse code") {
    REQUIRE(run("check --config " + tmp.file("nope.json")) == 1);
  }
  SECTION("singular-A config fails the open-loop check") {
    const std::string cfg2 = tmp.file("singular.json");
    std::ofstream(cfg2) << R"({"A": [[0.0]], "B": [[[1.0]]], "Q": [[[1.0]]],
                              "R": [[[1.0]]], "T": 2})";
    REQUIRE(run("check --config " + cfg2 + " --for ol") == 2);
  }
  SECTION("exported scenario round-trips bit-identically") {
    const std::string cfg2 = tmp.file("again.json");
    REQUIRE(run("export-scenario --scenario platooning --out " + cfg2) == 0);
    REQUIRE(slurp(cfg) == slurp(cfg2));
  }
}

TEST_CASE("solver subcommands") {
  TempDir tmp;
  const std::string cfg = tmp.file("p.json");
  REQUIRE(run("export-scenario --scenario platooning --out " + cfg) == 0);

  SECTION("solve-ol writes the equilibrium JSON deterministically") {
    REQUIRE(run("solve-ol --config " + cfg + " --out " + tmp.file("ol1.json")) == 0);
    REQUIRE(run("solve-ol --config " + cfg + " --out " + tmp.file("ol2.json")) == 0);
    REQUIRE(slurp(tmp.file("ol1.json")) == slurp(tmp.file("ol2.json")));
  }
  SECTION("solve-cl runs both recursions") {
    REQUIRE(run("solve-cl --config " + cfg + " --method lyapunov --out " + tmp.file("cl1.json")) ==
            0);
    REQUIRE(run("solve-cl --config " + cfg + " --method riccati --out " + tmp.file("cl2.json")) ==
            0);
  }
  SECTION("terminal-set") {
    REQUIRE(run("terminal-set --config " + cfg + " --which ol --out " + tmp.file("ts.json")) == 0);
  }
  SECTION("solve-fh emits the input sequence") {
    const std::string x0 = "0,6,-4,3,-2.5,2,3,-2";
    REQUIRE(run("solve-fh --config " + cfg + " --x0 " + x0 + " --out " + tmp.file("fh.csv")) == 0);
    const std::string body = slurp(tmp.file("fh.csv"));
    REQUIRE(body.rfind("t,u_1_0,u_2_0,u_3_0,u_4_0", 0) == 0);
  }
  SECTION("x0 of the wrong size is a usage error") {
    REQUIRE(run("solve-fh --config " + cfg + " --x0 1,2,3 --out " + tmp.file("x.csv")) == 1);
  }
  SECTION("missing required flag is a usage error") {
    REQUIRE(run("solve-ol") == 1);
  }
  SECTION("infeasible horizon problem exits with the infeasibility code") {
    const std::string cfg2 = tmp.file("infeasible.json");
    std::ofstream(cfg2) << R"({"A": [[1.0]], "B": [[[1.0]]], "Q": [[[1.0]]], "R": [[[1.0]]],
      "T": 1, "constraints": {"state": {"G": [[1.0]], "g": [0.5]},
      "input_boxes": [{"min": [-0.1], "max": [0.1]}]}})";
    REQUIRE(run("solve-fh --config " + cfg2 + " --x0 2 --kind none --out " + tmp.file("i.csv")) ==
            4);
  }
  SECTION("power-system template exports and loads back") {
    const std::string cfg3 = tmp.file("power.json");
    REQUIRE(run("export-scenario --scenario power-system-template --out " + cfg3) == 0);
    REQUIRE(run("check --config " + cfg3 + " --for cl") == 0);
  }
}

TEST_CASE("simulate and reproduce are byte-identical across reruns") {
  TempDir tmp;
  const std::string cfg = tmp.file("p.json");
  REQUIRE(run("export-scenario --scenario platooning --out " + cfg) == 0);
  const std::string x0 = "0,6,-4,3,-2.5,2,3,-2";

  SECTION("simulate") {
    REQUIRE(run("simulate --config " + cfg + " --x0 " + x0 + " --steps 40 --out " +
                tmp.file("t1.csv")) == 0);
    REQUIRE(run("simulate --config " + cfg + " --x0 " + x0 + " --steps 40 --out " +
                tmp.file("t2.csv")) == 0);
    REQUIRE(slurp(tmp.file("t1.csv")) == slurp(tmp.file("t2.csv")));
    const std::string head = slurp(tmp.file("t1.csv")).substr(0, 200);
    REQUIRE(head.rfind("t,x_0,x_1,x_2,x_3,x_4,x_5,x_6,x_7,u_1_0,u_2_0,u_3_0,u_4_0,"
                       "cost_1,cost_2,cost_3,cost_4,term_dist,vi_iters,vi_residual",
                       0) == 0);
  }
  SECTION("reproduce platooning emits the bundle") {
    REQUIRE(run("reproduce platooning --outdir " + tmp.file("plat")) == 0);
    for (const char* name :
         {"trajectory.csv", "positions.csv", "velocities.csv", "terminal_distance.csv",
          "trajectory.csv.manifest.json"})
      REQUIRE(fs::exists(tmp.path / "plat" / name));
  }
  SECTION("reproduce perturbation with a seed") {
    REQUIRE(run("reproduce perturbation --seed 7 --outdir " + tmp.file("r1")) == 0);
    REQUIRE(run("reproduce perturbation --seed 7 --outdir " + tmp.file("r2")) == 0);
    REQUIRE(slurp(tmp.file("r1") + "/perturbation.csv") ==
            slurp(tmp.file("r2") + "/perturbation.csv"));
  }
  SECTION("unknown figure name is a usage error") {
    REQUIRE(run("reproduce nosuchfigure --outdir " + tmp.file("r3")) == 1);
  }
}
