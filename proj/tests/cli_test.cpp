// Drives the installed command line binary end to end through std::system:
// generation, single solves, the bench grid, rank sweeps, distributions, and
// every documented exit code.  argv[1] is the path to the binary under test.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "demqubo/io.hpp"
#include "demqubo/qubo.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  if (!ok) ++failures;
}

std::string g_bin;
fs::path g_dir;

// Runs the binary with the given arguments, returns the exit status.
// stdout/stderr land in out.txt / err.txt under the scratch dir.
int run(const std::string& args) {
  const std::string cmd = g_bin + " " + args + " > " +
                          (g_dir / "out.txt").string() + " 2> " +
                          (g_dir / "err.txt").string();
  const int rc = std::system(cmd.c_str());
  if (rc == -1 || !WIFEXITED(rc)) return -1;
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

nlohmann::json json_no_time(const fs::path& p) {
  auto j = nlohmann::json::parse(slurp(p));
  j.erase("time_s");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <path-to-binary>\n", argv[0]);
    return 64;
  }
  g_bin = argv[1];
  g_dir = fs::temp_directory_path() / "demqubo-cli-test";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  const std::string inst = (g_dir / "inst.json").string();

  // --- usage surface ---------------------------------------------------
  check(run("--help") == 0, "--help exits 0");
  check(run("") == 2, "missing subcommand exits 2");
  check(run("gen --type random") == 2, "gen without --n exits 2");

  // --- gen -------------------------------------------------------------
  check(run("gen --type random --n 8 --seed 5 --out " + inst) == 0,
        "gen random writes an instance");
  {
    const auto q = demqubo::read_instance(inst);
    check(q.Q.rows() == 8 && q.convention == demqubo::Convention::PlusMinusOne,
          "generated instance reads back with n=8, +/-1 convention");
    check((q.Q - q.Q.transpose()).norm() == 0.0, "generated matrix symmetric");
  }
  {
    const std::string part = (g_dir / "part.json").string();
    check(run("gen --type subset-sum --weights 1,2,3 --name part3 --out " +
              part) == 0,
          "gen subset-sum succeeds");
    const auto q = demqubo::read_instance(part);
    Eigen::VectorXd w(3);
    w << 1, 2, 3;
    check(q.name == "part3" && (q.Q - w * w.transpose()).norm() == 0.0,
          "subset-sum instance is w w^T with the requested name");
  }
  {
    std::ofstream edges(g_dir / "tri.txt");
    edges << "3 3\n0 1 1.0\n1 2 1.0\n0 2 1.0\n";
    edges.close();
    const std::string cut = (g_dir / "cut.json").string();
    check(run("gen --type maxcut --edges " + (g_dir / "tri.txt").string() +
              " --out " + cut) == 0,
          "gen maxcut from an edge list succeeds");
    const auto q = demqubo::read_instance(cut);
    check(q.Q(0, 1) == 0.25 && q.metadata.count("objective_offset") == 1,
          "maxcut instance carries quarter weights and the cut offset");
  }

  // --- solve -----------------------------------------------------------
  const std::string rep1 = (g_dir / "rep1.json").string();
  const std::string rep2 = (g_dir / "rep2.json").string();
  const std::string trace = (g_dir / "trace.txt").string();
  check(run("solve --instance " + inst + " --method sa --seed 3 --out " +
            rep1 + " --trace-out " + trace) == 0,
        "solve sa succeeds");
  {
    const auto j = nlohmann::json::parse(slurp(rep1));
    const std::string sol = j["solution"];
    check(j["method"] == "sa" && j["n"] == 8 && sol.size() == 8 &&
              sol.find_first_not_of("+-") == std::string::npos,
          "solve report carries method, n, and a +/- solution string");
    check(j["best"].is_number() && j["expected"].is_null(),
          "sa report has a numeric best and no rounding expectation");
  }
  check(line_count(trace) > 0, "solve writes a non-empty trace");
  {
    std::ifstream in(trace);
    std::string line;
    std::getline(in, line);
    std::istringstream is(line);
    std::string a, b, c, d, extra;
    check(static_cast<bool>(is >> a >> b >> c >> d) && !(is >> extra),
          "trace lines have four columns");
  }
  check(run("solve --instance " + inst + " --method sa --seed 3 --out " +
            rep2) == 0 &&
            json_no_time(rep1) == json_no_time(rep2),
        "repeated solves are identical apart from wall time");
  {
    const std::string rep = (g_dir / "dem.json").string();
    check(run("solve --instance " + inst +
              " --method dem-rc --rank 3 --steps 50 --rounds 16 --out " +
              rep) == 0,
          "solve dem-rc succeeds");
    const auto j = nlohmann::json::parse(slurp(rep));
    check(j["expected"].is_number() && j["params"]["rank"] == "3",
          "dem-rc report echoes the rank and a rounding expectation");
  }

  // --- documented exit codes -------------------------------------------
  check(run("solve --instance " + inst + " --method nope") == 2,
        "unknown method exits 2");
  check(slurp(g_dir / "err.txt").rfind("error:", 0) == 0,
        "unknown method reports on stderr");
  check(run("solve --instance " + (g_dir / "missing.json").string() +
            " --method sa") == 3,
        "missing instance exits 3");
  check(run("solve --instance " + inst + " --method dem-rc --rank 50") == 2,
        "rank above n exits 2");
  check(run("solve --instance " + inst +
            " --method dem-exact --param socp-iters=1") == 4,
        "starved direction subproblem exits 4");

  // --- bench -----------------------------------------------------------
  const fs::path bench_out = g_dir / "bench-out";
  {
    std::ofstream cfg(g_dir / "bench.cfg");
    cfg << "gen = random:8:1\n"
        << "methods = sa, dem-rc\n"
        << "seeds = 0, 1\n"
        << "sa.steps = 60\n"
        << "dem-rc.rank = 3\n"
        << "dem-rc.steps = 50\n"
        << "dem-rc.rounds = 16\n"
        << "out = " << bench_out.string() << "\n";
  }
  check(run("bench --config " + (g_dir / "bench.cfg").string()) == 0,
        "bench grid succeeds");
  {
    std::ifstream in(bench_out / "results.csv");
    std::string header;
    std::getline(in, header);
    check(header ==
              "instance,method,kind,seed,best,expected,time_s,median,gap,note",
          "results.csv header matches the documented schema");
  }
  check(line_count(bench_out / "results.csv") == 7,
        "results.csv has 4 run rows plus 2 aggregate rows");
  check(line_count(bench_out / "reports.jsonl") == 4,
        "reports.jsonl has one object per run");
  check(fs::exists(bench_out / "traces") &&
            !fs::is_empty(bench_out / "traces"),
        "bench writes trace files");
  check(run("bench --config " + (g_dir / "nope.cfg").string()) == 3,
        "missing config exits 3");
  {
    std::ofstream cfg(g_dir / "bad.cfg");
    cfg << "gen = random:6:1\nmethods = wat\n";
  }
  check(run("bench --config " + (g_dir / "bad.cfg").string()) == 2,
        "unknown method in config exits 2");

  // --- rank-sweep and distribution ---------------------------------------
  const std::string sweep_csv = (g_dir / "sweep.csv").string();
  check(run("rank-sweep --instance " + inst +
            " --ranks 2,3 --methods dem-rc --param steps=40"
            " --param rounds=8 --out " +
            sweep_csv) == 0,
        "rank-sweep succeeds");
  {
    std::ifstream in(sweep_csv);
    std::string header, r1, r2;
    std::getline(in, header);
    std::getline(in, r1);
    std::getline(in, r2);
    check(header == "rank,method,phi,best" && r1.rfind("2,dem-rc,", 0) == 0 &&
              r2.rfind("3,dem-rc,", 0) == 0,
          "rank-sweep CSV lists the requested ranks in order");
  }
  check(run("rank-sweep --instance " + inst + " --ranks 2 --methods sa") == 2,
        "rank-sweep rejects rank-free methods with exit 2");

  const std::string dist_csv = (g_dir / "dist.csv").string();
  check(run("distribution --instance " + inst +
            " --method dem-rc --trials 64 --param steps=40 --out " +
            dist_csv) == 0,
        "distribution succeeds");
  {
    const std::string text = slurp(dist_csv);
    std::istringstream in(text);
    std::string line;
    long long total = 0;
    bool in_bins = false;
    while (std::getline(in, line)) {
      if (line == "bin_lo,bin_hi,count") {
        in_bins = true;
        continue;
      }
      if (in_bins && !line.empty())
        total += std::stoll(line.substr(line.rfind(',') + 1));
    }
    check(text.rfind("# method = dem-rc", 0) == 0 &&
              text.find("# trials = 64\n") != std::string::npos &&
              total == 64,
          "distribution CSV echoes the setup and its bins sum to the trials");
  }
  check(run("distribution --instance " + inst + " --method sa") == 2,
        "distribution rejects non-factor methods with exit 2");

  if (failures == 0) fs::remove_all(g_dir);
  std::printf("cli_test: %d check(s) failed\n", failures);
  return failures;
}
