#pragma once

// Benchmark harness: a uniform "run method M on instance I with seed S"
// entry point plus the artifact writers used by the command line tool
// (results.csv, reports.jsonl, per-run trace files, rank sweeps and
// rounding-distribution histograms).
//
// Instances under the 0/1 convention are lifted to the +/-1 convention,
// solved there, and mapped back; reported values are always recomputed
// from the returned solution in the instance's own convention.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "demqubo/baselines.hpp"
#include "demqubo/dem.hpp"
#include "demqubo/expectation.hpp"
#include "demqubo/factor.hpp"
#include "demqubo/io.hpp"
#include "demqubo/qubo.hpp"
#include "demqubo/rng.hpp"
#include "demqubo/rounding.hpp"
#include "demqubo/trace.hpp"

namespace demqubo::bench {

// Malformed benchmark configuration (bad key, bad value, missing section).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Method name outside the supported set.
struct unknown_method_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {
      "dem-rc", "dem-exact", "sa", "tabu", "sb", "burer2", "gw-sdp-surrogate"};
  return names;
}

inline bool is_known_method(const std::string& m) {
  const auto& names = method_names();
  return std::find(names.begin(), names.end(), m) != names.end();
}

// Methods whose output includes a row-normalized factor matrix (and hence an
// expected rounded value and a rounding distribution).
inline bool is_factor_method(const std::string& m) {
  return m == "dem-rc" || m == "dem-exact" || m == "burer2" ||
         m == "gw-sdp-surrogate";
}

// Free-form per-method parameters as strings, e.g. {"rank": "8"}.
struct MethodParams {
  std::map<std::string, std::string> kv;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw config_error("bad numeric value for " + what + ": '" + s + "'");
  }
  if (pos != s.size())
    throw config_error("bad numeric value for " + what + ": '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw config_error("bad integer value for " + what + ": '" + s + "'");
  }
  if (pos != s.size())
    throw config_error("bad integer value for " + what + ": '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  const std::int64_t v = parse_int(s, what);
  if (v < 0) throw config_error(what + " must be >= 0, got '" + s + "'");
  return static_cast<std::uint64_t>(v);
}

// Reads typed values out of a MethodParams map, echoing every resolved
// parameter and rejecting keys the method does not understand.
class ParamReader {
 public:
  ParamReader(const MethodParams& mp, std::string method)
      : params_(mp), method_(std::move(method)) {
    for (const auto& [k, v] : params_.kv) remaining_.insert(k);
  }

  double get_double(const std::string& key, double dflt) {
    const auto it = params_.kv.find(key);
    double v = dflt;
    if (it != params_.kv.end()) {
      v = parse_double(it->second, method_ + "." + key);
      remaining_.erase(key);
    }
    echo_[key] = ::demqubo::detail::format_double(v);
    return v;
  }

  std::int64_t get_int(const std::string& key, std::int64_t dflt) {
    const auto it = params_.kv.find(key);
    std::int64_t v = dflt;
    if (it != params_.kv.end()) {
      v = parse_int(it->second, method_ + "." + key);
      remaining_.erase(key);
    }
    echo_[key] = std::to_string(v);
    return v;
  }

  bool get_bool(const std::string& key, bool dflt) {
    const auto it = params_.kv.find(key);
    bool v = dflt;
    if (it != params_.kv.end()) {
      const std::string& s = it->second;
      if (s == "1" || s == "true" || s == "yes" || s == "on")
        v = true;
      else if (s == "0" || s == "false" || s == "no" || s == "off")
        v = false;
      else
        throw config_error("bad boolean value for " + method_ + "." + key +
                           ": '" + s + "'");
      remaining_.erase(key);
    }
    echo_[key] = v ? "1" : "0";
    return v;
  }

  // Call after reading every parameter the method understands.
  void finish() const {
    if (remaining_.empty()) return;
    throw config_error("unknown parameter '" + *remaining_.begin() +
                       "' for method '" + method_ + "'");
  }

  const std::map<std::string, std::string>& echo() const { return echo_; }

 private:
  const MethodParams& params_;
  std::string method_;
  std::set<std::string> remaining_;
  std::map<std::string, std::string> echo_;
};

// Filesystem-safe label for artifact names.
inline std::string sanitize_label(const std::string& s) {
  std::string out = s.empty() ? std::string("unnamed") : s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) c = '-';
  }
  return out;
}

}  // namespace detail

// One solver invocation, reported in the instance's own convention.
struct RunReport {
  std::string method;
  std::string instance;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  double best = 0.0;                // objective recomputed from x
  std::optional<double> expected;   // E[rounded value] for factor methods
  std::optional<double> relaxation; // gw-sdp-surrogate lower-bound estimate
  double time_s = 0.0;              // wall time around the solver call only
  Eigen::VectorXd x;                // solution in the instance's convention
  std::string solution;             // "+-" or "01" rendering of x
  Trace trace;
  std::optional<FactorMatrix> F;    // factor in the +/-1 space, if any
  std::map<std::string, std::string> params;  // resolved parameter echo
};

inline std::string solution_string(Convention c, const Eigen::VectorXd& x) {
  std::string s;
  s.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (c == Convention::PlusMinusOne)
      s += x[i] > 0.0 ? '+' : '-';
    else
      s += x[i] > 0.5 ? '1' : '0';
  }
  return s;
}

// Runs one method on one instance.  `seed` controls every random choice the
// run makes; parameter keys shared across methods: rank, steps, rounds, eta,
// eps, tol (see the dispatch below for the per-method meaning).
inline RunReport run_method(const QuboInstance& inst, const std::string& method,
                            const MethodParams& mp, std::uint64_t seed) {
  validate(inst);
  const bool lifted = inst.convention == Convention::ZeroOne;
  const QuboInstance work = lifted ? to_plus_minus_one(inst) : inst;
  const Eigen::Index nw = work.n();

  RunReport rep;
  rep.method = method;
  rep.instance = inst.name;
  rep.n = inst.n();
  rep.seed = seed;

  detail::ParamReader pr(mp, method);
  SignVector z;  // solution in the +/-1 space

  if (method == "dem-rc") {
    DemRcParams p;
    p.rank = static_cast<Eigen::Index>(
        pr.get_int("rank", std::min<Eigen::Index>(10, nw)));
    p.steps = static_cast<int>(pr.get_int("steps", 500));
    p.rounds = static_cast<int>(pr.get_int("rounds", 100));
    p.eta = pr.get_double("eta", 0.01);
    p.eps_clip = pr.get_double("eps", 0.05);
    p.seed = seed;
    pr.finish();
    const ::demqubo::detail::Stopwatch clock;
    DemRcResult r = dem_rc(work, p);
    rep.time_s = clock.seconds();
    z = r.rounding.best_x;
    rep.trace = std::move(r.trace);
    rep.F = std::move(r.F);
  } else if (method == "dem-exact") {
    const auto rank = static_cast<Eigen::Index>(
        pr.get_int("rank", std::min<Eigen::Index>(10, nw)));
    ExactDemParams p;
    p.eta = pr.get_double("eta", 0.2);
    p.tol = pr.get_double("tol", 1e-6);
    p.max_iter = static_cast<int>(pr.get_int("steps", 100));
    p.eps_boundary = pr.get_double("eps", 1e-7);
    p.backtracking = pr.get_bool("backtracking", true);
    p.socp.max_iter = static_cast<int>(pr.get_int("socp-iters", 20000));
    p.socp.tol = pr.get_double("socp-tol", 1e-5);
    p.seed = seed;
    const auto rounds = static_cast<int>(pr.get_int("rounds", 100));
    pr.finish();
    const ::demqubo::detail::Stopwatch clock;
    const FactorMatrix F0 = random_factor(nw, rank, rng::derive_seed(seed, 2));
    ExactDemResult r = exact_dem(work, F0, p);
    const RoundingResult round =
        gw_round(work, r.F, rounds, rng::derive_seed(seed, 1));
    rep.time_s = clock.seconds();
    z = round.best_x;
    rep.trace = std::move(r.trace);
    rep.F = std::move(r.F);
  } else if (method == "sa") {
    SaParams p;
    p.sweeps = static_cast<int>(pr.get_int("steps", 1000));
    p.t0 = pr.get_double("t0", 0.0);
    p.alpha = pr.get_double("alpha", 0.0);
    p.seed = seed;
    pr.finish();
    const ::demqubo::detail::Stopwatch clock;
    SolverResult r = simulated_annealing(work, p);
    rep.time_s = clock.seconds();
    z = r.x;
    rep.trace = std::move(r.trace);
  } else if (method == "tabu") {
    TabuParams p;
    p.iterations = static_cast<int>(pr.get_int("steps", 2000));
    p.tenure = static_cast<int>(pr.get_int("tenure", 10));
    p.seed = seed;
    pr.finish();
    const ::demqubo::detail::Stopwatch clock;
    TabuResult r = tabu_search(work, p);
    rep.time_s = clock.seconds();
    z = r.x;
    rep.trace = std::move(r.trace);
  } else if (method == "sb") {
    SbParams p;
    p.steps = static_cast<int>(pr.get_int("steps", 2000));
    p.lambda = pr.get_double("lambda", 1.0);
    p.gamma = pr.get_double("gamma", 0.1);
    p.dt = pr.get_double("dt", 0.0);
    p.mu_start =
        pr.get_double("mu-start", std::numeric_limits<double>::quiet_NaN());
    p.mu_end =
        pr.get_double("mu-end", std::numeric_limits<double>::quiet_NaN());
    p.seed = seed;
    pr.finish();
    const ::demqubo::detail::Stopwatch clock;
    SolverResult r = simulated_bifurcation(work, p);
    rep.time_s = clock.seconds();
    z = r.x;
    rep.trace = std::move(r.trace);
  } else if (method == "burer2") {
    Burer2Params p;
    p.restarts = static_cast<int>(pr.get_int("restarts", 10));
    p.max_iters = static_cast<int>(pr.get_int("steps", 500));
    p.grad_tol = pr.get_double("tol", 1e-8);
    p.seed = seed;
    pr.finish();
    const ::demqubo::detail::Stopwatch clock;
    Burer2Result r = burer2(work, p);
    rep.time_s = clock.seconds();
    z = r.x;
    rep.trace = std::move(r.trace);
    rep.F = std::move(r.F);
  } else if (method == "gw-sdp-surrogate") {
    GwSurrogateParams p;
    p.rank = static_cast<Eigen::Index>(pr.get_int("rank", 0));  // 0: auto
    p.steps = static_cast<int>(pr.get_int("steps", 500));
    p.trials = static_cast<int>(pr.get_int("rounds", 100));
    p.seed = seed;
    pr.finish();
    const ::demqubo::detail::Stopwatch clock;
    GwSurrogateResult r = gw_sdp_surrogate(work, p);
    rep.time_s = clock.seconds();
    z = r.rounding.best_x;
    rep.trace = std::move(r.trace);
    rep.F = std::move(r.F);
    rep.relaxation = r.relaxation_value;
  } else {
    throw unknown_method_error("unknown method '" + method + "'");
  }

  rep.x = lifted ? zero_one_solution(z) : Eigen::VectorXd(z);
  rep.best = objective(inst, rep.x);
  if (rep.F) rep.expected = expected_value(work, *rep.F);
  rep.solution = solution_string(inst.convention, rep.x);
  rep.params = pr.echo();
  return rep;
}

// One JSON object per run.  `include_time` exists so byte-level comparisons
// can ignore wall time.
inline nlohmann::ordered_json report_json(const RunReport& r,
                                          bool include_time = true) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["instance"] = r.instance;
  j["n"] = static_cast<std::int64_t>(r.n);
  j["seed"] = r.seed;
  j["best"] = r.best;
  if (r.expected)
    j["expected"] = *r.expected;
  else
    j["expected"] = nullptr;
  if (r.relaxation) j["relaxation"] = *r.relaxation;
  if (include_time) j["time_s"] = r.time_s;
  j["params"] = r.params;
  j["solution"] = r.solution;
  return j;
}

// ---------------------------------------------------------------------------
// results.csv
// ---------------------------------------------------------------------------

// kind == "run": one solver invocation; "agg": min/median over the seeds of
// one (instance, method) pair; "error": a run that threw.
struct BenchRow {
  std::string instance, method, kind;
  std::optional<std::int64_t> seed;
  std::optional<double> best, expected, time_s, median, gap;
  std::string note;
};

inline std::string csv_header() {
  return "instance,method,kind,seed,best,expected,time_s,median,gap,note";
}

inline std::string csv_line(const BenchRow& r) {
  const auto num = [](const std::optional<double>& v) {
    return v ? ::demqubo::detail::format_double(*v) : std::string();
  };
  std::string note = r.note;
  for (char& c : note)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  std::string line;
  line += r.instance + "," + r.method + "," + r.kind + ",";
  line += (r.seed ? std::to_string(*r.seed) : std::string()) + ",";
  line += num(r.best) + "," + num(r.expected) + "," + num(r.time_s) + ",";
  line += num(r.median) + "," + num(r.gap) + "," + note;
  return line;
}

inline BenchRow parse_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  if (fields.size() != 10)
    throw config_error("results row has " + std::to_string(fields.size()) +
                       " fields, expected 10: '" + line + "'");
  const auto opt_num = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return detail::parse_double(s, "results field");
  };
  BenchRow r;
  r.instance = fields[0];
  r.method = fields[1];
  r.kind = fields[2];
  if (!fields[3].empty())
    r.seed = detail::parse_int(fields[3], "results seed");
  r.best = opt_num(fields[4]);
  r.expected = opt_num(fields[5]);
  r.time_s = opt_num(fields[6]);
  r.median = opt_num(fields[7]);
  r.gap = opt_num(fields[8]);
  r.note = fields[9];
  return r;
}

inline std::vector<BenchRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw config_error("results file is empty");
  if (line != csv_header())
    throw config_error("unexpected results header: '" + line + "'");
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    rows.push_back(parse_csv_row(line));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Benchmark configuration
// ---------------------------------------------------------------------------

struct GenSpec {
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
};

// Parsed from a flat "key = value" file; see parse_config for the grammar.
struct BenchConfig {
  std::vector<std::string> instance_paths;
  std::vector<GenSpec> gens;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds = {0};
  std::string out = "bench-out";
  bool gap_auto = true;  // brute-force reference gaps when n <= 20
  std::int64_t rounds = -1;  // >= 0 overrides the rounding-trial default
  std::map<std::string, MethodParams> method_params;
};

// Grammar, one statement per line ('#' lines and blank lines are skipped):
//   instances = a.qubo, b.qubo        paths to instance files
//   gen       = random:<n>:<seed>     generated dense Gaussian instances
//   methods   = dem-rc, sa            methods to run (required)
//   seeds     = 1, 2, 3               per-run seeds (default: 0)
//   out       = results-dir           artifact directory (default: bench-out)
//   gap       = auto | off            brute-force gap column (default: auto)
//   rounds    = 200                   rounding trials for factor methods
//   dem-rc.rank = 8                   any <method>.<param> override
// Later assignments append to list keys and overwrite scalar keys.
inline BenchConfig parse_config(std::istream& in) {
  BenchConfig cfg;
  std::vector<std::uint64_t> seeds;
  std::string line;
  int lineno = 0;
  const auto fail = [&](const std::string& msg) {
    throw config_error("config line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");

    if (const auto dot = key.find('.'); dot != std::string::npos) {
      const std::string m = key.substr(0, dot);
      const std::string param = key.substr(dot + 1);
      if (!is_known_method(m)) fail("unknown method '" + m + "' in key");
      if (param.empty()) fail("empty parameter name in key '" + key + "'");
      cfg.method_params[m].kv[param] = val;
    } else if (key == "instances") {
      for (const auto& item : detail::split_list(val, ','))
        cfg.instance_paths.push_back(item);
    } else if (key == "gen") {
      for (const auto& item : detail::split_list(val, ',')) {
        const auto parts = detail::split_list(item, ':');
        if (parts.size() != 3 || parts[0] != "random")
          fail("expected random:<n>:<seed>, got '" + item + "'");
        GenSpec g;
        const std::int64_t n = detail::parse_int(parts[1], "gen n");
        if (n < 1) fail("gen n must be >= 1");
        g.n = static_cast<Eigen::Index>(n);
        g.seed = detail::parse_u64(parts[2], "gen seed");
        cfg.gens.push_back(g);
      }
    } else if (key == "methods") {
      for (const auto& item : detail::split_list(val, ',')) {
        if (!is_known_method(item))
          throw unknown_method_error("config line " + std::to_string(lineno) +
                                     ": unknown method '" + item + "'");
        cfg.methods.push_back(item);
      }
    } else if (key == "seeds") {
      for (const auto& item : detail::split_list(val, ','))
        seeds.push_back(detail::parse_u64(item, "seeds"));
    } else if (key == "out") {
      if (val.empty()) fail("out must not be empty");
      cfg.out = val;
    } else if (key == "gap") {
      if (val == "auto")
        cfg.gap_auto = true;
      else if (val == "off")
        cfg.gap_auto = false;
      else
        fail("gap must be auto or off, got '" + val + "'");
    } else if (key == "rounds") {
      cfg.rounds = detail::parse_int(val, "rounds");
      if (cfg.rounds < 0) fail("rounds must be >= 0");
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!seeds.empty()) cfg.seeds = std::move(seeds);
  if (cfg.methods.empty())
    throw config_error("config: 'methods' is required");
  if (cfg.instance_paths.empty() && cfg.gens.empty())
    throw config_error("config: need 'instances' or 'gen'");
  return cfg;
}

inline BenchConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Benchmark driver
// ---------------------------------------------------------------------------

struct BenchOutcome {
  std::vector<BenchRow> rows;  // in results.csv order
  int failures = 0;            // error rows written
  std::string results_csv_path, reports_jsonl_path;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace detail

// Runs the full (instance x method x seed) grid.  A run that throws becomes
// an "error" row and the grid keeps going.  Artifacts: results.csv,
// reports.jsonl (one JSON object per successful run) and
// traces/<instance>_<method>_s<seed>.txt (iteration, value, aux per line;
// wall times are deliberately left out of the trace files).
inline BenchOutcome run_bench(const BenchConfig& cfg,
                              std::ostream* log = nullptr) {
  namespace fs = std::filesystem;

  struct Loaded {
    std::string label;
    std::optional<QuboInstance> inst;
    std::string error;
  };
  std::vector<Loaded> loaded;
  for (const auto& path : cfg.instance_paths) {
    Loaded l;
    l.label = detail::sanitize_label(fs::path(path).stem().string());
    try {
      l.inst = read_instance(path);
    } catch (const std::exception& e) {
      l.error = e.what();
    }
    loaded.push_back(std::move(l));
  }
  for (const auto& g : cfg.gens) {
    Loaded l;
    l.inst = gen_random_gaussian(g.n, g.seed);
    l.label = detail::sanitize_label(l.inst->name);
    loaded.push_back(std::move(l));
  }

  const fs::path outdir(cfg.out);
  std::error_code ec;
  fs::create_directories(outdir / "traces", ec);
  if (ec)
    throw io_error("cannot create output directory: " + outdir.string());

  BenchOutcome out;
  out.results_csv_path = (outdir / "results.csv").string();
  out.reports_jsonl_path = (outdir / "reports.jsonl").string();
  std::ofstream csv(out.results_csv_path);
  if (!csv) throw io_error("cannot write " + out.results_csv_path);
  std::ofstream jsonl(out.reports_jsonl_path);
  if (!jsonl) throw io_error("cannot write " + out.reports_jsonl_path);
  csv << csv_header() << '\n';

  const auto emit = [&](BenchRow row) {
    csv << csv_line(row) << '\n';
    out.rows.push_back(std::move(row));
  };

  for (const auto& l : loaded) {
    if (!l.inst) {
      for (const auto& m : cfg.methods) {
        BenchRow row;
        row.instance = l.label;
        row.method = m;
        row.kind = "error";
        row.note = l.error;
        ++out.failures;
        if (log) *log << "error " << l.label << " " << m << ": " << l.error
                      << '\n';
        emit(std::move(row));
      }
      continue;
    }
    const QuboInstance& inst = *l.inst;
    const Eigen::Index lifted_n =
        inst.convention == Convention::ZeroOne ? inst.n() + 1 : inst.n();
    std::optional<double> opt;
    if (cfg.gap_auto && lifted_n <= 20) {
      const QuboInstance w = inst.convention == Convention::ZeroOne
                                 ? to_plus_minus_one(inst)
                                 : inst;
      opt = brute_force_min(w).first;
    }

    for (const auto& m : cfg.methods) {
      MethodParams mp;
      if (const auto it = cfg.method_params.find(m);
          it != cfg.method_params.end())
        mp = it->second;
      const bool takes_rounds =
          m == "dem-rc" || m == "dem-exact" || m == "gw-sdp-surrogate";
      if (cfg.rounds >= 0 && takes_rounds && !mp.kv.count("rounds"))
        mp.kv["rounds"] = std::to_string(cfg.rounds);

      std::vector<double> bests;
      for (const std::uint64_t s : cfg.seeds) {
        BenchRow row;
        row.instance = l.label;
        row.method = m;
        row.seed = static_cast<std::int64_t>(s);
        try {
          RunReport rep = run_method(inst, m, mp, s);
          rep.instance = l.label;  // canonical label across all artifacts
          row.kind = "run";
          row.best = rep.best;
          row.expected = rep.expected;
          row.time_s = rep.time_s;
          if (opt) row.gap = rep.best - *opt;
          bests.push_back(rep.best);
          jsonl << report_json(rep).dump() << '\n';
          const fs::path tpath = outdir / "traces" /
                                 (l.label + "_" + m + "_s" +
                                  std::to_string(s) + ".txt");
          std::ofstream tf(tpath);
          if (!tf) throw io_error("cannot write " + tpath.string());
          for (const auto& e : rep.trace)
            tf << e.iteration << ' '
               << ::demqubo::detail::format_double(e.value) << ' '
               << ::demqubo::detail::format_double(e.aux) << '\n';
          if (log)
            *log << "run " << l.label << " " << m << " seed " << s << ": "
                 << ::demqubo::detail::format_double(rep.best) << '\n';
        } catch (const std::exception& e) {
          row.kind = "error";
          row.note = e.what();
          ++out.failures;
          if (log)
            *log << "error " << l.label << " " << m << " seed " << s << ": "
                 << e.what() << '\n';
        }
        emit(std::move(row));
      }

      BenchRow agg;
      agg.instance = l.label;
      agg.method = m;
      agg.kind = "agg";
      if (!bests.empty()) {
        agg.best = *std::min_element(bests.begin(), bests.end());
        agg.median = detail::median_of(bests);
        if (opt) agg.gap = *agg.best - *opt;
      } else {
        agg.note = "no successful runs";
      }
      emit(std::move(agg));
    }
  }
  if (log)
    *log << "wrote " << out.results_csv_path << " ("
         << out.rows.size() << " rows, " << out.failures << " errors)\n";
  return out;
}

// ---------------------------------------------------------------------------
// Rank sweep
// ---------------------------------------------------------------------------

struct RankSweepRow {
  Eigen::Index rank = 0;
  std::string method;
  double phi = 0.0;   // expected rounded value at the final factor
  double best = 0.0;  // best rounded value
};

// Reruns rank-parameterized methods across `ranks` with a shared seed.
inline std::vector<RankSweepRow> rank_sweep(
    const QuboInstance& inst, const std::vector<Eigen::Index>& ranks,
    const std::vector<std::string>& methods, const MethodParams& base,
    std::uint64_t seed) {
  validate(inst);
  if (ranks.empty())
    throw std::invalid_argument("rank-sweep: need at least one rank");
  if (methods.empty())
    throw std::invalid_argument("rank-sweep: need at least one method");
  const Eigen::Index n_eff =
      inst.convention == Convention::ZeroOne ? inst.n() + 1 : inst.n();
  for (const Eigen::Index r : ranks)
    if (r < 1 || r > n_eff)
      throw std::invalid_argument("rank-sweep: rank " + std::to_string(r) +
                                  " outside [1, " + std::to_string(n_eff) +
                                  "]");
  for (const auto& m : methods) {
    if (!is_known_method(m)) throw unknown_method_error("unknown method '" + m + "'");
    if (!(m == "dem-rc" || m == "dem-exact" || m == "gw-sdp-surrogate"))
      throw std::invalid_argument("rank-sweep: method '" + m +
                                  "' has no rank parameter");
  }

  std::vector<RankSweepRow> rows;
  for (const Eigen::Index r : ranks)
    for (const auto& m : methods) {
      MethodParams mp = base;
      mp.kv["rank"] = std::to_string(r);
      const RunReport rep = run_method(inst, m, mp, seed);
      rows.push_back({r, m, *rep.expected, rep.best});
    }
  return rows;
}

inline void write_rank_sweep_csv(std::ostream& os,
                                 const std::vector<RankSweepRow>& rows) {
  os << "rank,method,phi,best\n";
  for (const auto& r : rows)
    os << r.rank << ',' << r.method << ','
       << ::demqubo::detail::format_double(r.phi) << ','
       << ::demqubo::detail::format_double(r.best) << '\n';
}

// ---------------------------------------------------------------------------
// Rounding distribution
// ---------------------------------------------------------------------------

struct DistributionBin {
  double lo = 0.0, hi = 0.0;
  std::int64_t count = 0;
};

struct DistributionSummary {
  std::string method, instance;
  int trials = 0;
  double mean = 0.0, stddev = 0.0, lo = 0.0, hi = 0.0;
  bool degenerate = false;  // all trials rounded to the same value
  double expected = 0.0;    // model prediction of the mean
  std::vector<DistributionBin> bins;
  std::vector<double> values;
};

// Runs a factor method once, then draws `trials` independent hyperplane
// roundings of its factor and histograms the values.
inline DistributionSummary rounding_distribution(const QuboInstance& inst,
                                                 const std::string& method,
                                                 const MethodParams& mp,
                                                 std::uint64_t seed,
                                                 int trials) {
  if (!is_known_method(method))
    throw unknown_method_error("unknown method '" + method + "'");
  if (!is_factor_method(method))
    throw std::invalid_argument("distribution: method '" + method +
                                "' does not produce a factor matrix");
  if (trials < 1)
    throw std::invalid_argument("distribution: trials must be >= 1");

  MethodParams mp2 = mp;
  if (method != "burer2") mp2.kv["rounds"] = "1";  // rounding is redone below
  const RunReport rep = run_method(inst, method, mp2, seed);

  const QuboInstance work = inst.convention == Convention::ZeroOne
                                ? to_plus_minus_one(inst)
                                : inst;
  const RoundingResult r =
      gw_round(work, *rep.F, trials, rng::derive_seed(seed, 1));

  DistributionSummary d;
  d.method = method;
  d.instance = inst.name;
  d.trials = trials;
  d.values = r.trial_values;
  d.expected = *rep.expected;
  d.lo = *std::min_element(d.values.begin(), d.values.end());
  d.hi = *std::max_element(d.values.begin(), d.values.end());
  double sum = 0.0;
  for (const double v : d.values) sum += v;
  d.mean = sum / trials;
  double ss = 0.0;
  for (const double v : d.values) ss += (v - d.mean) * (v - d.mean);
  d.stddev = trials > 1 ? std::sqrt(ss / (trials - 1)) : 0.0;
  d.degenerate = d.hi == d.lo;

  if (d.degenerate) {
    d.bins.push_back({d.lo, d.hi, trials});
  } else {
    const auto nb = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(std::sqrt(double(trials)))), 1,
        60);
    const double width = (d.hi - d.lo) / static_cast<double>(nb);
    d.bins.resize(static_cast<std::size_t>(nb));
    for (std::int64_t b = 0; b < nb; ++b) {
      d.bins[b].lo = d.lo + width * static_cast<double>(b);
      d.bins[b].hi = b + 1 == nb ? d.hi : d.lo + width * static_cast<double>(b + 1);
    }
    for (const double v : d.values) {
      auto b = static_cast<std::int64_t>((v - d.lo) / width);
      b = std::clamp<std::int64_t>(b, 0, nb - 1);
      ++d.bins[static_cast<std::size_t>(b)].count;
    }
  }
  return d;
}

inline void write_distribution_csv(std::ostream& os,
                                   const DistributionSummary& d) {
  const auto& fmt = ::demqubo::detail::format_double;
  os << "# method = " << d.method << '\n';
  os << "# instance = " << d.instance << '\n';
  os << "# trials = " << d.trials << '\n';
  os << "# mean = " << fmt(d.mean) << '\n';
  os << "# std = " << fmt(d.stddev) << '\n';
  os << "# min = " << fmt(d.lo) << '\n';
  os << "# max = " << fmt(d.hi) << '\n';
  os << "# expected = " << fmt(d.expected) << '\n';
  os << "# degenerate = " << (d.degenerate ? 1 : 0) << '\n';
  os << "bin_lo,bin_hi,count\n";
  for (const auto& b : d.bins)
    os << fmt(b.lo) << ',' << fmt(b.hi) << ',' << b.count << '\n';
}

}  // namespace demqubo::bench
