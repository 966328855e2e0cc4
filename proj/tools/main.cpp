// Command line front end: generate instances, run a single solver, drive
// benchmark grids, sweep factor ranks and histogram rounding distributions.
//
// Exit codes: 0 success, 2 usage error (bad flags, unknown method,
// out-of-range rank), 3 input data error (unreadable or malformed instance,
// edge list or config file), 4 solver failure (direction subproblem did not
// converge), 1 anything unexpected.

#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "demqubo/bench.hpp"
#include "demqubo/io.hpp"
#include "demqubo/qubo.hpp"
#include "demqubo/subproblem.hpp"

namespace {

using demqubo::QuboInstance;

std::vector<std::string> split_csv(const std::string& s) {
  return demqubo::bench::detail::split_list(s, ',');
}

std::vector<Eigen::Index> parse_index_list(const std::string& s,
                                           const char* what) {
  std::vector<Eigen::Index> out;
  for (const auto& item : split_csv(s)) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != item.size())
      throw std::invalid_argument(std::string(what) + ": bad integer '" +
                                  item + "'");
    out.push_back(static_cast<Eigen::Index>(v));
  }
  if (out.empty())
    throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& item : split_csv(s)) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != item.size())
      throw std::invalid_argument(std::string(what) + ": bad number '" + item +
                                  "'");
    out.push_back(v);
  }
  if (out.empty())
    throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

// --param key=value pairs plus the dedicated flags, merged in flag order.
demqubo::bench::MethodParams collect_params(
    const std::vector<std::string>& kv_pairs) {
  demqubo::bench::MethodParams mp;
  for (const auto& item : kv_pairs) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--param expects key=value, got '" + item +
                                  "'");
    mp.kv[demqubo::bench::detail::trim(item.substr(0, eq))] =
        demqubo::bench::detail::trim(item.substr(eq + 1));
  }
  return mp;
}

void with_output(const std::string& out,
                 const std::function<void(std::ostream&)>& fn) {
  if (out == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(out);
  if (!f) throw demqubo::io_error("cannot write output file: " + out);
  fn(f);
}

// Edge list file: "n m" header, then m lines "i j w" with 0-based endpoints.
demqubo::WeightedGraph read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw demqubo::io_error("cannot open edge list: " + path);
  demqubo::WeightedGraph g;
  long long m = 0;
  if (!(in >> g.n >> m) || g.n < 1 || m < 0)
    throw demqubo::parse_error("edge list " + path +
                               ": expected 'n m' header");
  g.edges.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    demqubo::WeightedGraph::Edge edge;
    if (!(in >> edge.i >> edge.j >> edge.w))
      throw demqubo::parse_error("edge list " + path + ": bad edge line " +
                                 std::to_string(e + 1));
    if (edge.i > edge.j) std::swap(edge.i, edge.j);
    g.edges.push_back(edge);
  }
  return g;
}

struct GenArgs {
  std::string type = "random";
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string edges, weights, name, out = "-";
};

int run_gen(const GenArgs& a) {
  QuboInstance inst;
  if (a.type == "random") {
    if (a.n < 1)
      throw std::invalid_argument("gen --type random requires --n >= 1");
    inst = demqubo::gen_random_gaussian(static_cast<Eigen::Index>(a.n),
                                        a.seed);
  } else if (a.type == "maxcut") {
    if (a.edges.empty())
      throw std::invalid_argument("gen --type maxcut requires --edges");
    inst = demqubo::from_maxcut(read_edge_list(a.edges));
  } else if (a.type == "subset-sum") {
    if (a.weights.empty())
      throw std::invalid_argument("gen --type subset-sum requires --weights");
    const auto w = parse_double_list(a.weights, "--weights");
    Eigen::VectorXd wv(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i)
      wv[static_cast<Eigen::Index>(i)] = w[i];
    inst = demqubo::from_subset_sum(wv);
  } else {
    throw std::invalid_argument("unknown --type '" + a.type + "'");
  }
  if (!a.name.empty()) inst.name = a.name;
  with_output(a.out,
              [&](std::ostream& os) { demqubo::write_instance(os, inst); });
  return 0;
}

struct SolveArgs {
  std::string instance, method, out = "-", trace_out;
  std::uint64_t seed = 0;
  std::vector<std::string> params;
  // dedicated flags, forwarded only when present on the command line
  std::int64_t rank = 0, steps = 0, rounds = 0;
  double eta = 0.0, eps = 0.0;
  bool has_rank = false, has_steps = false, has_rounds = false;
  bool has_eta = false, has_eps = false;
};

int run_solve(const SolveArgs& a) {
  const QuboInstance inst = demqubo::read_instance(a.instance);
  demqubo::bench::MethodParams mp = collect_params(a.params);
  if (a.has_rank) mp.kv["rank"] = std::to_string(a.rank);
  if (a.has_steps) mp.kv["steps"] = std::to_string(a.steps);
  if (a.has_rounds) mp.kv["rounds"] = std::to_string(a.rounds);
  if (a.has_eta) mp.kv["eta"] = demqubo::detail::format_double(a.eta);
  if (a.has_eps) mp.kv["eps"] = demqubo::detail::format_double(a.eps);

  const demqubo::bench::RunReport rep =
      demqubo::bench::run_method(inst, a.method, mp, a.seed);
  with_output(a.out, [&](std::ostream& os) {
    os << demqubo::bench::report_json(rep).dump() << '\n';
  });
  if (!a.trace_out.empty())
    with_output(a.trace_out, [&](std::ostream& os) {
      for (const auto& e : rep.trace)
        os << e.iteration << ' ' << demqubo::detail::format_double(e.value)
           << ' ' << demqubo::detail::format_double(e.aux) << ' '
           << demqubo::detail::format_double(e.seconds) << '\n';
    });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QUBO toolkit: expectation-minimizing factor descent plus "
               "classical baselines"};
  app.require_subcommand(1);

  GenArgs ga;
  CLI::App* gen = app.add_subcommand("gen", "Generate an instance file");
  gen->add_option("--type", ga.type, "random | maxcut | subset-sum")
      ->check(CLI::IsMember({"random", "maxcut", "subset-sum"}));
  gen->add_option("--n", ga.n, "size for --type random");
  gen->add_option("--seed", ga.seed, "generator seed");
  gen->add_option("--edges", ga.edges, "edge list file for --type maxcut");
  gen->add_option("--weights", ga.weights,
                  "comma list of weights for --type subset-sum");
  gen->add_option("--name", ga.name, "instance name override");
  gen->add_option("--out", ga.out, "output path, - for stdout");

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "Run one method once");
  solve->add_option("--instance", sa.instance, "instance file")->required();
  solve->add_option("--method", sa.method,
                    "dem-rc | dem-exact | sa | tabu | sb | burer2 | "
                    "gw-sdp-surrogate")
      ->required();
  solve->add_option("--seed", sa.seed, "run seed");
  auto* o_rank = solve->add_option("--rank", sa.rank, "factor rank");
  auto* o_steps = solve->add_option("--steps", sa.steps, "iteration budget");
  auto* o_rounds =
      solve->add_option("--rounds", sa.rounds, "hyperplane rounding trials");
  auto* o_eta = solve->add_option("--eta", sa.eta, "step size");
  auto* o_eps = solve->add_option("--eps", sa.eps, "method epsilon");
  solve->add_option("--param", sa.params,
                    "extra key=value method parameter (repeatable)");
  solve->add_option("--out", sa.out, "report JSON path, - for stdout");
  solve->add_option("--trace-out", sa.trace_out,
                    "trace file (iteration value aux seconds)");

  std::string bench_config;
  CLI::App* bench =
      app.add_subcommand("bench", "Run an instance x method x seed grid");
  bench->add_option("--config", bench_config, "benchmark config file")
      ->required();

  std::string rs_instance, rs_ranks, rs_methods = "dem-rc", rs_out = "-";
  std::uint64_t rs_seed = 0;
  std::vector<std::string> rs_params;
  CLI::App* sweep = app.add_subcommand(
      "rank-sweep", "Rerun rank-parameterized methods across factor ranks");
  sweep->add_option("--instance", rs_instance, "instance file")->required();
  sweep->add_option("--ranks", rs_ranks, "comma list of ranks")->required();
  sweep->add_option("--methods", rs_methods,
                    "comma list of dem-rc | dem-exact | gw-sdp-surrogate");
  sweep->add_option("--seed", rs_seed, "run seed");
  sweep->add_option("--param", rs_params,
                    "extra key=value method parameter (repeatable)");
  sweep->add_option("--out", rs_out, "CSV path, - for stdout");

  std::string di_instance, di_method, di_out = "-";
  std::uint64_t di_seed = 0;
  std::int64_t di_trials = 1000;
  std::vector<std::string> di_params;
  CLI::App* dist = app.add_subcommand(
      "distribution", "Histogram the rounding distribution of one factor");
  dist->add_option("--instance", di_instance, "instance file")->required();
  dist->add_option("--method", di_method, "factor method")->required();
  dist->add_option("--trials", di_trials, "rounding trials");
  dist->add_option("--seed", di_seed, "run seed");
  dist->add_option("--param", di_params,
                   "extra key=value method parameter (repeatable)");
  dist->add_option("--out", di_out, "CSV path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return run_gen(ga);
    if (*solve) {
      sa.has_rank = o_rank->count() > 0;
      sa.has_steps = o_steps->count() > 0;
      sa.has_rounds = o_rounds->count() > 0;
      sa.has_eta = o_eta->count() > 0;
      sa.has_eps = o_eps->count() > 0;
      return run_solve(sa);
    }
    if (*bench) {
      const auto cfg = demqubo::bench::parse_config_file(bench_config);
      demqubo::bench::run_bench(cfg, &std::cout);
      return 0;
    }
    if (*sweep) {
      const QuboInstance inst = demqubo::read_instance(rs_instance);
      const auto ranks = parse_index_list(rs_ranks, "--ranks");
      const auto rows = demqubo::bench::rank_sweep(
          inst, ranks, split_csv(rs_methods), collect_params(rs_params),
          rs_seed);
      with_output(rs_out, [&](std::ostream& os) {
        demqubo::bench::write_rank_sweep_csv(os, rows);
      });
      return 0;
    }
    if (*dist) {
      if (di_trials < 1)
        throw std::invalid_argument("distribution requires --trials >= 1");
      const QuboInstance inst = demqubo::read_instance(di_instance);
      const auto d = demqubo::bench::rounding_distribution(
          inst, di_method, collect_params(di_params), di_seed,
          static_cast<int>(di_trials));
      with_output(di_out, [&](std::ostream& os) {
        demqubo::bench::write_distribution_csv(os, d);
      });
      return 0;
    }
  } catch (const demqubo::bench::unknown_method_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const demqubo::bench::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const demqubo::io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const demqubo::solver_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
