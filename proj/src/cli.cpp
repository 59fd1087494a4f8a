#include "bcq/cli.hpp"

#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcq/experiments.hpp"
#include "bcq/generator.hpp"
#include "bcq/maxent.hpp"
#include "bcq/simulator.hpp"
#include "bcq/stationary.hpp"

namespace bcq {

namespace {

using json = nlohmann::json;

struct ModelArgs {
  Params p;
  void add_to(CLI::App* cmd, bool required = true) {
    auto* l = cmd->add_option("--lambda", p.lambda, "Arrival rate");
    auto* m1 = cmd->add_option("--mu1", p.mu1, "Block-generation rate");
    auto* m2 = cmd->add_option("--mu2", p.mu2, "Blockchain-building rate");
    auto* bb = cmd->add_option("--b", p.b, "Maximum block size");
    if (required) {
      l->required();
      m1->required();
      m2->required();
      bb->required();
    }
  }
};

struct NumericArgs {
  double tail_eps = 1e-10;
  double tol = 1e-10;
  double root_tol = 1e-12;
  int jmax = 0;
  int jmax_cap = 4096;

  TruncationOptions truncation() const {
    TruncationOptions t;
    t.tail_eps = tail_eps;
    t.max_j_max = jmax_cap;
    t.solve.residual_tol = tol;
    return t;
  }
};

void add_numeric(CLI::App* cmd, NumericArgs& n, bool fixed_level) {
  cmd->add_option("--tail-eps", n.tail_eps, "Boundary-row mass accepted by the truncation search")
      ->capture_default_str();
  cmd->add_option("--tol", n.tol, "Max-norm residual of pi*Q accepted from the stationary solve")
      ->capture_default_str();
  cmd->add_option("--jmax-cap", n.jmax_cap, "Largest pool truncation level the search may try")
      ->capture_default_str();
  if (fixed_level) cmd->add_option("--jmax", n.jmax, "Fixed pool truncation level (0 = automatic)");
}

// Writes to `path` when given, otherwise to `out`.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::InvalidConfig, "cannot open '" + path + "' for writing");
  body(file);
}

std::string report_line(const StabilityReport& r) {
  return "bound=" + format_number(r.bound) + " stable=" + (r.stable ? "true" : "false") +
         " margin=" + format_number(r.margin);
}

JointDistribution solve_model(const Params& p, const NumericArgs& n, int* level) {
  if (n.jmax > 0) {
    const SparseGenerator g = build_generator(p, n.jmax);
    *level = n.jmax;
    SolveOptions options;
    options.residual_tol = n.tol;
    return solve_stationary(g, options);
  }
  TruncationResult t = auto_truncate(p, n.truncation());
  *level = t.j_max;
  return std::move(t.distribution);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw Error(ErrorCode::InvalidConfig, "no seeds given");
  return seeds;
}

void print_trends(std::ostream& os, const SweepTable& table) {
  for (Response r : {Response::y, Response::z}) {
    const TrendReport t = trend_check(table, r);
    const char* name = r == Response::y ? "y" : "z";
    for (const auto& c : t.curves) {
      os << "trend " << name << " family=" << format_number(c.family_value) << " " << to_string(c.verdict.direction);
      if (c.verdict.direction == Direction::non_monotone) os << " at=" << c.verdict.first_violation;
      os << '\n';
    }
    std::size_t up = 0, down = 0;
    for (const auto& v : t.across_families) {
      up += v.direction == Direction::strictly_increasing;
      down += v.direction == Direction::strictly_decreasing;
    }
    os << "trend " << name << " across-families increasing=" << up << " decreasing=" << down
       << " of=" << t.across_families.size() << '\n';
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady-state and maximum-entropy analysis of a two-stage blockchain queue", "bcq"};
  app.require_subcommand(1);

  bool as_json = false;
  std::string out_path;
  app.add_flag("--json", as_json, "Emit JSON records instead of CSV");
  app.add_option("--out", out_path, "Output file (default: standard output)");

  ModelArgs stab_args;
  auto* stability = app.add_subcommand("stability", "Check the stability condition");
  stab_args.add_to(stability);

  ModelArgs solve_args;
  NumericArgs solve_num;
  std::string dist_path, dump_path;
  auto* solve = app.add_subcommand("solve", "Exact stationary distribution and its moments");
  solve_args.add_to(solve);
  add_numeric(solve, solve_num, true);
  solve->add_option("--distribution", dist_path, "Also write the table i,j,p to this file");
  solve->add_option("--dump-generator", dump_path, "Write the generator as 'i:j i:j rate' triplets");

  ModelArgs sim_args;
  double horizon = 1e6;
  double warmup = -1.0;
  int batches = 20;
  std::uint64_t seed = 1;
  auto* simulate_cmd = app.add_subcommand("simulate", "Discrete-event estimate of I and J");
  sim_args.add_to(simulate_cmd);
  simulate_cmd->add_option("--horizon", horizon, "Simulated time")->capture_default_str();
  simulate_cmd->add_option("--warmup", warmup, "Discarded initial time (default 10% of horizon)");
  simulate_cmd->add_option("--batches", batches, "Batch count for batch means")->capture_default_str();
  simulate_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();

  ModelArgs me_args;
  NumericArgs me_num;
  double block_mean = -1.0, pool_mean = -1.0;
  auto* maxent = app.add_subcommand("maxent", "Maximum-entropy product form from (I, J, b) or model parameters");
  me_args.add_to(maxent, false);
  add_numeric(maxent, me_num, true);
  auto* opt_i = maxent->add_option("--I", block_mean, "Mean transactions in the block");
  auto* opt_j = maxent->add_option("--J", pool_mean, "Mean transactions in the pool");
  maxent->add_option("--root-tol", me_num.root_tol, "Relative tolerance of the y root")->capture_default_str();
  opt_i->needs(opt_j);
  opt_j->needs(opt_i);

  ModelArgs cmp_args;
  NumericArgs cmp_num;
  std::string seeds_text = "1,2,3,4,5";
  double cmp_horizon = 1e6;
  auto* compare = app.add_subcommand("compare", "Exact vs maximum-entropy vs simulation at one point");
  cmp_args.add_to(compare);
  add_numeric(compare, cmp_num, false);
  compare->add_option("--seeds", seeds_text, "Comma-separated simulation seeds")->capture_default_str();
  compare->add_option("--horizon", cmp_horizon, "Simulated time per seed")->capture_default_str();

  int example = 0;
  std::string spec_path;
  bool serial = false, timing = false, trends = false;
  NumericArgs sweep_num;
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep over a grid");
  auto* ex_opt = sweep->add_option("--example", example, "Built-in sweep 1, 2 or 3")->check(CLI::Range(1, 3));
  auto* spec_opt = sweep->add_option("--spec", spec_path, "Sweep spec file (flat JSON)");
  ex_opt->excludes(spec_opt);
  sweep->add_flag("--serial", serial, "Evaluate points one at a time");
  sweep->add_flag("--timing", timing, "Fill the ms column");
  sweep->add_flag("--trends", trends, "Report monotonicity verdicts on the error stream");
  add_numeric(sweep, sweep_num, false);

  // Options are accepted after the subcommand as well.
  for (auto* cmd : {stability, solve, simulate_cmd, maxent, compare, sweep}) {
    cmd->add_flag("--json", as_json, "Emit JSON records instead of CSV");
    cmd->add_option("--out", out_path, "Output file (default: standard output)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*stability) {
      const StabilityReport r = stability_check(stab_args.p);
      emit(out_path, out, [&](std::ostream& os) {
        if (as_json) {
          os << json{{"bound", r.bound}, {"lambda", r.lambda}, {"stable", r.stable}, {"margin", r.margin}}.dump()
             << '\n';
        } else {
          os << report_line(r) << '\n';
        }
      });
      return 0;
    }

    if (*solve) {
      const Params& p = solve_args.p;
      if (const auto r = stability_check(p); !r.stable) throw StabilityError(r);
      int level = 0;
      const JointDistribution d = solve_model(p, solve_num, &level);
      const Moments m = moments(d);
      const double residual = stationary_residual(build_generator(p, level), d.probs);
      const double h = entropy_direct(d);
      emit(out_path, out, [&](std::ostream& os) {
        if (as_json) {
          os << json{{"lambda", p.lambda}, {"mu1", p.mu1}, {"mu2", p.mu2}, {"b", p.b},
                     {"j_max", level},     {"I", m.block},  {"J", m.pool},  {"tail_mass", d.tail_mass_estimate},
                     {"residual", residual}, {"H_exact", h}}
                    .dump()
             << '\n';
        } else {
          os << "lambda,mu1,mu2,b,j_max,I,J,tail_mass,residual,H_exact\n"
             << format_number(p.lambda) << ',' << format_number(p.mu1) << ',' << format_number(p.mu2) << ','
             << p.b << ',' << level << ',' << format_number(m.block) << ',' << format_number(m.pool) << ','
             << format_number(d.tail_mass_estimate) << ',' << format_number(residual) << ',' << format_number(h)
             << '\n';
        }
      });
      if (!dist_path.empty()) {
        emit(dist_path, out, [&](std::ostream& os) {
          os << "i,j,p\n";
          for (int j = 0; j <= d.j_max; ++j) {
            for (int i = 0; i <= d.b; ++i) os << i << ',' << j << ',' << format_number(d.at(i, j)) << '\n';
          }
        });
      }
      if (!dump_path.empty()) {
        const SparseGenerator g = build_generator(p, level);
        emit(dump_path, out, [&](std::ostream& os) { write_triplets(os, g); });
      }
      return 0;
    }

    if (*simulate_cmd) {
      SimConfig c = SimConfig::with_horizon(horizon, seed, batches);
      if (warmup >= 0.0) c.warmup = warmup;
      const SimEstimate e = simulate(sim_args.p, c);
      const Params& p = sim_args.p;
      emit(out_path, out, [&](std::ostream& os) {
        if (as_json) {
          os << json{{"lambda", p.lambda}, {"mu1", p.mu1},         {"mu2", p.mu2},   {"b", p.b},
                     {"seed", seed},       {"horizon", c.horizon}, {"warmup", c.warmup},
                     {"I_hat", e.block_mean}, {"I_se", e.block_se}, {"J_hat", e.pool_mean},
                     {"J_se", e.pool_se}, {"events", e.n_events}, {"stable", e.stable}}
                    .dump()
             << '\n';
        } else {
          os << "lambda,mu1,mu2,b,seed,horizon,I_hat,I_se,J_hat,J_se,events,stable\n"
             << format_number(p.lambda) << ',' << format_number(p.mu1) << ',' << format_number(p.mu2) << ','
             << p.b << ',' << seed << ',' << format_number(c.horizon) << ',' << format_number(e.block_mean) << ','
             << format_number(e.block_se) << ',' << format_number(e.pool_mean) << ',' << format_number(e.pool_se)
             << ',' << e.n_events << ',' << (e.stable ? "true" : "false") << '\n';
        }
      });
      return 0;
    }

    if (*maxent) {
      int b = me_args.p.b;
      if (opt_i->count() == 0) {
        const Params& p = me_args.p;
        if (const auto r = stability_check(p); !r.stable) throw StabilityError(r);
        int level = 0;
        const Moments m = moments(solve_model(p, me_num, &level));
        block_mean = m.block;
        pool_mean = m.pool;
      } else if (b < 1) {
        throw Error(ErrorCode::InvalidBlockSize, "--b must be >= 1");
      }
      const MaxEntSolution s = maxent_distribution(block_mean, pool_mean, b, me_num.root_tol);
      const double h = entropy_closed_form(s);
      emit(out_path, out, [&](std::ostream& os) {
        if (as_json) {
          os << json{{"I", block_mean}, {"J", pool_mean}, {"b", b}, {"x", s.x}, {"y", s.y}, {"z", s.z},
                     {"beta0", s.beta0}, {"beta1", s.beta1}, {"beta2", s.beta2}, {"H", h},
                     {"r_norm", s.residuals.norm}, {"r_I", s.residuals.block}, {"r_J", s.residuals.pool},
                     {"iterations", s.iterations}}
                    .dump()
             << '\n';
        } else {
          os << "I,J,b,x,y,z,beta0,beta1,beta2,H,r_norm,r_I,r_J,iterations\n"
             << format_number(block_mean) << ',' << format_number(pool_mean) << ',' << b << ','
             << format_number(s.x) << ',' << format_number(s.y) << ',' << format_number(s.z) << ','
             << format_number(s.beta0) << ',' << format_number(s.beta1) << ',' << format_number(s.beta2) << ','
             << format_number(h) << ',' << format_number(s.residuals.norm) << ','
             << format_number(s.residuals.block) << ',' << format_number(s.residuals.pool) << ',' << s.iterations
             << '\n';
        }
      });
      return 0;
    }

    if (*compare) {
      const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
      CompareOptions options;
      options.horizon = cmp_horizon;
      options.truncation = cmp_num.truncation();
      const CompareRecord rec = compare_run(cmp_args.p, seeds, options);
      emit(out_path, out, [&](std::ostream& os) {
        if (as_json) {
          json j = json::parse(record_json(rec.exact));
          j["agreeing_runs"] = rec.agreeing_runs;
          for (const auto& run : rec.runs) {
            j["runs"].push_back({{"seed", run.seed},
                                 {"I_hat", run.estimate.block_mean},
                                 {"I_se", run.estimate.block_se},
                                 {"J_hat", run.estimate.pool_mean},
                                 {"J_se", run.estimate.pool_se},
                                 {"within_3se", run.block_within && run.pool_within}});
          }
          os << j.dump() << '\n';
          return;
        }
        std::ostringstream row;
        write_csv_row(row, rec.exact);
        std::string base = row.str();
        base.pop_back();
        os << "lambda,mu1,mu2,b,source,status,I,J,y,z,x,H_maxent,H_exact,kl,tail_exact,tail_approx,ms,"
              "seed,I_hat,I_se,J_hat,J_se,within_3se\n";
        for (const auto& run : rec.runs) {
          os << base << ',' << run.seed << ',' << format_number(run.estimate.block_mean) << ','
             << format_number(run.estimate.block_se) << ',' << format_number(run.estimate.pool_mean) << ','
             << format_number(run.estimate.pool_se) << ',' << (run.block_within && run.pool_within ? "true" : "false")
             << '\n';
        }
      });
      err << "agreeing runs: " << rec.agreeing_runs << "/" << rec.runs.size() << '\n';
      return 0;
    }

    if (*sweep) {
      SweepSpec spec;
      if (example > 0) {
        spec = example_spec(example);
      } else if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw Error(ErrorCode::InvalidSpec, "cannot read '" + spec_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        spec = parse_sweep_spec(buf.str());
      } else {
        err << "sweep needs --example or --spec\n" << sweep->help();
        return 1;
      }
      spec.truncation.tail_eps = sweep_num.tail_eps;
      spec.truncation.max_j_max = sweep_num.jmax_cap;
      spec.truncation.solve.residual_tol = sweep_num.tol;
      RunOptions options;
      options.execution = serial ? Execution::serial : Execution::parallel;
      const SweepTable table = run_sweep(spec, options);
      emit(out_path, out, [&](std::ostream& os) {
        if (as_json) {
          write_json_lines(os, table, timing);
        } else {
          write_csv(os, table, timing);
        }
      });
      if (trends) print_trends(err, table);
      return 0;
    }
  } catch (const StabilityError& e) {
    err << "unstable: " << report_line(e.report()) << '\n';
    return 1;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return is_numerical(e.code()) ? 2 : 1;
  }
  return 1;
}

}  // namespace bcq
