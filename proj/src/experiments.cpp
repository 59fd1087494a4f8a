#include "bcq/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include <json.hpp>

namespace bcq {

using json = nlohmann::json;

const char* to_string(Field f) {
  switch (f) {
    case Field::lambda: return "lambda";
    case Field::mu1: return "mu1";
    case Field::mu2: return "mu2";
    case Field::b: return "b";
  }
  return "?";
}

const char* to_string(MomentSource s) {
  switch (s) {
    case MomentSource::exact: return "exact";
    case MomentSource::simulator: return "simulator";
    case MomentSource::table: return "table";
  }
  return "?";
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::strictly_increasing: return "strictly-increasing";
    case Direction::strictly_decreasing: return "strictly-decreasing";
    case Direction::non_monotone: return "non-monotone";
  }
  return "?";
}

Field parse_field(const std::string& name) {
  for (Field f : {Field::lambda, Field::mu1, Field::mu2, Field::b}) {
    if (name == to_string(f)) return f;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown parameter '" + name + "'");
}

MomentSource parse_source(const std::string& name) {
  for (MomentSource s : {MomentSource::exact, MomentSource::simulator, MomentSource::table}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown moment source '" + name + "'");
}

std::vector<double> open_interval_grid(double lo, double hi, int n) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 1; k <= n; ++k) grid.push_back(lo + (hi - lo) * k / (n + 1.0));
  return grid;
}

SweepSpec example_spec(int example) {
  SweepSpec s;
  switch (example) {
    case 1:
    case 2:
      s.name = "example" + std::to_string(example);
      s.swept = Field::lambda;
      s.grid = open_interval_grid(1.0, 3.5, 20);
      s.fixed = {0.0, 6.0, 2.0, 80};
      s.family = Field::mu1;
      s.family_values = {6.0, 7.5, 10.0};
      return s;
    case 3:
      s.name = "example3";
      s.swept = Field::mu1;
      s.grid = open_interval_grid(1.0, 2.5, 20);
      s.fixed = {1.5, 1.0, 2.0, 40};
      s.family = Field::b;
      s.family_values = {40.0, 80.0, 160.0};
      return s;
    default:
      throw Error(ErrorCode::InvalidSpec, "examples are numbered 1 to 3");
  }
}

namespace {

bool integral_block(double v) { return v >= 1.0 && v <= 1e6 && std::floor(v) == v; }

void set_field(Params& p, Field f, double v) {
  switch (f) {
    case Field::lambda: p.lambda = v; break;
    case Field::mu1: p.mu1 = v; break;
    case Field::mu2: p.mu2 = v; break;
    case Field::b: p.b = static_cast<int>(v); break;
  }
}

void check_values(Field f, const std::vector<double>& values, const char* what) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) throw Error(ErrorCode::InvalidSpec, std::string(what) + " has a non-finite value");
    if (f == Field::b && !integral_block(values[k])) {
      throw Error(ErrorCode::InvalidSpec, std::string(what) + " has a non-integral block size");
    }
  }
}

}  // namespace

void validate_spec(const SweepSpec& spec) {
  if (spec.swept == spec.family) throw Error(ErrorCode::InvalidSpec, "swept and family parameters must differ");
  for (std::size_t k = 1; k < spec.grid.size(); ++k) {
    if (!(spec.grid[k] > spec.grid[k - 1])) throw Error(ErrorCode::InvalidSpec, "grid must be strictly increasing");
  }
  check_values(spec.swept, spec.grid, "grid");
  check_values(spec.family, spec.family_values, "family_values");
  if (spec.source == MomentSource::table &&
      spec.table.size() != spec.grid.size() * spec.family_values.size()) {
    throw Error(ErrorCode::InvalidSpec, "moment table needs one (I, J) per sweep point");
  }
}

SweepSpec parse_sweep_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "spec must be a JSON object");

  try {
    SweepSpec s;
    s.name = j.value("name", std::string("sweep"));
    s.swept = parse_field(j.at("swept").get<std::string>());
    if (j.contains("grid")) {
      s.grid = j.at("grid").get<std::vector<double>>();
    } else if (j.contains("grid_open")) {
      const auto g = j.at("grid_open").get<std::vector<double>>();
      if (g.size() != 3) throw Error(ErrorCode::InvalidSpec, "grid_open is [lo, hi, n]");
      s.grid = open_interval_grid(g[0], g[1], static_cast<int>(g[2]));
    } else {
      throw Error(ErrorCode::InvalidSpec, "spec needs 'grid' or 'grid_open'");
    }
    s.family = parse_field(j.at("family").get<std::string>());
    s.family_values = j.at("family_values").get<std::vector<double>>();
    s.fixed.lambda = j.value("lambda", 0.0);
    s.fixed.mu1 = j.value("mu1", 1.0);
    s.fixed.mu2 = j.value("mu2", 1.0);
    s.fixed.b = j.value("b", 1);
    s.source = parse_source(j.value("source", std::string("exact")));
    if (s.source == MomentSource::table) {
      const auto is = j.at("table_I").get<std::vector<double>>();
      const auto js = j.at("table_J").get<std::vector<double>>();
      if (is.size() != js.size()) throw Error(ErrorCode::InvalidSpec, "table_I and table_J differ in length");
      for (std::size_t k = 0; k < is.size(); ++k) s.table.push_back({is[k], js[k]});
    }
    const double horizon = j.value("horizon", s.sim.horizon);
    s.sim = SimConfig::with_horizon(horizon, j.value("seed", std::uint64_t{1}), j.value("batches", 20));
    s.sim.warmup = j.value("warmup", s.sim.warmup);
    s.truncation.tail_eps = j.value("tail_eps", s.truncation.tail_eps);
    s.truncation.max_j_max = j.value("jmax_cap", s.truncation.max_j_max);
    validate_spec(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
}

namespace {

void fill_from_exact(ComparisonRecord& r, const Params& p, const TruncationOptions& truncation) {
  const TruncationResult t = auto_truncate(p, truncation);
  r.j_max = t.j_max;
  r.moments = t.moments;
  r.maxent = maxent_distribution(t.moments.block, t.moments.pool, p.b);
  r.h_maxent = entropy_closed_form(*r.maxent);
  r.h_exact = entropy_direct(t.distribution);
  const KlResult kl = kl_divergence(t.distribution, *r.maxent);
  r.kl = kl.kl;
  r.tail_exact = kl.exact_tail_mass;
  r.tail_approx = kl.approx_tail_mass;
}

ComparisonRecord evaluate_point(const SweepSpec& spec, std::size_t fi, std::size_t gi, Kernel kernel) {
  const auto start = std::chrono::steady_clock::now();
  ComparisonRecord r;
  r.spec_name = spec.name;
  r.family_index = fi;
  r.grid_index = gi;
  r.family_value = spec.family_values[fi];
  r.swept_value = spec.grid[gi];
  r.source = spec.source;
  r.params = spec.fixed;
  set_field(r.params, spec.family, r.family_value);
  set_field(r.params, spec.swept, r.swept_value);

  try {
    r.stability = stability_check(r.params);
    if (!r.stability.stable && spec.source != MomentSource::table) {
      r.status = PointStatus::unstable;
      return r;
    }
    TruncationOptions truncation = spec.truncation;
    truncation.solve.kernel = kernel;
    switch (spec.source) {
      case MomentSource::exact:
        fill_from_exact(r, r.params, truncation);
        break;
      case MomentSource::simulator: {
        SimConfig c = spec.sim;
        c.seed = stream_seed(spec.sim.seed, fi * spec.grid.size() + gi);
        const SimEstimate est = simulate(r.params, c);
        r.moments = {est.block_mean, est.pool_mean};
        break;
      }
      case MomentSource::table:
        r.moments = spec.table[fi * spec.grid.size() + gi];
        break;
    }
    if (!r.maxent) {
      r.maxent = maxent_distribution(r.moments.block, r.moments.pool, r.params.b);
      r.h_maxent = entropy_closed_form(*r.maxent);
    }
  } catch (const Error& e) {
    r.status = PointStatus::failed;
    r.error = e.what();
    r.maxent.reset();
  }
  r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

SweepTable run_sweep(const SweepSpec& spec, const RunOptions& options) {
  validate_spec(spec);
  const std::size_t per_family = spec.grid.size();
  const std::size_t n = per_family * spec.family_values.size();
  SweepTable table(n);
  if (options.execution == Execution::serial) {
    for (std::size_t k = 0; k < n; ++k) {
      table[k] = evaluate_point(spec, k / per_family, k % per_family, Kernel::serial);
    }
  } else {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      const auto idx = static_cast<std::size_t>(k);
      table[idx] = evaluate_point(spec, idx / per_family, idx % per_family, Kernel::serial);
    }
  }
  return table;
}

ComparisonRecord evaluate_exact(const Params& p, const TruncationOptions& truncation) {
  SweepSpec spec;
  spec.name = "point";
  spec.swept = Field::lambda;
  spec.grid = {p.lambda};
  spec.family = Field::mu1;
  spec.family_values = {p.mu1};
  spec.fixed = p;
  spec.truncation = truncation;
  return evaluate_point(spec, 0, 0, truncation.solve.kernel);
}

MonotoneVerdict classify(std::span<const double> v) {
  if (v.size() < 2 || v[1] == v[0]) return {Direction::non_monotone, 0};
  const bool up = v[1] > v[0];
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    if (up ? !(v[k + 1] > v[k]) : !(v[k + 1] < v[k])) return {Direction::non_monotone, k};
  }
  return {up ? Direction::strictly_increasing : Direction::strictly_decreasing, 0};
}

bool TrendReport::all_curves(Direction d) const {
  return !curves.empty() &&
         std::all_of(curves.begin(), curves.end(), [d](const TrendCurve& c) { return c.verdict.direction == d; });
}

bool TrendReport::all_across_families(Direction d) const {
  return !across_families.empty() && std::all_of(across_families.begin(), across_families.end(),
                                                 [d](const MonotoneVerdict& v) { return v.direction == d; });
}

TrendReport trend_check(const SweepTable& table, Response response) {
  TrendReport report;
  report.response = response;
  if (table.empty()) return report;
  report.spec_name = table.front().spec_name;

  std::map<double, TrendCurve> by_family;
  std::map<double, std::map<double, double>> by_grid;  // swept -> family -> response
  for (const auto& r : table) {
    if (r.spec_name != report.spec_name) {
      throw Error(ErrorCode::MixedSpec, "records from '" + r.spec_name + "' and '" + report.spec_name + "'");
    }
    if (!r.maxent) continue;
    auto& curve = by_family[r.family_value];
    curve.family_value = r.family_value;
    curve.swept.push_back(r.swept_value);
    curve.response.push_back(r.response(response));
    by_grid[r.swept_value][r.family_value] = r.response(response);
  }
  for (auto& [_, curve] : by_family) {
    for (std::size_t k = 1; k < curve.swept.size(); ++k) {
      if (!(curve.swept[k] > curve.swept[k - 1])) {
        throw Error(ErrorCode::MixedSpec, "records are not in grid order");
      }
    }
    curve.verdict = classify(curve.response);
    report.curves.push_back(std::move(curve));
  }
  for (const auto& [_, families] : by_grid) {
    std::vector<double> values;
    for (const auto& [__, v] : families) values.push_back(v);
    report.across_families.push_back(classify(values));
  }
  return report;
}

CompareRecord compare_run(const Params& p, std::span<const std::uint64_t> seeds, const CompareOptions& options) {
  const StabilityReport stability = stability_check(p);
  if (!stability.stable) throw StabilityError(stability);

  CompareRecord out;
  out.exact = evaluate_exact(p, options.truncation);
  if (out.exact.status == PointStatus::failed) {
    throw Error(ErrorCode::SolveDidNotConverge, out.exact.error);
  }
  out.runs.resize(seeds.size());
  const auto count = static_cast<std::ptrdiff_t>(seeds.size());
  const bool parallel = options.execution == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    auto& run = out.runs[static_cast<std::size_t>(k)];
    run.seed = seeds[static_cast<std::size_t>(k)];
    run.estimate = simulate(p, SimConfig::with_horizon(options.horizon, run.seed, options.n_batches));
  }
  const Moments& m = out.exact.moments;
  for (auto& run : out.runs) {
    const SimEstimate& e = run.estimate;
    run.block_within = std::abs(e.block_mean - m.block) <= options.sigmas * e.block_se;
    run.pool_within = std::abs(e.pool_mean - m.pool) <= options.sigmas * e.pool_se;
    if (run.block_within && run.pool_within) ++out.agreeing_runs;
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

const char* status_name(PointStatus s) {
  switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::unstable: return "unstable";
    case PointStatus::failed: return "failed";
  }
  return "?";
}

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

void write_csv_header(std::ostream& os) {
  os << "lambda,mu1,mu2,b,source,status,I,J,y,z,x,H_maxent,H_exact,kl,tail_exact,tail_approx,ms\n";
}

void write_csv_row(std::ostream& os, const ComparisonRecord& r, bool timing) {
  const Params& p = r.params;
  os << format_number(p.lambda) << ',' << format_number(p.mu1) << ',' << format_number(p.mu2) << ',' << p.b
     << ',' << to_string(r.source) << ',';
  std::string status = status_name(r.status);
  if (r.status == PointStatus::failed) status += ": " + r.error;
  if (r.status == PointStatus::unstable) status += ": bound=" + format_number(r.stability.bound);
  os << csv_field(status) << ',';
  if (r.maxent) {
    const MaxEntSolution& s = *r.maxent;
    os << format_number(r.moments.block) << ',' << format_number(r.moments.pool) << ',' << format_number(s.y)
       << ',' << format_number(s.z) << ',' << format_number(s.x) << ',' << format_number(r.h_maxent) << ','
       << opt(r.h_exact) << ',' << opt(r.kl) << ',' << opt(r.tail_exact) << ',' << opt(r.tail_approx) << ',';
  } else {
    os << ",,,,,,,,,,";
  }
  if (timing) os << format_number(r.ms);
  os << '\n';
}

void write_csv(std::ostream& os, const SweepTable& table, bool timing) {
  write_csv_header(os);
  for (const auto& r : table) write_csv_row(os, r, timing);
}

std::string record_json(const ComparisonRecord& r, bool timing) {
  json j;
  j["spec"] = r.spec_name;
  j["lambda"] = r.params.lambda;
  j["mu1"] = r.params.mu1;
  j["mu2"] = r.params.mu2;
  j["b"] = r.params.b;
  j["bound"] = r.stability.bound;
  j["stable"] = r.stability.stable;
  j["status"] = status_name(r.status);
  if (!r.error.empty()) j["error"] = r.error;
  j["source"] = to_string(r.source);
  if (r.maxent) {
    const MaxEntSolution& s = *r.maxent;
    j["I"] = r.moments.block;
    j["J"] = r.moments.pool;
    j["x"] = s.x;
    j["y"] = s.y;
    j["z"] = s.z;
    j["residuals"] = {s.residuals.norm, s.residuals.block, s.residuals.pool};
    j["H_maxent"] = r.h_maxent;
    if (r.h_exact) j["H_exact"] = *r.h_exact;
    if (r.kl) j["kl"] = *r.kl;
    if (r.tail_exact) j["tail_exact"] = *r.tail_exact;
    if (r.tail_approx) j["tail_approx"] = *r.tail_approx;
    if (r.j_max > 0) j["j_max"] = r.j_max;
  }
  if (timing) j["ms"] = r.ms;
  return j.dump();
}

void write_json_lines(std::ostream& os, const SweepTable& table, bool timing) {
  for (const auto& r : table) os << record_json(r, timing) << '\n';
}

}  // namespace bcq
