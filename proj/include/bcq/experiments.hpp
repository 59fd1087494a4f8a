#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcq/maxent.hpp"
#include "bcq/params.hpp"
#include "bcq/simulator.hpp"
#include "bcq/stationary.hpp"

namespace bcq {

enum class Field { lambda, mu1, mu2, b };
enum class MomentSource { exact, simulator, table };
enum class Response { y, z };
enum class Execution { serial, parallel };

const char* to_string(Field f);
const char* to_string(MomentSource s);
Field parse_field(const std::string& name);
MomentSource parse_source(const std::string& name);

/// One swept parameter crossed with a small family of curves.
struct SweepSpec {
  std::string name;
  Field swept = Field::lambda;
  std::vector<double> grid;
  Params fixed;
  Field family = Field::mu1;
  std::vector<double> family_values;
  MomentSource source = MomentSource::exact;
  // MomentSource::table: one (I, J) per point, family-major.
  std::vector<Moments> table;
  // MomentSource::simulator: point k uses stream_seed(sim.seed, k).
  SimConfig sim = SimConfig::with_horizon(1e5, 1);
  TruncationOptions truncation;
};

/// n interior points of (lo, hi), endpoints excluded.
std::vector<double> open_interval_grid(double lo, double hi, int n);

/// Example 1 and 2 share one sweep (lambda in (1, 3.5), b=80, mu2=2,
/// mu1 in {6, 7.5, 10}); example 3 sweeps mu1 in (1, 2.5) with lambda=1.5,
/// mu2=2, b in {40, 80, 160}. 20 interior points each.
SweepSpec example_spec(int example);

/// Throws Error{InvalidSpec} on non-increasing grids, swept == family,
/// non-integral b values or a table of the wrong length.
void validate_spec(const SweepSpec& spec);

/// Flat JSON object: name, swept, grid | grid_open, family, family_values,
/// lambda, mu1, mu2, b, source, table_I, table_J, seed, horizon, warmup,
/// batches, tail_eps, jmax_cap.
SweepSpec parse_sweep_spec(const std::string& json_text);

enum class PointStatus { ok, unstable, failed };

struct ComparisonRecord {
  std::string spec_name;
  std::size_t family_index = 0;
  std::size_t grid_index = 0;
  double family_value = 0.0;
  double swept_value = 0.0;
  Params params;
  StabilityReport stability;
  PointStatus status = PointStatus::ok;
  std::string error;
  MomentSource source = MomentSource::exact;
  Moments moments;
  std::optional<MaxEntSolution> maxent;
  int j_max = 0;
  double h_maxent = 0.0;
  std::optional<double> h_exact;
  std::optional<double> kl;
  std::optional<double> tail_exact;
  std::optional<double> tail_approx;
  double ms = 0.0;

  double response(Response r) const { return r == Response::y ? maxent->y : maxent->z; }
};

using SweepTable = std::vector<ComparisonRecord>;

struct RunOptions {
  Execution execution = Execution::parallel;
};

/// One record per (family value x grid point), in that order. Per-point
/// failures are embedded in the record and never abort the sweep.
SweepTable run_sweep(const SweepSpec& spec, const RunOptions& options = {});

/// The full pipeline at one parameter point with exact moments.
ComparisonRecord evaluate_exact(const Params& p, const TruncationOptions& truncation = {});

enum class Direction { strictly_increasing, strictly_decreasing, non_monotone };
const char* to_string(Direction d);

struct MonotoneVerdict {
  Direction direction = Direction::non_monotone;
  // Index k of the first pair (k, k+1) that breaks the direction set by the first pair.
  std::size_t first_violation = 0;
};

MonotoneVerdict classify(std::span<const double> values);

struct TrendCurve {
  double family_value = 0.0;
  std::vector<double> swept;
  std::vector<double> response;
  MonotoneVerdict verdict;
};

struct TrendReport {
  std::string spec_name;
  Response response = Response::y;
  std::vector<TrendCurve> curves;  // ordered by family value
  // Response across families (ordered by family value) at each grid point.
  std::vector<MonotoneVerdict> across_families;

  bool all_curves(Direction d) const;
  bool all_across_families(Direction d) const;
};

/// Records without a solution are left out of the curves.
/// Throws Error{MixedSpec} when records come from different sweeps.
TrendReport trend_check(const SweepTable& table, Response response);

struct SeedCheck {
  std::uint64_t seed = 0;
  SimEstimate estimate;
  bool block_within = false;  // |I_hat - I| <= 3 se
  bool pool_within = false;
};

struct CompareRecord {
  ComparisonRecord exact;
  std::vector<SeedCheck> runs;
  int agreeing_runs = 0;  // both estimates within 3 se
};

struct CompareOptions {
  double horizon = 1e6;
  int n_batches = 20;
  double sigmas = 3.0;
  TruncationOptions truncation;
  Execution execution = Execution::parallel;
};

/// Exact solve, maxent and KL, plus one simulation per seed.
/// Throws StabilityError for unstable parameters.
CompareRecord compare_run(const Params& p, std::span<const std::uint64_t> seeds,
                          const CompareOptions& options = {});

/// Header: lambda,mu1,mu2,b,source,status,I,J,y,z,x,H_maxent,H_exact,kl,
/// tail_exact,tail_approx,ms. Numbers use 12 significant digits; `ms` is
/// left empty unless `timing` is set so identical runs give identical bytes.
void write_csv(std::ostream& os, const SweepTable& table, bool timing = false);
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const ComparisonRecord& r, bool timing = false);

/// One JSON object per line.
void write_json_lines(std::ostream& os, const SweepTable& table, bool timing = false);
std::string record_json(const ComparisonRecord& r, bool timing = false);

/// "%.12g", with nan/inf spelled out.
std::string format_number(double v);
/// RFC-4180 quoting when the field contains ',', '"' or a line break.
std::string csv_field(const std::string& s);

}  // namespace bcq
