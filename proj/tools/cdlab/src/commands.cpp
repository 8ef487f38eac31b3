#include "cdlab/tools/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>

#include <Eigen/Core>
#include <json.hpp>

#include "cdlab/analysis.hpp"
#include "cdlab/atomic_model.hpp"
#include "cdlab/error.hpp"
#include "cdlab/geometry.hpp"
#include "cdlab/intertwiner.hpp"
#include "cdlab/parallel.hpp"
#include "cdlab/tools/battery.hpp"
#include "cdlab/tools/csv.hpp"

#ifndef CDLAB_VERSION_STRING
#define CDLAB_VERSION_STRING "unknown"
#endif

namespace cdlab::tools {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Failure {
  int code = kExitOk;
  std::string kind;
  std::string detail;
};

// Tables are written in name order once the command finishes or fails.
struct Context {
  ExperimentConfig config;
  bool has_config = false;
  std::map<std::string, CsvTable> tables;
  json notes = json::object();
  int exit_code = kExitOk;

  CsvTable& table(const std::string& file, std::vector<std::string> header) {
    CsvTable& t = tables[file];
    t.set_header(std::move(header));
    return t;
  }
};

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return format_number(v); }

void add_complex_columns(std::vector<std::string>& header, const std::string& name) {
  header.push_back(name + "_re");
  header.push_back(name + "_im");
}

void push_complex(std::vector<std::string>& row, cplx v) {
  row.push_back(num(v.real()));
  row.push_back(num(v.imag()));
}

void cmd_classify(Context& ctx) {
  const ModelSpec& spec = ctx.config.model;
  CsvTable& t = ctx.table("classify.csv", {"i", "j", "span", "lambda_gap", "threshold", "tag", "regime"});
  const BoundednessVerdict v = classify_boundedness(spec);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = i + 1; j < spec.n; ++j) {
      const std::size_t span = j - i;
      t.add_row({num(i), num(j), num(span), num(spec.lambda(j) - spec.lambda(i)),
                 num(static_cast<double>(2 * span) - 2.0), to_string(v.tags[i][j]), to_string(v.regime)});
    }
  }
  ctx.notes["regime"] = to_string(v.regime);
  ctx.notes["max_bounded_span"] = v.max_bounded_span;
}

void cmd_assemble(Context& ctx) {
  const ModelSpec& spec = ctx.config.model;
  CsvTable& t = ctx.table("assemble.csv", {"quantity", "value"});
  const TruncatedOperator T = assemble(spec);
  t.add_row({"dim", num(T.dim())});
  t.add_row({"block_dim", num(T.block_dim())});
  t.add_row({"blocks", num(T.num_blocks())});
  t.add_row({"band_lower", num(static_cast<double>(T.band().first))});
  t.add_row({"band_upper", num(static_cast<double>(T.band().second))});
  t.add_row({"nonzeros", num(T.nonzero_count())});
  t.add_row({"frobenius", num(T.frobenius())});
  t.add_row({"operator_norm", num(operator_norm(T, ctx.config.tolerance).value)});
  t.add_row({"intertwining_residual", num(check_intertwining(T))});
  const HomogeneityResult h = is_homogeneous(spec, ctx.config.tolerance);
  t.add_row({"homogeneous", h.homogeneous ? "1" : "0"});
  if (h.recovered) {
    for (std::size_t p = 0; p < h.recovered->size(); ++p) t.add_row({"recovered_mu_" + num(p), num((*h.recovered)[p])});
  }
}

void cmd_geometry(Context& ctx) {
  const ModelSpec& spec = ctx.config.model;
  const GeometrySettings& gs = ctx.config.geometry;
  const std::size_t n = spec.n;
  std::vector<std::string> header{"re_w", "im_w"};
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k; l < n; ++l) add_complex_columns(header, "h_" + num(k) + "_" + num(l));
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) add_complex_columns(header, "curvature_" + num(k) + "_" + num(l));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) add_complex_columns(header, "theta_" + num(i) + "_" + num(i + 1));
  if (gs.general) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) add_complex_columns(header, "theta_general_" + num(i) + "_" + num(j));
    }
  }
  CsvTable& t = ctx.table("geometry.csv", header);
  const DiscGrid grid = DiscGrid::polar(gs.radii, gs.angles, gs.step);
  const GeometryReport report = geometry_report(spec, grid, gs.general);
  for (const GeometryPoint& p : report.points) {
    std::vector<std::string> row{num(p.w.real()), num(p.w.imag())};
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = k; l < n; ++l) push_complex(row, p.grammian(k, l));
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) push_complex(row, p.curvature(k, l));
    }
    for (const cplx& th : p.sff_adjacent) push_complex(row, th);
    if (gs.general) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) push_complex(row, p.sff_general[i][j]);
      }
    }
    t.add_row(std::move(row));
  }
}

void cmd_sylvester(Context& ctx) {
  const SylvesterSettings& s = ctx.config.sylvester;
  CsvTable& t = ctx.table("sylvester.csv", {"lambda0", "valency", "k", "lambda_k1", "trunc", "residual", "fit_trunc",
                                            "fitted_exponent", "expected_exponent", "verdict"});
  struct Cell {
    double lambda0, valency;
    std::size_t k;
  };
  std::vector<Cell> cells;
  for (double l0 : s.lambda0) {
    for (double v : s.valency) {
      for (std::size_t k : s.shifts) cells.push_back({l0, v, k});
    }
  }
  std::vector<std::vector<std::string>> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const Cell& cell = cells[c];
    const double lk1 = cell.lambda0 + static_cast<double>(cell.k + 1) * cell.valency;
    const SylvesterSolution sol = solve_sylvester_closed(cell.lambda0, lk1, cell.k, s.trunc);
    const SylvesterSolution fit = solve_sylvester_closed(cell.lambda0, lk1, cell.k, s.fit_trunc);
    const double expected = (cell.lambda0 - lk1 + 2.0 * static_cast<double>(cell.k) + 2.0) / 2.0;
    rows[c] = {num(cell.lambda0), num(cell.valency), num(cell.k), num(lk1), num(s.trunc), num(sol.residual),
               num(s.fit_trunc), fit.fitted_exponent ? num(*fit.fitted_exponent) : "", num(expected),
               to_string(fit.bounded_verdict)};
  });
  for (auto& r : rows) t.add_row(std::move(r));
}

void cmd_reduce(Context& ctx) {
  CsvTable& t = ctx.table("reduce.csv", {"n", "trunc", "offdiag_residual", "cond_Y", "margin", "Y_nonzeros"});
  for (std::size_t scale : {1, 2}) {
    ModelSpec spec = ctx.config.model;
    spec.trunc *= scale;
    const ReductionResult r = similarity_reduce(spec);
    t.add_row({num(spec.n), num(spec.trunc), num(r.offdiag_residual), num(r.cond_Y), num(r.margin),
               num(r.Y.nonzero_count())});
  }
}

void cmd_commutant(Context& ctx) {
  CsvTable& t = ctx.table("commutant.csv", {"degree", "residual", "x_max_abs", "x_nonzeros"});
  std::mt19937_64 rng(ctx.config.seed);
  auto coord = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
  for (std::size_t d = 0; d <= ctx.config.commutant.max_degree; ++d) {
    std::vector<cplx> phi(d + 1);
    for (cplx& a : phi) {
      const double re = coord();
      a = cplx(re, coord());
    }
    const CommutantResult r = commutant_element(ctx.config.model, phi);
    t.add_row({num(d), num(r.residual), num(r.X.max_abs()), num(r.X.nonzero_count())});
  }
}

void cmd_powerbound(Context& ctx) {
  const PowerBoundSettings& pb = ctx.config.powerbound;
  CsvTable& trace_table = ctx.table("powerbound.csv", {"n", "norm", "cumulative_slope"});
  CsvTable& summary = ctx.table("powerbound_summary.csv", {"quantity", "value"});
  ModelSpec spec = ctx.config.model;
  spec.trunc = pb.trunc;
  PowerTrace trace;
  if (pb.reduce) {
    const ReductionResult r = similarity_reduce(spec);
    PowerTraceOptions opts;
    opts.edge_margin = r.margin;
    opts.tol = ctx.config.tolerance;
    trace = power_trace(r.interior_conjugated(), pb.n_max, opts);
  } else {
    PowerTraceOptions opts;
    opts.tol = ctx.config.tolerance;
    trace = power_trace(assemble(spec), pb.n_max, opts);
  }
  for (std::size_t k = 0; k < trace.n_values.size(); ++k) {
    trace_table.add_row({num(trace.n_values[k]), num(trace.norms[k]), num(trace.cumulative_slopes[k])});
  }
  summary.add_row({"operator", pb.reduce ? "reduced" : "assembled"});
  summary.add_row({"classification", to_string(trace.classification)});
  summary.add_row({"slope", num(trace.slope)});
  summary.add_row({"r2", num(trace.r2)});
  summary.add_row({"max_tail_ratio", num(trace.max_tail_ratio)});
}

void cmd_suite(Context& ctx, std::uint64_t seed) {
  CsvTable& t = ctx.table("suite.csv", {"criterion", "name", "result", "measured", "threshold"});
  const std::vector<CriterionResult> results = run_battery(seed);
  json timings = json::object();
  bool all = true;
  for (const CriterionResult& r : results) {
    t.add_row({num(static_cast<std::size_t>(r.id)), r.name, r.passed ? "pass" : "fail", r.measured, r.threshold});
    timings[std::to_string(r.id)] = {{"seconds", r.seconds}, {"budget_seconds", r.budget_seconds}};
    all = all && r.passed;
  }
  ctx.notes["battery_seed"] = seed;
  ctx.notes["criterion_timings"] = timings;
  if (!all) ctx.exit_code = kExitChecksFailed;
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

json overrides_json(const Overrides& o) {
  json j = json::object();
  if (o.trunc) j["trunc"] = *o.trunc;
  if (o.seed) j["seed"] = *o.seed;
  if (o.tol) j["tol"] = *o.tol;
  return j;
}

Failure classify_exception(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError& e) {
    return {kExitInvalidInput, "invalid_config", e.what()};
  } catch (const UnboundedEntry& e) {
    return {kExitUnboundedEntry, "unbounded_entry",
            "i=" + std::to_string(e.row()) + " j=" + std::to_string(e.col()) + ": " + e.what()};
  } catch (const ValencyTooSmall& e) {
    return {kExitValencyTooSmall, "valency_too_small", e.what()};
  } catch (const NumericalError& e) {
    return {kExitNumerical, "numerical", e.what()};
  } catch (const ConsistencyError& e) {
    return {kExitNumerical, "numerical", e.what()};
  } catch (const DomainError& e) {
    return {kExitInvalidInput, "invalid_argument", e.what()};
  } catch (const ArgumentError& e) {
    return {kExitInvalidInput, "invalid_argument", e.what()};
  } catch (const std::exception& e) {
    return {kExitCrash, "crash", e.what()};
  } catch (...) {
    return {kExitCrash, "crash", "unknown exception"};
  }
}

const std::map<std::string, std::string>& primary_outputs() {
  static const std::map<std::string, std::string> files = {
      {"classify", "classify.csv"},   {"assemble", "assemble.csv"},   {"geometry", "geometry.csv"},
      {"sylvester", "sylvester.csv"}, {"reduce", "reduce.csv"},       {"commutant", "commutant.csv"},
      {"powerbound", "powerbound.csv"}, {"suite", "suite.csv"},
  };
  return files;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"classify", "assemble",   "geometry", "sylvester", "reduce",
                                                 "commutant", "powerbound", "suite",    "validate"};
  return names;
}

int run(const RunOptions& options, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), options.command) == names.end()) {
    log << "cdlab: unknown command '" << options.command << "'\n";
    return kExitInvalidInput;
  }
  const bool validate_only = options.command == "validate";
  if (options.config_path.empty() && options.command != "suite") {
    log << "cdlab: " << options.command << " needs --config\n";
    return kExitInvalidInput;
  }
  if (options.out_dir.empty() && !validate_only) {
    log << "cdlab: " << options.command << " needs --out\n";
    return kExitInvalidInput;
  }

  Context ctx;
  Failure failure;
  try {
    if (!options.config_path.empty()) {
      ctx.config = parse_config_file(options.config_path);
      ctx.has_config = true;
    }
    apply_overrides(ctx.config, options.overrides);
  } catch (...) {
    failure = classify_exception(std::current_exception());
  }
  if (validate_only) {
    if (failure.code != kExitOk) {
      log << "cdlab: invalid config: " << failure.detail << "\n";
      return failure.code;
    }
    log << "cdlab: " << options.config_path << " is valid\n";
    return kExitOk;
  }

  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) {
    log << "cdlab: cannot create " << options.out_dir << ": " << ec.message() << "\n";
    return kExitCrash;
  }
  const std::string primary = primary_outputs().at(options.command);
  ctx.tables[primary];

  if (failure.code == kExitOk) {
    try {
      const std::string& c = options.command;
      if (c == "classify") cmd_classify(ctx);
      if (c == "assemble") cmd_assemble(ctx);
      if (c == "geometry") cmd_geometry(ctx);
      if (c == "sylvester") cmd_sylvester(ctx);
      if (c == "reduce") cmd_reduce(ctx);
      if (c == "commutant") cmd_commutant(ctx);
      if (c == "powerbound") cmd_powerbound(ctx);
      if (c == "suite") {
        const std::uint64_t seed = options.overrides.seed ? *options.overrides.seed
                                   : ctx.has_config        ? ctx.config.seed
                                                           : kDefaultBatterySeed;
        cmd_suite(ctx, seed);
      }
    } catch (...) {
      failure = classify_exception(std::current_exception());
    }
  }

  const int code = failure.code != kExitOk ? failure.code : ctx.exit_code;
  const CsvStatus status = failure.code == kExitOk ? CsvStatus{} : CsvStatus{false, failure.kind, failure.detail};
  json outputs = json::array();
  try {
    for (const auto& [file, table] : ctx.tables) {
      table.write((fs::path(options.out_dir) / file).string(), status);
      outputs.push_back(file);
    }
  } catch (const std::exception& e) {
    log << "cdlab: " << e.what() << "\n";
    return kExitCrash;
  }

  json manifest;
  manifest["tool"] = "cdlab";
  manifest["command"] = options.command;
  manifest["config_path"] = options.config_path;
  json parsed = nullptr;
  if (ctx.has_config) parsed = json::parse(ctx.config.text, nullptr, false);
  manifest["config"] = parsed;
  manifest["overrides"] = overrides_json(options.overrides);
  manifest["seed"] = ctx.config.seed;
  manifest["threads"] = worker_limit();
  manifest["versions"] = {{"cdlab", CDLAB_VERSION_STRING},
                          {"eigen", eigen_version()},
                          {"compiler", __VERSION__},
                          {"cplusplus", __cplusplus}};
  manifest["notes"] = ctx.notes;
  manifest["outputs"] = outputs;
  manifest["timings"] = {
      {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  manifest["status"] = {{"ok", failure.code == kExitOk}, {"exit_code", code}, {"kind", failure.kind},
                        {"message", failure.detail}};
  std::ofstream out(fs::path(options.out_dir) / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << "\n";
  if (!out) {
    log << "cdlab: cannot write manifest.json\n";
    return kExitCrash;
  }
  if (failure.code != kExitOk) log << "cdlab: " << failure.kind << ": " << failure.detail << "\n";
  return code;
}

}  // namespace cdlab::tools
