#include "borelq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "borelq/bundle.hpp"
#include "borelq/config.hpp"
#include "borelq/dynamics.hpp"
#include "borelq/error.hpp"
#include "borelq/gauge.hpp"
#include "borelq/io.hpp"
#include "borelq/verify.hpp"
#include "json.hpp"

namespace borelq::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void report_error(std::ostream& err, const std::exception& e) { err << "error: " << e.what() << '\n'; }

std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.bin", index);
  return buf;
}

/// JSON numbers cannot be inf/nan; those become strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return io::format_double(v);
}

void write_plots(const fs::path& dir, const RunConfig& cfg, const Grid& grid, const EvolveResult& result,
                 std::span<const cplx> psi0) {
  std::vector<double> t;
  std::vector<double> drift;
  std::vector<double> ehr;
  std::vector<double> fp;
  for (const auto& r : result.records) {
    t.push_back(r.time);
    drift.push_back(std::abs(r.norm - result.initial_norm));
    ehr.push_back(r.ehrenfest_max);
    fp.push_back(r.fp_residual);
  }
  io::PlotOptions diag{"diagnostics", "time", "log10 value", true};
  std::vector<io::Series> series{{"|norm - norm0|", t, drift}, {"continuity residual", t, fp}};
  if (!cfg.ehrenfest.empty()) series.push_back({"Ehrenfest residual", t, ehr});
  io::write_text(dir / "diagnostics.svg", io::svg_line_plot(series, diag));

  const RField rho0 = density(psi0);
  const RField rho1 = density(result.final_state);
  if (grid.dims() == 1) {
    std::vector<double> x;
    for (std::size_t i = 0; i < grid.size(); ++i) x.push_back(grid.coordinate(0, i));
    io::PlotOptions opt{"density", "x", "rho", false};
    io::write_text(dir / "density.svg",
                   io::svg_line_plot({{"t = 0", x, rho0}, {"t = " + io::format_double(result.final_time), x, rho1}}, opt));
  } else {
    io::PlotOptions opt{"final density", "", "", false};
    io::write_text(dir / "density.svg", io::svg_heatmap(rho1, grid.points(0), grid.points(1), opt));
  }
}

int run_evolve(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const PreconditionError& e) {
    report_error(err, e);
    return kExitInvalid;
  }
  const Grid grid = cfg.make_grid();
  const DGParams params = cfg.make_params(grid);
  const CField psi0 = cfg.make_initial(grid);
  const fs::path dir = resolve_output_dir(cfg.output_dir);
  fs::create_directories(dir / "snapshots");
  for (const auto& entry : fs::directory_iterator(dir / "snapshots"))
    if (entry.path().extension() == ".bin") fs::remove(entry.path());

  EvolveResult result;
  try {
    result = evolve(psi0, params, grid, cfg.make_evolve_options());
  } catch (const PreconditionError& e) {
    report_error(err, e);
    return kExitInvalid;
  } catch (const Error& e) {
    report_error(err, e);
    json summary{{"status", "error"}, {"message", e.what()}};
    io::write_text(dir / "summary.json", summary.dump(2) + "\n");
    return kExitRuntime;
  }

  for (std::size_t k = 0; k < result.snapshots.size(); ++k)
    io::write_snapshot(dir / "snapshots" / snapshot_name(k), grid, result.snapshots[k].time, result.snapshots[k].psi);
  {
    std::ofstream csv(dir / "diagnostics.csv", std::ios::binary);
    if (!csv) throw Error("cannot write " + (dir / "diagnostics.csv").string());
    io::write_diagnostics_csv(csv, result.records, cfg.ehrenfest.size(), cfg.probes);
  }

  const double final_norm = result.records.back().norm;
  json summary{
      {"status", std::string(to_string(result.status))},
      {"message", result.message},
      {"manifold", std::string(to_string(cfg.manifold.kind))},
      {"points", cfg.points},
      {"dt", result.dt},
      {"steps", result.steps},
      {"final_time", result.final_time},
      {"initial_norm", number(result.initial_norm)},
      {"final_norm", number(final_norm)},
      {"norm_drift", number(result.norm_drift)},
      {"min_rho", number(result.min_rho)},
      {"density_floor", result.floor},
      {"ehrenfest_max", number(result.ehrenfest_max)},
      {"fp_max", number(result.fp_max)},
      {"snapshots", result.snapshots.size()},
      {"conventions",
       {{"current", std::string(to_string(cfg.conventions.current))},
        {"twist", std::string(to_string(cfg.conventions.twist))}}},
  };
  io::write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (cfg.svg) write_plots(dir, cfg, grid, result, psi0);

  out << config_path.string() << ": " << to_string(result.status) << ", " << result.steps << " steps, norm drift "
      << io::format_double(result.norm_drift) << ", output " << dir.string() << '\n';
  if (result.status != EvolveStatus::Completed) {
    err << "error: run aborted: " << result.message << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int cmd_evolve(const fs::path& config, std::ostream& out, std::ostream& err) {
  try {
    return run_evolve(config, out, err);
  } catch (const PreconditionError& e) {
    report_error(err, e);
    return kExitInvalid;
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitRuntime;
  }
}

int cmd_verify(std::string_view suite, std::ostream& out, std::ostream& err,
               const std::optional<fs::path>& report_path) {
  SuiteReport report;
  try {
    report = run_suite(suite);
  } catch (const PreconditionError& e) {
    report_error(err, e);
    return kExitInvalid;
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitRuntime;
  }
  const std::string text = to_json(report);
  out << text << '\n';
  if (report_path) io::write_text(*report_path, text + "\n");
  return report.pass() ? kExitOk : kExitCheckFailed;
}

int cmd_check_field(double phi0, double e, double hbar, std::ostream& out, std::ostream& err) {
  try {
    const DiracReport d = dirac_admissible(phi0, e, hbar);
    const Grid torus(ManifoldSpec::torus2(), {8, 8});
    const FieldConfig field{TwoForm::constant(torus, phi0), e, hbar};
    const IntegralityReport q = integrality_check(field, torus);
    const bool admissible = d.admissible();
    json j{{"phi0", phi0},
           {"e", e},
           {"hbar", hbar},
           {"lattice_spacing", dirac_lattice_spacing(e, hbar)},
           {"n_nearest", d.n_nearest},
           {"phi0_nearest", d.phi0_nearest},
           {"residual", d.residual},
           {"torus_flux_number", q.cycle_value},
           {"torus_admissible", q.admissible},
           {"admissible", admissible}};
    out << j.dump(2) << '\n';
    out << (admissible ? "admissible" : "inadmissible") << ": nearest phi0 = " << io::format_double(d.phi0_nearest)
        << " (n = " << d.n_nearest << "), residual " << io::format_double(d.residual) << '\n';
    return kExitOk;
  } catch (const PreconditionError& ex) {
    report_error(err, ex);
    return kExitInvalid;
  }
}

int cmd_gauge_fit(const fs::path& config, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_config(config);
    const Grid grid = cfg.make_grid();
    const DGParams params = cfg.make_params(grid);
    const CField psi0 = cfg.make_initial(grid);
    const auto& gs = cfg.gauge;
    std::vector<CField> trajectory;
    const double mid = 0.5 * static_cast<double>(gs.snapshots - 1);
    for (std::size_t k = 0; k < gs.snapshots; ++k)
      trajectory.push_back(exact_free_evolution(psi0, gs.t0 + (static_cast<double>(k) - mid) * gs.spacing, params.kin,
                                                grid, params.conventions.twist));

    json rows = json::array();
    char line[512];
    std::snprintf(line, sizeof line, "%8s %8s %12s %12s %10s", "Lambda", "gamma", "residual", "ablated", "ratio");
    out << line;
    for (const char* c : kFitColumns) out << ' ' << c;
    out << '\n';
    for (double gamma : gs.gammas) {
      const GaugeParams g{gs.lambda, gamma};
      const FitResult full = linearization_fit(trajectory, gs.spacing, g, params, grid);
      json row{{"lambda", g.lambda},
               {"gamma", gamma},
               {"residual", full.residual},
               {"rank", full.rank},
               {"rank_deficient", full.rank_deficient},
               {"coefficients", json::object()}};
      for (std::size_t c = 0; c < kFitColumns.size(); ++c) row["coefficients"][kFitColumns[c]] = full.coefficients[c];
      double ablated = NAN;
      if (!gs.excluded.empty()) {
        FitOptions opt;
        opt.excluded = gs.excluded;
        const FitResult cut = linearization_fit(trajectory, gs.spacing, g, params, grid, opt);
        ablated = cut.residual;
        row["ablated_residual"] = cut.residual;
        json names = json::array();
        for (std::size_t c : gs.excluded) names.push_back(kFitColumns[c]);
        row["excluded"] = names;
      }
      rows.push_back(row);
      std::snprintf(line, sizeof line, "%8.4g %8.4g %12.4e %12.4e %10.3g", g.lambda, gamma, full.residual, ablated,
                    ablated / full.residual);
      out << line;
      for (double v : full.coefficients) out << ' ' << io::format_double(v);
      out << '\n';
    }
    const fs::path dir = resolve_output_dir(cfg.output_dir);
    fs::create_directories(dir);
    io::write_text(dir / "gauge_fit.json", json{{"fits", rows}}.dump(2) + "\n");
    return kExitOk;
  } catch (const PreconditionError& e) {
    report_error(err, e);
    return kExitInvalid;
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitRuntime;
  }
}

int cmd_sweep(const fs::path& dir, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> configs;
  try {
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".ini") configs.push_back(entry.path());
  } catch (const fs::filesystem_error& e) {
    report_error(err, e);
    return kExitInvalid;
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    err << "error: [cli] no .ini configs in " << dir.string() << '\n';
    return kExitInvalid;
  }
  std::set<fs::path> outputs;
  for (const auto& c : configs) {
    try {
      const auto o = fs::weakly_canonical(resolve_output_dir(parse_config(c).output_dir));
      if (!outputs.insert(o).second) {
        err << "error: [cli] " << c.string() << " shares output directory " << o.string() << " with another config\n";
        return kExitInvalid;
      }
    } catch (const PreconditionError& e) {
      err << c.string() << ": ";
      report_error(err, e);
      return kExitInvalid;
    }
  }

  std::vector<int> codes(configs.size(), 0);
  std::vector<std::string> outs(configs.size());
  std::vector<std::string> errs(configs.size());
  const auto n = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    std::ostringstream o;
    std::ostringstream e;
    codes[i] = cmd_evolve(configs[i], o, e);
    outs[i] = o.str();
    errs[i] = e.str();
  }
  int worst = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out << outs[i];
    err << errs[i];
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

}  // namespace borelq::cli
