#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "borelq/dynamics.hpp"
#include "borelq/geometry.hpp"

namespace borelq::io {

// Snapshot file, little-endian:
//   int64   manifold kind (0 circle, 1 torus2, 2 line segment)
//   int64   N_d for each dimension
//   float64 L_d for each dimension
//   float64 time
//   float64 re, im per sample, row-major grid order

struct SnapshotFile {
  ManifoldKind kind = ManifoldKind::Circle;
  std::vector<std::size_t> points;
  std::vector<double> extents;
  double time = 0.0;
  CField psi;
};

void write_snapshot(const std::filesystem::path& path, const Grid& grid, double time, std::span<const cplx> psi);
SnapshotFile read_snapshot(const std::filesystem::path& path);

/// Header `time,norm,min_rho,ehrenfest_max,fp_residual`, then one column per
/// Ehrenfest function (`ehrenfest_<i>`) and one per probe (`<kind>_<name>`).
/// Values use 17 significant digits so equal runs give equal bytes.
void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records,
                           std::size_t ehrenfest_count, const std::vector<Probe>& probes);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 420;
};

std::string svg_line_plot(const std::vector<Series>& series, const PlotOptions& options);
/// Row-major values on an n0 x n1 grid, drawn as a grayscale heat map.
std::string svg_heatmap(std::span<const double> values, std::size_t n0, std::size_t n1, const PlotOptions& options);

/// Creates missing parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

/// %.17g formatting.
std::string format_double(double v);

}  // namespace borelq::io
