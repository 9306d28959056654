#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "borelq/dynamics.hpp"
#include "borelq/gauge.hpp"
#include "borelq/geometry.hpp"
#include "borelq/trig.hpp"

namespace borelq {

struct InitialSpec {
  enum class Kind { PlaneWave, Gaussian, Superposition, Nodeless, Random };
  Kind kind = Kind::PlaneWave;
  std::array<long, 2> k{0, 0};
  std::vector<double> center;
  double width = 0.5;
  std::vector<double> momentum;
  std::vector<std::pair<std::array<long, 2>, cplx>> terms;
  double a = 0.2;
  double b = 0.3;
  int degree = 4;
};

struct GaugeSpec {
  double lambda = 1.0;
  std::vector<double> gammas{0.0};
  std::size_t snapshots = 9;
  double spacing = 1e-3;
  double t0 = 0.3;
  std::vector<std::size_t> excluded;
};

/// One run, read from an INI file:
///
///   [manifold]   kind = circle | torus2 | line_segment; points; extents; metric
///   [kinematics] hbar; c; theta (one per dimension); chi (trig; omega = theta + d chi)
///   [dynamics]   potential (trig); d (five reals); dt; T; density_floor;
///                current = full | conventional; twist = half | conventional; stability_factor
///   [initial]    type = plane_wave | gaussian | superposition | nodeless | random
///                k; center; width; momentum; terms ("m0 [m1] re im; ..."); a; b; degree
///   [probes]     ehrenfest ("f1 | f2"); q.<name> = trig; p.<name> = "X^0 | X^1"
///   [output]     dir; snapshot_every; svg; seed
///   [gauge]      lambda; gamma (list); snapshots; spacing; t0; exclude (column names)
///
/// Trig polynomials use "cos m0 [m1] coef; sin m0 [m1] coef; const coef".
struct RunConfig {
  ManifoldSpec manifold;
  std::vector<std::size_t> points{128};

  double hbar = 1.0;
  double c = 0.0;
  std::vector<double> theta;
  TrigPoly chi;

  TrigPoly potential;
  std::array<double, 5> d_coeffs{};
  double dt = 1e-3;
  double t_end = 1.0;
  std::optional<double> density_floor;
  Conventions conventions;
  double stability_factor = 0.5;

  InitialSpec initial;
  std::vector<Probe> probes;
  std::vector<TrigPoly> ehrenfest;

  std::filesystem::path output_dir = "borelq_out";
  std::size_t snapshot_every = 0;
  bool svg = true;
  std::uint64_t seed = 1;

  GaugeSpec gauge;

  Grid make_grid() const;
  KinematicsParams make_kinematics(const Grid& grid) const;
  DGParams make_params(const Grid& grid) const;
  CField make_initial(const Grid& grid) const;
  EvolveOptions make_evolve_options() const;
  /// Checks every precondition the run will hit; throws PreconditionError
  /// naming the owning module.
  void validate() const;
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text);

/// Output directory after applying BORELQ_OUTPUT_ROOT to relative paths.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

}  // namespace borelq
