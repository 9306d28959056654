#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "borelq/geometry.hpp"
#include "borelq/kinematics.hpp"
#include "borelq/trig.hpp"

namespace borelq {

/// Prefactor of the convective current: Full uses hbar/i, Conventional hbar/2i.
enum class CurrentPrefactor { Full, Conventional };

struct Conventions {
  CurrentPrefactor current = CurrentPrefactor::Full;
  TwistCoupling twist = TwistCoupling::Half;

  /// Both switches on the conventional side; the continuity equation and the
  /// Ehrenfest relation close exactly in this setting.
  static Conventions conventional() { return {CurrentPrefactor::Conventional, TwistCoupling::Conventional}; }
};

std::string_view to_string(CurrentPrefactor p);
std::string_view to_string(TwistCoupling t);

/// Parameters of
///   i hbar dpsi/dt = (-hbar^2/2 lap_w + V) psi + i (hbar c / 2)(lap rho / rho) psi + (sum_j d_j R_j) psi.
struct DGParams {
  KinematicsParams kin;
  RField potential;                 // empty means V = 0
  std::array<double, 5> d_coeffs{};  // R_1 .. R_5
  double dt = 1e-3;
  /// Absolute density floor; unset means 1e-12 * max rho of the state it is applied to.
  std::optional<double> density_floor;
  Conventions conventions;
  /// dt must not exceed stability_factor * h_min^2 * g_min / hbar.
  double stability_factor = 0.5;

  /// Nonlinear when c != 0 or some d_j != 0; only then is the floor enforced.
  bool is_nonlinear() const;
  bool has_r_terms() const;
  void validate(const Grid& grid) const;
};

double stability_bound(const Grid& grid, double hbar, double factor = 0.5);

RField density(std::span<const cplx> psi);

/// j = a (conj(psi) grad psi - psi grad conj(psi)) + rho g#w with a = hbar/i
/// or hbar/2i. Throws NumericalError when the imaginary residue exceeds
/// imag_tol * max(1, max |j|) (aliasing).
std::vector<RField> current(std::span<const cplx> psi, const OneForm& omega, double hbar, const Grid& grid,
                            CurrentPrefactor prefactor = CurrentPrefactor::Full, double imag_tol = 1e-12);

/// Resolved density floor for `rho` under `params`.
double resolve_floor(const DGParams& params, std::span<const double> rho);

/// R_1 = div j / rho, R_2 = lap rho / rho, R_3 = g(j, j) / rho^2,
/// R_4 = d rho . j / rho^2, R_5 = d rho . grad rho / rho^2, with rho
/// replaced by max(rho, floor) in denominators. Throws DensityFloorError when
/// min rho < floor.
std::array<RField, 5> rj_functionals(std::span<const cplx> psi, const DGParams& params, const Grid& grid);

/// dpsi/dt. For nonlinear parameters throws DensityFloorError below the floor.
CField rhs(std::span<const cplx> psi, const DGParams& params, const Grid& grid);
/// Same with an explicit floor (used inside evolve).
CField rhs(std::span<const cplx> psi, const DGParams& params, const Grid& grid, double floor);

/// Expectation probe: <Q(f)> when `x` is empty, otherwise Re <P(x)>.
struct Probe {
  std::string name;
  TrigPoly f;
  std::optional<VectorFieldSpec> x;
};

struct DiagnosticsRecord {
  double time = 0.0;
  double norm = 0.0;
  double min_rho = 0.0;
  std::vector<double> ehrenfest;  // one per Ehrenfest test function
  double ehrenfest_max = 0.0;
  double fp_residual = 0.0;
  std::vector<double> probes;
};

struct Snapshot {
  double time = 0.0;
  CField psi;
};

struct EvolveOptions {
  double t_end = 1.0;
  /// Snapshot every k steps; 0 keeps only the initial and final states.
  std::size_t snapshot_every = 0;
  std::vector<TrigPoly> ehrenfest_functions;
  std::vector<Probe> probes;
  /// Norm growth or loss by more than this factor aborts as unstable.
  double blowup_factor = 10.0;
};

enum class EvolveStatus { Completed, DensityFloor, NonFinite, Unstable };
std::string_view to_string(EvolveStatus status);

struct EvolveResult {
  EvolveStatus status = EvolveStatus::Completed;
  std::string message;
  double dt = 0.0;      // effective step T / n
  std::size_t steps = 0;  // completed steps
  double floor = 0.0;
  CField final_state;
  double final_time = 0.0;
  std::vector<DiagnosticsRecord> records;
  std::vector<Snapshot> snapshots;
  double initial_norm = 0.0;
  double norm_drift = 0.0;       // |norm(T) - norm(0)| of the squared L2 norm
  double min_rho = 0.0;          // over all records
  double ehrenfest_max = 0.0;    // over interior records
  double fp_max = 0.0;           // over all pairs
};

/// n = ceil(T / dt) steps of classic RK4 with size T / n. Diagnostics every
/// step; the Ehrenfest derivative uses central differences (one-sided
/// second-order at the ends). Record n carries the continuity residual of
/// the pair (n-1, n); record 0 that of (0, 1). Throws PreconditionError for
/// invalid inputs or dt above the stability bound.
EvolveResult evolve(std::span<const cplx> psi0, const DGParams& params, const Grid& grid,
                    const EvolveOptions& options);

/// ||(rho_b - rho_a)/dt + div j_mid - c lap rho_mid||, midpoint terms by averaging.
double fokker_planck_residual(std::span<const cplx> psi_a, std::span<const cplx> psi_b, double dt,
                              const DGParams& params, const Grid& grid);

/// max over interior snapshots of |d/dt <Q(f)> - Re <P(grad_g f)>|, the
/// derivative by central differences over equally spaced snapshots.
double ehrenfest_residual(const TrigPoly& f, std::span<const CField> window, double dt, const DGParams& params,
                          const Grid& grid);

// Initial states.

/// Normalized plane wave with mode numbers `modes`.
CField plane_wave(const Grid& grid, std::array<long, 2> modes);
/// Sum of a_k e^{i k x} over the given modes and amplitudes, normalized.
CField superposition(const Grid& grid, const std::vector<std::pair<std::array<long, 2>, cplx>>& terms);
/// Periodized Gaussian exp(-|x - x0|^2 / (4 w^2)) e^{i k.x}, normalized.
/// On closed manifolds the images are summed; k must be an integer mode there.
CField gaussian(const Grid& grid, std::span<const double> center, double width, std::span<const double> k);
/// exp(a cos(2 pi x0 / L0) + i b sin(2 pi x0 / L0)), normalized; nodeless.
CField nodeless_state(const Grid& grid, double a, double b);
void normalize(CField& psi, const Grid& grid);

}  // namespace borelq
