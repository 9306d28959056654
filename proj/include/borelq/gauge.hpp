#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "borelq/dynamics.hpp"
#include "borelq/geometry.hpp"

namespace borelq {

/// N_(Lambda, gamma): (rho, S) -> (rho, Lambda S + (gamma / 2) ln rho).
struct GaugeParams {
  double lambda = 1.0;
  double gamma = 0.0;

  void validate() const;
  static GaugeParams identity() { return {1.0, 0.0}; }
};

/// g1 o g2 = (L1 L2, g1 + L1 g2): apply g2 first.
GaugeParams compose_gauge(const GaugeParams& g1, const GaugeParams& g2);
GaugeParams inverse(const GaugeParams& g);

struct GaugeOptions {
  /// Nodes: rho < floor_rel * max rho is rejected.
  double floor_rel = 1e-12;
  /// Tolerance for the gauge phase mismatch across seams and loops (radians).
  double seam_tol = 1e-8;
};

/// Grid phase unwrapped from arg psi at index 0: along dimension 0 at i1 = 0,
/// then along dimension 1. `anchor`, when given, selects the branch of
/// S(0) nearest to it.
RField unwrap_phase(std::span<const cplx> psi, const Grid& grid, std::optional<double> anchor = {});

/// psi * exp(i ((Lambda - 1) S + (gamma / 2) ln rho)). Density is untouched
/// up to one rounding of the unimodular factor. Rejects nodes and gauges
/// that make the phase multivalued (Lambda * winding not an integer).
CField apply_gauge(std::span<const cplx> psi, const GaugeParams& g, const Grid& grid,
                   const GaugeOptions& options = {}, std::optional<double> anchor = {});

/// Applies the gauge along a time series, keeping the branch of S(0)
/// continuous in time.
std::vector<CField> apply_gauge_series(std::span<const CField> series, const GaugeParams& g, const Grid& grid,
                                       const GaugeOptions& options = {});

/// Basis columns for dpsi/dt / psi:
///   kinetic    i lap_w psi / psi
///   potential  -i
///   diffusion  lap rho / rho
///   R1..R5     -i R_j
inline constexpr std::array<const char*, 8> kFitColumns{"kinetic", "potential", "diffusion", "R1",
                                                        "R2",      "R3",        "R4",        "R5"};

struct FitOptions {
  std::vector<std::size_t> excluded;  // column indices dropped from the basis
  double rank_tol = 1e-10;            // relative pivot threshold
};

struct FitResult {
  std::array<double, 8> coefficients{};  // excluded columns report 0
  double residual = 0.0;                 // ||A a - b|| / ||b||
  std::size_t rank = 0;
  std::size_t columns = 0;
  bool rank_deficient = false;
  std::size_t rows = 0;
};

/// Transforms each snapshot of a linear trajectory (spacing dt, at least 5),
/// differentiates in time with the five-point fourth-order stencil and fits
/// dpsi'/dt / psi' at every grid point of the interior snapshots by least
/// squares (rank-revealing QR). The current inside R_j follows
/// params.conventions.
FitResult linearization_fit(std::span<const CField> trajectory, double dt, const GaugeParams& g,
                            const DGParams& params, const Grid& grid, const FitOptions& options = {});

/// Exact evolution of the linear equation with constant omega and V = 0:
/// each Fourier mode rotates by exp(i hbar t lambda_k / 2), lambda_k the
/// eigenvalue of the twisted Laplacian.
CField exact_free_evolution(std::span<const cplx> psi0, double t, const KinematicsParams& kin, const Grid& grid,
                            TwistCoupling coupling = TwistCoupling::Half);

}  // namespace borelq
