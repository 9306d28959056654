#pragma once

#include "borelq/geometry.hpp"

namespace borelq {

/// External field phi with coupling e. The bundle curvature is (i e / hbar) phi.
struct FieldConfig {
  TwoForm phi;
  double e = 0.0;
  double hbar = 1.0;

  void validate() const;
};

/// e / hbar: maps values of phi to |curvature|.
double curvature_scale(const FieldConfig& config);

struct IntegralityReport {
  double cycle_value = 0.0;  // q = e * (integral of phi) / (2 pi hbar)
  long nearest_integer = 0;
  double residual = 0.0;     // |q - round(q)|
  bool admissible = false;
};

/// Integrality of the flux through the fundamental 2-cycle of the torus.
IntegralityReport integrality_check(const FieldConfig& config, const Grid& grid, double tol = 1e-9);

struct DiracReport {
  long n_nearest = 0;
  double phi0_nearest = 0.0;
  double residual = 0.0;          // |phi0 - phi0_nearest|
  double lattice_residual = 0.0;  // residual in units of the lattice spacing
  bool admissible(double tol = 1e-9) const { return lattice_residual < tol; }
};

/// Nearest point of the lattice phi0 = hbar n / (2 pi e). Rejects e = 0.
DiracReport dirac_admissible(double phi0, double e, double hbar);

/// hbar / (2 pi e).
double dirac_lattice_spacing(double e, double hbar);

}  // namespace borelq
