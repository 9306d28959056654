#include "borelq/bundle.hpp"

#include <cmath>

#include "borelq/error.hpp"

namespace borelq {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError("bundle", message);
}

}  // namespace

void FieldConfig::validate() const {
  require(std::isfinite(hbar) && hbar > 0.0, "hbar must be positive");
  require(std::isfinite(e), "e must be finite");
  for (double v : phi.phi01) require(std::isfinite(v), "field two-form must be finite");
}

double curvature_scale(const FieldConfig& config) {
  config.validate();
  return config.e / config.hbar;
}

IntegralityReport integrality_check(const FieldConfig& config, const Grid& grid, double tol) {
  config.validate();
  require(grid.manifold().kind == ManifoldKind::Torus2,
          "integrality check needs the torus fundamental 2-cycle; got " +
              std::string(to_string(grid.manifold().kind)));
  IntegralityReport r;
  r.cycle_value = config.e * two_form_integral(config.phi, grid) / (kTwoPi * config.hbar);
  r.nearest_integer = std::lround(r.cycle_value);
  r.residual = std::abs(r.cycle_value - static_cast<double>(r.nearest_integer));
  r.admissible = r.residual < tol;
  return r;
}

double dirac_lattice_spacing(double e, double hbar) {
  require(e != 0.0, "e = 0 imposes no quantization condition");
  require(std::isfinite(hbar) && hbar > 0.0, "hbar must be positive");
  return hbar / (kTwoPi * e);
}

DiracReport dirac_admissible(double phi0, double e, double hbar) {
  require(std::isfinite(phi0), "phi0 must be finite");
  const double spacing = dirac_lattice_spacing(e, hbar);
  DiracReport r;
  r.n_nearest = std::lround(kTwoPi * e * phi0 / hbar);
  r.phi0_nearest = hbar * static_cast<double>(r.n_nearest) / (kTwoPi * e);
  r.residual = std::abs(phi0 - r.phi0_nearest);
  r.lattice_residual = r.residual / std::abs(spacing);
  return r;
}

}  // namespace borelq
