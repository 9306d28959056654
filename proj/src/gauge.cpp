#include "borelq/gauge.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "borelq/error.hpp"
#include "borelq/fft.hpp"

namespace borelq {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError("gauge", message);
}

double wrap(double a) { return a - kTwoPi * std::round(a / kTwoPi); }

void check_nodeless(std::span<const double> rho, double floor_rel) {
  double mx = 0.0;
  for (double r : rho) mx = std::max(mx, r);
  require(mx > 0.0, "wave function vanishes identically");
  const double floor = floor_rel * mx;
  for (std::size_t i = 0; i < rho.size(); ++i)
    require(rho[i] >= floor && rho[i] > 0.0,
            "node detected at grid index " + std::to_string(i) + " (rho = " + std::to_string(rho[i]) +
                "); the gauge transformation needs a non-vanishing wave function");
}

}  // namespace

void GaugeParams::validate() const {
  require(std::isfinite(lambda) && std::isfinite(gamma), "gauge parameters must be finite");
  require(lambda != 0.0, "Lambda = 0 is not invertible");
}

GaugeParams compose_gauge(const GaugeParams& g1, const GaugeParams& g2) {
  g1.validate();
  g2.validate();
  return {g1.lambda * g2.lambda, g1.gamma + g1.lambda * g2.gamma};
}

GaugeParams inverse(const GaugeParams& g) {
  g.validate();
  return {1.0 / g.lambda, -g.gamma / g.lambda};
}

RField unwrap_phase(std::span<const cplx> psi, const Grid& grid, std::optional<double> anchor) {
  require(psi.size() == grid.size(), "wave function does not match grid");
  RField arg(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) arg[i] = std::arg(psi[i]);
  RField s(psi.size());
  const std::size_t n0 = grid.points(0);
  const std::size_t n1 = grid.dims() > 1 ? grid.points(1) : 1;
  s[0] = arg[0];
  if (anchor) s[0] += kTwoPi * std::round((*anchor - arg[0]) / kTwoPi);
  for (std::size_t i0 = 1; i0 < n0; ++i0) {
    const std::size_t a = (i0 - 1) * n1;
    const std::size_t b = i0 * n1;
    s[b] = s[a] + wrap(arg[b] - arg[a]);
  }
  for (std::size_t i0 = 0; i0 < n0; ++i0)
    for (std::size_t i1 = 1; i1 < n1; ++i1) {
      const std::size_t a = i0 * n1 + i1 - 1;
      s[a + 1] = s[a] + wrap(arg[a + 1] - arg[a]);
    }
  return s;
}

CField apply_gauge(std::span<const cplx> psi, const GaugeParams& g, const Grid& grid, const GaugeOptions& options,
                   std::optional<double> anchor) {
  g.validate();
  require(psi.size() == grid.size(), "wave function does not match grid");
  const std::size_t n = psi.size();
  RField rho(n);
  for (std::size_t i = 0; i < n; ++i) rho[i] = std::norm(psi[i]);
  check_nodeless(rho, options.floor_rel);
  const RField s = unwrap_phase(psi, grid, anchor);

  // Every grid edge, seams included, must see a continuous gauge phase.
  const double lm1 = g.lambda - 1.0;
  if (lm1 != 0.0) {
    const std::size_t n0 = grid.points(0);
    const std::size_t n1 = grid.dims() > 1 ? grid.points(1) : 1;
    const bool closed = grid.manifold().is_closed();
    auto check_edge = [&](std::size_t a, std::size_t b, const char* where) {
      const double m = std::round((s[b] - s[a] - wrap(std::arg(psi[b]) - std::arg(psi[a]))) / kTwoPi);
      if (m == 0.0) return;
      const double turns = lm1 * m;
      const double mismatch = kTwoPi * std::abs(turns - std::round(turns));
      require(mismatch <= options.seam_tol,
              std::string("gauge phase is multivalued: ") + where + " mismatch " + std::to_string(mismatch) +
                  " rad (winding " + std::to_string(static_cast<long>(m)) + ", Lambda " +
                  std::to_string(g.lambda) + ")");
    };
    for (std::size_t i0 = 0; i0 < n0; ++i0)
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        const std::size_t a = i0 * n1 + i1;
        if (i0 + 1 < n0) check_edge(a, a + n1, "plaquette loop");
        else if (closed) check_edge(a, i1, "seam");
        if (n1 > 1) {
          if (i1 + 1 < n1) check_edge(a, a + 1, "plaquette loop");
          else if (closed) check_edge(a, i0 * n1, "seam");
        }
      }
  }

  CField out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = lm1 * s[i] + 0.5 * g.gamma * std::log(rho[i]);
    out[i] = psi[i] * std::polar(1.0, angle);
  }
  return out;
}

std::vector<CField> apply_gauge_series(std::span<const CField> series, const GaugeParams& g, const Grid& grid,
                                       const GaugeOptions& options) {
  std::vector<CField> out;
  std::optional<double> anchor;
  for (const auto& psi : series) {
    const RField s = unwrap_phase(psi, grid, anchor);
    anchor = s[0];
    out.push_back(apply_gauge(psi, g, grid, options, anchor));
  }
  return out;
}

FitResult linearization_fit(std::span<const CField> trajectory, double dt, const GaugeParams& g,
                            const DGParams& params, const Grid& grid, const FitOptions& options) {
  g.validate();
  require(trajectory.size() >= 5, "linearization fit needs at least 5 snapshots");
  require(dt > 0.0 && std::isfinite(dt), "snapshot spacing must be positive");
  std::vector<bool> use(8, true);
  for (std::size_t c : options.excluded) {
    require(c < 8, "excluded column index out of range");
    use[c] = false;
  }
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < 8; ++c)
    if (use[c]) cols.push_back(c);
  require(!cols.empty(), "all fit columns excluded");

  const auto transformed = apply_gauge_series(trajectory, g, grid);
  const std::size_t n = grid.size();
  const std::size_t interior = trajectory.size() - 4;
  const std::size_t rows = 2 * n * interior;
  Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(cols.size()));
  Eigen::VectorXd b(rows);
  const cplx i_unit{0.0, 1.0};
  const cplx minus_i{0.0, -1.0};

  std::size_t row = 0;
  for (std::size_t k = 2; k + 2 < transformed.size(); ++k) {
    const CField& psi = transformed[k];
    const CField lap_w =
        twisted_laplacian(psi, params.kin.omega, params.kin.hbar, grid, params.conventions.twist);
    const RField rho = density(psi);
    const RField lap_rho = laplacian(std::span<const double>(rho), grid);
    const auto r = rj_functionals(psi, params, grid);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx dpsi = (-transformed[k + 2][i] + 8.0 * transformed[k + 1][i] - 8.0 * transformed[k - 1][i] +
                         transformed[k - 2][i]) /
                        (12.0 * dt);
      const cplx target = dpsi / psi[i];
      std::array<cplx, 8> basis{i_unit * lap_w[i] / psi[i],
                                minus_i,
                                cplx{lap_rho[i] / rho[i], 0.0},
                                minus_i * r[0][i],
                                minus_i * r[1][i],
                                minus_i * r[2][i],
                                minus_i * r[3][i],
                                minus_i * r[4][i]};
      for (std::size_t c = 0; c < cols.size(); ++c) {
        a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = basis[cols[c]].real();
        a(static_cast<Eigen::Index>(row + 1), static_cast<Eigen::Index>(c)) = basis[cols[c]].imag();
      }
      b(static_cast<Eigen::Index>(row)) = target.real();
      b(static_cast<Eigen::Index>(row + 1)) = target.imag();
      row += 2;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(options.rank_tol);
  const Eigen::VectorXd x = qr.solve(b);

  FitResult result;
  result.rows = rows;
  result.columns = cols.size();
  result.rank = static_cast<std::size_t>(qr.rank());
  result.rank_deficient = result.rank < cols.size();
  for (std::size_t c = 0; c < cols.size(); ++c) result.coefficients[cols[c]] = x(static_cast<Eigen::Index>(c));
  const double bn = b.norm();
  result.residual = bn > 0.0 ? (a * x - b).norm() / bn : (a * x - b).norm();
  return result;
}

CField exact_free_evolution(std::span<const cplx> psi0, double t, const KinematicsParams& kin, const Grid& grid,
                            TwistCoupling coupling) {
  require(psi0.size() == grid.size(), "wave function does not match grid");
  require(kin.omega.is_constant(), "exact free evolution needs a constant one-form");
  require(grid.manifold().is_closed(), "exact free evolution is defined on closed manifolds");
  const double s = twist_scale(coupling, kin.hbar);
  const auto theta = kin.omega.constant_part();
  CField out(psi0.begin(), psi0.end());
  fft::forward(out, grid.shape());
  const std::size_t n1 = grid.dims() > 1 ? grid.points(1) : 1;
  for (std::size_t i0 = 0; i0 < grid.points(0); ++i0)
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      double lambda = 0.0;
      const double q0 = grid.wavenumbers(0)[i0] + s * theta[0];
      lambda -= grid.inv_metric(0) * q0 * q0;
      if (grid.dims() > 1) {
        const double q1 = grid.wavenumbers(1)[i1] + s * theta[1];
        lambda -= grid.inv_metric(1) * q1 * q1;
      }
      out[i0 * n1 + i1] *= std::polar(1.0, 0.5 * kin.hbar * t * lambda);
    }
  fft::backward(out, grid.shape());
  return out;
}

}  // namespace borelq
