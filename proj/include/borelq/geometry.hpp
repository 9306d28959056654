#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace borelq {

using cplx = std::complex<double>;
using CField = std::vector<cplx>;
using RField = std::vector<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class ManifoldKind { Circle, Torus2, LineSegment };

std::string_view to_string(ManifoldKind kind);
ManifoldKind parse_manifold_kind(std::string_view name);

/// Flat periodic manifold with a constant diagonal metric. The metric
/// absorbs particle masses.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::Circle;
  std::vector<double> extents{kTwoPi};
  std::vector<double> metric_diag{1.0};

  std::size_t dims() const { return kind == ManifoldKind::Torus2 ? 2 : 1; }
  /// Circle and torus are closed; the line segment is a truncation of R.
  bool is_closed() const { return kind != ManifoldKind::LineSegment; }
  void validate() const;

  static ManifoldSpec circle(double length = kTwoPi, double metric = 1.0);
  static ManifoldSpec torus2(double l0 = kTwoPi, double l1 = kTwoPi, double g0 = 1.0, double g1 = 1.0);
  static ManifoldSpec line_segment(double length, double metric = 1.0);
};

/// Uniform grid x_d[i] = i L_d / N_d, row-major with dimension 0 slowest.
class Grid {
 public:
  Grid(ManifoldSpec manifold, std::vector<std::size_t> points);

  const ManifoldSpec& manifold() const { return manifold_; }
  std::size_t dims() const { return manifold_.dims(); }
  std::size_t size() const { return size_; }
  std::span<const std::size_t> shape() const { return {points_.data(), points_.size()}; }
  std::size_t points(std::size_t d) const { return points_[d]; }
  double extent(std::size_t d) const { return manifold_.extents[d]; }
  double spacing(std::size_t d) const { return manifold_.extents[d] / static_cast<double>(points_[d]); }
  double min_spacing() const;
  double metric(std::size_t d) const { return manifold_.metric_diag[d]; }
  double inv_metric(std::size_t d) const { return 1.0 / manifold_.metric_diag[d]; }
  double sqrt_det_metric() const;

  /// Quadrature weight per sample for the metric volume measure.
  double cell_volume() const { return coordinate_cell_ * sqrt_det_metric(); }
  /// Coordinate area/length per sample (for integrating forms).
  double coordinate_cell() const { return coordinate_cell_; }
  double total_measure() const;

  double coordinate(std::size_t d, std::size_t i) const { return static_cast<double>(i) * spacing(d); }
  /// Per-dimension grid indices of flat index `flat`.
  std::array<std::size_t, 2> unflatten(std::size_t flat) const;
  std::size_t flatten(std::size_t i0, std::size_t i1 = 0) const { return i0 * stride0_ + i1; }
  std::array<double, 2> point(std::size_t flat) const;

  /// Angular wavenumbers 2 pi m / L_d in FFT order (m = 0..N/2-1, -N/2..-1).
  std::span<const double> wavenumbers(std::size_t d) const { return wavenumbers_[d]; }
  /// Signed mode number m for FFT index i.
  long mode_number(std::size_t d, std::size_t i) const;
  bool is_nyquist(std::size_t d, std::size_t i) const { return 2 * i == points_[d]; }

  template <class F>
  RField sample(F&& f) const {
    RField out(size_);
    for (std::size_t n = 0; n < size_; ++n) {
      const auto x = point(n);
      out[n] = f(std::span<const double>(x.data(), dims()));
    }
    return out;
  }

  template <class F>
  CField sample_complex(F&& f) const {
    CField out(size_);
    for (std::size_t n = 0; n < size_; ++n) {
      const auto x = point(n);
      out[n] = f(std::span<const double>(x.data(), dims()));
    }
    return out;
  }

  bool same_shape(const Grid& other) const;

 private:
  ManifoldSpec manifold_;
  std::vector<std::size_t> points_;
  std::size_t size_ = 0;
  std::size_t stride0_ = 1;
  double coordinate_cell_ = 0.0;
  std::vector<std::vector<double>> wavenumbers_;
};

/// Closed real one-form, one sampled component per dimension. Its constant
/// (harmonic) part on a torus carries the Aharonov-Bohm twist theta.
struct OneForm {
  std::vector<RField> components;

  static OneForm zero(const Grid& grid);
  static OneForm constant(const Grid& grid, std::span<const double> values);

  bool is_constant() const;
  /// Grid mean of each component.
  std::vector<double> constant_part() const;
};

/// Exterior derivative components d_a w_b - d_b w_a vanish to `tol` (relative
/// to the largest component magnitude, floored at 1).
bool is_closed(const OneForm& omega, const Grid& grid, double tol = 1e-10);

/// Two-form on the 2-torus, stored as its independent component phi_01.
struct TwoForm {
  RField phi01;

  static TwoForm constant(const Grid& grid, double phi0);
  /// phi_ab with phi_ab = -phi_ba exactly and phi_aa = 0.
  double component(std::size_t a, std::size_t b, std::size_t flat) const;
};

/// Coupling of the one-form inside the twisted Laplacian:
/// Half uses (grad + i/(2 hbar) g#w), Conventional the minimal coupling i/hbar.
enum class TwistCoupling { Half, Conventional };

double twist_scale(TwistCoupling coupling, double hbar);

// Spectral differential calculus. Odd derivatives drop the Nyquist mode;
// second-order operators keep it.

/// Coordinate partial derivative d_d field (no metric).
CField partial(std::span<const cplx> field, std::size_t d, const Grid& grid);
RField partial(std::span<const double> field, std::size_t d, const Grid& grid);

/// Metric gradient: component d is g^{dd} d_d field.
std::vector<CField> gradient(std::span<const cplx> field, const Grid& grid);
/// Divergence w.r.t. the metric volume measure (constant metric: sum_d d_d X^d).
CField divergence(std::span<const CField> vfield, const Grid& grid);
RField divergence(std::span<const RField> vfield, const Grid& grid);
/// Laplace-Beltrami operator: -sum_d g^{dd} k_d^2 in frequency space.
CField laplacian(std::span<const cplx> field, const Grid& grid);
RField laplacian(std::span<const double> field, const Grid& grid);
/// (div + i s w) o (grad + i s g# w) with s = twist_scale(coupling, hbar).
CField twisted_laplacian(std::span<const cplx> field, const OneForm& omega, double hbar,
                         const Grid& grid, TwistCoupling coupling = TwistCoupling::Half);

cplx integrate(std::span<const cplx> field, const Grid& grid);
double integrate(std::span<const double> field, const Grid& grid);
/// Integral of phi_01 over the fundamental 2-cycle of the torus.
double two_form_integral(const TwoForm& phi, const Grid& grid);

/// <a|b> with the metric volume measure.
cplx inner_product(std::span<const cplx> a, std::span<const cplx> b, const Grid& grid);
double l2_norm(std::span<const cplx> a, const Grid& grid);

/// Mass in the outer `fraction` of a line segment at each end (zero for closed manifolds).
double boundary_mass(std::span<const cplx> psi, const Grid& grid, double fraction = 0.1);

CField to_complex(std::span<const double> field);
RField real_part(std::span<const cplx> field);
double max_abs(std::span<const cplx> field);
double max_abs(std::span<const double> field);

}  // namespace borelq
