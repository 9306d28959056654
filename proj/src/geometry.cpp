#include "borelq/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "borelq/error.hpp"
#include "borelq/fft.hpp"
#include "borelq/kernels.hpp"

namespace borelq {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError("geometry", message);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_size(std::size_t n, const Grid& grid) {
  require(n == grid.size(), "field has " + std::to_string(n) + " samples, grid has " +
                                std::to_string(grid.size()));
}

/// Apply a diagonal frequency-space multiplier m(i0, i1).
template <class Multiplier>
CField spectral_apply(std::span<const cplx> field, const Grid& grid, Multiplier&& m) {
  check_size(field.size(), grid);
  CField work(field.begin(), field.end());
  fft::forward(work, grid.shape());
  const std::size_t n1 = grid.dims() > 1 ? grid.points(1) : 1;
  for (std::size_t i0 = 0; i0 < grid.points(0); ++i0)
    for (std::size_t i1 = 0; i1 < n1; ++i1) work[i0 * n1 + i1] *= m(i0, i1);
  fft::backward(work, grid.shape());
  return work;
}

std::size_t mode_index(std::size_t d, std::size_t i0, std::size_t i1) { return d == 0 ? i0 : i1; }

}  // namespace

std::string_view to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Torus2: return "torus2";
    case ManifoldKind::LineSegment: return "line_segment";
  }
  return "unknown";
}

ManifoldKind parse_manifold_kind(std::string_view name) {
  if (name == "circle") return ManifoldKind::Circle;
  if (name == "torus2" || name == "torus") return ManifoldKind::Torus2;
  if (name == "line_segment" || name == "line") return ManifoldKind::LineSegment;
  throw PreconditionError("geometry", "unknown manifold kind '" + std::string(name) + "'");
}

void ManifoldSpec::validate() const {
  require(extents.size() == dims(), "manifold " + std::string(to_string(kind)) + " needs " +
                                        std::to_string(dims()) + " extents");
  require(metric_diag.size() == dims(), "metric_diag needs one entry per dimension");
  for (double l : extents) require(std::isfinite(l) && l > 0.0, "extents must be strictly positive");
  for (double g : metric_diag) require(std::isfinite(g) && g > 0.0, "metric_diag must be strictly positive");
}

ManifoldSpec ManifoldSpec::circle(double length, double metric) {
  return {ManifoldKind::Circle, {length}, {metric}};
}

ManifoldSpec ManifoldSpec::torus2(double l0, double l1, double g0, double g1) {
  return {ManifoldKind::Torus2, {l0, l1}, {g0, g1}};
}

ManifoldSpec ManifoldSpec::line_segment(double length, double metric) {
  return {ManifoldKind::LineSegment, {length}, {metric}};
}

Grid::Grid(ManifoldSpec manifold, std::vector<std::size_t> points)
    : manifold_(std::move(manifold)), points_(std::move(points)) {
  manifold_.validate();
  require(points_.size() == manifold_.dims(), "grid needs one point count per dimension");
  size_ = 1;
  coordinate_cell_ = 1.0;
  for (std::size_t d = 0; d < points_.size(); ++d) {
    require(is_power_of_two(points_[d]) && points_[d] >= 4,
            "points per dimension must be a power of two >= 4");
    size_ *= points_[d];
    coordinate_cell_ *= spacing(d);
  }
  stride0_ = points_.size() > 1 ? points_[1] : 1;

  wavenumbers_.resize(points_.size());
  for (std::size_t d = 0; d < points_.size(); ++d) {
    wavenumbers_[d].resize(points_[d]);
    for (std::size_t i = 0; i < points_[d]; ++i)
      wavenumbers_[d][i] = kTwoPi * static_cast<double>(mode_number(d, i)) / extent(d);
  }
}

double Grid::min_spacing() const {
  double h = spacing(0);
  for (std::size_t d = 1; d < dims(); ++d) h = std::min(h, spacing(d));
  return h;
}

double Grid::sqrt_det_metric() const {
  double det = 1.0;
  for (double g : manifold_.metric_diag) det *= g;
  return std::sqrt(det);
}

double Grid::total_measure() const {
  double v = sqrt_det_metric();
  for (double l : manifold_.extents) v *= l;
  return v;
}

std::array<std::size_t, 2> Grid::unflatten(std::size_t flat) const {
  if (dims() == 1) return {flat, 0};
  return {flat / stride0_, flat % stride0_};
}

std::array<double, 2> Grid::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::array<double, 2> x{coordinate(0, idx[0]), 0.0};
  if (dims() > 1) x[1] = coordinate(1, idx[1]);
  return x;
}

long Grid::mode_number(std::size_t d, std::size_t i) const {
  const auto n = static_cast<long>(points_[d]);
  const auto m = static_cast<long>(i);
  return m < n / 2 ? m : m - n;
}

bool Grid::same_shape(const Grid& other) const {
  return points_ == other.points_ && manifold_.extents == other.manifold_.extents &&
         manifold_.kind == other.manifold_.kind;
}

OneForm OneForm::zero(const Grid& grid) {
  return OneForm{std::vector<RField>(grid.dims(), RField(grid.size(), 0.0))};
}

OneForm OneForm::constant(const Grid& grid, std::span<const double> values) {
  require(values.size() == grid.dims(), "constant one-form needs one value per dimension");
  OneForm w;
  for (double v : values) w.components.emplace_back(grid.size(), v);
  return w;
}

bool OneForm::is_constant() const {
  for (const auto& comp : components) {
    if (comp.empty()) continue;
    for (double v : comp)
      if (v != comp.front()) return false;
  }
  return true;
}

std::vector<double> OneForm::constant_part() const {
  std::vector<double> out;
  for (const auto& comp : components) {
    if (comp.empty()) {
      out.push_back(0.0);
    } else if (std::all_of(comp.begin(), comp.end(), [&](double v) { return v == comp.front(); })) {
      // Exact for constant components; the mean would round.
      out.push_back(comp.front());
    } else {
      out.push_back(kernels::omp::sum(comp) / static_cast<double>(comp.size()));
    }
  }
  return out;
}

bool is_closed(const OneForm& omega, const Grid& grid, double tol) {
  require(omega.components.size() == grid.dims(), "one-form needs one component per dimension");
  for (const auto& c : omega.components) check_size(c.size(), grid);
  if (grid.dims() < 2) return true;
  const RField d0w1 = partial(omega.components[1], 0, grid);
  const RField d1w0 = partial(omega.components[0], 1, grid);
  const double scale = std::max({1.0, max_abs(omega.components[0]), max_abs(omega.components[1])});
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(d0w1[i] - d1w0[i]) > tol * scale) return false;
  return true;
}

TwoForm TwoForm::constant(const Grid& grid, double phi0) { return TwoForm{RField(grid.size(), phi0)}; }

double TwoForm::component(std::size_t a, std::size_t b, std::size_t flat) const {
  if (a == b) return 0.0;
  return a < b ? phi01[flat] : -phi01[flat];
}

double twist_scale(TwistCoupling coupling, double hbar) {
  return coupling == TwistCoupling::Half ? 1.0 / (2.0 * hbar) : 1.0 / hbar;
}

CField partial(std::span<const cplx> field, std::size_t d, const Grid& grid) {
  require(d < grid.dims(), "derivative direction out of range");
  const auto k = grid.wavenumbers(d);
  return spectral_apply(field, grid, [&](std::size_t i0, std::size_t i1) {
    const std::size_t i = mode_index(d, i0, i1);
    return grid.is_nyquist(d, i) ? cplx{} : cplx{0.0, k[i]};
  });
}

RField partial(std::span<const double> field, std::size_t d, const Grid& grid) {
  return real_part(partial(to_complex(field), d, grid));
}

std::vector<CField> gradient(std::span<const cplx> field, const Grid& grid) {
  std::vector<CField> out;
  out.reserve(grid.dims());
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    CField comp = partial(field, d, grid);
    const double ginv = grid.inv_metric(d);
    for (auto& v : comp) v *= ginv;
    out.push_back(std::move(comp));
  }
  return out;
}

CField divergence(std::span<const CField> vfield, const Grid& grid) {
  require(vfield.size() == grid.dims(), "vector field has " + std::to_string(vfield.size()) +
                                            " components, manifold has " +
                                            std::to_string(grid.dims()) + " dimensions");
  CField out(grid.size(), cplx{});
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const CField dd = partial(vfield[d], d, grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += dd[i];
  }
  return out;
}

RField divergence(std::span<const RField> vfield, const Grid& grid) {
  std::vector<CField> c;
  for (const auto& comp : vfield) c.push_back(to_complex(comp));
  return real_part(divergence(c, grid));
}

namespace {

CField shifted_second_order(std::span<const cplx> field, const Grid& grid,
                            std::span<const double> shift) {
  const auto k0 = grid.wavenumbers(0);
  const double g0 = grid.inv_metric(0);
  if (grid.dims() == 1) {
    return spectral_apply(field, grid, [&](std::size_t i0, std::size_t) {
      const double q = k0[i0] + shift[0];
      return cplx{-g0 * q * q, 0.0};
    });
  }
  const auto k1 = grid.wavenumbers(1);
  const double g1 = grid.inv_metric(1);
  return spectral_apply(field, grid, [&](std::size_t i0, std::size_t i1) {
    const double q0 = k0[i0] + shift[0];
    const double q1 = k1[i1] + shift[1];
    return cplx{-g0 * q0 * q0 - g1 * q1 * q1, 0.0};
  });
}

}  // namespace

CField laplacian(std::span<const cplx> field, const Grid& grid) {
  const std::array<double, 2> zero{0.0, 0.0};
  return shifted_second_order(field, grid, zero);
}

RField laplacian(std::span<const double> field, const Grid& grid) {
  return real_part(laplacian(to_complex(field), grid));
}

CField twisted_laplacian(std::span<const cplx> field, const OneForm& omega, double hbar,
                         const Grid& grid, TwistCoupling coupling) {
  require(hbar > 0.0, "hbar must be positive");
  require(omega.components.size() == grid.dims(), "one-form needs one component per dimension");
  require(is_closed(omega, grid), "twisted Laplacian requires a closed one-form");
  const double s = twist_scale(coupling, hbar);

  if (omega.is_constant()) {
    std::array<double, 2> shift{0.0, 0.0};
    for (std::size_t d = 0; d < grid.dims(); ++d)
      shift[d] = omega.components[d].empty() ? 0.0 : s * omega.components[d].front();
    return shifted_second_order(field, grid, shift);
  }

  // General closed w: Y = grad psi + i s g#w psi, then div Y + i s w(Y).
  const cplx is{0.0, s};
  auto y = gradient(field, grid);
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const double ginv = grid.inv_metric(d);
    for (std::size_t i = 0; i < grid.size(); ++i)
      y[d][i] += is * ginv * omega.components[d][i] * field[i];
  }
  CField out = divergence(y, grid);
  for (std::size_t d = 0; d < grid.dims(); ++d)
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] += is * omega.components[d][i] * y[d][i];
  return out;
}

cplx integrate(std::span<const cplx> field, const Grid& grid) {
  check_size(field.size(), grid);
  return kernels::omp::sum(field) * grid.cell_volume();
}

double integrate(std::span<const double> field, const Grid& grid) {
  check_size(field.size(), grid);
  return kernels::omp::sum(field) * grid.cell_volume();
}

double two_form_integral(const TwoForm& phi, const Grid& grid) {
  if (grid.manifold().kind != ManifoldKind::Torus2)
    throw PreconditionError("geometry", "two-form integral needs the torus fundamental cycle; got " +
                                            std::string(to_string(grid.manifold().kind)));
  check_size(phi.phi01.size(), grid);
  return kernels::omp::sum(phi.phi01) * grid.coordinate_cell();
}

cplx inner_product(std::span<const cplx> a, std::span<const cplx> b, const Grid& grid) {
  check_size(a.size(), grid);
  check_size(b.size(), grid);
  return kernels::omp::dot(a, b) * grid.cell_volume();
}

double l2_norm(std::span<const cplx> a, const Grid& grid) {
  return std::sqrt(std::max(0.0, inner_product(a, a, grid).real()));
}

double boundary_mass(std::span<const cplx> psi, const Grid& grid, double fraction) {
  check_size(psi.size(), grid);
  if (grid.manifold().is_closed()) return 0.0;
  const double l = grid.extent(0);
  double mass = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(0, i);
    if (x < fraction * l || x >= (1.0 - fraction) * l) mass += std::norm(psi[i]);
  }
  return mass * grid.cell_volume();
}

CField to_complex(std::span<const double> field) { return CField(field.begin(), field.end()); }

RField real_part(std::span<const cplx> field) {
  RField out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = field[i].real();
  return out;
}

double max_abs(std::span<const cplx> field) {
  double m = 0.0;
  for (const auto& v : field) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(std::span<const double> field) {
  double m = 0.0;
  for (double v : field) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace borelq
