#include "borelq/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "borelq/error.hpp"
#include "borelq/fft.hpp"
#include "borelq/kernels.hpp"

namespace borelq {
namespace {

constexpr cplx kMinusI{0.0, -1.0};

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError("kinematics", message);
}

void require_degree(const VectorFieldSpec& x, const Grid& grid, std::size_t divisor, const char* what) {
  require(x.components.size() == grid.dims(), std::string(what) + " has the wrong number of components");
  for (const auto& comp : x.components)
    for (std::size_t d = 0; d < grid.dims(); ++d)
      require(static_cast<std::size_t>(comp.degree(d)) * divisor <= grid.points(d),
              std::string(what) + " degree " + std::to_string(comp.degree(d)) + " exceeds N/" +
                  std::to_string(divisor) + " (aliasing risk)");
}

void require_degree(const TrigPoly& f, const Grid& grid, std::size_t divisor, const char* what) {
  for (std::size_t d = 0; d < grid.dims(); ++d)
    require(static_cast<std::size_t>(f.degree(d)) * divisor <= grid.points(d),
            std::string(what) + " degree " + std::to_string(f.degree(d)) + " exceeds N/" +
                std::to_string(divisor) + " (aliasing risk)");
}

/// Value of a constant vector field.
std::vector<double> constant_value(const VectorFieldSpec& x) {
  std::vector<double> v;
  const std::array<double, 2> origin{0.0, 0.0};
  const std::array<double, 2> unit{1.0, 1.0};
  for (const auto& comp : x.components) v.push_back(comp(origin, unit));
  return v;
}

double diff_norm(std::span<const cplx> a, std::span<const cplx> b, const Grid& grid) {
  CField d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return l2_norm(d, grid);
}

template <class Residual>
double sup_over_vectors(std::span<const CField> vectors, const Grid& grid, Residual&& residual) {
  std::vector<double> values(vectors.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(vectors.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    const double norm = l2_norm(vectors[v], grid);
    values[v] = residual(vectors[v]) / norm;
  }
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

struct SampledField {
  std::vector<RField> comps;
  RField div;
};

SampledField sample_field(const VectorFieldSpec& x, const Grid& grid) {
  return {x.sample(grid), x.sample_divergence(grid)};
}

/// [X, Y]^d = X^e d_e Y^d - Y^e d_e X^d and its divergence X(div Y) - Y(div X), exactly.
SampledField lie_bracket(const VectorFieldSpec& x, const VectorFieldSpec& y, const Grid& grid) {
  const auto& ext = grid.manifold().extents;
  SampledField out;
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    RField comp = x.lie_derivative(y.components[d], grid);
    const RField back = y.lie_derivative(x.components[d], grid);
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] -= back[i];
    out.comps.push_back(std::move(comp));
  }
  TrigPoly div_x;
  TrigPoly div_y;
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    div_x += x.components[d].derivative(d, ext);
    div_y += y.components[d].derivative(d, ext);
  }
  out.div = x.lie_derivative(div_y, grid);
  const RField back = y.lie_derivative(div_x, grid);
  for (std::size_t i = 0; i < out.div.size(); ++i) out.div[i] -= back[i];
  return out;
}

CField numeric_flow(const VectorFieldSpec& x, double s, std::span<const cplx> psi,
                    const KinematicsParams& params, const Grid& grid, const FlowOptions& options) {
  const SampledField field = sample_field(x, grid);
  double kmax = 0.0;
  for (std::size_t d = 0; d < grid.dims(); ++d)
    kmax = std::max(kmax, kTwoPi * static_cast<double>(grid.points(d) / 2) / grid.extent(d));
  double xmax = 0.0;
  double wmax = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double xi = 0.0;
    double wi = 0.0;
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      xi += std::abs(field.comps[d][i]);
      wi += params.omega.components[d][i] * field.comps[d][i];
    }
    xmax = std::max(xmax, xi);
    wmax = std::max(wmax, std::abs(wi));
  }
  const double radius = xmax * kmax + wmax / params.hbar +
                        (std::abs(params.c) / params.hbar + 0.5) * max_abs(field.div);
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(s) * radius / options.step_scale));
  const std::size_t n = std::max<std::size_t>(1, steps);
  const double ds = s / static_cast<double>(n);
  const cplx i_over_hbar{0.0, 1.0 / params.hbar};

  auto generator = [&](std::span<const cplx> v) {
    CField out = apply_p_sampled(field.comps, field.div, v, params, grid);
    for (auto& z : out) z *= i_over_hbar;
    return out;
  };

  CField state(psi.begin(), psi.end());
  const double norm0 = l2_norm(state, grid);
  CField tmp(state.size());
  for (std::size_t step = 0; step < n; ++step) {
    const CField k1 = generator(state);
    kernels::omp::stage(tmp, state, 0.5 * ds, k1);
    const CField k2 = generator(tmp);
    kernels::omp::stage(tmp, state, 0.5 * ds, k2);
    const CField k3 = generator(tmp);
    kernels::omp::stage(tmp, state, ds, k3);
    const CField k4 = generator(tmp);
    kernels::omp::rk4_combine(state, ds, k1, k2, k3, k4);
  }
  const double drift = std::abs(l2_norm(state, grid) - norm0) / norm0;
  if (!(drift <= options.max_norm_drift))
    throw NumericalError("flow_unitary: numeric path norm drift " + std::to_string(drift) +
                         " exceeds tolerance " + std::to_string(options.max_norm_drift));
  return state;
}

}  // namespace

KinematicsParams KinematicsParams::untwisted(const Grid& grid, double hbar, double c) {
  return KinematicsParams{hbar, c, OneForm::zero(grid)};
}

KinematicsParams KinematicsParams::with_theta(const Grid& grid, std::span<const double> theta,
                                              double hbar, double c) {
  return KinematicsParams{hbar, c, OneForm::constant(grid, theta)};
}

void KinematicsParams::validate(const Grid& grid) const {
  require(std::isfinite(hbar) && hbar > 0.0, "hbar must be positive");
  require(std::isfinite(c), "c must be finite");
  require(omega.components.size() == grid.dims(), "omega needs one component per dimension");
  for (const auto& comp : omega.components) require(comp.size() == grid.size(), "omega sample count mismatch");
  require(is_closed(omega, grid), "omega must be closed");
}

double theta_lattice_unit(const Grid& grid, std::size_t d, double hbar) {
  return kTwoPi * hbar / grid.extent(d);
}

std::vector<double> KinematicsParams::reduced_theta(const Grid& grid) const {
  std::vector<double> out = theta();
  for (std::size_t d = 0; d < out.size(); ++d) {
    const double unit = theta_lattice_unit(grid, d, hbar);
    double r = std::fmod(out[d], unit);
    if (r < 0.0) r += unit;
    if (r >= unit) r -= unit;
    out[d] = r;
  }
  return out;
}

namespace {

std::vector<IndexInterval> normalize(std::vector<IndexInterval> in) {
  std::erase_if(in, [](const IndexInterval& iv) { return iv.begin >= iv.end; });
  std::sort(in.begin(), in.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });
  std::vector<IndexInterval> out;
  for (const auto& iv : in) {
    if (!out.empty() && iv.begin <= out.back().end)
      out.back().end = std::max(out.back().end, iv.end);
    else
      out.push_back(iv);
  }
  return out;
}

}  // namespace

BorelSet BorelSet::full(const Grid& grid) {
  std::vector<std::vector<IndexInterval>> iv;
  for (std::size_t d = 0; d < grid.dims(); ++d) iv.push_back({{0, grid.points(d)}});
  return from_indices(grid, std::move(iv));
}

BorelSet BorelSet::empty(const Grid& grid) {
  return from_indices(grid, std::vector<std::vector<IndexInterval>>(grid.dims()));
}

BorelSet BorelSet::from_indices(const Grid& grid, std::vector<std::vector<IndexInterval>> intervals) {
  require(intervals.size() == grid.dims(), "Borel set needs intervals for every dimension");
  BorelSet set;
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    set.points_.push_back(grid.points(d));
    for (const auto& iv : intervals[d])
      require(iv.begin <= iv.end && iv.end <= grid.points(d), "interval outside [0, N)");
    set.intervals_.push_back(normalize(std::move(intervals[d])));
  }
  return set;
}

BorelSet BorelSet::from_coordinates(const Grid& grid,
                                    const std::vector<std::vector<std::pair<double, double>>>& intervals) {
  require(intervals.size() == grid.dims(), "Borel set needs intervals for every dimension");
  std::vector<std::vector<IndexInterval>> idx(grid.dims());
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const double h = grid.spacing(d);
    auto to_index = [&](double x) {
      const double r = x / h;
      const double n = std::round(r);
      require(std::abs(r - n) <= 1e-9 * std::max(1.0, std::abs(r)),
              "interval endpoint " + std::to_string(x) + " is not grid-aligned");
      require(n >= 0.0 && n <= static_cast<double>(grid.points(d)), "interval endpoint outside [0, L)");
      return static_cast<std::size_t>(n);
    };
    for (const auto& [lo, hi] : intervals[d]) idx[d].push_back({to_index(lo), to_index(hi)});
  }
  return from_indices(grid, std::move(idx));
}

BorelSet BorelSet::shifted(std::span<const long> steps) const {
  BorelSet out;
  out.points_ = points_;
  for (std::size_t d = 0; d < intervals_.size(); ++d) {
    const auto n = static_cast<long>(points_[d]);
    const long m = ((steps[d] % n) + n) % n;
    std::vector<IndexInterval> moved;
    for (const auto& iv : intervals_[d]) {
      const auto b = static_cast<long>(iv.begin) + m;
      const auto e = static_cast<long>(iv.end) + m;
      if (e <= n) {
        moved.push_back({static_cast<std::size_t>(b), static_cast<std::size_t>(e)});
      } else if (b >= n) {
        moved.push_back({static_cast<std::size_t>(b - n), static_cast<std::size_t>(e - n)});
      } else {
        moved.push_back({static_cast<std::size_t>(b), static_cast<std::size_t>(n)});
        moved.push_back({0, static_cast<std::size_t>(e - n)});
      }
    }
    out.intervals_.push_back(normalize(std::move(moved)));
  }
  return out;
}

bool BorelSet::contains(std::span<const std::size_t> index) const {
  for (std::size_t d = 0; d < intervals_.size(); ++d) {
    const bool hit = std::any_of(intervals_[d].begin(), intervals_[d].end(), [&](const IndexInterval& iv) {
      return index[d] >= iv.begin && index[d] < iv.end;
    });
    if (!hit) return false;
  }
  return true;
}

RField BorelSet::indicator(const Grid& grid) const {
  RField chi(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto idx = grid.unflatten(n);
    chi[n] = contains(std::span<const std::size_t>(idx.data(), grid.dims())) ? 1.0 : 0.0;
  }
  return chi;
}

CField apply_e(const BorelSet& set, std::span<const cplx> psi, const Grid& grid) {
  require(psi.size() == grid.size(), "wave function does not match grid");
  const RField chi = set.indicator(grid);
  return apply_q(chi, psi);
}

CField apply_q(std::span<const double> f, std::span<const cplx> psi) {
  require(f.size() == psi.size(), "function and wave function shapes differ");
  CField out(psi.size());
  kernels::omp::multiply(out, f, psi);
  return out;
}

CField apply_q(std::span<const cplx> f, std::span<const cplx> psi) {
  require(f.size() == psi.size(), "function and wave function shapes differ");
  CField out(psi.size());
  kernels::omp::multiply(out, f, psi);
  return out;
}

CField apply_p(const VectorFieldSpec& x, std::span<const cplx> psi, const KinematicsParams& params,
               const Grid& grid) {
  require_degree(x, grid, 4, "vector field");
  const SampledField field = sample_field(x, grid);
  return apply_p_sampled(field.comps, field.div, psi, params, grid);
}

CField apply_p_sampled(std::span<const RField> x, std::span<const double> div_x,
                       std::span<const cplx> psi, const KinematicsParams& params, const Grid& grid,
                       std::span<const RField> extra_form) {
  require(psi.size() == grid.size(), "wave function does not match grid");
  require(x.size() == grid.dims(), "vector field has the wrong number of components");
  require(params.omega.components.size() == grid.dims(), "omega needs one component per dimension");
  const std::size_t n = grid.size();
  CField out(n, cplx{});
  const cplx hbar_over_i = kMinusI * params.hbar;
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const CField dpsi = partial(psi, d, grid);
    const RField& w = params.omega.components[d];
    const RField& xd = x[d];
    const bool has_extra = !extra_form.empty();
    for (std::size_t i = 0; i < n; ++i) {
      double form = w[i];
      if (has_extra) form += extra_form[d][i];
      out[i] += hbar_over_i * xd[i] * dpsi[i] + form * xd[i] * psi[i];
    }
  }
  const cplx c_term{params.c, -0.5 * params.hbar};
  for (std::size_t i = 0; i < n; ++i) out[i] += c_term * div_x[i] * psi[i];
  return out;
}

bool has_exact_flow(const VectorFieldSpec& x, const KinematicsParams& params) {
  return x.is_constant() && params.omega.is_constant();
}

CField flow_unitary(const VectorFieldSpec& x, double s, std::span<const cplx> psi,
                    const KinematicsParams& params, const Grid& grid, const FlowOptions& options) {
  require(psi.size() == grid.size(), "wave function does not match grid");
  require(x.components.size() == grid.dims(), "vector field has the wrong number of components");
  if (s == 0.0) return CField(psi.begin(), psi.end());
  if (!has_exact_flow(x, params)) {
    require_degree(x, grid, 4, "vector field");
    return numeric_flow(x, s, psi, params, grid, options);
  }

  const std::vector<double> a = constant_value(x);
  const std::vector<double> theta = params.omega.constant_part();
  double angle = 0.0;
  for (std::size_t d = 0; d < grid.dims(); ++d) angle += s * a[d] * theta[d] / params.hbar;

  std::array<long, 2> steps{0, 0};
  bool aligned = true;
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const double r = s * a[d] / grid.spacing(d);
    const double m = std::round(r);
    if (std::abs(r - m) > 1e-9 * std::max(1.0, std::abs(r))) aligned = false;
    steps[d] = static_cast<long>(m);
  }

  CField out(grid.size());
  if (aligned) {
    const auto n0 = static_cast<long>(grid.points(0));
    const auto n1 = grid.dims() > 1 ? static_cast<long>(grid.points(1)) : 1L;
    for (long i0 = 0; i0 < n0; ++i0) {
      const long j0 = ((i0 + steps[0]) % n0 + n0) % n0;
      for (long i1 = 0; i1 < n1; ++i1) {
        const long j1 = ((i1 + steps[1]) % n1 + n1) % n1;
        out[static_cast<std::size_t>(i0 * n1 + i1)] = psi[static_cast<std::size_t>(j0 * n1 + j1)];
      }
    }
  } else {
    out.assign(psi.begin(), psi.end());
    fft::forward(out, grid.shape());
    const std::size_t n1 = grid.dims() > 1 ? grid.points(1) : 1;
    for (std::size_t i0 = 0; i0 < grid.points(0); ++i0) {
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        double arg = s * a[0] * grid.wavenumbers(0)[i0];
        if (grid.dims() > 1) arg += s * a[1] * grid.wavenumbers(1)[i1];
        out[i0 * n1 + i1] *= std::polar(1.0, arg);
      }
    }
    fft::backward(out, grid.shape());
  }
  if (angle != 0.0) {
    const cplx phase = std::polar(1.0, angle);
    for (auto& v : out) v *= phase;
  }
  return out;
}

std::vector<CField> random_test_vectors(const Grid& grid, std::size_t count, int degree,
                                        std::uint64_t seed) {
  require(degree >= 0, "test-vector degree must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n1 = grid.dims() > 1 ? grid.points(1) : 1;
  const int deg1 = grid.dims() > 1 ? degree : 0;
  std::vector<CField> out;
  for (std::size_t v = 0; v < count; ++v) {
    CField spec(grid.size(), cplx{});
    for (int m0 = -degree; m0 <= degree; ++m0) {
      for (int m1 = -deg1; m1 <= deg1; ++m1) {
        const double re = normal(rng);
        const double im = normal(rng);
        const std::size_t i0 = m0 >= 0 ? static_cast<std::size_t>(m0) : grid.points(0) - static_cast<std::size_t>(-m0);
        const std::size_t i1 = m1 >= 0 ? static_cast<std::size_t>(m1) : n1 - static_cast<std::size_t>(-m1);
        spec[i0 * n1 + i1] = cplx{re, im};
      }
    }
    fft::backward(spec, grid.shape());
    const double norm = l2_norm(spec, grid);
    for (auto& z : spec) z /= norm;
    out.push_back(std::move(spec));
  }
  return out;
}

double commutator_residual(CommutatorKind kind, const CommutatorArgs& args,
                           const KinematicsParams& params, const Grid& grid,
                           const ResidualOptions& options) {
  params.validate(grid);
  int degree = options.degree;
  if (degree == 0) {
    std::size_t nmin = grid.points(0);
    for (std::size_t d = 1; d < grid.dims(); ++d) nmin = std::min(nmin, grid.points(d));
    degree = static_cast<int>(nmin / 8);
  }
  const auto vectors = random_test_vectors(grid, options.vectors, degree, options.seed);
  const cplx hbar_over_i = kMinusI * params.hbar;

  switch (kind) {
    case CommutatorKind::QQ: {
      require_degree(args.f, grid, 8, "f");
      require_degree(args.g, grid, 8, "g");
      const RField f = args.f.sample(grid);
      const RField g = args.g.sample(grid);
      return sup_over_vectors(vectors, grid, [&](const CField& psi) {
        const CField fg = apply_q(f, apply_q(g, psi));
        const CField gf = apply_q(g, apply_q(f, psi));
        return diff_norm(fg, gf, grid);
      });
    }
    case CommutatorKind::PQ: {
      require_degree(args.f, grid, 8, "f");
      require_degree(args.x, grid, 8, "X");
      const SampledField x = sample_field(args.x, grid);
      const RField f = args.f.sample(grid);
      const RField xf = args.x.lie_derivative(args.f, grid);
      return pq_residual_sampled(f, xf, x.comps, x.div, params, grid, vectors);
    }
    case CommutatorKind::PP:
    case CommutatorKind::PPMagnetic: {
      require_degree(args.x, grid, 8, "X");
      require_degree(args.y, grid, 8, "Y");
      const SampledField x = sample_field(args.x, grid);
      const SampledField y = sample_field(args.y, grid);
      const SampledField xy = lie_bracket(args.x, args.y, grid);
      std::vector<RField> potential;
      RField phi_xy(grid.size(), 0.0);
      if (kind == CommutatorKind::PPMagnetic) {
        potential = vector_potential(args.phi, args.e, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
          phi_xy[i] = args.phi.phi01[i] * (x.comps[0][i] * y.comps[1][i] - x.comps[1][i] * y.comps[0][i]);
      }
      auto p = [&](const SampledField& field, std::span<const cplx> v) {
        return apply_p_sampled(field.comps, field.div, v, params, grid, potential);
      };
      return sup_over_vectors(vectors, grid, [&](const CField& psi) {
        const CField pxy = p(x, p(y, psi));
        const CField pyx = p(y, p(x, psi));
        CField rhs = p(xy, psi);
        for (std::size_t i = 0; i < rhs.size(); ++i)
          rhs[i] = hbar_over_i * (rhs[i] + args.e * phi_xy[i] * psi[i]);
        CField lhs(psi.size());
        for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] = pxy[i] - pyx[i];
        return diff_norm(lhs, rhs, grid);
      });
    }
  }
  return 0.0;
}

double pq_residual_sampled(std::span<const double> f, std::span<const double> x_of_f,
                           std::span<const RField> x, std::span<const double> div_x,
                           const KinematicsParams& params, const Grid& grid,
                           std::span<const CField> vectors) {
  const cplx hbar_over_i = kMinusI * params.hbar;
  return sup_over_vectors(vectors, grid, [&](const CField& psi) {
    const CField p_fpsi = apply_p_sampled(x, div_x, apply_q(f, psi), params, grid);
    const CField f_ppsi = apply_q(f, apply_p_sampled(x, div_x, psi, params, grid));
    CField lhs(psi.size());
    CField rhs(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
      lhs[i] = p_fpsi[i] - f_ppsi[i];
      rhs[i] = hbar_over_i * x_of_f[i] * psi[i];
    }
    return diff_norm(lhs, rhs, grid);
  });
}

std::vector<RField> vector_potential(const TwoForm& phi, double e, const Grid& grid) {
  require(grid.manifold().kind == ManifoldKind::Torus2, "vector potential requires the 2-torus");
  require(phi.phi01.size() == grid.size(), "two-form sample count mismatch");
  const double mean = kernels::omp::sum(phi.phi01) / static_cast<double>(grid.size());
  require(std::abs(mean) <= 1e-12 * std::max(1.0, max_abs(phi.phi01)),
          "field with nonzero net flux needs a nontrivial line bundle");
  CField chi = to_complex(phi.phi01);
  fft::forward(chi, grid.shape());
  const auto k0 = grid.wavenumbers(0);
  const auto k1 = grid.wavenumbers(1);
  const std::size_t n1 = grid.points(1);
  for (std::size_t i0 = 0; i0 < grid.points(0); ++i0) {
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      const double k2 = k0[i0] * k0[i0] + k1[i1] * k1[i1];
      chi[i0 * n1 + i1] = k2 == 0.0 ? cplx{} : -e * chi[i0 * n1 + i1] / k2;
    }
  }
  fft::backward(chi, grid.shape());
  const RField c = real_part(chi);
  RField a0 = partial(c, 1, grid);
  for (auto& v : a0) v = -v;
  RField a1 = partial(c, 0, grid);
  return {std::move(a0), std::move(a1)};
}

double imprimitivity_residual(const VectorFieldSpec& x, double s, const BorelSet& set,
                              std::span<const CField> vectors, const KinematicsParams& params,
                              const Grid& grid) {
  require(x.is_constant(), "imprimitivity check needs a constant vector field");
  require(params.omega.is_constant(), "imprimitivity check needs the exact flow (constant omega)");
  const std::vector<double> a = constant_value(x);
  std::array<long, 2> steps{0, 0};
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const double r = s * a[d] / grid.spacing(d);
    const double m = std::round(r);
    require(std::abs(r - m) <= 1e-9 * std::max(1.0, std::abs(r)),
            "displacement s X is not a multiple of the grid spacing");
    steps[d] = static_cast<long>(m);
  }
  const BorelSet moved = set.shifted(std::span<const long>(steps.data(), grid.dims()));
  // The constant phases exp(+-i s w(X) / hbar) of V_s and V_{-s} are global
  // scalars that commute with E(B) and cancel; conjugating by the bare
  // translations keeps the relation exact on the grid.
  KinematicsParams bare = params;
  bare.omega = OneForm::zero(grid);
  return sup_over_vectors(vectors, grid, [&](const CField& psi) {
    const CField forward = flow_unitary(x, s, psi, bare, grid);
    const CField localized = apply_e(set, forward, grid);
    const CField back = flow_unitary(x, -s, localized, bare, grid);
    const CField direct = apply_e(moved, psi, grid);
    return diff_norm(back, direct, grid);
  });
}

std::vector<double> momentum_spectrum(const KinematicsParams& params, std::size_t d, const Grid& grid) {
  require(d < grid.dims(), "direction out of range");
  require(params.omega.is_constant(), "momentum spectrum needs a constant one-form");
  require(grid.manifold().kind != ManifoldKind::LineSegment,
          "momentum spectrum is defined on the circle and torus");
  const double theta = params.omega.constant_part()[d];
  const double unit = kTwoPi / grid.extent(d);
  const long half = static_cast<long>(grid.points(d) / 2);
  std::vector<double> out;
  for (long k = -(half - 1); k <= half - 1; ++k)
    out.push_back(params.hbar * static_cast<double>(k) * unit + theta);
  std::sort(out.begin(), out.end());
  return out;
}

double momentum_rayleigh_quotient(const KinematicsParams& params, std::size_t d, long k, const Grid& grid) {
  const double kd = kTwoPi * static_cast<double>(k) / grid.extent(d);
  const double norm = 1.0 / std::sqrt(grid.total_measure());
  const CField e = grid.sample_complex([&](std::span<const double> x) { return std::polar(norm, kd * x[d]); });
  const VectorFieldSpec dir = VectorFieldSpec::coordinate(grid.dims(), d);
  const SampledField field{dir.sample(grid), dir.sample_divergence(grid)};
  const CField je = apply_p_sampled(field.comps, field.div, e, params, grid);
  return inner_product(e, je, grid).real();
}

}  // namespace borelq
