#include "borelq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "borelq/error.hpp"
#include "borelq/kernels.hpp"

namespace borelq {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError("dynamics", message);
}

double norm_sq(std::span<const cplx> psi, const Grid& grid) {
  RField rho(psi.size());
  kernels::omp::density(rho, psi);
  return kernels::omp::sum(rho) * grid.cell_volume();
}

double l2_real(std::span<const double> v, const Grid& grid) {
  RField sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
  return std::sqrt(kernels::omp::sum(sq) * grid.cell_volume());
}

bool all_finite(std::span<const cplx> psi) {
  for (const auto& z : psi)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

/// Terms of the continuity equation at one state.
struct ContinuityTerms {
  RField rho;
  RField div_j;
  RField lap_rho;
};

ContinuityTerms continuity_terms(std::span<const cplx> psi, const DGParams& params, const Grid& grid) {
  ContinuityTerms t;
  t.rho = density(psi);
  const auto j = current(psi, params.kin.omega, params.kin.hbar, grid, params.conventions.current);
  t.div_j = divergence(std::span<const RField>(j), grid);
  t.lap_rho = laplacian(std::span<const double>(t.rho), grid);
  return t;
}

double continuity_residual(const ContinuityTerms& a, const ContinuityTerms& b, double dt, double c,
                           const Grid& grid) {
  RField r(a.rho.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = (b.rho[i] - a.rho[i]) / dt + 0.5 * (a.div_j[i] + b.div_j[i]) - c * 0.5 * (a.lap_rho[i] + b.lap_rho[i]);
  return l2_real(r, grid);
}

/// Per-step scalar diagnostics.
struct StepScalars {
  std::vector<double> q;  // <Q(f)> per Ehrenfest function
  std::vector<double> p;  // Re <P(grad f)> per Ehrenfest function
};

struct EhrenfestData {
  std::vector<RField> f;
  std::vector<std::vector<RField>> grad;
  std::vector<RField> div_grad;
};

EhrenfestData prepare_ehrenfest(const std::vector<TrigPoly>& functions, const Grid& grid) {
  EhrenfestData data;
  for (const auto& f : functions) {
    const VectorFieldSpec g = metric_gradient(f, grid.manifold());
    data.f.push_back(f.sample(grid));
    data.grad.push_back(g.sample(grid));
    data.div_grad.push_back(g.sample_divergence(grid));
  }
  return data;
}

double expect_q(std::span<const double> f, std::span<const double> rho, const Grid& grid) {
  RField w(rho.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = f[i] * rho[i];
  return kernels::omp::sum(w) * grid.cell_volume();
}

double expect_p(std::span<const RField> x, std::span<const double> div_x, std::span<const cplx> psi,
                const KinematicsParams& kin, const Grid& grid) {
  const CField px = apply_p_sampled(x, div_x, psi, kin, grid);
  return inner_product(psi, px, grid).real();
}

StepScalars step_scalars(std::span<const cplx> psi, std::span<const double> rho, const EhrenfestData& data,
                         const KinematicsParams& kin, const Grid& grid) {
  StepScalars s;
  for (std::size_t k = 0; k < data.f.size(); ++k) {
    s.q.push_back(expect_q(data.f[k], rho, grid));
    s.p.push_back(expect_p(data.grad[k], data.div_grad[k], psi, kin, grid));
  }
  return s;
}

/// |dq/dt - p| at every sample; central differences inside, one-sided
/// second order at the ends.
std::vector<double> ehrenfest_series(std::span<const double> q, std::span<const double> p, double dt) {
  const std::size_t n = q.size();
  std::vector<double> out(n, 0.0);
  if (n < 3) return out;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = std::abs((q[i + 1] - q[i - 1]) / (2.0 * dt) - p[i]);
  out[0] = std::abs((-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * dt) - p[0]);
  out[n - 1] = std::abs((3.0 * q[n - 1] - 4.0 * q[n - 2] + q[n - 3]) / (2.0 * dt) - p[n - 1]);
  return out;
}

}  // namespace

std::string_view to_string(CurrentPrefactor p) {
  return p == CurrentPrefactor::Full ? "full" : "conventional";
}

std::string_view to_string(TwistCoupling t) { return t == TwistCoupling::Half ? "half" : "conventional"; }

std::string_view to_string(EvolveStatus status) {
  switch (status) {
    case EvolveStatus::Completed: return "completed";
    case EvolveStatus::DensityFloor: return "density_floor";
    case EvolveStatus::NonFinite: return "non_finite";
    case EvolveStatus::Unstable: return "unstable";
  }
  return "unknown";
}

bool DGParams::has_r_terms() const {
  return std::any_of(d_coeffs.begin(), d_coeffs.end(), [](double d) { return d != 0.0; });
}

bool DGParams::is_nonlinear() const { return kin.c != 0.0 || has_r_terms(); }

void DGParams::validate(const Grid& grid) const {
  kin.validate(grid);
  require(potential.empty() || potential.size() == grid.size(), "potential sample count does not match grid");
  for (double v : potential) require(std::isfinite(v), "potential must be finite");
  for (double d : d_coeffs) require(std::isfinite(d), "d coefficients must be finite");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  if (density_floor) require(std::isfinite(*density_floor) && *density_floor >= 0.0, "density floor must be >= 0");
  require(stability_factor > 0.0, "stability factor must be positive");
}

double stability_bound(const Grid& grid, double hbar, double factor) {
  double gmin = grid.metric(0);
  for (std::size_t d = 1; d < grid.dims(); ++d) gmin = std::min(gmin, grid.metric(d));
  const double h = grid.min_spacing();
  return factor * h * h * gmin / hbar;
}

RField density(std::span<const cplx> psi) {
  RField rho(psi.size());
  kernels::omp::density(rho, psi);
  return rho;
}

std::vector<RField> current(std::span<const cplx> psi, const OneForm& omega, double hbar, const Grid& grid,
                            CurrentPrefactor prefactor, double imag_tol) {
  require(omega.components.size() == grid.dims(), "omega needs one component per dimension");
  const cplx a = prefactor == CurrentPrefactor::Full ? cplx{0.0, -hbar} : cplx{0.0, -0.5 * hbar};
  CField conj_psi(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) conj_psi[i] = std::conj(psi[i]);
  const auto grad = gradient(psi, grid);
  const auto grad_conj = gradient(conj_psi, grid);
  std::vector<RField> j;
  double residue = 0.0;
  double scale = 1.0;
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    RField jd(psi.size());
    const double ginv = grid.inv_metric(d);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const cplx z = a * (conj_psi[i] * grad[d][i] - psi[i] * grad_conj[d][i]);
      const double rho = std::norm(psi[i]);
      jd[i] = z.real() + rho * ginv * omega.components[d][i];
      residue = std::max(residue, std::abs(z.imag()));
      scale = std::max(scale, std::abs(jd[i]));
    }
    j.push_back(std::move(jd));
  }
  if (residue > imag_tol * scale)
    throw NumericalError("current: imaginary residue " + std::to_string(residue) +
                         " exceeds tolerance (aliasing; refine the grid or smooth the state)");
  return j;
}

double resolve_floor(const DGParams& params, std::span<const double> rho) {
  if (params.density_floor) return *params.density_floor;
  double mx = 0.0;
  for (double r : rho) mx = std::max(mx, r);
  return 1e-12 * mx;
}

namespace {

void check_floor(std::span<const double> rho, double floor) {
  const auto [value, at] = kernels::omp::min_with_index(rho);
  if (value < floor) throw DensityFloorError(at, value, floor);
}

std::array<RField, 5> rj_with_floor(std::span<const cplx> psi, std::span<const double> rho,
                                    const DGParams& params, const Grid& grid, double floor) {
  const std::size_t n = psi.size();
  const auto j = current(psi, params.kin.omega, params.kin.hbar, grid, params.conventions.current);
  const RField div_j = divergence(std::span<const RField>(j), grid);
  const RField lap_rho = laplacian(rho, grid);
  std::vector<RField> drho;
  for (std::size_t d = 0; d < grid.dims(); ++d) drho.push_back(partial(rho, d, grid));

  std::array<RField, 5> r;
  for (auto& v : r) v.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double rs = std::max(rho[i], floor);
    double jj = 0.0;
    double dj = 0.0;
    double dd = 0.0;
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      jj += grid.metric(d) * j[d][i] * j[d][i];
      dj += drho[d][i] * j[d][i];
      dd += grid.inv_metric(d) * drho[d][i] * drho[d][i];
    }
    r[0][i] = div_j[i] / rs;
    r[1][i] = lap_rho[i] / rs;
    r[2][i] = jj / (rs * rs);
    r[3][i] = dj / (rs * rs);
    r[4][i] = dd / (rs * rs);
  }
  return r;
}

}  // namespace

std::array<RField, 5> rj_functionals(std::span<const cplx> psi, const DGParams& params, const Grid& grid) {
  require(psi.size() == grid.size(), "wave function does not match grid");
  const RField rho = density(psi);
  const double floor = resolve_floor(params, rho);
  check_floor(rho, floor);
  return rj_with_floor(psi, rho, params, grid, floor);
}

CField rhs(std::span<const cplx> psi, const DGParams& params, const Grid& grid) {
  const RField rho = density(psi);
  return rhs(psi, params, grid, resolve_floor(params, rho));
}

CField rhs(std::span<const cplx> psi, const DGParams& params, const Grid& grid, double floor) {
  require(psi.size() == grid.size(), "wave function does not match grid");
  const std::size_t n = psi.size();
  const CField lap_w = twisted_laplacian(psi, params.kin.omega, params.kin.hbar, grid, params.conventions.twist);
  const RField zeros(n, 0.0);
  const RField& potential = params.potential.empty() ? zeros : params.potential;

  RField r_sum(n, 0.0);
  RField lap_rho(n, 0.0);
  RField rho_safe(n, 1.0);
  if (params.is_nonlinear()) {
    const RField rho = density(psi);
    check_floor(rho, floor);
    for (std::size_t i = 0; i < n; ++i) rho_safe[i] = std::max(rho[i], floor);
    if (params.kin.c != 0.0) lap_rho = laplacian(std::span<const double>(rho), grid);
    if (params.has_r_terms()) {
      const auto r = rj_with_floor(psi, rho, params, grid, floor);
      for (std::size_t k = 0; k < 5; ++k) {
        const double d = params.d_coeffs[k];
        if (d == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) r_sum[i] += d * r[k][i];
      }
    }
  }
  CField out(n);
  kernels::omp::nse_assemble(out, psi, lap_w, potential, r_sum, lap_rho, rho_safe, params.kin.hbar, params.kin.c);
  return out;
}

EvolveResult evolve(std::span<const cplx> psi0, const DGParams& params, const Grid& grid,
                    const EvolveOptions& options) {
  params.validate(grid);
  require(psi0.size() == grid.size(), "initial state does not match grid");
  require(all_finite(psi0), "initial state is not finite");
  require(std::isfinite(options.t_end) && options.t_end >= 0.0, "T must be non-negative");
  for (const auto& f : options.ehrenfest_functions)
    for (std::size_t d = 0; d < grid.dims(); ++d)
      require(static_cast<std::size_t>(f.degree(d)) * 4 <= grid.points(d),
              "Ehrenfest test function degree exceeds N/4");

  const std::size_t steps =
      options.t_end == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(options.t_end / params.dt - 1e-9));
  const double dt = steps == 0 ? params.dt : options.t_end / static_cast<double>(steps);
  const double bound = stability_bound(grid, params.kin.hbar, params.stability_factor);
  require(dt <= bound * (1.0 + 1e-12),
          "dt = " + std::to_string(dt) + " exceeds the stability bound " + std::to_string(bound) +
              " (stability_factor * h_min^2 * g_min / hbar)");

  EvolveResult result;
  result.dt = dt;
  CField psi(psi0.begin(), psi0.end());
  RField rho = density(psi);
  result.floor = params.is_nonlinear() ? resolve_floor(params, rho) : 0.0;
  result.initial_norm = kernels::omp::sum(rho) * grid.cell_volume();
  if (params.is_nonlinear()) {
    const auto [value, at] = kernels::omp::min_with_index(rho);
    require(value >= result.floor, "initial state violates the density floor at grid index " +
                                       std::to_string(at) + " (rho = " + std::to_string(value) + ")");
  }

  const EhrenfestData ehr = prepare_ehrenfest(options.ehrenfest_functions, grid);
  struct ProbeData {
    RField f;
    std::vector<RField> x;
    RField div_x;
  };
  std::vector<ProbeData> probes;
  for (const auto& p : options.probes) {
    ProbeData pd;
    if (p.x) {
      for (std::size_t d = 0; d < grid.dims(); ++d)
        require(static_cast<std::size_t>(p.x->components.at(d).degree(d)) * 4 <= grid.points(d),
                "probe '" + p.name + "' vector field degree exceeds N/4");
      pd.x = p.x->sample(grid);
      pd.div_x = p.x->sample_divergence(grid);
    } else {
      pd.f = p.f.sample(grid);
    }
    probes.push_back(std::move(pd));
  }

  std::vector<std::vector<double>> q_series(ehr.f.size());
  std::vector<std::vector<double>> p_series(ehr.f.size());

  auto record_state = [&](double time, std::span<const cplx> state, std::span<const double> r) {
    DiagnosticsRecord rec;
    rec.time = time;
    rec.norm = kernels::omp::sum(r) * grid.cell_volume();
    rec.min_rho = kernels::omp::min_with_index(r).first;
    const StepScalars s = step_scalars(state, r, ehr, params.kin, grid);
    for (std::size_t k = 0; k < s.q.size(); ++k) {
      q_series[k].push_back(s.q[k]);
      p_series[k].push_back(s.p[k]);
    }
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const auto& pd = probes[k];
      rec.probes.push_back(options.probes[k].x ? expect_p(pd.x, pd.div_x, state, params.kin, grid)
                                               : expect_q(pd.f, r, grid));
    }
    result.records.push_back(std::move(rec));
  };

  auto take_snapshot = [&](double time, std::span<const cplx> state) {
    result.snapshots.push_back({time, CField(state.begin(), state.end())});
  };

  record_state(0.0, psi, rho);
  take_snapshot(0.0, psi);
  ContinuityTerms prev = continuity_terms(psi, params, grid);
  std::vector<double> fp;

  const double floor = result.floor;
  auto f = [&](std::span<const cplx> v) { return rhs(v, params, grid, floor); };
  CField tmp(psi.size());
  double time = 0.0;
  for (std::size_t step = 0; step < steps; ++step) {
    CField next = psi;
    try {
      const CField k1 = f(next);
      kernels::omp::stage(tmp, next, 0.5 * dt, k1);
      const CField k2 = f(tmp);
      kernels::omp::stage(tmp, next, 0.5 * dt, k2);
      const CField k3 = f(tmp);
      kernels::omp::stage(tmp, next, dt, k3);
      const CField k4 = f(tmp);
      kernels::omp::rk4_combine(next, dt, k1, k2, k3, k4);
    } catch (const DensityFloorError& e) {
      result.status = EvolveStatus::DensityFloor;
      result.message = std::string(e.what()) + " during step " + std::to_string(step + 1);
      break;
    }
    if (!all_finite(next)) {
      result.status = EvolveStatus::NonFinite;
      result.message = "non-finite wave function after step " + std::to_string(step + 1);
      break;
    }
    const double nrm = norm_sq(next, grid);
    // The flow conserves the norm; leaving [N0 / f, f N0] in either direction
    // means unresolved growth (ill-posed or under-resolved configurations).
    if (nrm > options.blowup_factor * result.initial_norm || nrm * options.blowup_factor < result.initial_norm) {
      result.status = EvolveStatus::Unstable;
      result.message = "norm left the admissible band: " + std::to_string(nrm) + " (initial " +
                       std::to_string(result.initial_norm) + ") after step " + std::to_string(step + 1);
      break;
    }
    psi = std::move(next);
    time = static_cast<double>(step + 1) * dt;
    result.steps = step + 1;
    rho = density(psi);
    ContinuityTerms cur = continuity_terms(psi, params, grid);
    fp.push_back(continuity_residual(prev, cur, dt, params.kin.c, grid));
    prev = std::move(cur);
    record_state(time, psi, rho);
    if (options.snapshot_every != 0 && (step + 1) % options.snapshot_every == 0 && step + 1 != steps)
      take_snapshot(time, psi);
  }
  if (result.snapshots.back().time != time) take_snapshot(time, psi);

  // Post-processing over the recorded series.
  const std::size_t nrec = result.records.size();
  for (std::size_t k = 0; k < ehr.f.size(); ++k) {
    const auto series = ehrenfest_series(q_series[k], p_series[k], dt);
    for (std::size_t i = 0; i < nrec; ++i) {
      result.records[i].ehrenfest.push_back(series[i]);
      result.records[i].ehrenfest_max = std::max(result.records[i].ehrenfest_max, series[i]);
      if (i > 0 && i + 1 < nrec) result.ehrenfest_max = std::max(result.ehrenfest_max, series[i]);
    }
  }
  for (std::size_t i = 0; i < nrec; ++i) {
    if (fp.empty()) break;
    result.records[i].fp_residual = i == 0 ? fp[0] : fp[i - 1];
  }
  for (double v : fp) result.fp_max = std::max(result.fp_max, v);
  result.min_rho = std::numeric_limits<double>::infinity();
  for (const auto& r : result.records) result.min_rho = std::min(result.min_rho, r.min_rho);
  result.final_state = psi;
  result.final_time = time;
  result.norm_drift = std::abs(result.records.back().norm - result.initial_norm);
  return result;
}

double fokker_planck_residual(std::span<const cplx> psi_a, std::span<const cplx> psi_b, double dt,
                              const DGParams& params, const Grid& grid) {
  require(psi_a.size() == grid.size() && psi_b.size() == grid.size(), "snapshots do not match grid");
  require(dt > 0.0, "dt must be positive");
  return continuity_residual(continuity_terms(psi_a, params, grid), continuity_terms(psi_b, params, grid), dt,
                             params.kin.c, grid);
}

double ehrenfest_residual(const TrigPoly& f, std::span<const CField> window, double dt, const DGParams& params,
                          const Grid& grid) {
  require(window.size() >= 3, "Ehrenfest residual needs at least three snapshots");
  require(dt > 0.0, "dt must be positive");
  const EhrenfestData data = prepare_ehrenfest({f}, grid);
  std::vector<double> q;
  std::vector<double> p;
  for (const auto& psi : window) {
    const RField rho = density(psi);
    const StepScalars s = step_scalars(psi, rho, data, params.kin, grid);
    q.push_back(s.q[0]);
    p.push_back(s.p[0]);
  }
  const auto series = ehrenfest_series(q, p, dt);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) worst = std::max(worst, series[i]);
  return worst;
}

void normalize(CField& psi, const Grid& grid) {
  const double n = l2_norm(psi, grid);
  require(n > 0.0 && std::isfinite(n), "state has zero or non-finite norm");
  for (auto& z : psi) z /= n;
}

CField plane_wave(const Grid& grid, std::array<long, 2> modes) {
  return superposition(grid, {{modes, cplx{1.0, 0.0}}});
}

CField superposition(const Grid& grid, const std::vector<std::pair<std::array<long, 2>, cplx>>& terms) {
  require(!terms.empty(), "superposition needs at least one term");
  CField psi(grid.size(), cplx{});
  for (const auto& [modes, amp] : terms) {
    const CField wave = grid.sample_complex([&](std::span<const double> x) {
      double arg = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d)
        arg += kTwoPi * static_cast<double>(modes[d]) * x[d] / grid.extent(d);
      return std::polar(1.0, arg);
    });
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += amp * wave[i];
  }
  normalize(psi, grid);
  return psi;
}

CField gaussian(const Grid& grid, std::span<const double> center, double width, std::span<const double> k) {
  require(width > 0.0, "Gaussian width must be positive");
  require(center.size() == grid.dims() && k.size() == grid.dims(), "Gaussian center/k dimension mismatch");
  const bool closed = grid.manifold().is_closed();
  if (closed)
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      const double m = k[d] * grid.extent(d) / kTwoPi;
      require(std::abs(m - std::round(m)) < 1e-9, "Gaussian wavenumber must be an integer mode on a closed manifold");
    }
  const int images = closed ? 4 : 0;
  CField psi = grid.sample_complex([&](std::span<const double> x) {
    cplx v{1.0, 0.0};
    for (std::size_t d = 0; d < x.size(); ++d) {
      double s = 0.0;
      for (int m = -images; m <= images; ++m) {
        const double dx = x[d] - center[d] + m * grid.extent(d);
        s += std::exp(-dx * dx / (4.0 * width * width));
      }
      v *= s * std::polar(1.0, k[d] * x[d]);
    }
    return v;
  });
  normalize(psi, grid);
  return psi;
}

CField nodeless_state(const Grid& grid, double a, double b) {
  CField psi = grid.sample_complex([&](std::span<const double> x) {
    const double phi = kTwoPi * x[0] / grid.extent(0);
    return std::exp(cplx{a * std::cos(phi), b * std::sin(phi)});
  });
  normalize(psi, grid);
  return psi;
}

}  // namespace borelq
