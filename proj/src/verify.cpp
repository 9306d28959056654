#include "borelq/verify.hpp"

#include <cmath>
#include <random>

#include "borelq/classical.hpp"
#include "borelq/error.hpp"
#include "borelq/kinematics.hpp"
#include "json.hpp"

namespace borelq {
namespace {

CheckResult below(std::string tag, std::string name, double residual, double tol) {
  return {std::move(tag), std::move(name), residual, tol, residual < tol, 0.0, false};
}

CheckResult band(std::string tag, std::string name, double ratio, double lo, double hi) {
  return {std::move(tag), std::move(name), ratio, hi, ratio >= lo && ratio <= hi, lo, true};
}

std::string label(double theta, double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "theta=%g c=%g", theta, c);
  return buf;
}

double diff_norm(const CField& a, const CField& b, const Grid& grid) {
  CField d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return l2_norm(d, grid);
}

void append(SuiteReport& into, const SuiteReport& from) {
  into.checks.insert(into.checks.end(), from.checks.begin(), from.checks.end());
}

}  // namespace

bool SuiteReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::vector<std::string> suite_names() { return {"algebra", "imprimitivity", "poisson", "ehrenfest-classical", "all"}; }

SuiteReport run_suite(std::string_view name) {
  if (name == "algebra") return verify_algebra();
  if (name == "imprimitivity") return verify_imprimitivity();
  if (name == "poisson") return verify_poisson();
  if (name == "ehrenfest-classical") return verify_classical_ehrenfest();
  if (name == "all") {
    SuiteReport all{"all", {}};
    append(all, verify_algebra());
    append(all, verify_imprimitivity());
    append(all, verify_poisson());
    append(all, verify_classical_ehrenfest());
    return all;
  }
  throw PreconditionError("cli", "unknown verification suite '" + std::string(name) +
                                     "' (expected algebra, imprimitivity, poisson, ehrenfest-classical or all)");
}

std::string to_json(const SuiteReport& report) {
  nlohmann::json j;
  j["suite"] = report.suite;
  j["pass"] = report.pass();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json e{{"tag", c.tag}, {"name", c.name}, {"residual", c.residual}, {"pass", c.pass}};
    if (c.is_band) e["band"] = {c.lower, c.tolerance};
    else e["tolerance"] = c.tolerance;
    j["checks"].push_back(e);
  }
  return j.dump(2);
}

SuiteReport verify_algebra() {
  SuiteReport report{"algebra", {}};
  const Grid grid(ManifoldSpec::circle(), {128});
  const auto vectors = random_test_vectors(grid, 8, 16, 0x5eedULL);

  const TrigPoly f = TrigPoly::cosine({3, 0}) + TrigPoly::sine({2, 0}, 0.5) + TrigPoly::constant(0.25);
  const TrigPoly g = TrigPoly::sine({5, 0}) + TrigPoly::cosine({1, 0}, -0.2);
  const VectorFieldSpec x{{TrigPoly::constant(1.0) + TrigPoly::cosine({3, 0}, 0.4)}};
  const VectorFieldSpec y{{TrigPoly::sine({2, 0}, 0.2) + TrigPoly::cosine({5, 0}, 0.5)}};
  const double alpha = 0.7;
  const RField fs = f.sample(grid);
  const RField gs = g.sample(grid);
  RField f_alpha_g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f_alpha_g[i] = fs[i] + alpha * gs[i];
  VectorFieldSpec x_alpha_y{{x.components[0] + alpha * y.components[0]}};

  for (double theta : {0.0, 0.3, 1.7}) {
    for (double c : {0.0, 0.5, -1.2}) {
      const std::array<double, 1> th{theta};
      const KinematicsParams kin = KinematicsParams::with_theta(grid, th, 1.0, c);
      const std::string at = label(theta, c);

      double qlin = 0.0;
      double padd = 0.0;
      for (const auto& psi : vectors) {
        const CField lhs = apply_q(f_alpha_g, psi);
        CField rhs = apply_q(fs, psi);
        const CField qg = apply_q(gs, psi);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += alpha * qg[i];
        qlin = std::max(qlin, diff_norm(lhs, rhs, grid) / l2_norm(psi, grid));

        const CField plhs = apply_p(x_alpha_y, psi, kin, grid);
        CField prhs = apply_p(x, psi, kin, grid);
        const CField py = apply_p(y, psi, kin, grid);
        for (std::size_t i = 0; i < prhs.size(); ++i) prhs[i] += alpha * py[i];
        padd = std::max(padd, diff_norm(plhs, prhs, grid) / l2_norm(psi, grid));
      }
      report.checks.push_back(below("Qlin", "Q(f + a g) = Q(f) + a Q(g), " + at, qlin, 1e-10));
      report.checks.push_back(below("partadd", "P(X + a Y) = P(X) + a P(Y), " + at, padd, 1e-10));

      CommutatorArgs args;
      args.f = f;
      args.g = g;
      args.x = x;
      args.y = y;
      report.checks.push_back(
          below("Qcom", "[Q(f), Q(g)] = 0, " + at, commutator_residual(CommutatorKind::QQ, args, kin, grid), 1e-10));
      report.checks.push_back(below("PQcom", "[P(X), Q(f)] = (hbar/i) Q(X f), " + at,
                                    commutator_residual(CommutatorKind::PQ, args, kin, grid), 1e-10));
      report.checks.push_back(below("parhom", "[P(X), P(Y)] = (hbar/i) P([X, Y]), " + at,
                                    commutator_residual(CommutatorKind::PP, args, kin, grid), 1e-10));
    }
  }

  // Torus: nonconstant fields in both directions, flat and magnetic.
  const Grid torus(ManifoldSpec::torus2(), {64, 64});
  const std::array<double, 2> th{0.3, -0.8};
  const KinematicsParams kin = KinematicsParams::with_theta(torus, th, 1.0, 0.4);
  CommutatorArgs args;
  args.x = VectorFieldSpec{{TrigPoly::constant(1.0) + TrigPoly::cosine({1, 2}, 0.3), TrigPoly::sine({2, 0}, 0.5)}};
  args.y = VectorFieldSpec{{TrigPoly::sine({0, 1}, 0.4), TrigPoly::constant(-0.7) + TrigPoly::cosine({1, 1}, 0.2)}};
  report.checks.push_back(below("parhom", "[P(X), P(Y)] = (hbar/i) P([X, Y]), torus",
                                commutator_residual(CommutatorKind::PP, args, kin, torus), 1e-10));
  args.e = 1.3;
  args.phi.phi01 = (TrigPoly::cosine({1, 1}, 0.6) + TrigPoly::sine({2, 1}, -0.25)).sample(torus);
  report.checks.push_back(below("wecom", "[P(X), P(Y)] = (hbar/i)(P([X, Y]) + e Q(phi(X, Y))), torus",
                                commutator_residual(CommutatorKind::PPMagnetic, args, kin, torus), 1e-10));
  return report;
}

SuiteReport verify_imprimitivity() {
  SuiteReport report{"imprimitivity", {}};
  const Grid grid(ManifoldSpec::circle(), {128});
  const auto vectors = random_test_vectors(grid, 8, 16, 0x1a2bULL);
  std::mt19937_64 rng(20240611ULL);
  std::uniform_int_distribution<std::size_t> idx(0, 128);
  std::uniform_int_distribution<long> shift(-200, 200);
  std::uniform_int_distribution<int> pieces(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<IndexInterval> ivs;
    const int count = pieces(rng);
    for (int k = 0; k < count; ++k) {
      std::size_t a = idx(rng);
      std::size_t b = idx(rng);
      if (a > b) std::swap(a, b);
      ivs.push_back({a, b});
    }
    const BorelSet set = BorelSet::from_indices(grid, {ivs});
    const double scale = trial % 2 == 0 ? 1.0 : 2.0;
    const long m = shift(rng);
    const double s = static_cast<double>(m) * grid.spacing(0) / scale;
    const std::array<double, 1> th{unit(rng) * 2.0};
    const KinematicsParams kin = KinematicsParams::with_theta(grid, th, 1.0, unit(rng) - 0.5);
    const double r = imprimitivity_residual(VectorFieldSpec::coordinate(1, 0, scale), s, set, vectors, kin, grid);
    report.checks.push_back(below("loc-cons", "V E(B) V^-1 = E(Phi B), trial " + std::to_string(trial), r, 1e-12));
  }
  return report;
}

SuiteReport verify_poisson() {
  SuiteReport report{"poisson", {}};
  std::mt19937_64 rng(77ULL);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> mom(-2.0, 2.0);

  const ManifoldSpec circle = ManifoldSpec::circle();
  const auto qf = make_qf(TrigPoly::sine({1, 0}) + TrigPoly::cosine({2, 0}, 0.3), circle);
  const auto qg = make_qf(TrigPoly::cosine({3, 0}, 0.7), circle);
  const TrigPoly f = TrigPoly::sine({2, 0}, 0.5) + TrigPoly::cosine({1, 0});
  const VectorFieldSpec x{{TrigPoly::sine({1, 0})}};
  const VectorFieldSpec y{{TrigPoly::cosine({1, 0})}};
  const auto px = make_px(x, circle);
  const auto py = make_px(y, circle);
  // [X, Y] = (sin (-sin) - cos cos) d = -d.
  const auto p_bracket = make_px(VectorFieldSpec{{TrigPoly::constant(-1.0)}}, circle);
  const auto q_xf = make_general([&](const PhasePoint& a) {
    const std::array<double, 1> ext{kTwoPi};
    return std::sin(a.x[0]) * f.derivative(0, ext)(a.x, ext);
  });
  const auto qf2 = make_qf(f, circle);

  double qq = 0.0;
  double pq = 0.0;
  double pp = 0.0;
  double anti = 0.0;
  for (int i = 0; i < 50; ++i) {
    const PhasePoint a{{angle(rng)}, {mom(rng)}};
    qq = std::max(qq, std::abs(poisson_bracket(qf, qg, a)));
    pq = std::max(pq, std::abs(poisson_bracket(px, qf2, a) - eval_observable(q_xf, a)));
    pp = std::max(pp, std::abs(poisson_bracket(px, py, a) - eval_observable(p_bracket, a)));
    anti = std::max(anti, std::abs(poisson_bracket(px, qf2, a) + poisson_bracket(qf2, px, a)));
  }
  report.checks.push_back(below("wcom", "{Q_f, Q_g} = 0", qq, 1e-8));
  report.checks.push_back(below("wcom", "{P_X, Q_f} = Q_{X f}", pq, 1e-8));
  report.checks.push_back(below("wcom", "{P_X, P_Y} = P_[X,Y]", pp, 1e-8));
  report.checks.push_back(below("wcom", "antisymmetry", anti, 1e-8));

  const ManifoldSpec torus = ManifoldSpec::torus2();
  const auto p1 = make_px(VectorFieldSpec::coordinate(2, 0), torus);
  const auto p2 = make_px(VectorFieldSpec::coordinate(2, 1), torus);
  std::uniform_real_distribution<double> field(-1.0, 1.0);
  const double e = 1.3;
  double mag = 0.0;
  double jac = 0.0;
  const auto q_torus = make_qf(TrigPoly::sine({1, 1}) + TrigPoly::cosine({0, 2}, 0.4), torus);
  const auto px_torus =
      make_px(VectorFieldSpec{{TrigPoly::cosine({0, 1}), TrigPoly::constant(0.5) + TrigPoly::sine({1, 0}, 0.3)}}, torus);
  for (int i = 0; i < 50; ++i) {
    const PhasePoint a{{angle(rng), angle(rng)}, {mom(rng), mom(rng)}};
    const PointTwoForm phi{field(rng)};
    mag = std::max(mag, std::abs(poisson_bracket(p1, p2, a, e, phi) - e * phi.phi01));
    // Jacobi on {P_X, Q_f, P_d1} with nested central differences.
    const double step = 1e-5;
    const double outer = 1e-5;
    const auto bc = [&](const ClassicalObservable& u, const ClassicalObservable& v, const ClassicalObservable& w) {
      return poisson_bracket(u, bracket_observable(v, w, e, phi, step), a, e, phi, outer);
    };
    jac = std::max(jac, std::abs(bc(px_torus, q_torus, p1) + bc(q_torus, p1, px_torus) + bc(p1, px_torus, q_torus)));
  }
  report.checks.push_back(below("wecom", "{P_d1, P_d2}_e = e phi_12", mag, 1e-6));
  report.checks.push_back(below("wecom", "Jacobi identity, constant phi", jac, 1e-6));
  return report;
}

SuiteReport verify_classical_ehrenfest() {
  SuiteReport report{"ehrenfest-classical", {}};
  const ManifoldSpec circle = ManifoldSpec::circle();
  const TrigPoly sine = TrigPoly::sine({1, 0});
  const PhasePoint free0{{0.3}, {1.0}};
  const auto free1 = integrate_trajectory(zero_force(1), free0, 1e-3, 2.0, circle);
  const auto free2 = integrate_trajectory(zero_force(1), free0, 5e-4, 2.0, circle);
  const double rf1 = classical_ehrenfest_residual(sine, free1, circle);
  const double rf2 = classical_ehrenfest_residual(sine, free2, circle);
  report.checks.push_back(below("cm-Ehr", "free flow, f = sin, dt = 1e-3", rf1, 1e-6));
  report.checks.push_back(band("cm-Ehr", "free flow, residual ratio under dt halving", rf1 / rf2, 3.5, 4.5));

  const ManifoldSpec line = ManifoldSpec::line_segment(20.0);
  const Force spring = harmonic_force(1.0, {10.0});
  const PhasePoint h0{{11.0}, {0.5}};
  const auto h1 = integrate_trajectory(spring, h0, 1e-3, 10.0, line);
  const auto h2 = integrate_trajectory(spring, h0, 5e-4, 10.0, line);
  const TrigPoly wave = TrigPoly::sine({1, 0});
  const double rx = classical_ehrenfest_residual(coordinate_function(0, 1), h1, line);
  const double rh1 = classical_ehrenfest_residual(wave, h1, line);
  const double rh2 = classical_ehrenfest_residual(wave, h2, line);
  report.checks.push_back(below("cm-Ehr", "harmonic force, f = x, dt = 1e-3", rx, 1e-6));
  report.checks.push_back(below("cm-Ehr", "harmonic force, f = sin(2 pi x / L), dt = 1e-3", rh1, 1e-6));
  report.checks.push_back(band("cm-Ehr", "harmonic force, residual ratio under dt halving", rh1 / rh2, 3.5, 4.5));

  auto potential = [](std::span<const double> x) { return 0.5 * (x[0] - 10.0) * (x[0] - 10.0); };
  const double e0 = classical_energy(h1.states.front(), line, potential);
  double drift = 0.0;
  for (const auto& s : h1.states) drift = std::max(drift, std::abs(classical_energy(s, line, potential) - e0));
  report.checks.push_back(below("cm-evo", "harmonic energy drift, T = 10, dt = 1e-3", drift, 1e-6));
  return report;
}

}  // namespace borelq
