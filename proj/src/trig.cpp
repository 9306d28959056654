#include "borelq/trig.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "borelq/error.hpp"

namespace borelq {
namespace {

double phase(const TrigTerm& t, std::span<const double> x, std::span<const double> extents) {
  double a = 0.0;
  for (std::size_t d = 0; d < x.size() && d < 2; ++d)
    if (t.modes[d] != 0) a += kTwoPi * t.modes[d] * x[d] / extents[d];
  return a;
}

}  // namespace

TrigPoly TrigPoly::constant(double c) {
  if (c == 0.0) return {};
  return TrigPoly({TrigTerm{TrigTerm::Kind::Const, {0, 0}, c}});
}

TrigPoly TrigPoly::cosine(std::array<int, 2> modes, double coef) {
  return TrigPoly({TrigTerm{TrigTerm::Kind::Cos, modes, coef}});
}

TrigPoly TrigPoly::sine(std::array<int, 2> modes, double coef) {
  return TrigPoly({TrigTerm{TrigTerm::Kind::Sin, modes, coef}});
}

bool TrigPoly::is_constant() const {
  for (const auto& t : terms_)
    if (t.kind != TrigTerm::Kind::Const && (t.modes[0] != 0 || t.modes[1] != 0)) return false;
  return true;
}

int TrigPoly::degree() const { return std::max(degree(0), degree(1)); }

int TrigPoly::degree(std::size_t d) const {
  int deg = 0;
  for (const auto& t : terms_)
    if (t.kind != TrigTerm::Kind::Const) deg = std::max(deg, std::abs(t.modes[d]));
  return deg;
}

double TrigPoly::operator()(std::span<const double> x, std::span<const double> extents) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    switch (t.kind) {
      case TrigTerm::Kind::Const: v += t.coef; break;
      case TrigTerm::Kind::Cos: v += t.coef * std::cos(phase(t, x, extents)); break;
      case TrigTerm::Kind::Sin: v += t.coef * std::sin(phase(t, x, extents)); break;
    }
  }
  return v;
}

RField TrigPoly::sample(const Grid& grid) const {
  const auto& ext = grid.manifold().extents;
  return grid.sample([&](std::span<const double> x) { return (*this)(x, ext); });
}

TrigPoly TrigPoly::derivative(std::size_t d, std::span<const double> extents) const {
  std::vector<TrigTerm> out;
  for (const auto& t : terms_) {
    if (t.kind == TrigTerm::Kind::Const || t.modes[d] == 0) continue;
    const double k = kTwoPi * t.modes[d] / extents[d];
    if (t.kind == TrigTerm::Kind::Cos)
      out.push_back({TrigTerm::Kind::Sin, t.modes, -k * t.coef});
    else
      out.push_back({TrigTerm::Kind::Cos, t.modes, k * t.coef});
  }
  return TrigPoly(std::move(out));
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

TrigPoly& TrigPoly::operator*=(double s) {
  for (auto& t : terms_) t.coef *= s;
  return *this;
}

TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
TrigPoly operator*(double s, TrigPoly a) { return a *= s; }

TrigPoly TrigPoly::parse(std::string_view text, std::size_t dims) {
  std::vector<TrigTerm> terms;
  std::string all(text);
  std::stringstream outer(all);
  std::string chunk;
  while (std::getline(outer, chunk, ';')) {
    std::stringstream in(chunk);
    std::string kind;
    if (!(in >> kind)) continue;
    TrigTerm t;
    if (kind == "const") {
      t.kind = TrigTerm::Kind::Const;
    } else if (kind == "cos" || kind == "sin") {
      t.kind = kind == "cos" ? TrigTerm::Kind::Cos : TrigTerm::Kind::Sin;
      for (std::size_t d = 0; d < dims; ++d)
        if (!(in >> t.modes[d]))
          throw PreconditionError("cli", "trig term '" + chunk + "' needs " + std::to_string(dims) + " integer modes");
    } else {
      throw PreconditionError("cli", "unknown trig term kind '" + kind + "'");
    }
    if (!(in >> t.coef)) throw PreconditionError("cli", "trig term '" + chunk + "' is missing its coefficient");
    std::string extra;
    if (in >> extra) throw PreconditionError("cli", "trailing input in trig term '" + chunk + "'");
    terms.push_back(t);
  }
  return TrigPoly(std::move(terms));
}

std::string TrigPoly::to_string(std::size_t dims) const {
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) out << "; ";
    first = false;
    if (t.kind == TrigTerm::Kind::Const) {
      out << "const " << t.coef;
      continue;
    }
    out << (t.kind == TrigTerm::Kind::Cos ? "cos" : "sin");
    for (std::size_t d = 0; d < dims; ++d) out << ' ' << t.modes[d];
    out << ' ' << t.coef;
  }
  return out.str();
}

VectorFieldSpec VectorFieldSpec::zero(std::size_t dims) {
  return VectorFieldSpec{std::vector<TrigPoly>(dims)};
}

VectorFieldSpec VectorFieldSpec::coordinate(std::size_t dims, std::size_t d, double scale) {
  VectorFieldSpec x = zero(dims);
  x.components[d] = TrigPoly::constant(scale);
  return x;
}

int VectorFieldSpec::degree() const {
  int deg = 0;
  for (const auto& c : components) deg = std::max(deg, c.degree());
  return deg;
}

bool VectorFieldSpec::is_constant() const {
  for (const auto& c : components)
    if (!c.is_constant()) return false;
  return true;
}

std::vector<RField> VectorFieldSpec::sample(const Grid& grid) const {
  if (components.size() != grid.dims())
    throw PreconditionError("kinematics", "vector field has " + std::to_string(components.size()) +
                                              " components, manifold has " + std::to_string(grid.dims()));
  std::vector<RField> out;
  for (const auto& c : components) out.push_back(c.sample(grid));
  return out;
}

RField VectorFieldSpec::sample_divergence(const Grid& grid) const {
  const auto& ext = grid.manifold().extents;
  TrigPoly div;
  for (std::size_t d = 0; d < components.size(); ++d) div += components[d].derivative(d, ext);
  return div.sample(grid);
}

RField VectorFieldSpec::lie_derivative(const TrigPoly& f, const Grid& grid) const {
  const auto& ext = grid.manifold().extents;
  RField out(grid.size(), 0.0);
  for (std::size_t d = 0; d < components.size(); ++d) {
    const RField xd = components[d].sample(grid);
    const RField df = f.derivative(d, ext).sample(grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += xd[i] * df[i];
  }
  return out;
}

VectorFieldSpec metric_gradient(const TrigPoly& f, const ManifoldSpec& manifold) {
  VectorFieldSpec g = VectorFieldSpec::zero(manifold.dims());
  for (std::size_t d = 0; d < manifold.dims(); ++d)
    g.components[d] = (1.0 / manifold.metric_diag[d]) * f.derivative(d, manifold.extents);
  return g;
}

}  // namespace borelq
