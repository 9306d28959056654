#include "borelq/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "borelq/error.hpp"
#include "borelq/io.hpp"
#include "borelq/kinematics.hpp"

namespace borelq {
namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) {
  throw PreconditionError("cli", "[" + section + "] " + key + ": " + message);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {
    if (tree_)
      for (const auto& [k, v] : *tree_) values_[k] = trim(v.data());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    return parse_number(key, text(key, ""));
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    std::vector<double> out;
    std::stringstream in(text(key, ""));
    std::string tok;
    while (in >> tok) out.push_back(parse_number(key, tok));
    return out;
  }

  long integer(const std::string& key, long fallback) {
    const double v = number(key, static_cast<double>(fallback));
    if (v != std::floor(v)) fail(name_, key, "expected an integer");
    return static_cast<long>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    const std::string v = text(key, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(name_, key, "expected true or false, got '" + v + "'");
  }

  TrigPoly trig(const std::string& key, std::size_t dims) {
    const std::string v = text(key, "");
    try {
      return TrigPoly::parse(v, dims);
    } catch (const PreconditionError& e) {
      fail(name_, key, e.what());
    }
  }

  const std::string& name() const { return name_; }
  const std::map<std::string, std::string>& values() const { return values_; }
  void mark(const std::string& key) { used_.insert(key); }

  void reject_unknown() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) fail(name_, k, "unknown key");
  }

 private:
  double parse_number(const std::string& key, const std::string& s) const {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
      fail(name_, key, "expected a finite number, got '" + s + "'");
    return v;
  }

  std::string name_;
  const pt::ptree* tree_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

Section section(const pt::ptree& root, const std::string& name) {
  auto it = root.find(name);
  return Section(name, it == root.not_found() ? nullptr : &it->second);
}

VectorFieldSpec parse_vector_field(Section& s, const std::string& key, std::size_t dims) {
  const auto parts = split(s.text(key, ""), '|');
  if (parts.size() != dims) fail(s.name(), key, "vector field needs " + std::to_string(dims) + " components separated by '|'");
  VectorFieldSpec x;
  for (const auto& p : parts) {
    try {
      x.components.push_back(TrigPoly::parse(p, dims));
    } catch (const PreconditionError& e) {
      fail(s.name(), key, e.what());
    }
  }
  return x;
}

CurrentPrefactor parse_current(Section& s) {
  const std::string v = s.text("current", "full");
  if (v == "full") return CurrentPrefactor::Full;
  if (v == "conventional") return CurrentPrefactor::Conventional;
  fail(s.name(), "current", "expected full or conventional, got '" + v + "'");
}

TwistCoupling parse_twist(Section& s) {
  const std::string v = s.text("twist", "half");
  if (v == "half") return TwistCoupling::Half;
  if (v == "conventional") return TwistCoupling::Conventional;
  fail(s.name(), "twist", "expected half or conventional, got '" + v + "'");
}

std::size_t column_index(const std::string& name) {
  for (std::size_t c = 0; c < kFitColumns.size(); ++c)
    if (name == kFitColumns[c]) return c;
  throw PreconditionError("cli", "[gauge] exclude: unknown fit column '" + name + "'");
}

RunConfig from_tree(const pt::ptree& root) {
  static const std::set<std::string> known{"manifold", "kinematics", "dynamics", "initial",
                                           "probes",   "output",     "gauge"};
  for (const auto& [name, child] : root) {
    if (!known.count(name)) throw PreconditionError("cli", "unknown section [" + name + "]");
    if (child.empty() && !child.data().empty())
      throw PreconditionError("cli", "key '" + name + "' outside of any section");
  }

  RunConfig cfg;
  {
    Section s = section(root, "manifold");
    try {
      cfg.manifold.kind = parse_manifold_kind(s.text("kind", "circle"));
    } catch (const PreconditionError& e) {
      fail("manifold", "kind", e.what());
    }
    const std::size_t dims = cfg.manifold.dims();
    const auto pts = s.numbers("points", std::vector<double>(dims, 128.0));
    const auto ext = s.numbers("extents", std::vector<double>(dims, kTwoPi));
    const auto met = s.numbers("metric", std::vector<double>(dims, 1.0));
    if (pts.size() != dims) fail("manifold", "points", "need " + std::to_string(dims) + " values");
    if (ext.size() != dims) fail("manifold", "extents", "need " + std::to_string(dims) + " values");
    if (met.size() != dims) fail("manifold", "metric", "need " + std::to_string(dims) + " values");
    cfg.points.clear();
    for (double p : pts) {
      if (p < 1 || p != std::floor(p)) fail("manifold", "points", "expected positive integers");
      cfg.points.push_back(static_cast<std::size_t>(p));
    }
    cfg.manifold.extents = ext;
    cfg.manifold.metric_diag = met;
    s.reject_unknown();
  }
  const std::size_t dims = cfg.manifold.dims();
  {
    Section s = section(root, "kinematics");
    cfg.hbar = s.number("hbar", 1.0);
    cfg.c = s.number("c", 0.0);
    cfg.theta = s.numbers("theta", std::vector<double>(dims, 0.0));
    if (cfg.theta.size() != dims) fail("kinematics", "theta", "need " + std::to_string(dims) + " values");
    cfg.chi = s.trig("chi", dims);
    s.reject_unknown();
  }
  {
    Section s = section(root, "dynamics");
    cfg.potential = s.trig("potential", dims);
    const auto d = s.numbers("d", std::vector<double>(5, 0.0));
    if (d.size() != 5) fail("dynamics", "d", "need five coefficients d1..d5");
    std::copy(d.begin(), d.end(), cfg.d_coeffs.begin());
    cfg.dt = s.number("dt", 1e-3);
    cfg.t_end = s.number("T", 1.0);
    if (s.has("density_floor")) cfg.density_floor = s.number("density_floor", 0.0);
    else s.mark("density_floor");
    cfg.conventions.current = parse_current(s);
    cfg.conventions.twist = parse_twist(s);
    cfg.stability_factor = s.number("stability_factor", 0.5);
    s.reject_unknown();
  }
  {
    Section s = section(root, "initial");
    const std::string type = s.text("type", "plane_wave");
    auto& in = cfg.initial;
    if (type == "plane_wave") in.kind = InitialSpec::Kind::PlaneWave;
    else if (type == "gaussian") in.kind = InitialSpec::Kind::Gaussian;
    else if (type == "superposition") in.kind = InitialSpec::Kind::Superposition;
    else if (type == "nodeless") in.kind = InitialSpec::Kind::Nodeless;
    else if (type == "random") in.kind = InitialSpec::Kind::Random;
    else fail("initial", "type", "unknown initial state '" + type + "'");
    const auto k = s.numbers("k", std::vector<double>(dims, 0.0));
    if (k.size() != dims) fail("initial", "k", "need " + std::to_string(dims) + " mode numbers");
    for (std::size_t d = 0; d < dims; ++d) {
      if (k[d] != std::floor(k[d])) fail("initial", "k", "mode numbers must be integers");
      in.k[d] = static_cast<long>(k[d]);
    }
    std::vector<double> mid;
    for (std::size_t d = 0; d < dims; ++d) mid.push_back(0.5 * cfg.manifold.extents[d]);
    in.center = s.numbers("center", mid);
    in.width = s.number("width", 0.5);
    in.momentum = s.numbers("momentum", std::vector<double>(dims, 0.0));
    if (in.center.size() != dims) fail("initial", "center", "need " + std::to_string(dims) + " values");
    if (in.momentum.size() != dims) fail("initial", "momentum", "need " + std::to_string(dims) + " values");
    const std::string terms = s.text("terms", "");
    for (const auto& t : split(terms, ';')) {
      if (t.empty()) continue;
      std::stringstream ts(t);
      std::vector<double> v;
      double x;
      while (ts >> x) v.push_back(x);
      if (v.size() != dims + 2 || !ts.eof()) fail("initial", "terms", "each term is '<modes> re im', got '" + t + "'");
      std::array<long, 2> m{0, 0};
      for (std::size_t d = 0; d < dims; ++d) m[d] = std::lround(v[d]);
      in.terms.push_back({m, cplx{v[dims], v[dims + 1]}});
    }
    in.a = s.number("a", 0.2);
    in.b = s.number("b", 0.3);
    in.degree = static_cast<int>(s.integer("degree", 4));
    s.reject_unknown();
  }
  {
    Section s = section(root, "probes");
    const std::string ehr = s.text("ehrenfest", "");
    for (const auto& part : split(ehr, '|')) {
      if (part.empty()) continue;
      try {
        cfg.ehrenfest.push_back(TrigPoly::parse(part, dims));
      } catch (const PreconditionError& e) {
        fail("probes", "ehrenfest", e.what());
      }
    }
    for (const auto& [key, value] : s.values()) {
      if (key == "ehrenfest") continue;
      if (key.rfind("q.", 0) == 0 && key.size() > 2) {
        s.mark(key);
        cfg.probes.push_back({key.substr(2), s.trig(key, dims), std::nullopt});
      } else if (key.rfind("p.", 0) == 0 && key.size() > 2) {
        s.mark(key);
        cfg.probes.push_back({key.substr(2), TrigPoly{}, parse_vector_field(s, key, dims)});
      }
    }
    s.reject_unknown();
  }
  {
    Section s = section(root, "output");
    cfg.output_dir = s.text("dir", "borelq_out");
    const long every = s.integer("snapshot_every", 0);
    if (every < 0) fail("output", "snapshot_every", "must be >= 0");
    cfg.snapshot_every = static_cast<std::size_t>(every);
    cfg.svg = s.boolean("svg", true);
    const long seed = s.integer("seed", 1);
    if (seed < 0) fail("output", "seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
    s.reject_unknown();
  }
  {
    Section s = section(root, "gauge");
    cfg.gauge.lambda = s.number("lambda", 1.0);
    cfg.gauge.gammas = s.numbers("gamma", {0.0});
    if (cfg.gauge.gammas.empty()) fail("gauge", "gamma", "need at least one value");
    const long snaps = s.integer("snapshots", 9);
    if (snaps < 5) fail("gauge", "snapshots", "need at least 5 snapshots");
    cfg.gauge.snapshots = static_cast<std::size_t>(snaps);
    cfg.gauge.spacing = s.number("spacing", 1e-3);
    cfg.gauge.t0 = s.number("t0", 0.3);
    std::stringstream ex(s.text("exclude", ""));
    std::string name;
    while (ex >> name) cfg.gauge.excluded.push_back(column_index(name));
    s.reject_unknown();
  }
  cfg.validate();
  return cfg;
}

}  // namespace

Grid RunConfig::make_grid() const { return Grid(manifold, points); }

KinematicsParams RunConfig::make_kinematics(const Grid& grid) const {
  KinematicsParams kin = KinematicsParams::with_theta(grid, theta, hbar, c);
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const RField dchi = chi.derivative(d, manifold.extents).sample(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) kin.omega.components[d][i] += dchi[i];
  }
  return kin;
}

DGParams RunConfig::make_params(const Grid& grid) const {
  DGParams p;
  p.kin = make_kinematics(grid);
  if (!potential.is_zero()) p.potential = potential.sample(grid);
  p.d_coeffs = d_coeffs;
  p.dt = dt;
  p.density_floor = density_floor;
  p.conventions = conventions;
  p.stability_factor = stability_factor;
  return p;
}

CField RunConfig::make_initial(const Grid& grid) const {
  switch (initial.kind) {
    case InitialSpec::Kind::PlaneWave: return plane_wave(grid, initial.k);
    case InitialSpec::Kind::Gaussian: return gaussian(grid, initial.center, initial.width, initial.momentum);
    case InitialSpec::Kind::Superposition: return superposition(grid, initial.terms);
    case InitialSpec::Kind::Nodeless: return nodeless_state(grid, initial.a, initial.b);
    case InitialSpec::Kind::Random: return random_test_vectors(grid, 1, initial.degree, seed).front();
  }
  return {};
}

EvolveOptions RunConfig::make_evolve_options() const {
  EvolveOptions o;
  o.t_end = t_end;
  o.snapshot_every = snapshot_every;
  o.ehrenfest_functions = ehrenfest;
  o.probes = probes;
  return o;
}

void RunConfig::validate() const {
  manifold.validate();
  const Grid grid = make_grid();
  const DGParams p = make_params(grid);
  p.validate(grid);
  if (!(t_end >= 0.0)) throw PreconditionError("dynamics", "T must be non-negative");
  const double bound = stability_bound(grid, hbar, stability_factor);
  if (dt > bound * (1.0 + 1e-12))
    throw PreconditionError("dynamics", "dt = " + io::format_double(dt) + " exceeds the stability bound " + io::format_double(bound) +
                                            " = stability_factor * h_min^2 * g_min / hbar");
  for (const auto& f : ehrenfest)
    for (std::size_t d = 0; d < grid.dims(); ++d)
      if (static_cast<std::size_t>(f.degree(d)) * 4 > grid.points(d))
        throw PreconditionError("kinematics", "Ehrenfest function degree exceeds N/4 (aliasing risk)");
  for (const auto& pr : probes) {
    if (!pr.x) continue;
    for (const auto& comp : pr.x->components)
      for (std::size_t d = 0; d < grid.dims(); ++d)
        if (static_cast<std::size_t>(comp.degree(d)) * 4 > grid.points(d))
          throw PreconditionError("kinematics", "probe '" + pr.name + "' vector field degree exceeds N/4");
  }
  if (initial.kind == InitialSpec::Kind::Gaussian && !(initial.width > 0.0))
    throw PreconditionError("dynamics", "Gaussian width must be positive");
  if (initial.kind == InitialSpec::Kind::Superposition && initial.terms.empty())
    throw PreconditionError("cli", "[initial] terms: superposition needs at least one term");
  if (gauge.lambda == 0.0) throw PreconditionError("gauge", "Lambda = 0 is not invertible");
  if (!(gauge.spacing > 0.0)) throw PreconditionError("gauge", "snapshot spacing must be positive");
  for (std::size_t c : gauge.excluded)
    if (c >= kFitColumns.size()) throw PreconditionError("gauge", "excluded column out of range");
  const CField psi0 = make_initial(grid);
  if (p.is_nonlinear()) {
    const RField rho = density(psi0);
    const double floor = resolve_floor(p, rho);
    for (std::size_t i = 0; i < rho.size(); ++i)
      if (rho[i] < floor)
        throw PreconditionError("dynamics", "initial state violates the density floor at grid index " +
                                                std::to_string(i));
  }
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cli", "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_string(buf.str());
}

RunConfig parse_config_string(const std::string& text) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw PreconditionError("cli", std::string("config syntax: ") + e.what());
  }
  return from_tree(root);
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& dir) {
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv("BORELQ_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / dir;
  return dir;
}

}  // namespace borelq
