#include "borelq/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "borelq/error.hpp"

namespace borelq::io {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.write(bytes, 8);
}

template <class T>
T get(std::istream& in) {
  char bytes[8];
  if (!in.read(bytes, 8)) throw Error("snapshot: unexpected end of file");
  std::uint64_t bits;
  std::memcpy(&bits, bytes, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

std::int64_t kind_code(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::Circle: return 0;
    case ManifoldKind::Torus2: return 1;
    case ManifoldKind::LineSegment: return 2;
  }
  return -1;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_snapshot(const std::filesystem::path& path, const Grid& grid, double time, std::span<const cplx> psi) {
  if (psi.size() != grid.size()) throw PreconditionError("cli", "snapshot does not match grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  put<std::int64_t>(out, kind_code(grid.manifold().kind));
  for (std::size_t d = 0; d < grid.dims(); ++d) put<std::int64_t>(out, static_cast<std::int64_t>(grid.points(d)));
  for (std::size_t d = 0; d < grid.dims(); ++d) put<double>(out, grid.extent(d));
  put<double>(out, time);
  for (const auto& z : psi) {
    put<double>(out, z.real());
    put<double>(out, z.imag());
  }
  if (!out) throw Error("write failed: " + path.string());
}

SnapshotFile read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  SnapshotFile s;
  const auto code = get<std::int64_t>(in);
  if (code < 0 || code > 2) throw Error("snapshot: unknown manifold code " + std::to_string(code));
  s.kind = code == 0 ? ManifoldKind::Circle : code == 1 ? ManifoldKind::Torus2 : ManifoldKind::LineSegment;
  const std::size_t dims = s.kind == ManifoldKind::Torus2 ? 2 : 1;
  std::size_t size = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    const auto n = get<std::int64_t>(in);
    if (n <= 0 || n > (1 << 24)) throw Error("snapshot: bad grid size");
    s.points.push_back(static_cast<std::size_t>(n));
    size *= static_cast<std::size_t>(n);
  }
  for (std::size_t d = 0; d < dims; ++d) s.extents.push_back(get<double>(in));
  s.time = get<double>(in);
  s.psi.resize(size);
  for (auto& z : s.psi) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    z = {re, im};
  }
  return s;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records,
                           std::size_t ehrenfest_count, const std::vector<Probe>& probes) {
  out << "time,norm,min_rho,ehrenfest_max,fp_residual";
  for (std::size_t k = 0; k < ehrenfest_count; ++k) out << ",ehrenfest_" << k;
  for (const auto& p : probes) out << ',' << (p.x ? "P_" : "Q_") << p.name;
  out << '\n';
  for (const auto& r : records) {
    out << format_double(r.time) << ',' << format_double(r.norm) << ',' << format_double(r.min_rho) << ','
        << format_double(r.ehrenfest_max) << ',' << format_double(r.fp_residual);
    for (std::size_t k = 0; k < ehrenfest_count; ++k)
      out << ',' << format_double(k < r.ehrenfest.size() ? r.ehrenfest[k] : 0.0);
    for (double v : r.probes) out << ',' << format_double(v);
    out << '\n';
  }
}

std::string svg_line_plot(const std::vector<Series>& series, const PlotOptions& options) {
  const double left = 70;
  const double right = 20;
  const double top = 36;
  const double bottom = 48;
  const double w = options.width - left - right;
  const double h = options.height - top - bottom;

  auto ty = [&](double y) { return options.log_y ? std::log10(std::max(y, 1e-300)) : y; };
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (options.log_y && s.y[i] <= 0.0) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * h; };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << options.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(options.title) << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0;
    const double fy = y0 + (y1 - y0) * t / 4.0;
    const double sx = left + w * t / 4.0;
    const double sy = top + h * (1.0 - t / 4.0);
    svg << "<text x=\"" << sx << "\" y=\"" << top + h + 16 << "\" text-anchor=\"middle\">" << fx << "</text>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
        << (options.log_y ? "1e" : "") << fy << "</text>\n";
  }
  svg << "<text x=\"" << left + w / 2 << "\" y=\"" << options.height - 10 << "\" text-anchor=\"middle\">"
      << escape(options.x_label) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << top + h / 2 << "\" transform=\"rotate(-90 14 " << top + h / 2
      << ")\" text-anchor=\"middle\">" << escape(options.y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (options.log_y && s.y[i] <= 0.0)) continue;
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 14 * k << "\" fill=\"" << color << "\">"
        << escape(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_heatmap(std::span<const double> values, std::size_t n0, std::size_t n1, const PlotOptions& options) {
  const double left = 40;
  const double top = 36;
  const double size = std::min(options.width - 2 * left, options.height - top - 20.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double cw = size / static_cast<double>(n1);
  const double ch = size / static_cast<double>(n0);
  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << options.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(options.title) << " [" << lo << ", " << hi << "]</text>\n";
  for (std::size_t i0 = 0; i0 < n0; ++i0)
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      const double t = (values[i0 * n1 + i1] - lo) / (hi - lo);
      const int g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      svg << "<rect x=\"" << left + cw * i1 << "\" y=\"" << top + ch * (n0 - 1 - i0) << "\" width=\"" << cw
          << "\" height=\"" << ch << "\" fill=\"rgb(" << g << ',' << g << ',' << g << ")\"/>\n";
    }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace borelq::io
