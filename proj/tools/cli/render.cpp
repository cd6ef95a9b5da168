#include "cli/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gibbsperc::cli {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

struct Frame {
  double x0, y1, scale;
  double x(double wx) const { return (wx - x0) * scale; }
  double y(double wy) const { return (y1 - wy) * scale; }
};

}  // namespace

std::string render_svg(const Scene& s) {
  const auto& w = s.config.window;
  if (w.dim() != 2) {
    throw std::invalid_argument("render_svg draws planar scenes only; slice a d >= 3 pattern first");
  }
  const double span = std::max(w.side(0), w.side(1));
  const Frame f{w.lower()[0], w.upper()[1], s.pixels / span};
  const double width = w.side(0) * f.scale;
  const double height = w.side(1) * f.scale;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  out += "<defs><clipPath id=\"window\"><rect x=\"0\" y=\"0\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\"/></clipPath></defs>\n";
  out += "<rect class=\"window\" x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" fill=\"white\" stroke=\"black\"/>\n";
  out += "<g clip-path=\"url(#window)\">\n";

  out += "<g fill=\"#bdbdbd\" stroke=\"none\">\n";
  for (const auto& p : s.config.points) {
    out += "<circle class=\"zr-disc\" cx=\"" + num(f.x(p[0])) + "\" cy=\"" + num(f.y(p[1])) +
           "\" r=\"" + num(s.R * f.scale) + "\"/>\n";
  }
  out += "</g>\n";

  if (s.lattice) {
    const auto& lat = *s.lattice;
    const double h = lat.side();
    std::string d;
    for (int a = 0; a < 2; ++a) {
      const auto k0 = static_cast<long long>(std::floor(w.lower()[a] / h - 0.5));
      const auto k1 = static_cast<long long>(std::ceil(w.upper()[a] / h - 0.5));
      for (long long k = k0; k <= k1; ++k) {
        const double c = (static_cast<double>(k) + 0.5) * h;
        if (a == 0) {
          d += "M" + num(f.x(c)) + " 0V" + num(height);
        } else {
          d += "M0 " + num(f.y(c)) + "H" + num(width);
        }
      }
    }
    out += "<path class=\"grid\" d=\"" + d + "\" stroke=\"#d0d0d0\" stroke-width=\"0.5\" fill=\"none\"/>\n";
    out += "<g fill=\"#4a7bd0\" fill-opacity=\"0.55\" stroke=\"#24508f\" stroke-width=\"0.5\">\n";
    for (const auto& z : s.chain) {
      const Box b = lat.cube(z);
      out += "<rect class=\"chain-cube\" data-i=\"" + std::to_string(z[0]) + "\" data-j=\"" +
             std::to_string(z[1]) + "\" x=\"" + num(f.x(b.lower()[0])) + "\" y=\"" +
             num(f.y(b.upper()[1])) + "\" width=\"" + num(b.side(0) * f.scale) + "\" height=\"" +
             num(b.side(1) * f.scale) + "\"/>\n";
    }
    out += "</g>\n";
  }

  if (s.r) {
    out += "<g fill=\"none\" stroke=\"#444444\" stroke-width=\"0.6\">\n";
    for (const auto& p : s.config.points) {
      out += "<circle class=\"r-circle\" cx=\"" + num(f.x(p[0])) + "\" cy=\"" + num(f.y(p[1])) +
             "\" r=\"" + num(*s.r * f.scale) + "\"/>\n";
    }
    out += "</g>\n";
  }

  out += "<g fill=\"black\">\n";
  for (const auto& p : s.config.points) {
    out += "<circle class=\"point\" cx=\"" + num(f.x(p[0])) + "\" cy=\"" + num(f.y(p[1])) +
           "\" r=\"2\"/>\n";
  }
  out += "</g>\n";

  for (const auto* e : {&s.from, &s.to}) {
    if (!*e) continue;
    out += "<circle class=\"endpoint\" cx=\"" + num(f.x((**e)[0])) + "\" cy=\"" +
           num(f.y((**e)[1])) + "\" r=\"3\" fill=\"#c62828\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::optional<ChainEndpoints> find_chain(const BooleanModel& bm, const CubeLattice& lattice,
                                         double r) {
  const auto& w = bm.config.window;
  const double h = lattice.side();
  std::vector<Point> candidates;
  const auto i0 = static_cast<long long>(std::ceil(w.lower()[0] / h + 0.5));
  const auto i1 = static_cast<long long>(std::floor(w.upper()[0] / h - 0.5));
  const auto j0 = static_cast<long long>(std::ceil(w.lower()[1] / h + 0.5));
  const auto j1 = static_cast<long long>(std::floor(w.upper()[1] / h - 0.5));
  for (long long i = i0; i <= i1; ++i) {
    for (long long j = j0; j <= j1; ++j) {
      const Point c = lattice.center(CubeIndex{i, j});
      if (dist_point_set(c, bm.config.points) < bm.radius) continue;
      candidates.push_back(c);
    }
  }
  if (candidates.size() < 2) return std::nullopt;
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    for (std::size_t b = candidates.size(); b-- > a + 1;) {
      auto chain = separating_chain(bm, lattice, r, candidates[a], candidates[b]);
      if (chain) return ChainEndpoints{candidates[a], candidates[b], std::move(*chain)};
    }
  }
  return std::nullopt;
}

}  // namespace gibbsperc::cli
