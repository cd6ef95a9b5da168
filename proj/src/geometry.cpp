#include "gibbsperc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gibbsperc/random.hpp"

namespace gibbsperc {

Point::Point(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("point dimension out of range: " + std::to_string(dim));
  }
}

Point::Point(std::initializer_list<double> coords) : Point(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), x_.begin());
}

Point Point::from_span(std::span<const double> coords) {
  Point p(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), p.x_.begin());
  return p;
}

bool operator==(const Point& a, const Point& b) {
  if (a.dim_ != b.dim_) return false;
  for (int i = 0; i < a.dim_; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double distance(const Point& a, const Point& b) { return std::sqrt(squared_distance(a, b)); }

double max_norm_distance(const Point& a, const Point& b) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Box::Box(Point lower, Point upper) : lower_(lower), upper_(upper) {
  if (lower.dim() != upper.dim()) throw std::invalid_argument("box corners differ in dimension");
  for (int i = 0; i < lower.dim(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw std::invalid_argument("box requires lower < upper on every axis");
    }
  }
}

Box Box::cube(int dim, double side) {
  Point lo(dim);
  Point hi(dim);
  for (int i = 0; i < dim; ++i) hi[i] = side;
  return {lo, hi};
}

Box Box::centered(const Point& center, double half) {
  Point lo = center;
  Point hi = center;
  for (int i = 0; i < center.dim(); ++i) {
    lo[i] -= half;
    hi[i] += half;
  }
  return {lo, hi};
}

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= side(i);
  return v;
}

bool Box::contains(const Point& x) const {
  for (int i = 0; i < dim(); ++i) {
    if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
  }
  return true;
}

Box Box::padded(double pad) const {
  Point lo = lower_;
  Point hi = upper_;
  for (int i = 0; i < dim(); ++i) {
    lo[i] -= pad;
    hi[i] += pad;
  }
  return {lo, hi};
}

double Box::distance_to(const Point& x) const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double gap = std::max({lower_[i] - x[i], 0.0, x[i] - upper_[i]});
    s += gap * gap;
  }
  return std::sqrt(s);
}

std::vector<Point> Configuration::interior() const {
  std::vector<Point> out;
  for (const auto& p : points) {
    if (window.contains(p)) out.push_back(p);
  }
  return out;
}

std::vector<Point> Configuration::boundary() const {
  std::vector<Point> out;
  for (const auto& p : points) {
    if (!window.contains(p)) out.push_back(p);
  }
  return out;
}

bool Configuration::is_simple() const {
  std::vector<Point> sorted = points;
  auto less = [](const Point& a, const Point& b) {
    return std::lexicographical_compare(a.coords().begin(), a.coords().end(),
                                        b.coords().begin(), b.coords().end());
  };
  std::sort(sorted.begin(), sorted.end(), less);
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

double box_distance(const Box& a, const Box& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double gap =
        std::max({a.lower()[i] - b.upper()[i], 0.0, b.lower()[i] - a.upper()[i]});
    s += gap * gap;
  }
  return std::sqrt(s);
}

double dist_point_set(const Point& x, std::span<const Point> s) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : s) best = std::min(best, squared_distance(x, y));
  return std::sqrt(best);
}

double dist_point_set(const Point& x, std::span<const Box> s) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : s) best = std::min(best, b.distance_to(x));
  return best;
}

double unit_ball_volume(int d) {
  if (d <= 0) throw std::domain_error("unit_ball_volume requires d >= 1");
  const double half = 0.5 * d;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

double shape_distance(const Point& x, const Shape& shape) {
  return std::visit(
      [&x](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Point>) {
          return distance(x, s);
        } else if constexpr (std::is_same_v<T, Box>) {
          return s.distance_to(x);
        } else {
          return std::max(0.0, distance(x, s.center) - s.radius);
        }
      },
      shape);
}

namespace {

constexpr std::uint64_t kChunk = 4096;

int shape_dim(const Shape& s) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return v.center.dim();
        } else {
          return v.dim();
        }
      },
      s);
}

void extend(Point& lo, Point& hi, const Shape& s) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        for (int i = 0; i < lo.dim(); ++i) {
          double a = 0.0;
          double b = 0.0;
          if constexpr (std::is_same_v<T, Point>) {
            a = b = v[i];
          } else if constexpr (std::is_same_v<T, Box>) {
            a = v.lower()[i];
            b = v.upper()[i];
          } else {
            a = v.center[i] - v.radius;
            b = v.center[i] + v.radius;
          }
          if (!std::isfinite(a) || !std::isfinite(b)) {
            throw std::invalid_argument("dilated_volume: unbounded shape");
          }
          lo[i] = std::min(lo[i], a);
          hi[i] = std::max(hi[i], b);
        }
      },
      s);
}

std::uint64_t count_hits(std::span<const Shape> shapes, const Box& bbox, double r,
                         std::uint64_t begin, std::uint64_t end, std::uint64_t seed) {
  Rng rng(derive_seed(seed, begin / kChunk));
  std::uint64_t hits = 0;
  for (std::uint64_t k = begin; k < end; ++k) {
    const Point x = uniform_point(bbox, rng);
    for (const auto& s : shapes) {
      if (shape_distance(x, s) <= r) {
        ++hits;
        break;
      }
    }
  }
  return hits;
}

}  // namespace

VolumeEstimate dilated_volume(std::span<const Shape> shapes, double r, std::uint64_t n,
                              std::uint64_t seed, Exec exec) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("dilated_volume: r must be finite and >= 0");
  if (n == 0) throw std::invalid_argument("dilated_volume: n must be >= 1");
  if (shapes.empty()) return {};
  const int d = shape_dim(shapes.front());
  Point lo(d);
  Point hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = std::numeric_limits<double>::infinity();
    hi[i] = -std::numeric_limits<double>::infinity();
  }
  for (const auto& s : shapes) {
    if (shape_dim(s) != d) throw std::invalid_argument("dilated_volume: mixed dimensions");
    extend(lo, hi, s);
  }
  for (int i = 0; i < d; ++i) {
    lo[i] -= r;
    hi[i] += r;
    // Degenerate extents (a lone point with r = 0) have zero volume.
    if (!(lo[i] < hi[i])) return {};
  }
  const Box bbox(lo, hi);

  const std::uint64_t n_chunks = (n + kChunk - 1) / kChunk;
  std::uint64_t hits = 0;
  if (exec == Exec::serial) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
      hits += count_hits(shapes, bbox, r, c * kChunk, std::min(n, (c + 1) * kChunk), seed);
    }
  } else {
    const auto chunks = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
    for (std::int64_t c = 0; c < chunks; ++c) {
      const auto uc = static_cast<std::uint64_t>(c);
      hits += count_hits(shapes, bbox, r, uc * kChunk, std::min(n, (uc + 1) * kChunk), seed);
    }
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double vol = bbox.volume();
  return {vol * p, vol * std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

}  // namespace gibbsperc
