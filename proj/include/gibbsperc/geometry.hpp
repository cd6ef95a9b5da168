#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <variant>
#include <vector>

namespace gibbsperc {

/// Largest dimension supported by the fixed-capacity point type.
inline constexpr int kMaxDim = 8;

/// A point in R^d with 2 <= d <= kMaxDim, stored inline.
class Point {
public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<double> coords);
  static Point from_span(std::span<const double> coords);

  int dim() const { return dim_; }
  double operator[](int i) const { return x_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return x_[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const {
    return {x_.data(), static_cast<std::size_t>(dim_)};
  }

  friend bool operator==(const Point& a, const Point& b);

private:
  std::array<double, kMaxDim> x_{};
  int dim_ = 0;
};

double squared_distance(const Point& a, const Point& b);
double distance(const Point& a, const Point& b);
double max_norm_distance(const Point& a, const Point& b);

/// Axis-aligned closed box [lower, upper].
class Box {
public:
  Box() = default;
  /// Throws std::invalid_argument unless lower_i < upper_i on every axis.
  Box(Point lower, Point upper);
  /// The cube [0, side]^dim.
  static Box cube(int dim, double side);
  /// The cube of half-side `half` centered at `center`.
  static Box centered(const Point& center, double half);

  int dim() const { return lower_.dim(); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  double side(int axis) const { return upper_[axis] - lower_[axis]; }
  double volume() const;
  bool contains(const Point& x) const;
  Box padded(double pad) const;
  /// Euclidean distance from x to the box; zero inside.
  double distance_to(const Point& x) const;

private:
  Point lower_;
  Point upper_;
};

/// The simulation window Λ.
using Window = Box;

struct Ball {
  Point center;
  double radius = 0.0;
};

/// Finite simple point pattern with its window. Points inside the window are
/// interior; points outside act as a boundary condition.
struct Configuration {
  Window window;
  std::vector<Point> points;

  int dim() const { return window.dim(); }
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::vector<Point> interior() const;
  std::vector<Point> boundary() const;
  /// True iff no two points coincide.
  bool is_simple() const;
};

/// Distance between two boxes (per-axis gaps); zero when they intersect.
double box_distance(const Box& a, const Box& b);

/// Infimum distance from x to a set; +infinity for the empty set.
double dist_point_set(const Point& x, std::span<const Point> s);
double dist_point_set(const Point& x, std::span<const Box> s);

/// Volume of the unit ball in R^d. Throws std::domain_error for d <= 0.
double unit_ball_volume(int d);

/// Member of a union used by the dilation-volume oracle.
using Shape = std::variant<Point, Box, Ball>;

/// Distance from x to a shape (zero inside).
double shape_distance(const Point& x, const Shape& shape);

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

enum class Exec { serial, parallel };

/// Monte Carlo estimate of |{x : dist(x, A) <= r}| for a bounded union A of
/// shapes, sampling uniformly in the r-padded bounding box. Work is split into
/// fixed-size chunks with per-chunk seeds, so serial and parallel runs agree
/// bit for bit. Throws std::invalid_argument for non-finite input.
VolumeEstimate dilated_volume(std::span<const Shape> shapes, double r,
                              std::uint64_t n, std::uint64_t seed,
                              Exec exec = Exec::parallel);

}  // namespace gibbsperc
