#include "gibbsperc/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "gibbsperc/random.hpp"

namespace gibbsperc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

// --- StepFunction -----------------------------------------------------------

StepFunction::StepFunction(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  require(!breaks_.empty() && breaks_.size() == values_.size(),
          "step function needs one value per break");
  require(breaks_.front() == 0.0, "step function must start at 0");
  for (std::size_t i = 1; i < breaks_.size(); ++i) {
    require(breaks_[i] > breaks_[i - 1] && std::isfinite(breaks_[i]),
            "step function breaks must be finite and strictly increasing");
  }
  for (double v : values_) {
    require(std::isfinite(v) && v >= 0.0, "step function values must be finite and >= 0");
  }
  require(values_.back() == 1.0, "step function tail value must be 1 (finite range)");
  std::size_t first_one = values_.size() - 1;
  while (first_one > 0 && values_[first_one - 1] == 1.0) --first_one;
  range_ = breaks_[first_one];
}

double StepFunction::operator()(double rho) const {
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), rho);
  if (it == breaks_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double StepFunction::sup() const { return *std::max_element(values_.begin(), values_.end()); }

double StepFunction::inf_on(double a, double b) const {
  double m = kInf;
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    const double lo = breaks_[i];
    const double hi = i + 1 < breaks_.size() ? breaks_[i + 1] : kInf;
    if (lo < b && hi > a) m = std::min(m, values_[i]);
  }
  return m;
}

double StepFunction::sup_on(double a, double b) const {
  double m = -kInf;
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    const double lo = breaks_[i];
    const double hi = i + 1 < breaks_.size() ? breaks_[i + 1] : kInf;
    if (lo < b && hi > a) m = std::max(m, values_[i]);
  }
  return m;
}

double StepFunction::hard_core() const {
  std::size_t i = 0;
  while (i < values_.size() && values_[i] == 0.0) ++i;
  return i == 0 ? 0.0 : breaks_[i];
}

// --- ModelSpec --------------------------------------------------------------

ModelSpec::ModelSpec(int dim, double beta,
                     std::variant<PoissonParams, PairwiseParams, AreaParams> p)
    : dim_(dim), beta_(beta), params_(std::move(p)) {
  require(dim >= 2 && dim <= kMaxDim, "model dimension must be in [2, kMaxDim]");
  require(beta > 0.0 && std::isfinite(beta), "activity beta must be positive and finite");
}

ModelSpec ModelSpec::poisson(int dim, double beta) { return {dim, beta, PoissonParams{}}; }

ModelSpec ModelSpec::hard_core(int dim, double beta, double r) {
  require(r > 0.0, "hard-core radius must be positive");
  PairwiseParams p{"hard-core", StepFunction({0.0, r}, {0.0, 1.0}), PairClass::attractive_beyond_r,
                   r, r, 1.0};
  return {dim, beta, std::move(p)};
}

ModelSpec ModelSpec::strauss_hard_core(int dim, double beta, double r, double r_max,
                                       double delta_tilde) {
  require(r > 0.0 && r_max > r, "strauss-hard-core needs 0 < r < r_max");
  require(delta_tilde > 0.0, "strauss-hard-core needs delta_tilde > 0");
  PairwiseParams p{"strauss-hard-core",
                   StepFunction({0.0, r, r_max}, {0.0, delta_tilde, 1.0}),
                   PairClass::bounded_hard_core,
                   r,
                   r_max,
                   delta_tilde};
  return {dim, beta, std::move(p)};
}

ModelSpec ModelSpec::attractive_tail(int dim, double beta, double r, StepFunction phi) {
  auto m = pairwise_table(dim, beta, std::move(phi), PairClass::attractive_beyond_r, r);
  std::get<PairwiseParams>(m.params_).family = "attractive-tail";
  return m;
}

ModelSpec ModelSpec::pairwise_table(int dim, double beta, StepFunction phi, PairClass declared,
                                    double r, double r_max) {
  PairwiseParams p{"table", std::move(phi), declared, r, r_max, 1.0};
  switch (declared) {
    case PairClass::none:
      break;
    case PairClass::attractive_beyond_r:
      require(r > 0.0, "class (i) table needs r > 0");
      require(p.phi.inf_on(r, kInf) >= 1.0, "class (i) table must have phi >= 1 beyond r");
      p.r_max = r;
      break;
    case PairClass::bounded_hard_core:
      require(r > 0.0 && r_max > r, "class (ii) table needs 0 < r < r_max");
      require(p.phi.sup_on(0.0, r) == 0.0, "class (ii) table must vanish on [0, r)");
      p.delta_tilde = p.phi.inf_on(r, r_max);
      require(p.delta_tilde > 0.0, "class (ii) table must be positive on [r, r_max)");
      require(p.phi.inf_on(r_max, kInf) >= 1.0, "class (ii) table must have phi >= 1 beyond r_max");
      break;
  }
  return {dim, beta, std::move(p)};
}

ModelSpec ModelSpec::area_interaction(int dim, double beta, double gamma, double r0,
                                      std::optional<AreaMethod> method, int qmc_nodes) {
  require(gamma > 0.0 && std::isfinite(gamma), "area-interaction needs gamma > 0");
  require(r0 > 0.0 && std::isfinite(r0), "area-interaction needs r0 > 0");
  AreaParams p;
  p.gamma = gamma;
  p.r0 = r0;
  p.method = method.value_or(dim == 2 || dim == 3 ? AreaMethod::exact : AreaMethod::qmc);
  require(p.method == AreaMethod::qmc || dim == 2 || dim == 3,
          "exact uncovered area needs d = 2 or 3");
  if (p.method == AreaMethod::qmc) {
    require(qmc_nodes >= 1, "qmc_nodes must be >= 1");
    p.pattern = std::make_shared<const std::vector<Point>>(ball_pattern(dim, qmc_nodes));
  }
  return {dim, beta, std::move(p)};
}

ModelKind ModelSpec::kind() const {
  switch (params_.index()) {
    case 0: return ModelKind::poisson;
    case 1: return ModelKind::pairwise;
    default: return ModelKind::area_interaction;
  }
}

ModelSpec ModelSpec::with_beta(double beta) const {
  ModelSpec m = *this;
  require(beta > 0.0 && std::isfinite(beta), "activity beta must be positive and finite");
  m.beta_ = beta;
  return m;
}

double ModelSpec::reach() const {
  if (const auto* p = pairwise()) return p->phi.range();
  if (const auto* a = area()) return 2.0 * a->r0;
  return 0.0;
}

double ModelSpec::hard_core() const {
  if (const auto* p = pairwise()) return p->phi.hard_core();
  return 0.0;
}

std::string ModelSpec::name() const {
  if (const auto* p = pairwise()) return p->family;
  if (area()) return "area-interaction";
  return "poisson";
}

// --- area term ----------------------------------------------------------------

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

using Arcs = std::vector<std::pair<double, double>>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void push_interval(Arcs& out, double center, double half) {
  if (half >= std::numbers::pi) {
    out.emplace_back(0.0, kTwoPi);
    return;
  }
  double a = std::fmod(center - half, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  const double b = a + 2.0 * half;
  if (b <= kTwoPi) {
    out.emplace_back(a, b);
  } else {
    out.emplace_back(a, kTwoPi);
    out.emplace_back(0.0, b - kTwoPi);
  }
}

Arcs merged(Arcs v) {
  std::sort(v.begin(), v.end());
  Arcs out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

/// base minus the union `cut` (both merged, sorted).
Arcs subtract(const Arcs& base, const Arcs& cut) {
  Arcs out;
  for (auto [a, b] : base) {
    double cur = a;
    for (const auto& [c0, c1] : cut) {
      if (c1 <= cur) continue;
      if (c0 >= b) break;
      if (c0 > cur) out.emplace_back(cur, c0);
      cur = std::max(cur, c1);
      if (cur >= b) break;
    }
    if (cur < b) out.emplace_back(cur, b);
  }
  return out;
}

/// Covered angular interval on a circle of radius r at `from` by an equal disc at `to`.
bool cover_interval(double dx, double dy, double r, double& center, double& half) {
  const double d = std::hypot(dx, dy);
  if (d >= 2.0 * r) return false;
  center = std::atan2(dy, dx);
  half = std::acos(d / (2.0 * r));
  return true;
}

double green_arc(double cx, double cy, double r, double t1, double t2) {
  return 0.5 * (r * r * (t2 - t1) + r * (cx * (std::sin(t2) - std::sin(t1)) -
                                         cy * (std::cos(t2) - std::cos(t1))));
}

}  // namespace

std::vector<Point> ball_pattern(int dim, int n_nodes) {
  static constexpr std::uint64_t kPrimes[kMaxDim] = {2, 3, 5, 7, 11, 13, 17, 19};
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n_nodes));
  for (std::uint64_t i = 1; static_cast<int>(out.size()) < n_nodes; ++i) {
    Point p(dim);
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      p[k] = 2.0 * radical_inverse(i, kPrimes[k]) - 1.0;
      s += p[k] * p[k];
    }
    if (s < 1.0) out.push_back(p);
  }
  return out;
}

double uncovered_area_exact_2d(const Point& x, std::span<const Point> ys, double r) {
  // Work relative to x; drop discs that cannot touch B_r(x) and duplicates.
  std::vector<std::pair<double, double>> nb;
  for (const auto& y : ys) {
    const double dx = y[0] - x[0];
    const double dy = y[1] - x[1];
    if (dx * dx + dy * dy >= 4.0 * r * r) continue;
    if (dx == 0.0 && dy == 0.0) throw std::invalid_argument("uncovered area: coincident centres");
    nb.emplace_back(dx, dy);
  }
  std::sort(nb.begin(), nb.end());
  nb.erase(std::unique(nb.begin(), nb.end()), nb.end());

  double c = 0.0;
  double h = 0.0;
  Arcs cover_x;
  for (const auto& [dx, dy] : nb) {
    if (cover_interval(dx, dy, r, c, h)) push_interval(cover_x, c, h);
  }
  double area = 0.0;
  for (const auto& [t1, t2] : subtract({{0.0, kTwoPi}}, merged(cover_x))) {
    area += 0.5 * r * r * (t2 - t1);
  }
  // Arcs of neighbouring circles that bound the uncovered region, traversed clockwise.
  for (std::size_t i = 0; i < nb.size(); ++i) {
    const auto [cx, cy] = nb[i];
    Arcs inside_x;
    if (!cover_interval(-cx, -cy, r, c, h)) continue;
    push_interval(inside_x, c, h);
    Arcs others;
    for (std::size_t j = 0; j < nb.size(); ++j) {
      if (j == i) continue;
      if (cover_interval(nb[j].first - cx, nb[j].second - cy, r, c, h)) push_interval(others, c, h);
    }
    for (const auto& [t1, t2] : subtract(merged(inside_x), merged(others))) {
      area -= green_arc(cx, cy, r, t1, t2);
    }
  }
  return std::max(area, 0.0);
}

namespace {

struct Disc {
  double cx, cy, rho;
};

enum class Cover { none, partial, full };

/// How disc b covers the circle bounding disc a.
Cover disc_covers(const Disc& a, const Disc& b, double& center, double& half) {
  const double dx = b.cx - a.cx;
  const double dy = b.cy - a.cy;
  const double d = std::hypot(dx, dy);
  if (d >= a.rho + b.rho) return Cover::none;
  if (d <= b.rho - a.rho) return Cover::full;
  if (d <= a.rho - b.rho) return Cover::none;
  center = std::atan2(dy, dx);
  const double c = (a.rho * a.rho + d * d - b.rho * b.rho) / (2.0 * a.rho * d);
  half = std::acos(std::clamp(c, -1.0, 1.0));
  return Cover::partial;
}

/// Area of discs[0] outside the union of the others. Identical circles are
/// kept once (the first one bounds the region).
double uncovered_disc_area(const std::vector<Disc>& discs) {
  const Disc& o = discs[0];
  double c = 0.0;
  double h = 0.0;
  // cover[i]: arcs of circle i inside some other non-reference disc.
  std::vector<Arcs> cover(discs.size());
  for (std::size_t i = 0; i < discs.size(); ++i) {
    for (std::size_t j = 1; j < discs.size(); ++j) {
      if (i == j) continue;
      const Disc& a = discs[i];
      const Disc& b = discs[j];
      if (a.cx == b.cx && a.cy == b.cy && a.rho == b.rho) {
        if (j < i) cover[i].emplace_back(0.0, kTwoPi);
        continue;
      }
      switch (disc_covers(a, b, c, h)) {
        case Cover::none: break;
        case Cover::full: cover[i].emplace_back(0.0, kTwoPi); break;
        case Cover::partial: push_interval(cover[i], c, h); break;
      }
    }
  }
  double area = 0.0;
  for (const auto& [t1, t2] : subtract({{0.0, kTwoPi}}, merged(cover[0]))) {
    area += green_arc(o.cx, o.cy, o.rho, t1, t2);
  }
  for (std::size_t i = 1; i < discs.size(); ++i) {
    const Disc& a = discs[i];
    Arcs inside;
    switch (disc_covers(a, o, c, h)) {
      case Cover::none: continue;
      case Cover::full: inside.emplace_back(0.0, kTwoPi); break;
      case Cover::partial: push_interval(inside, c, h); break;
    }
    for (const auto& [t1, t2] : subtract(merged(inside), merged(cover[i]))) {
      area -= green_arc(a.cx, a.cy, a.rho, t1, t2);
    }
  }
  return std::max(area, 0.0);
}

using Vec3 = std::array<double, 3>;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 axpy(double s, const Vec3& a, const Vec3& b) { return {b[0] + s * a[0], b[1] + s * a[1], b[2] + s * a[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// A boundary event only matters when it lies on the boundary of the uncovered region.
bool exposed(const Vec3& p, const std::vector<Vec3>& c, double r) {
  const double slack = 1e-9 * r;
  if (std::sqrt(dot(p, p)) > r + slack) return false;
  for (const auto& q : c) {
    if (std::sqrt(dot(sub(p, q), sub(p, q))) < r - slack) return false;
  }
  return true;
}

}  // namespace

double uncovered_volume_exact_3d(const Point& x, std::span<const Point> ys, double r) {
  std::vector<Vec3> c;
  for (const auto& y : ys) {
    const Vec3 v{y[0] - x[0], y[1] - x[1], y[2] - x[2]};
    const double d2 = dot(v, v);
    if (d2 >= 4.0 * r * r) continue;
    if (d2 == 0.0) throw std::invalid_argument("uncovered area: coincident centres");
    c.push_back(v);
  }
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  const double ball = 4.0 / 3.0 * std::numbers::pi * r * r * r;
  if (c.empty()) return ball;

  // The slice area is smooth in z between the heights where a sphere starts or
  // ends, two slice circles touch, or three slice circles meet.
  std::vector<double> cuts{-r, r};
  auto add_cut = [&](double z) {
    if (z > -r && z < r) cuts.push_back(z);
  };
  std::vector<Vec3> all{{0.0, 0.0, 0.0}};
  all.insert(all.end(), c.begin(), c.end());
  for (const auto& v : c) {
    add_cut(v[2] - r);
    add_cut(v[2] + r);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const Vec3 dv = sub(all[j], all[i]);
      const double d = std::sqrt(dot(dv, dv));
      if (d >= 2.0 * r) continue;
      const Vec3 mid = axpy(0.5, dv, all[i]);
      const double a = std::sqrt(r * r - 0.25 * d * d);
      const double nz = dv[2] / d;
      const double s = std::sqrt(std::max(0.0, 1.0 - nz * nz));
      if (s == 0.0) {
        add_cut(mid[2]);
        continue;
      }
      // Highest point of the intersection circle: along e_z projected on its plane.
      const Vec3 up{-nz * dv[0] / d / s, -nz * dv[1] / d / s, (1.0 - nz * nz) / s};
      for (double sign : {1.0, -1.0}) {
        const Vec3 p = axpy(sign * a, up, mid);
        if (exposed(p, c, r)) add_cut(p[2]);
      }
      for (std::size_t k = j + 1; k < all.size(); ++k) {
        const Vec3 dk = sub(all[k], all[i]);
        const Vec3 ex{dv[0] / d, dv[1] / d, dv[2] / d};
        const double ii = dot(ex, dk);
        Vec3 ey = axpy(-ii, ex, dk);
        const double jj = std::sqrt(dot(ey, ey));
        if (jj <= 1e-12 * r) continue;
        ey = {ey[0] / jj, ey[1] / jj, ey[2] / jj};
        const double px = 0.5 * d;
        const double py = (ii * ii + jj * jj - 2.0 * ii * px) / (2.0 * jj);
        const double pz2 = r * r - px * px - py * py;
        if (pz2 < 0.0) continue;
        const Vec3 ez = cross(ex, ey);
        const Vec3 base = axpy(py, ey, axpy(px, ex, all[i]));
        for (double sign : {1.0, -1.0}) {
          const Vec3 p = axpy(sign * std::sqrt(pz2), ez, base);
          if (exposed(p, c, r)) add_cut(p[2]);
        }
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());

  auto slice = [&](double z) {
    std::vector<Disc> discs{{0.0, 0.0, std::sqrt(std::max(0.0, r * r - z * z))}};
    for (const auto& v : c) {
      const double h = z - v[2];
      if (std::abs(h) < r) discs.push_back({v[0], v[1], std::sqrt(r * r - h * h)});
    }
    return uncovered_disc_area(discs);
  };
  // z = lo + (hi − lo)(1 − cos t)/2 removes the square-root behaviour at the cuts.
  double volume = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    if (hi - lo <= 1e-15 * r) continue;
    auto f = [&](double t) {
      return slice(lo + 0.5 * (hi - lo) * (1.0 - std::cos(t))) * 0.5 * (hi - lo) * std::sin(t);
    };
    volume += boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, std::numbers::pi);
  }
  return std::clamp(volume, 0.0, ball);
}

namespace {

bool is_neighbour_free_qmc(const Point& node, std::span<const Point> ys, double r2) {
  for (const auto& y : ys) {
    if (squared_distance(node, y) < r2) return false;
  }
  return true;
}

double uncovered_area_qmc(const AreaParams& a, const Point& x, const std::vector<Point>& ys) {
  const int d = x.dim();
  const double r2 = a.r0 * a.r0;
  std::size_t free = 0;
  Point node(d);
  for (const auto& u : *a.pattern) {
    for (int k = 0; k < d; ++k) node[k] = x[k] + a.r0 * u[k];
    if (is_neighbour_free_qmc(node, ys, r2)) ++free;
  }
  return unit_ball_volume(d) * std::pow(a.r0, d) * static_cast<double>(free) /
         static_cast<double>(a.pattern->size());
}

double uncovered_exact(const Point& x, std::span<const Point> ys, double r) {
  return x.dim() == 2 ? uncovered_area_exact_2d(x, ys, r) : uncovered_volume_exact_3d(x, ys, r);
}

void ensure_absent(const Point& x, std::span<const Point> s) {
  for (const auto& y : s) {
    if (y == x) throw std::invalid_argument("conditional intensity: x is already a point of the configuration");
  }
}

double pairwise_product(const PairwiseParams& p, const Point& x, std::span<const Point> s) {
  const double range2 = p.phi.range() * p.phi.range();
  double prod = 1.0;
  for (const auto& y : s) {
    const double d2 = squared_distance(x, y);
    if (d2 >= range2) continue;
    prod *= p.phi(std::sqrt(d2));
    if (prod == 0.0) break;
  }
  return prod;
}

void collect_near(const Point& x, std::span<const Point> s, double reach,
                  std::vector<Point>& out) {
  const double reach2 = reach * reach;
  for (const auto& y : s) {
    if (squared_distance(x, y) < reach2) out.push_back(y);
  }
}

double area_reduced(const AreaParams& a, const Point& x, const std::vector<Point>& near) {
  const double u = a.method == AreaMethod::exact ? uncovered_exact(x, near, a.r0)
                                                 : uncovered_area_qmc(a, x, near);
  return std::exp(-u * std::log(a.gamma));
}

}  // namespace

double uncovered_area(const ModelSpec& model, const Point& x, std::span<const Point> xi,
                      std::span<const Point> omega) {
  const auto* a = model.area();
  if (!a) throw std::invalid_argument("uncovered_area: not an area-interaction model");
  std::vector<Point> near;
  collect_near(x, xi, 2.0 * a->r0, near);
  collect_near(x, omega, 2.0 * a->r0, near);
  return a->method == AreaMethod::exact ? uncovered_exact(x, near, a->r0)
                                        : uncovered_area_qmc(*a, x, near);
}

double reduced_intensity(const ModelSpec& model, const Point& x, std::span<const Point> xi,
                         std::span<const Point> omega) {
  ensure_absent(x, xi);
  ensure_absent(x, omega);
  if (const auto* p = model.pairwise()) {
    const double v = pairwise_product(*p, x, xi);
    return v == 0.0 ? 0.0 : v * pairwise_product(*p, x, omega);
  }
  if (const auto* a = model.area()) {
    std::vector<Point> near;
    collect_near(x, xi, 2.0 * a->r0, near);
    collect_near(x, omega, 2.0 * a->r0, near);
    return area_reduced(*a, x, near);
  }
  return 1.0;
}

double conditional_intensity(const ModelSpec& model, const Point& x, std::span<const Point> xi,
                             std::span<const Point> omega) {
  return model.beta() * reduced_intensity(model, x, xi, omega);
}

double weight(const ModelSpec& model, std::span<const Point> xi, std::span<const Point> omega) {
  double w = 1.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    w *= conditional_intensity(model, xi[i], xi.first(i), omega);
    if (w == 0.0) return 0.0;
  }
  return w;
}

IntensityBounds sandwich_bounds(const ModelSpec& model, const Point& x,
                                std::span<const Point> lower, std::span<const Point> extra) {
  const double beta = model.beta();
  if (const auto* p = model.pairwise()) {
    const double base = pairwise_product(*p, x, lower);
    if (base == 0.0) return {0.0, 0.0};
    double lo = base;
    double hi = base;
    const double range2 = p->phi.range() * p->phi.range();
    for (const auto& y : extra) {
      const double d2 = squared_distance(x, y);
      if (d2 >= range2) continue;
      const double f = p->phi(std::sqrt(d2));
      lo *= std::min(1.0, f);
      hi *= std::max(1.0, f);
    }
    return {beta * lo, beta * hi};
  }
  if (const auto* a = model.area()) {
    // The uncovered area shrinks as points are added, so λ is monotone in ξ.
    std::vector<Point> near;
    collect_near(x, lower, 2.0 * a->r0, near);
    const double v_lower = area_reduced(*a, x, near);
    collect_near(x, extra, 2.0 * a->r0, near);
    const double v_upper = area_reduced(*a, x, near);
    return {beta * std::min(v_lower, v_upper), beta * std::max(v_lower, v_upper)};
  }
  return {beta, beta};
}

// --- condition (P), stability, constants -------------------------------------------

std::int64_t packing_bound(int d, double core, double radius) {
  if (!(core > 0.0)) throw std::invalid_argument("packing_bound needs core > 0");
  return static_cast<std::int64_t>(std::floor(std::pow((radius + core) / (0.5 * core), d)));
}

ConditionP derive_condition_p(const ModelSpec& model, std::optional<double> separation) {
  if (const auto* a = model.area()) {
    const double bound = std::pow(a->gamma, -unit_ball_volume(model.dim()) * std::pow(a->r0, model.dim()));
    return {separation.value_or(0.0), std::min(1.0, bound), true};
  }
  if (const auto* p = model.pairwise()) {
    switch (p->declared) {
      case PairClass::attractive_beyond_r:
        return {p->r, 1.0, false};
      case PairClass::bounded_hard_core: {
        if (p->delta_tilde >= 1.0) return {p->r, 1.0, false};
        const auto m = packing_bound(model.dim(), p->r, p->r_max);
        return {p->r, std::pow(p->delta_tilde, static_cast<double>(m)), false};
      }
      case PairClass::none:
        throw std::domain_error("derive_condition_p: pairwise table without a declared class");
    }
  }
  return {separation.value_or(0.0), 1.0, true};
}

ConditionPReport check_condition_p(const ModelSpec& model, double r, double delta,
                                   std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("check_condition_p needs trials >= 1");
  if (!(r > 0.0)) throw std::invalid_argument("check_condition_p needs r > 0");
  const int d = model.dim();
  const double core = model.hard_core();
  const double outer = r + std::max(model.reach(), r);
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  const Point x(d);

  ConditionPReport rep;
  rep.trials = trials;
  rep.worst = kInf;
  std::vector<Point> xi;
  for (std::size_t t = 0; t < trials; ++t) {
    xi.clear();
    const auto target = std::uniform_int_distribution<int>(0, 48)(rng);
    for (int attempt = 0; attempt < 4 * target && static_cast<int>(xi.size()) < target; ++attempt) {
      Point dir(d);
      double norm = 0.0;
      for (int k = 0; k < d; ++k) {
        dir[k] = gauss(rng);
        norm += dir[k] * dir[k];
      }
      norm = std::sqrt(norm);
      double rho = r;
      if (uniform01(rng) > 0.25) {
        const double lo = std::pow(r, d);
        const double hi = std::pow(outer, d);
        rho = std::pow(lo + (hi - lo) * uniform01(rng), 1.0 / d);
      }
      Point y(d);
      for (int k = 0; k < d; ++k) y[k] = x[k] + rho * dir[k] / norm;
      if (distance(x, y) < r) continue;
      if (core > 0.0 && dist_point_set(y, std::span<const Point>(xi)) < core) continue;
      xi.push_back(y);
    }
    const double v = reduced_intensity(model, x, xi);
    if (v < rep.worst) {
      rep.worst = v;
      if (v < delta) rep.witness = std::make_pair(x, xi);
    }
  }
  rep.pass = !rep.witness.has_value();
  try {
    rep.analytic = derive_condition_p(model, r);
  } catch (const std::domain_error&) {
  }
  return rep;
}

std::optional<double> stability_factor(const ModelSpec& model) {
  if (const auto* a = model.area()) {
    const double e = unit_ball_volume(model.dim()) * std::pow(a->r0, model.dim());
    return std::max(1.0, std::pow(a->gamma, -e));
  }
  if (const auto* p = model.pairwise()) {
    const double s = p->phi.sup();
    if (s <= 1.0) return 1.0;
    const double h = p->phi.hard_core();
    if (h <= 0.0) return std::nullopt;
    const auto m = packing_bound(model.dim(), h, p->phi.range());
    const double k = std::pow(s, static_cast<double>(m));
    if (!std::isfinite(k)) return std::nullopt;
    return k;
  }
  return 1.0;
}

std::optional<double> local_stability_constant(const ModelSpec& model) {
  const auto k = stability_factor(model);
  if (!k) return std::nullopt;
  return model.beta() * *k;
}

BetaPlus compute_beta_plus(int d, int m, double r, double delta) {
  if (d < 1 || m < 1 || !(r > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("compute_beta_plus needs d, m >= 1 and r, delta > 0");
  }
  BetaPlus out;
  const double md = static_cast<double>(m);
  const double inner = r + 3.0 * std::sqrt(static_cast<double>(d)) / (2.0 * md);
  out.c = 1.0 / (2.0 * unit_ball_volume(d) * std::pow(inner, d) * std::pow(md, d));
  out.log2_beta_plus = log2_beta_plus(d, m, out.c, delta);
  out.beta_plus = out.log2_beta_plus < 1024.0 ? std::exp2(out.log2_beta_plus) : kInf;
  out.astronomical = out.log2_beta_plus > 300.0 * std::numbers::log2e * std::numbers::ln10;
  return out;
}

double log2_beta_plus(int d, int m, double c, double delta) {
  if (d < 1 || m < 1 || !(c > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("log2_beta_plus needs d, m >= 1 and c, delta > 0");
  }
  return d * (1.0 / c + std::log2(static_cast<double>(m))) - std::log2(delta);
}

double compute_beta_minus(const ModelSpec& model, double poisson_critical) {
  if (!(poisson_critical > 0.0)) throw std::invalid_argument("compute_beta_minus needs a positive critical intensity");
  const auto k = stability_factor(model);
  if (!k) throw std::domain_error("compute_beta_minus: model is not locally stable");
  return poisson_critical / *k;
}

}  // namespace gibbsperc
