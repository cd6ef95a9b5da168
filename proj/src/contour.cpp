#include "gibbsperc/contour.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace gibbsperc {

CubeIndex::CubeIndex(std::initializer_list<std::int64_t> idx) : dim(static_cast<int>(idx.size())) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("cube index dimension out of range");
  std::copy(idx.begin(), idx.end(), i.begin());
}

Point CubeLattice::center(const CubeIndex& z) const {
  Point p(dim);
  for (int a = 0; a < dim; ++a) p[a] = static_cast<double>(z[a]) / m;
  return p;
}

Box CubeLattice::cube(const CubeIndex& z) const { return Box::centered(center(z), 0.5 / m); }

CubeIndex CubeLattice::containing(const Point& x) const {
  CubeIndex z(dim);
  for (int a = 0; a < dim; ++a) z[a] = static_cast<std::int64_t>(std::llround(x[a] * m));
  return z;
}

bool CubeLattice::neighbours(const CubeIndex& a, const CubeIndex& b) {
  std::int64_t mx = 0;
  for (int k = 0; k < a.dim; ++k) mx = std::max<std::int64_t>(mx, std::llabs(a[k] - b[k]));
  return mx == 1;
}

void CubeLattice::validate(double r, double R) const {
  if (!(static_cast<double>(m) > std::sqrt(static_cast<double>(dim)) / (R - r)) || !(R > r)) {
    throw std::invalid_argument("cube lattice needs m > sqrt(d)/(R - r) with R > r");
  }
}

int choose_m(int d, double r, double R) {
  if (!(r > 0.0) || !(R > r)) throw std::invalid_argument("choose_m needs R > r > 0");
  double v = std::sqrt(static_cast<double>(d)) / (R - r);
  const double nearest = std::round(v);
  if (std::abs(v - nearest) <= 1e-12 * std::max(1.0, v)) v = nearest;
  return static_cast<int>(std::floor(v)) + 1;
}

double separation_constant(int d, int m, double r) {
  const double md = static_cast<double>(m);
  const double inner = r + 3.0 * std::sqrt(static_cast<double>(d)) / (2.0 * md);
  return 1.0 / (2.0 * unit_ball_volume(d) * std::pow(inner, d) * std::pow(md, d));
}

CubeSet greedy_separated(const CubeSet& s, double r, int m) {
  CubeSet sorted = s;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty()) return {};
  const int d = sorted.front().dim;
  // Exclusion radius r + √d/m, in index units.
  const double thr = r * m + std::sqrt(static_cast<double>(d));
  const double thr2 = thr * thr;
  std::vector<bool> gone(sorted.size(), false);
  CubeSet kept;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (gone[i]) continue;
    kept.push_back(sorted[i]);
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (gone[j]) continue;
      double s2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double t = static_cast<double>(sorted[j][a] - sorted[i][a]);
        s2 += t * t;
      }
      if (s2 <= thr2) gone[j] = true;
    }
  }
  return kept;
}

bool pairwise_separated(const CubeSet& s, double r, int m) {
  const double need = r * m;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      std::int64_t gap2 = 0;
      for (int a = 0; a < s[i].dim; ++a) {
        const std::int64_t g = std::max<std::int64_t>(0, std::llabs(s[i][a] - s[j][a]) - 1);
        gap2 += g * g;
      }
      // Box distance in index units is sqrt(gap2).
      if (std::sqrt(static_cast<double>(gap2)) < need * (1.0 - 1e-12)) return false;
    }
  }
  return true;
}

// --- loops -------------------------------------------------------------------------

namespace {

bool adjacent(const Cell& a, const Cell& b) {
  return std::max(std::llabs(a[0] - b[0]), std::llabs(a[1] - b[1])) == 1;
}

std::int64_t cross(const Cell& o, const Cell& a, const Cell& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::vector<Cell> convex_hull(std::vector<Cell> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Cell> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool in_hull(const std::vector<Cell>& hull, const Cell& p) {
  if (hull.size() == 1) return hull[0] == p;
  if (hull.size() == 2) {
    if (cross(hull[0], hull[1], p) != 0) return false;
    return std::min(hull[0][0], hull[1][0]) <= p[0] && p[0] <= std::max(hull[0][0], hull[1][0]) &&
           std::min(hull[0][1], hull[1][1]) <= p[1] && p[1] <= std::max(hull[0][1], hull[1][1]);
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0) return false;
  }
  return true;
}

struct LoopSearch {
  int k;
  bool collect;
  std::uint64_t count = 0;
  std::uint64_t shapes = 0;
  std::vector<std::vector<Cell>> loops;
  std::array<Cell, 64> path{};

  void record() {
    std::vector<Cell> cyc(path.begin(), path.begin() + k);
    const auto n = hull_lattice_points(cyc);
    ++shapes;
    count += static_cast<std::uint64_t>(n);
    if (!collect) return;
    const auto hull = convex_hull(cyc);
    std::int64_t lo0 = 0, hi0 = 0, lo1 = 0, hi1 = 0;
    for (const auto& c : cyc) {
      lo0 = std::min(lo0, c[0]);
      hi0 = std::max(hi0, c[0]);
      lo1 = std::min(lo1, c[1]);
      hi1 = std::max(hi1, c[1]);
    }
    for (std::int64_t a = lo0; a <= hi0; ++a) {
      for (std::int64_t b = lo1; b <= hi1; ++b) {
        if (!in_hull(hull, {a, b})) continue;
        std::vector<Cell> shifted = cyc;
        for (auto& c : shifted) {
          c[0] -= a;
          c[1] -= b;
        }
        loops.push_back(std::move(shifted));
      }
    }
  }

  void extend(int len) {
    const Cell& last = path[static_cast<std::size_t>(len) - 1];
    if (len == k) {
      if (adjacent(last, path[0]) && path[1] < path[static_cast<std::size_t>(k) - 1]) record();
      return;
    }
    const int remaining_after = k - len - 1;
    for (std::int64_t da = -1; da <= 1; ++da) {
      for (std::int64_t db = -1; db <= 1; ++db) {
        if (da == 0 && db == 0) continue;
        const Cell c{last[0] + da, last[1] + db};
        if (!(path[0] < c)) continue;
        // Must be able to close the cycle with the remaining cells.
        const auto back = std::max(std::llabs(c[0]), std::llabs(c[1]));
        if (back > remaining_after + 1) continue;
        bool ok = true;
        for (int j = 0; j + 1 < len && ok; ++j) {
          const auto& v = path[static_cast<std::size_t>(j)];
          if (v == c) ok = false;
          else if (adjacent(v, c) && !(j == 0 && len + 1 == k)) ok = false;
        }
        if (!ok) continue;
        if (len + 1 == k && !adjacent(c, path[0])) continue;
        path[static_cast<std::size_t>(len)] = c;
        extend(len + 1);
      }
    }
  }
};

}  // namespace

bool is_loop(std::span<const Cell> cells) {
  if (cells.empty()) return false;
  std::vector<Cell> v(cells.begin(), cells.end());
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end()) return false;
  for (const auto& a : v) {
    int deg = 0;
    for (const auto& b : v) deg += adjacent(a, b) ? 1 : 0;
    if (deg != 2) return false;
  }
  std::vector<bool> seen(v.size(), false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const auto i = queue.front();
    queue.pop_front();
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (!seen[j] && adjacent(v[i], v[j])) {
        seen[j] = true;
        ++reached;
        queue.push_back(j);
      }
    }
  }
  return reached == v.size();
}

bool surrounds_origin(std::span<const Cell> cells) {
  if (cells.empty()) return false;
  return in_hull(convex_hull({cells.begin(), cells.end()}), {0, 0});
}

std::int64_t hull_lattice_points(std::span<const Cell> cells) {
  if (cells.empty()) return 0;
  const auto hull = convex_hull({cells.begin(), cells.end()});
  std::int64_t lo0 = hull[0][0], hi0 = hull[0][0], lo1 = hull[0][1], hi1 = hull[0][1];
  for (const auto& c : hull) {
    lo0 = std::min(lo0, c[0]);
    hi0 = std::max(hi0, c[0]);
    lo1 = std::min(lo1, c[1]);
    hi1 = std::max(hi1, c[1]);
  }
  std::int64_t n = 0;
  for (std::int64_t a = lo0; a <= hi0; ++a) {
    for (std::int64_t b = lo1; b <= hi1; ++b) n += in_hull(hull, {a, b}) ? 1 : 0;
  }
  return n;
}

double loop_count_bound(int d, int k) {
  return std::pow(2.0 * k + 1.0, d) * std::exp2(static_cast<double>(d) * (k - 1));
}

LoopEnumeration enumerate_loops(int k, bool collect, int cap, Exec exec) {
  if (k > cap) {
    throw std::invalid_argument("enumerate_loops: k = " + std::to_string(k) + " exceeds the cap " +
                                std::to_string(cap) + "; use loop_count_bound instead");
  }
  LoopEnumeration out;
  out.k = k;
  out.bound = loop_count_bound(2, k);
  if (k < 3) return out;  // a cell in a set of one or two cells has fewer than two neighbours

  // Canonical representative: the lexicographically smallest cell sits at the
  // origin. The search splits over the four possible second cells.
  const std::array<Cell, 4> seconds{{{0, 1}, {1, -1}, {1, 0}, {1, 1}}};
  std::array<LoopSearch, 4> parts{};
  for (auto& p : parts) {
    p.k = k;
    p.collect = collect;
  }
  auto run = [&](std::size_t s) {
    auto& p = parts[s];
    p.path[0] = {0, 0};
    p.path[1] = seconds[s];
    p.extend(2);
  };
  if (exec == Exec::serial) {
    for (std::size_t s = 0; s < seconds.size(); ++s) run(s);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < 4; ++s) run(static_cast<std::size_t>(s));
  }
  for (auto& p : parts) {
    out.count += p.count;
    out.shapes += p.shapes;
    for (auto& l : p.loops) out.loops.push_back(std::move(l));
  }
  return out;
}

// --- Borel–Cantelli sum --------------------------------------------------------------

namespace {

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

/// Σ_{k>=0} k^j q^k.
long double polylog_neg(int j, long double q) {
  if (j == 0) return 1.0L / (1.0L - q);
  // Eulerian numbers A(j, i), i = 0..j-1.
  std::vector<long double> row{1.0L};
  for (int n = 2; n <= j; ++n) {
    std::vector<long double> next(static_cast<std::size_t>(n), 0.0L);
    for (int i = 0; i < n; ++i) {
      const long double a = i < n - 1 ? row[static_cast<std::size_t>(i)] : 0.0L;
      const long double b = i > 0 ? row[static_cast<std::size_t>(i) - 1] : 0.0L;
      next[static_cast<std::size_t>(i)] = (i + 1) * a + (n - i) * b;
    }
    row = std::move(next);
  }
  long double poly = 0.0L;
  long double qp = 1.0L;
  for (auto e : row) {
    poly += e * qp;
    qp *= q;
  }
  return q * poly / std::pow(1.0L - q, static_cast<long double>(j + 1));
}

}  // namespace

TailSum loop_tail_sum_log2(int d, double log2_x, double c, int k_min) {
  if (d < 1 || !(c > 0.0) || k_min < 0) throw std::invalid_argument("loop_tail_sum: bad arguments");
  TailSum out;
  const double log2_q = d - c * log2_x;
  out.q = std::exp2(log2_q);
  if (!(log2_q < 0.0)) {
    out.converges = false;
    out.value = std::numeric_limits<double>::quiet_NaN();
    out.log_value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.converges = true;
  if (out.q == 0.0) {
    out.value = 0.0;
    out.log_value = -std::numeric_limits<double>::infinity();
    return out;
  }
  const long double ln_q = static_cast<long double>(log2_q) * std::numbers::ln2_v<long double>;
  const long double ln_pre = -static_cast<long double>(d) * std::numbers::ln2_v<long double>;
  auto ln_term = [&](long double k) {
    return d * std::log(2.0L * k + 1.0L) + k * ln_q + ln_pre;
  };

  // Direct summation is used whenever the terms fall off within a few million steps.
  if (60.0L / -ln_q < 5e6L) {
    long double top = ln_term(k_min);
    long double acc = 0.0L;
    for (long double k = k_min;; k += 1.0L) {
      const long double l = ln_term(k);
      if (l > top) {
        acc *= std::exp(top - l);
        top = l;
      }
      acc += std::exp(l - top);
      const bool decreasing = std::pow((2.0L * k + 3.0L) / (2.0L * k + 1.0L), d) * std::exp(ln_q) < 1.0L;
      if (decreasing && l < top - 60.0L) break;
    }
    out.log_value = static_cast<double>(top + std::log(acc));
    out.value = static_cast<double>(std::exp(top + std::log(acc)));
    return out;
  }

  // Closed form Σ_{k>=0} (2k+1)^d q^k = Σ_j C(d,j) 2^j Li_{-j}(q), minus the head.
  const long double q = std::exp(ln_q);
  long double full = 0.0L;
  for (int j = 0; j <= d; ++j) full += binomial(d, j) * std::pow(2.0L, j) * polylog_neg(j, q);
  long double head = 0.0L;
  for (int k = 0; k < k_min; ++k) head += std::pow(2.0L * k + 1.0L, d) * std::pow(q, static_cast<long double>(k));
  const long double s = (full - head) * std::exp(ln_pre);
  out.value = static_cast<double>(s);
  out.log_value = static_cast<double>(std::log(s));
  return out;
}

TailSum loop_tail_sum(int d, int m, double beta, double delta, double c, int k_min) {
  if (!(beta > 0.0) || !(delta > 0.0) || m < 1) throw std::invalid_argument("loop_tail_sum: bad arguments");
  const double log2_x = std::log2(beta) + std::log2(delta) - d * std::log2(static_cast<double>(m));
  return loop_tail_sum_log2(d, log2_x, c, k_min);
}

// --- key lemma ---------------------------------------------------------------------

KeyLemmaReport check_key_lemma(const ModelSpec& model, const CubeSet& s,
                               const CubeLattice& lattice, double r, std::size_t n_reps,
                               std::uint64_t seed, const KeyLemmaOptions& options, Exec exec) {
  if (!(r > 0.0)) throw std::invalid_argument("check_key_lemma needs r > 0");
  if (lattice.dim != model.dim()) throw std::invalid_argument("check_key_lemma: lattice and model dimensions differ");
  const int d = model.dim();
  KeyLemmaReport rep;
  rep.c = separation_constant(d, lattice.m, r);

  ConditionP cp{r, 0.0, false};
  if (options.delta) {
    cp.delta = *options.delta;
  } else {
    cp = derive_condition_p(model, r);
  }
  rep.delta = cp.delta;
  const double md = std::pow(static_cast<double>(lattice.m), d);
  const double x = model.beta() * cp.delta / md;
  rep.bound_applicable = (cp.any_r || r >= cp.r) && x >= 1.0;
  rep.bound = rep.bound_applicable ? std::exp(-rep.c * static_cast<double>(s.size()) * std::log(x)) : 1.0;

  if (s.empty()) {
    rep.p_hat = 1.0;
    if (model.kind() == ModelKind::poisson) rep.void_probability = 1.0;
    return rep;
  }

  std::vector<Box> cubes;
  std::vector<Shape> shapes;
  for (const auto& z : s) {
    cubes.push_back(lattice.cube(z));
    shapes.emplace_back(cubes.back());
  }
  Point lo = cubes.front().lower();
  Point hi = cubes.front().upper();
  for (const auto& b : cubes) {
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], b.lower()[a]);
      hi[a] = std::max(hi[a], b.upper()[a]);
    }
  }
  rep.window = Box(lo, hi).padded(r + std::sqrt(static_cast<double>(d)) / lattice.m);
  rep.n_reps = n_reps;

  auto vacant = [&](std::size_t i) {
    const auto conf = draw(model, rep.window, {}, options.sampler, derive_seed(seed, i));
    for (const auto& p : conf.points) {
      if (dist_point_set(p, std::span<const Box>(cubes)) < r) return false;
    }
    return true;
  };
  std::size_t hits = 0;
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n_reps; ++i) hits += vacant(i) ? 1 : 0;
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_reps); ++i) {
      try {
        hits += vacant(static_cast<std::size_t>(i)) ? 1 : 0;
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  rep.hits = hits;
  if (n_reps > 0) {
    rep.p_hat = static_cast<double>(hits) / static_cast<double>(n_reps);
    rep.p_std_error = std::sqrt(rep.p_hat * (1.0 - rep.p_hat) / static_cast<double>(n_reps));
  }

  if (model.kind() == ModelKind::poisson) {
    const auto v = dilated_volume(shapes, r, options.volume_nodes,
                                  derive_seed(seed, std::numeric_limits<std::uint64_t>::max()), exec);
    rep.dilated_volume = v.value;
    rep.void_probability = std::exp(-model.beta() * v.value);
    rep.void_std_error = model.beta() * *rep.void_probability * v.std_error;
  }
  return rep;
}

// --- separating chain ----------------------------------------------------------------

std::optional<CubeSet> separating_chain(const BooleanModel& bm, const CubeLattice& lattice,
                                        double r, const Point& x, const Point& x2) {
  if (bm.config.dim() != 2 || lattice.dim != 2) {
    throw std::invalid_argument("separating_chain works on planar configurations only");
  }
  const auto& pts = bm.config.points;
  if (dist_point_set(x, std::span<const Point>(pts)) < bm.radius ||
      dist_point_set(x2, std::span<const Point>(pts)) < bm.radius) {
    throw std::invalid_argument("separating_chain: endpoints must lie outside Z_R");
  }
  const auto start = lattice.containing(x);
  const auto goal = lattice.containing(x2);
  const auto& wl = bm.config.window.lower();
  const auto& wu = bm.config.window.upper();
  std::array<std::int64_t, 2> lo{}, hi{};
  for (int a = 0; a < 2; ++a) {
    lo[static_cast<std::size_t>(a)] = std::min({static_cast<std::int64_t>(std::ceil(wl[a] * lattice.m - 0.5)), start[a], goal[a]});
    hi[static_cast<std::size_t>(a)] = std::max({static_cast<std::int64_t>(std::floor(wu[a] * lattice.m + 0.5)), start[a], goal[a]});
  }
  const std::int64_t w0 = hi[0] - lo[0] + 1;
  const std::int64_t w1 = hi[1] - lo[1] + 1;
  auto flat = [&](const CubeIndex& z) { return static_cast<std::size_t>((z[0] - lo[0]) * w1 + (z[1] - lo[1])); };
  auto is_free = [&](const CubeIndex& z) {
    const Box q = lattice.cube(z);
    for (const auto& p : pts) {
      if (q.distance_to(p) < r) return false;
    }
    return true;
  };
  if (!is_free(start) || !is_free(goal)) return std::nullopt;

  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(static_cast<std::size_t>(w0 * w1), kUnseen);
  std::deque<CubeIndex> queue{start};
  parent[flat(start)] = flat(start);
  while (!queue.empty()) {
    const auto z = queue.front();
    queue.pop_front();
    if (z == goal) break;
    for (std::int64_t da = -1; da <= 1; ++da) {
      for (std::int64_t db = -1; db <= 1; ++db) {
        if (da == 0 && db == 0) continue;
        CubeIndex n{z[0] + da, z[1] + db};
        if (n[0] < lo[0] || n[0] > hi[0] || n[1] < lo[1] || n[1] > hi[1]) continue;
        if (parent[flat(n)] != kUnseen || !is_free(n)) continue;
        parent[flat(n)] = flat(z);
        queue.push_back(n);
      }
    }
  }
  if (parent[flat(goal)] == kUnseen) return std::nullopt;
  CubeSet chain;
  for (std::size_t at = flat(goal);; at = parent[at]) {
    chain.push_back(CubeIndex{lo[0] + static_cast<std::int64_t>(at) / w1, lo[1] + static_cast<std::int64_t>(at) % w1});
    if (parent[at] == at) break;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

}  // namespace gibbsperc
