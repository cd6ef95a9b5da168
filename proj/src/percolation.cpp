#include "gibbsperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <unordered_map>

namespace gibbsperc {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool DisjointSets::unite(std::size_t x, std::size_t y) {
  x = find(x);
  y = find(y);
  if (x == y) return false;
  if (rank_[x] < rank_[y]) std::swap(x, y);
  parent_[y] = x;
  if (rank_[x] == rank_[y]) ++rank_[x];
  return true;
}

namespace {

using CellKey = std::array<std::int64_t, kMaxDim>;

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (auto v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

ClusterLabels finish(const BooleanModel& bm, DisjointSets& sets, std::size_t merging) {
  const auto& pts = bm.config.points;
  const std::size_t n = pts.size();
  const int d = bm.config.dim();
  ClusterLabels out;
  out.label.resize(n);
  out.merging_edges = merging;
  std::vector<std::size_t> root_label(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = sets.find(i);
    if (root_label[root] == n) {
      root_label[root] = out.sizes.size();
      out.sizes.push_back(0);
    }
    out.label[i] = root_label[root];
    ++out.sizes[out.label[i]];
  }
  // Per-cluster face contact along each axis.
  const auto& lo = bm.config.window.lower();
  const auto& hi = bm.config.window.upper();
  std::vector<std::uint8_t> low(out.count() * static_cast<std::size_t>(d), 0);
  std::vector<std::uint8_t> high(out.count() * static_cast<std::size_t>(d), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      const std::size_t slot = out.label[i] * static_cast<std::size_t>(d) + static_cast<std::size_t>(a);
      if (pts[i][a] - lo[a] < bm.radius) low[slot] = 1;
      if (hi[a] - pts[i][a] < bm.radius) high[slot] = 1;
    }
  }
  out.crossing.assign(static_cast<std::size_t>(d), false);
  for (std::size_t c = 0; c < out.count(); ++c) {
    for (int a = 0; a < d; ++a) {
      const std::size_t slot = c * static_cast<std::size_t>(d) + static_cast<std::size_t>(a);
      if (low[slot] && high[slot]) out.crossing[static_cast<std::size_t>(a)] = true;
    }
  }
  return out;
}

void validate(const BooleanModel& bm) {
  if (!(bm.radius > 0.0)) throw std::invalid_argument("Boolean model radius must be positive");
}

}  // namespace

ClusterLabels label_clusters_reference(const BooleanModel& bm) {
  validate(bm);
  const auto& pts = bm.config.points;
  const double reach2 = 4.0 * bm.radius * bm.radius;
  DisjointSets sets(pts.size());
  std::size_t merging = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (squared_distance(pts[i], pts[j]) < reach2 && sets.unite(i, j)) ++merging;
    }
  }
  return finish(bm, sets, merging);
}

ClusterLabels label_clusters(const BooleanModel& bm, Exec exec) {
  validate(bm);
  const auto& pts = bm.config.points;
  const std::size_t n = pts.size();
  const int d = bm.config.dim();
  const double cell = 2.0 * bm.radius;
  const double reach2 = cell * cell;

  std::vector<CellKey> keys(n);
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CellKey k{};
    for (int a = 0; a < d; ++a) k[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor(pts[i][a] / cell));
    keys[i] = k;
    grid[k].push_back(i);
  }
  std::size_t n_offsets = 1;
  for (int a = 0; a < d; ++a) n_offsets *= 3;

  auto neighbours = [&](std::size_t i, std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    for (std::size_t o = 0; o < n_offsets; ++o) {
      CellKey k = keys[i];
      std::size_t rest = o;
      for (int a = 0; a < d; ++a) {
        k[static_cast<std::size_t>(a)] += static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
      }
      const auto it = grid.find(k);
      if (it == grid.end()) continue;
      for (std::size_t j : it->second) {
        if (j > i && squared_distance(pts[i], pts[j]) < reach2) edges.emplace_back(i, j);
      }
    }
  };

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) neighbours(i, edges);
  } else {
#pragma omp parallel
    {
      std::vector<std::pair<std::size_t, std::size_t>> local;
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        neighbours(static_cast<std::size_t>(i), local);
      }
#pragma omp critical
      edges.insert(edges.end(), local.begin(), local.end());
    }
  }
  DisjointSets sets(n);
  std::size_t merging = 0;
  for (const auto& [i, j] : edges) {
    if (sets.unite(i, j)) ++merging;
  }
  return finish(bm, sets, merging);
}

bool crossing(const ClusterLabels& labels, int axis) {
  if (axis == kAllAxes) {
    return !labels.crossing.empty() &&
           std::all_of(labels.crossing.begin(), labels.crossing.end(), [](bool b) { return b; });
  }
  if (axis < 0 || static_cast<std::size_t>(axis) >= labels.crossing.size()) {
    throw std::invalid_argument("crossing: axis out of range");
  }
  return labels.crossing[static_cast<std::size_t>(axis)];
}

bool crossing(const BooleanModel& bm, int axis) {
  if (axis != kAllAxes && (axis < 0 || axis >= bm.config.dim())) {
    throw std::invalid_argument("crossing: axis out of range");
  }
  if (bm.config.empty()) return false;
  return crossing(label_clusters(bm, Exec::serial), axis);
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == n ? 1.0 : std::min(1.0, centre + half)};
}

PercEstimate perc_probability(const ModelSpec& model, double R, double L, std::size_t n_reps,
                              const PercOptions& options, std::uint64_t seed, Exec exec) {
  if (n_reps == 0) throw std::invalid_argument("perc_probability needs n_reps >= 1");
  if (!(R > 0.0) || !(L > 0.0)) throw std::invalid_argument("perc_probability needs R, L > 0");
  const Window window = Box::cube(model.dim(), L);
  if (options.axis != kAllAxes && (options.axis < 0 || options.axis >= model.dim())) {
    throw std::invalid_argument("perc_probability: axis out of range");
  }

  auto replicate = [&](std::size_t i) -> bool {
    Configuration c = draw(model, window, options.omega, options.sampler, derive_seed(seed, i));
    if (c.empty()) return false;
    return crossing(label_clusters(BooleanModel{std::move(c), R}, Exec::serial), options.axis);
  };

  std::size_t hits = 0;
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n_reps; ++i) hits += replicate(i) ? 1 : 0;
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_reps); ++i) {
      try {
        hits += replicate(static_cast<std::size_t>(i)) ? 1 : 0;
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  PercEstimate e;
  e.beta = model.beta();
  e.L = L;
  e.n_reps = n_reps;
  e.successes = hits;
  e.fraction = static_cast<double>(hits) / static_cast<double>(n_reps);
  e.ci_halfwidth = 1.959963984540054 * std::sqrt(e.fraction * (1.0 - e.fraction) / static_cast<double>(n_reps));
  e.wilson = wilson_interval(hits, n_reps);
  e.seed = seed;
  e.small_window = L < 4.0 * R;
  return e;
}

void fit_trend(BetaCEstimate& est) {
  if (est.per_L.empty()) return;
  if (est.per_L.size() == 1) {
    est.extrapolated = est.per_L.front().beta_hat;
    est.trend = 0.0;
    return;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(est.per_L.size());
  for (const auto& t : est.per_L) {
    const double x = 1.0 / t.L;
    sx += x;
    sy += t.beta_hat;
    sxx += x * x;
    sxy += x * t.beta_hat;
  }
  est.trend = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  est.extrapolated = (sy - est.trend * sx) / n;
}

BetaCEstimate estimate_beta_c(const ModelSpec& model, double R, std::span<const double> L_list,
                              const BisectionOptions& bis, const PercOptions& options,
                              std::uint64_t seed, Exec exec) {
  if (L_list.empty()) throw std::invalid_argument("estimate_beta_c needs at least one window size");
  for (std::size_t i = 1; i < L_list.size(); ++i) {
    if (!(L_list[i] > L_list[i - 1])) throw std::invalid_argument("estimate_beta_c: L_list must be increasing");
  }
  if (!(bis.tol > 0.0)) throw std::invalid_argument("estimate_beta_c needs tol > 0");
  const double scale = unit_ball_volume(model.dim()) * std::pow(R, model.dim());
  const double lo0 = bis.lo > 0.0 ? bis.lo : 0.1 / scale;
  const double hi0 = bis.hi > 0.0 ? bis.hi : 10.0 / scale;
  if (!(hi0 > lo0)) throw std::invalid_argument("estimate_beta_c: bracket must satisfy lo < hi");

  BetaCEstimate out;
  for (std::size_t li = 0; li < L_list.size(); ++li) {
    const double L = L_list[li];
    ThresholdEstimate te;
    te.L = L;
    const std::uint64_t l_seed = derive_seed(seed, li);
    auto probe = [&](double beta) {
      auto e = perc_probability(model.with_beta(beta), R, L, bis.n_reps, options,
                                derive_seed(l_seed, te.probes.size()), exec);
      te.probes.push_back(e);
      return e;
    };

    double lo = lo0;
    double hi = hi0;
    auto f_lo = probe(lo);
    for (int k = 0; f_lo.fraction >= 0.5 && k < bis.max_expand; ++k) f_lo = probe(lo *= 0.5);
    auto f_hi = probe(hi);
    for (int k = 0; f_hi.fraction <= 0.5 && k < bis.max_expand; ++k) f_hi = probe(hi *= 2.0);
    if (f_lo.fraction >= 0.5 || f_hi.fraction <= 0.5) {
      throw BracketFailure("estimate_beta_c: crossing fraction does not straddle 1/2 on [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "] at L = " +
                           std::to_string(L) + " (fractions " + std::to_string(f_lo.fraction) +
                           ", " + std::to_string(f_hi.fraction) + ")");
    }

    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < bis.max_iter; ++it) {
      mid = 0.5 * (lo + hi);
      const auto e = probe(mid);
      if (std::abs(e.fraction - 0.5) <= bis.tol) break;
      (e.fraction < 0.5 ? lo : hi) = mid;
      if (hi - lo <= bis.rel_width * mid) {
        mid = 0.5 * (lo + hi);
        break;
      }
    }
    te.beta_hat = mid;
    double ci_lo = 0.0;
    double ci_hi = hi;
    bool have_lo = false;
    bool have_hi = false;
    for (const auto& p : te.probes) {
      if (p.wilson.hi < 0.5 && (!have_lo || p.beta > ci_lo)) {
        ci_lo = p.beta;
        have_lo = true;
      }
      if (p.wilson.lo > 0.5 && (!have_hi || p.beta < ci_hi)) {
        ci_hi = p.beta;
        have_hi = true;
      }
    }
    te.ci = {have_lo ? ci_lo : lo, have_hi ? ci_hi : hi};
    out.per_L.push_back(std::move(te));
  }

  fit_trend(out);
  return out;
}

ClusterLabels slice_clusters(const BooleanModel& bm, double offset) {
  validate(bm);
  const int d = bm.config.dim();
  if (d < 3) throw std::invalid_argument("slice_clusters needs d >= 3");
  struct Disc {
    Point c;
    double rho;
  };
  std::vector<Disc> discs;
  for (const auto& p : bm.config.points) {
    double h2 = 0.0;
    for (int a = 2; a < d; ++a) h2 += (p[a] - offset) * (p[a] - offset);
    const double r2 = bm.radius * bm.radius - h2;
    if (r2 > 0.0) discs.push_back({Point{p[0], p[1]}, std::sqrt(r2)});
  }
  const auto& wl = bm.config.window.lower();
  const auto& wu = bm.config.window.upper();
  BooleanModel trace{Configuration{Box(Point{wl[0], wl[1]}, Point{wu[0], wu[1]}), {}}, bm.radius};
  for (const auto& disc : discs) trace.config.points.push_back(disc.c);
  DisjointSets sets(discs.size());
  std::size_t merging = 0;
  for (std::size_t i = 0; i < discs.size(); ++i) {
    for (std::size_t j = i + 1; j < discs.size(); ++j) {
      if (distance(discs[i].c, discs[j].c) < discs[i].rho + discs[j].rho && sets.unite(i, j)) ++merging;
    }
  }
  ClusterLabels out = finish(trace, sets, merging);
  // Face contact uses each trace disc's own radius.
  std::vector<std::uint8_t> low(out.count() * 2, 0), high(out.count() * 2, 0);
  for (std::size_t i = 0; i < discs.size(); ++i) {
    for (int a = 0; a < 2; ++a) {
      const auto slot = out.label[i] * 2 + static_cast<std::size_t>(a);
      if (discs[i].c[a] - wl[a] < discs[i].rho) low[slot] = 1;
      if (wu[a] - discs[i].c[a] < discs[i].rho) high[slot] = 1;
    }
  }
  out.crossing.assign(2, false);
  for (std::size_t c = 0; c < out.count(); ++c) {
    for (std::size_t a = 0; a < 2; ++a) {
      if (low[c * 2 + a] && high[c * 2 + a]) out.crossing[a] = true;
    }
  }
  return out;
}

}  // namespace gibbsperc
