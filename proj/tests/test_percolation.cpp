#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gibbsperc/percolation.hpp"
#include "support/oracles.hpp"

using namespace gibbsperc;

namespace {

BooleanModel model_of(std::vector<Point> pts, double R, const Box& window) {
  return BooleanModel{Configuration{window, std::move(pts)}, R};
}

std::vector<int> oracle_labels(const Configuration& c, double R) {
  std::vector<std::array<double, 8>> raw;
  for (const auto& p : c.points) {
    std::array<double, 8> a{};
    for (int k = 0; k < p.dim(); ++k) a[static_cast<std::size_t>(k)] = p[k];
    raw.push_back(a);
  }
  return oracle::closure_labels(raw, c.dim(), 2.0 * R);
}

}  // namespace

TEST_CASE("overlap is strict at distance 2R") {
  const Box w({-5.0, -5.0}, {5.0, 5.0});
  CHECK(label_clusters(model_of({{0.0, 0.0}, {0.0, 1.9}}, 1.0, w)).count() == 1);
  CHECK(label_clusters(model_of({{0.0, 0.0}, {0.0, 2.0}}, 1.0, w)).count() == 2);
  CHECK(label_clusters_reference(model_of({{0.0, 0.0}, {0.0, 2.0}}, 1.0, w)).count() == 2);
}

TEST_CASE("a huge radius gives one cluster") {
  Rng rng(1);
  const Box w = Box::cube(2, 10.0);
  std::vector<Point> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(uniform_point(w, rng));
  const auto lab = label_clusters(model_of(pts, 15.0, w));
  CHECK(lab.count() == 1);
  CHECK(lab.sizes[0] == 300);
}

TEST_CASE("cluster labels match the brute-force closure") {
  Rng rng(2);
  for (int t = 0; t < 60; ++t) {
    const int d = 2 + t % 3;
    const Box w = Box::cube(d, 5.0);
    const std::size_t n = 1 + static_cast<std::size_t>(t * 37 % 200);
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(uniform_point(w, rng));
    const double R = 0.1 + 0.05 * (t % 10);
    const auto bm = model_of(pts, R, w);
    const auto fast = label_clusters(bm, Exec::serial);
    const auto par = label_clusters(bm, Exec::parallel);
    const auto ref = label_clusters_reference(bm);
    const auto truth = oracle_labels(bm.config, R);
    REQUIRE(fast.label.size() == truth.size());
    for (std::size_t i = 0; i < n; ++i) CHECK(fast.label[i] == static_cast<std::size_t>(truth[i]));
    CHECK(fast.label == par.label);
    CHECK(fast.label == ref.label);
    CHECK(fast.crossing == par.crossing);
    CHECK(fast.crossing == ref.crossing);
    CHECK(fast.count() + fast.merging_edges == n);
    CHECK(par.count() + par.merging_edges == n);
  }
}

TEST_CASE("crossing examples") {
  const Box w = Box::cube(2, 10.0);
  CHECK_FALSE(crossing(model_of({{5.0, 5.0}}, 0.5, w), 0));
  CHECK_FALSE(crossing(model_of({}, 0.5, w), 0));
  CHECK_FALSE(crossing(model_of({}, 0.5, w), kAllAxes));
  std::vector<Point> chain;
  for (double x = 0.2; x < 10.0; x += 1.5 * 0.8) chain.push_back({x, 5.0});
  CHECK(crossing(model_of(chain, 0.8, w), 0));
  CHECK_FALSE(crossing(model_of(chain, 0.8, w), 1));
  CHECK_FALSE(crossing(model_of(chain, 0.8, w), kAllAxes));
  for (double y = 0.2; y < 10.0; y += 1.5 * 0.8) chain.push_back({5.1, y});
  CHECK(crossing(model_of(chain, 0.8, w), kAllAxes));
  CHECK_THROWS_AS(crossing(model_of(chain, 0.8, w), 2), std::invalid_argument);
  CHECK_THROWS_AS(label_clusters(model_of(chain, 0.0, w)), std::invalid_argument);
}

TEST_CASE("adding points never destroys a crossing") {
  Rng rng(3);
  const Box w = Box::cube(2, 6.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<Point> pts;
    bool was = false;
    for (int k = 0; k < 120; ++k) {
      pts.push_back(uniform_point(w, rng));
      const bool now = crossing(model_of(pts, 0.5, w), 0);
      CHECK((!was || now));
      was = now;
    }
  }
}

TEST_CASE("wilson interval") {
  const auto a = wilson_interval(30, 100);
  CHECK(a.lo < 0.3);
  CHECK(a.hi > 0.3);
  CHECK(a.lo == doctest::Approx(0.2189).epsilon(1e-3));
  CHECK(a.hi == doctest::Approx(0.3958).epsilon(1e-3));
  const auto z = wilson_interval(0, 50);
  CHECK(z.lo == 0.0);
  CHECK(z.hi > 0.0);
  const auto e = wilson_interval(0, 0);
  CHECK(e.lo == 0.0);
  CHECK(e.hi == 1.0);
}

TEST_CASE("crossing probability at the extremes") {
  const double R = 0.5;
  const double scale = std::numbers::pi * R * R;
  PercOptions opt;
  opt.sampler.kind = SamplerKind::exact_poisson;
  const auto low = perc_probability(ModelSpec::poisson(2, 1e-4), R, 8.0, 200, opt, 1);
  CHECK(low.fraction == 0.0);
  const auto high = perc_probability(ModelSpec::poisson(2, 10.0 / scale), R, 8.0, 200, opt, 2);
  CHECK(high.fraction == 1.0);
  CHECK(high.successes == 200);
  CHECK(high.n_reps == 200);
  CHECK_FALSE(high.small_window);
  CHECK(perc_probability(ModelSpec::poisson(2, 1.0), R, 1.5, 10, opt, 2).small_window);

  CHECK_THROWS_AS(perc_probability(ModelSpec::poisson(2, 1.0), R, 8.0, 0, opt, 1), std::invalid_argument);
  CHECK_THROWS_AS(perc_probability(ModelSpec::poisson(2, 1.0), 0.0, 8.0, 10, opt, 1), std::invalid_argument);
  opt.axis = 3;
  CHECK_THROWS_AS(perc_probability(ModelSpec::poisson(2, 1.0), R, 8.0, 10, opt, 1), std::invalid_argument);
}

TEST_CASE("crossing probability is identical serially and in parallel") {
  const auto m = ModelSpec::hard_core(2, 1.5, 0.2);
  const auto s = perc_probability(m, 0.5, 4.0, 60, {}, 17, Exec::serial);
  const auto p = perc_probability(m, 0.5, 4.0, 60, {}, 17, Exec::parallel);
  CHECK(s.successes == p.successes);
}

TEST_CASE("crossing fraction is monotone under coupled thinning") {
  // One Poisson pattern at the largest activity, thinned by independent marks.
  const double R = 1.0, L = 32.0, top = 0.5;
  const std::vector<double> grid{0.2, 0.26, 0.3, 0.34, 0.4, 0.5};
  const int n = 150;
  std::vector<int> coupled(grid.size(), 0);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(8, static_cast<std::uint64_t>(i)));
    const auto full = sample_poisson(top, Box::cube(2, L), rng);
    std::vector<double> mark(full.size());
    for (auto& u : mark) u = uniform01(rng);
    bool prev = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::vector<Point> kept;
      for (std::size_t k = 0; k < full.size(); ++k) {
        if (mark[k] < grid[g] / top) kept.push_back(full.points[k]);
      }
      const bool now = crossing(model_of(kept, R, Box::cube(2, L)), 0);
      CHECK((!prev || now));
      prev = now;
      coupled[g] += now ? 1 : 0;
    }
  }
  PercOptions opt;
  opt.sampler.kind = SamplerKind::exact_poisson;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto e = perc_probability(ModelSpec::poisson(2, grid[g]), R, L, n, opt, 1000 + g);
    const double pc = coupled[g] / static_cast<double>(n);
    const double se = std::sqrt(std::max(pc * (1 - pc), e.fraction * (1 - e.fraction)) * 2.0 / n);
    CHECK(std::abs(e.fraction - pc) <= 3.0 * se + 1e-12);
    if (g > 0) CHECK(coupled[g] >= coupled[g - 1]);
  }
}

TEST_CASE("mcmc and exact poisson sampling give the same crossing fraction") {
  const auto m = ModelSpec::poisson(2, 1.4);
  PercOptions exact;
  exact.sampler.kind = SamplerKind::exact_poisson;
  PercOptions chain;
  chain.sampler.kind = SamplerKind::mcmc;
  const auto a = perc_probability(m, 0.5, 4.0, 400, exact, 5);
  const auto b = perc_probability(m, 0.5, 4.0, 400, chain, 6);
  const double p = 0.5 * (a.fraction + b.fraction);
  CHECK(std::abs(a.fraction - b.fraction) <= 3.0 * std::sqrt(2.0 * p * (1 - p) / 400) + 1e-12);
}

TEST_CASE("bisection finds a threshold inside its confidence interval") {
  PercOptions opt;
  opt.sampler.kind = SamplerKind::exact_poisson;
  BisectionOptions bis;
  bis.n_reps = 200;
  bis.tol = 0.04;
  const std::vector<double> Ls{4.0, 8.0};
  const auto est = estimate_beta_c(ModelSpec::poisson(2, 1.0), 0.5, Ls, bis, opt, 3);
  REQUIRE(est.per_L.size() == 2);
  for (const auto& t : est.per_L) {
    CHECK(t.beta_hat > 0.5);
    CHECK(t.beta_hat < 3.0);
    CHECK(t.ci.lo <= t.beta_hat);
    CHECK(t.ci.hi >= t.beta_hat);
    CHECK(t.probes.size() >= 3);
  }
  // A line through two points extrapolates exactly.
  const double a = est.per_L[0].beta_hat, b = est.per_L[1].beta_hat;
  CHECK(est.extrapolated == doctest::Approx(2.0 * b - a));
}

TEST_CASE("bisection reports a flat curve") {
  // Hard core 2R: discs never overlap, so nothing crosses a window of side 8R.
  const auto m = ModelSpec::hard_core(2, 1.0, 1.0);
  PercOptions opt;
  opt.sampler.kind = SamplerKind::mcmc;
  opt.sampler.mcmc_steps = 2000;
  BisectionOptions bis;
  bis.n_reps = 20;
  const std::vector<double> Ls{4.0};
  CHECK_THROWS_AS(estimate_beta_c(m, 0.5, Ls, bis, opt, 1), BracketFailure);

  const std::vector<double> none;
  CHECK_THROWS_AS(estimate_beta_c(m, 0.5, none, bis, opt, 1), std::invalid_argument);
  const std::vector<double> down{8.0, 4.0};
  CHECK_THROWS_AS(estimate_beta_c(m, 0.5, down, bis, opt, 1), std::invalid_argument);
  bis.tol = 0.0;
  CHECK_THROWS_AS(estimate_beta_c(m, 0.5, Ls, bis, opt, 1), std::invalid_argument);
}

TEST_CASE("planar slice of a three-dimensional Boolean model") {
  const Box w = Box::cube(3, 4.0);
  // Two balls whose traces on x_3 = 2 are discs of radius 0.6 and 0.8.
  std::vector<Point> pts{{1.0, 2.0, 2.8}, {2.35, 2.0, 1.4}, {3.0, 3.0, 3.5}};
  const auto lab = slice_clusters(model_of(pts, 1.0, w), 2.0);
  // The third ball does not reach the plane.
  CHECK(lab.count() == 1);
  CHECK(lab.sizes[0] == 2);
  const auto apart = slice_clusters(model_of({{1.0, 2.0, 2.8}, {2.45, 2.0, 1.4}}, 1.0, w), 2.0);
  CHECK(apart.count() == 2);
  CHECK_THROWS_AS(slice_clusters(model_of({{1.0, 1.0}}, 1.0, Box::cube(2, 4.0)), 0.0), std::invalid_argument);
}

TEST_CASE("disjoint sets") {
  DisjointSets s(5);
  CHECK(s.unite(0, 1));
  CHECK(s.unite(3, 4));
  CHECK_FALSE(s.unite(1, 0));
  CHECK(s.unite(1, 4));
  CHECK(s.find(0) == s.find(3));
  CHECK(s.find(2) != s.find(0));
}
