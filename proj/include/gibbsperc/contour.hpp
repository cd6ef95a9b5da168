#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gibbsperc/geometry.hpp"
#include "gibbsperc/models.hpp"
#include "gibbsperc/percolation.hpp"
#include "gibbsperc/sampler.hpp"

namespace gibbsperc {

/// Integer index of a cube centre z ∈ (1/m) Z^d.
struct CubeIndex {
  std::array<std::int64_t, kMaxDim> i{};
  int dim = 0;

  CubeIndex() = default;
  CubeIndex(std::initializer_list<std::int64_t> idx);
  explicit CubeIndex(int d) : dim(d) {}

  std::int64_t operator[](int a) const { return i[static_cast<std::size_t>(a)]; }
  std::int64_t& operator[](int a) { return i[static_cast<std::size_t>(a)]; }
  auto operator<=>(const CubeIndex&) const = default;
};

using CubeSet = std::vector<CubeIndex>;

/// The grid {Q_z : z ∈ (1/m)Z^d} of closed cubes of side 1/m with max-norm adjacency.
struct CubeLattice {
  int dim = 2;
  int m = 1;

  double side() const { return 1.0 / m; }
  Point center(const CubeIndex& z) const;
  Box cube(const CubeIndex& z) const;
  /// Cube whose centre is nearest to x (ties round half away from zero).
  CubeIndex containing(const Point& x) const;
  static bool neighbours(const CubeIndex& a, const CubeIndex& b);
  /// Throws std::invalid_argument unless m > √d / (R − r).
  void validate(double r, double R) const;
};

/// Smallest integer strictly greater than √d / (R − r). Values within 1e-12
/// (relative) of an integer are treated as that integer. Throws for R <= r.
int choose_m(int d, double r, double R);

/// c = 1 / (2 α_d (r + 3√d/(2m))^d m^d).
double separation_constant(int d, int m, double r);

/// Greedy exclusion: repeatedly keep the lexicographically smallest remaining
/// centre and drop every centre within r + √d/m of it.
CubeSet greedy_separated(const CubeSet& s, double r, int m);

/// Exact check that dist(Q_z, Q_z') >= r for all distinct pairs.
bool pairwise_separated(const CubeSet& s, double r, int m);

// --- loops (d = 2) ----------------------------------------------------------------

using Cell = std::array<std::int64_t, 2>;

/// Exactly-two-neighbours and connectedness under max-norm adjacency.
bool is_loop(std::span<const Cell> cells);
/// Whether the origin lies in the closed convex hull of the cells.
bool surrounds_origin(std::span<const Cell> cells);
/// Number of integer points in the closed convex hull of the cells.
std::int64_t hull_lattice_points(std::span<const Cell> cells);

/// (2k+1)^d 2^{d(k-1)}.
double loop_count_bound(int d, int k);

struct LoopEnumeration {
  int k = 0;
  /// Loops around the origin of length k.
  std::uint64_t count = 0;
  /// Loops counted up to translation.
  std::uint64_t shapes = 0;
  double bound = 0.0;
  /// Ordered cycles around the origin; filled only when requested.
  std::vector<std::vector<Cell>> loops;
};

inline constexpr int kDefaultLoopCap = 14;

/// Exhaustive count of loops around the origin of length k in d = 2. Throws
/// std::invalid_argument for k above `cap`. The count does not depend on m.
LoopEnumeration enumerate_loops(int k, bool collect = false, int cap = kDefaultLoopCap,
                                Exec exec = Exec::parallel);

struct TailSum {
  bool converges = false;
  /// q = 2^d (βδ/m^d)^{-c}.
  double q = 0.0;
  /// Σ_{k >= k_min} (2k+1)^d 2^{d(k-1)} (βδ/m^d)^{-ck}; NaN when divergent.
  double value = 0.0;
  double log_value = 0.0;
};

/// Loop-sum with x = βδ/m^d given in log2 form (x may be astronomically large).
TailSum loop_tail_sum_log2(int d, double log2_x, double c, int k_min = 1);
TailSum loop_tail_sum(int d, int m, double beta, double delta, double c, int k_min = 1);

struct KeyLemmaReport {
  std::size_t n_reps = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  double p_std_error = 0.0;
  Window window;
  double c = 0.0;
  double delta = 0.0;
  bool bound_applicable = false;
  /// (βδ/m^d)^{-c|S|} when applicable, else 1.
  double bound = 1.0;
  /// Poisson only: exp(−β |(∪Q_z) ⊕ B_r|).
  std::optional<double> void_probability;
  double void_std_error = 0.0;
  double dilated_volume = 0.0;
};

struct KeyLemmaOptions {
  SamplerOptions sampler{SamplerKind::cftp};
  std::uint64_t volume_nodes = 1'000'000;
  /// Overrides the model's own (r, δ) when set.
  std::optional<double> delta;
};

/// Empirical P(dist(Ξ, ∪_{z∈S} Q_z) >= r) on a window padding S by r + √d/m,
/// with the bound and (for Poisson) the exact void probability alongside.
KeyLemmaReport check_key_lemma(const ModelSpec& model, const CubeSet& s,
                               const CubeLattice& lattice, double r, std::size_t n_reps,
                               std::uint64_t seed, const KeyLemmaOptions& options = {},
                               Exec exec = Exec::parallel);

/// Breadth-first search over cubes Q with dist(Q, ξ) >= r from the cube of x to
/// the cube of x2, restricted to cubes meeting the window. Planar only. Throws
/// std::invalid_argument if x or x2 lies inside Z_R(ξ).
std::optional<CubeSet> separating_chain(const BooleanModel& bm, const CubeLattice& lattice,
                                        double r, const Point& x, const Point& x2);

}  // namespace gibbsperc
