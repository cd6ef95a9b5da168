#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gibbsperc/geometry.hpp"
#include "gibbsperc/models.hpp"
#include "gibbsperc/sampler.hpp"

namespace gibbsperc {

/// Union of open balls of radius R around the configuration's points.
struct BooleanModel {
  Configuration config;
  double radius = 0.0;
};

/// Crossing "axis" value meaning: every axis must be crossed.
inline constexpr int kAllAxes = -1;

struct ClusterLabels {
  /// Cluster id per point; ids are 0..count()-1 in order of first appearance.
  std::vector<std::size_t> label;
  std::vector<std::size_t> sizes;
  /// Overlap pairs that joined two different clusters; count() + merging_edges == n.
  std::size_t merging_edges = 0;
  /// crossing[a]: some cluster comes within R of both faces normal to axis a.
  std::vector<bool> crossing;

  std::size_t count() const { return sizes.size(); }
};

class DisjointSets {
public:
  explicit DisjointSets(std::size_t n);
  std::size_t find(std::size_t x);
  /// Returns true when x and y were in different sets.
  bool unite(std::size_t x, std::size_t y);

private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

/// Clusters under ‖x−y‖ < 2R using a uniform grid of cell side 2R. The parallel
/// variant splits the neighbour search across threads and produces the same labels.
ClusterLabels label_clusters(const BooleanModel& bm, Exec exec = Exec::serial);

/// O(n²) pair scan; serial reference for label_clusters.
ClusterLabels label_clusters_reference(const BooleanModel& bm);

/// Whether some cluster touches both window faces along `axis` (kAllAxes: every axis).
bool crossing(const BooleanModel& bm, int axis);
bool crossing(const ClusterLabels& labels, int axis);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct PercEstimate {
  double beta = 0.0;
  double L = 0.0;
  std::size_t n_reps = 0;
  std::size_t successes = 0;
  double fraction = 0.0;
  /// 95% normal-approximation half width.
  double ci_halfwidth = 0.0;
  Interval wilson;
  std::uint64_t seed = 0;
  /// L < 4R.
  bool small_window = false;
};

struct PercOptions {
  SamplerOptions sampler;
  int axis = 0;
  /// Boundary condition outside [0, L]^d.
  std::vector<Point> omega;
};

/// Fraction of n_reps independent draws on [0, L]^d whose Boolean model
/// crosses. Replication i uses derive_seed(seed, i), so serial and parallel
/// execution agree exactly.
PercEstimate perc_probability(const ModelSpec& model, double R, double L, std::size_t n_reps,
                              const PercOptions& options, std::uint64_t seed,
                              Exec exec = Exec::parallel);

class BracketFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct BisectionOptions {
  std::size_t n_reps = 400;
  /// Accept a probe whose crossing fraction is within 0.5 ± tol.
  double tol = 0.02;
  /// Initial bracket; non-positive values select 0.1 and 10 over α_d R^d.
  double lo = 0.0;
  double hi = 0.0;
  int max_iter = 30;
  /// Stop when the bracket is narrower than rel_width * midpoint.
  double rel_width = 1e-3;
  /// Halvings/doublings allowed while establishing the bracket.
  int max_expand = 3;
};

struct ThresholdEstimate {
  double L = 0.0;
  double beta_hat = 0.0;
  /// Largest probed β significantly below 0.5 and smallest significantly above.
  Interval ci;
  std::vector<PercEstimate> probes;
};

struct BetaCEstimate {
  std::vector<ThresholdEstimate> per_L;
  /// Intercept of a least-squares fit β̂(L) = a + b / L (β̂ itself for one L).
  double extrapolated = 0.0;
  double trend = 0.0;
};

/// Least-squares fit of β̂(L) = a + b / L over per_L; sets extrapolated = a, trend = b.
void fit_trend(BetaCEstimate& est);

/// Stochastic bisection for the β at which the crossing fraction is 1/2, for
/// each window size. Throws BracketFailure when the curve never straddles 1/2.
BetaCEstimate estimate_beta_c(const ModelSpec& model, double R, std::span<const double> L_list,
                              const BisectionOptions& bisection, const PercOptions& options,
                              std::uint64_t seed, Exec exec = Exec::parallel);

/// The planar trace of a d >= 3 Boolean model on the plane x_2 = ... = x_{d-1} = offset:
/// discs of radius sqrt(R² − h²) where h is the distance to the plane. Clusters
/// of the trace are returned with the corresponding 2-D window.
ClusterLabels slice_clusters(const BooleanModel& bm, double offset);

}  // namespace gibbsperc
