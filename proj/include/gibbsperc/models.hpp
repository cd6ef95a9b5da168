#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gibbsperc/geometry.hpp"

namespace gibbsperc {

/// Right-continuous radial step function phi(rho) = values[i] on
/// [breaks[i], breaks[i+1]), values.back() beyond breaks.back().
/// The tail value must be 1 so the interaction has finite range.
class StepFunction {
public:
  StepFunction() = default;
  StepFunction(std::vector<double> breaks, std::vector<double> values);

  double operator()(double rho) const;
  /// Distance beyond which phi == 1.
  double range() const { return range_; }
  double sup() const;
  /// Infimum of phi over [a, b); +infinity for an empty interval.
  double inf_on(double a, double b) const;
  double sup_on(double a, double b) const;
  /// Largest h with phi == 0 on [0, h).
  double hard_core() const;

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

private:
  std::vector<double> breaks_;
  std::vector<double> values_;
  double range_ = 0.0;
};

/// Which sufficient condition for condition (P) a pairwise model declares:
/// attractive_beyond_r means phi >= 1 beyond r; bounded_hard_core means
/// phi = 0 below r, phi >= delta_tilde on [r, r_max) and phi >= 1 beyond.
enum class PairClass { none, attractive_beyond_r, bounded_hard_core };

struct PairwiseParams {
  std::string family;
  StepFunction phi;
  PairClass declared = PairClass::none;
  double r = 0.0;
  double r_max = 0.0;
  double delta_tilde = 1.0;
};

enum class AreaMethod { exact, qmc };

struct AreaParams {
  double gamma = 1.0;
  double r0 = 1.0;
  AreaMethod method = AreaMethod::exact;
  /// Low-discrepancy nodes in the unit ball; only used by AreaMethod::qmc.
  std::shared_ptr<const std::vector<Point>> pattern;
};

struct PoissonParams {};

enum class ModelKind { poisson, pairwise, area_interaction };

/// A Gibbs model given by its activity and reduced conditional intensity.
/// Immutable; safe to share between threads.
class ModelSpec {
public:
  static ModelSpec poisson(int dim, double beta);
  static ModelSpec hard_core(int dim, double beta, double r);
  static ModelSpec strauss_hard_core(int dim, double beta, double r, double r_max,
                                     double delta_tilde);
  /// phi >= 1 beyond r is checked against the table.
  static ModelSpec attractive_tail(int dim, double beta, double r, StepFunction phi);
  /// User table with a declared class; the declaration is verified.
  static ModelSpec pairwise_table(int dim, double beta, StepFunction phi, PairClass declared,
                                  double r = 0.0, double r_max = 0.0);
  /// `method` defaults to exact geometry in d = 2, 3 and QMC otherwise.
  static ModelSpec area_interaction(int dim, double beta, double gamma, double r0,
                                    std::optional<AreaMethod> method = std::nullopt,
                                    int qmc_nodes = 4096);

  ModelKind kind() const;
  int dim() const { return dim_; }
  double beta() const { return beta_; }
  ModelSpec with_beta(double beta) const;
  /// Interaction range: points farther than this from x do not affect λ(x|.).
  double reach() const;
  /// Hard-core distance (0 when there is none).
  double hard_core() const;
  std::string name() const;

  const PairwiseParams* pairwise() const { return std::get_if<PairwiseParams>(&params_); }
  const AreaParams* area() const { return std::get_if<AreaParams>(&params_); }

private:
  ModelSpec(int dim, double beta, std::variant<PoissonParams, PairwiseParams, AreaParams> p);

  int dim_ = 2;
  double beta_ = 1.0;
  std::variant<PoissonParams, PairwiseParams, AreaParams> params_;
};

/// Halton points inside the unit ball of R^d.
std::vector<Point> ball_pattern(int dim, int n_nodes);

/// |B_r0(x) \ U_{y in ys} B_r0(y)| for the area-interaction model.
double uncovered_area(const ModelSpec& model, const Point& x, std::span<const Point> xi,
                      std::span<const Point> omega = {});

/// Exact planar version: area of the disc of radius r at x not covered by
/// discs of radius r at ys (Green's theorem on the boundary arcs).
double uncovered_area_exact_2d(const Point& x, std::span<const Point> ys, double r);

/// d = 3: Gauss-Legendre over z of the exact planar slice areas, split at every
/// height where the slice arrangement changes, so the result is accurate to
/// rounding and does not depend on the order of ys.
double uncovered_volume_exact_3d(const Point& x, std::span<const Point> ys, double r);

/// λ̃(x | xi ∪ omega). Throws std::invalid_argument when x is a point of xi ∪ omega.
double reduced_intensity(const ModelSpec& model, const Point& x, std::span<const Point> xi,
                         std::span<const Point> omega = {});

/// λ(x | xi ∪ omega) = β λ̃(x | xi ∪ omega).
double conditional_intensity(const ModelSpec& model, const Point& x,
                             std::span<const Point> xi, std::span<const Point> omega = {});

/// Unnormalized density u_{Λ,ω}(xi), built by inserting xi's points in order.
double weight(const ModelSpec& model, std::span<const Point> xi,
              std::span<const Point> omega = {});

/// Bounds on λ(x | ξ ∪ ω) over all ξ with lower ⊆ ξ ⊆ lower ∪ extra. Both
/// spans may include boundary points in `lower`.
struct IntensityBounds {
  double lo = 0.0;
  double hi = 0.0;
};
IntensityBounds sandwich_bounds(const ModelSpec& model, const Point& x,
                                std::span<const Point> lower, std::span<const Point> extra);

struct ConditionP {
  double r = 0.0;
  double delta = 0.0;
  /// True when the bound holds for every r > 0 (then `r` echoes the request).
  bool any_r = false;
};

/// Analytic (r, δ) for the supported families. `separation` is used for
/// models that satisfy the condition for every r. Throws std::domain_error for
/// undeclared pairwise tables.
ConditionP derive_condition_p(const ModelSpec& model,
                              std::optional<double> separation = std::nullopt);

/// floor(((radius + core) / (core / 2))^d): upper bound on the number of
/// points, pairwise at least `core` apart, within `radius` of a fixed point.
std::int64_t packing_bound(int d, double core, double radius);

struct ConditionPReport {
  bool pass = true;
  double worst = 0.0;
  std::size_t trials = 0;
  /// Counterexample for a failed check: x and ξ with dist(x, ξ) >= r and λ̃ < δ.
  std::optional<std::pair<Point, std::vector<Point>>> witness;
  std::optional<ConditionP> analytic;
};

/// Randomized falsification of λ̃(x|ξ) >= δ over admissible ξ with dist(x, ξ) >= r.
ConditionPReport check_condition_p(const ModelSpec& model, double r, double delta,
                                   std::size_t trials, std::uint64_t seed);

/// K with c* = β K, or nullopt when the model is not locally stable.
std::optional<double> stability_factor(const ModelSpec& model);
/// c* = β K, or nullopt when the model is not locally stable.
std::optional<double> local_stability_constant(const ModelSpec& model);

struct BetaPlus {
  double c = 0.0;
  double log2_beta_plus = 0.0;
  /// +infinity when it does not fit in a double.
  double beta_plus = 0.0;
  /// beta_plus > 1e300.
  bool astronomical = false;
};

/// c = 1 / (2 α_d (r + 3√d/(2m))^d m^d) and β₊ = (2^{1/c} m)^d / δ, the
/// latter carried in log2 form.
BetaPlus compute_beta_plus(int d, int m, double r, double delta);
/// log2 of (2^{1/c} m)^d / δ for a given separation constant c.
double log2_beta_plus(int d, int m, double c, double delta);

/// Largest activity whose stability constant stays below the Poisson critical
/// intensity: λ_c / K. Throws std::domain_error for non-locally-stable models.
double compute_beta_minus(const ModelSpec& model, double poisson_critical);

}  // namespace gibbsperc
