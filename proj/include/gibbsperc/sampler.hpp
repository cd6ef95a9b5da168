#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbsperc/geometry.hpp"
#include "gibbsperc/models.hpp"
#include "gibbsperc/random.hpp"

namespace gibbsperc {

/// Raised when a sampler cannot deliver a valid draw (e.g. CFTP without coalescence).
class SamplerFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class SamplerKind { exact_poisson, mcmc, cftp };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& s);

/// Poisson process of intensity beta on the window.
Configuration sample_poisson(double beta, const Window& window, Rng& rng);
Configuration sample_poisson(double beta, const Window& window, std::uint64_t seed);

/// Boundary points within interaction range of the window; the rest cannot
/// influence any conditional intensity inside it.
std::vector<Point> prune_boundary(const ModelSpec& model, const Window& window,
                                  std::span<const Point> omega);

/// 10^4 |Λ| max(β, 1).
std::uint64_t default_burn_in(const ModelSpec& model, const Window& window);

/// Hastings ratio of adding x to xi: λ(x|ξ∪ω)|Λ| / (n+1).
double birth_ratio(const ModelSpec& model, const Point& x, std::span<const Point> xi,
                   std::span<const Point> omega, double volume);
/// Hastings ratio of removing y from rest ∪ {y}: (n) / (λ(y|rest∪ω)|Λ|), n = |rest| + 1.
double death_ratio(const ModelSpec& model, const Point& y, std::span<const Point> rest,
                   std::span<const Point> omega, double volume);

/// Birth–death Metropolis–Hastings chain targeting the local specification
/// on `window` with boundary condition `omega`. Starts from the empty state.
class BirthDeathChain {
public:
  BirthDeathChain(ModelSpec model, Window window, std::span<const Point> omega,
                  std::uint64_t seed);

  void step();
  void run(std::uint64_t n_steps);

  std::span<const Point> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::uint64_t step_count() const { return steps_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const Point> omega() const { return omega_; }
  const Window& window() const { return window_; }
  Configuration configuration() const { return {window_, points_}; }

  std::uint64_t births_proposed() const { return births_proposed_; }
  std::uint64_t births_accepted() const { return births_accepted_; }
  std::uint64_t deaths_proposed() const { return deaths_proposed_; }
  std::uint64_t deaths_accepted() const { return deaths_accepted_; }

private:
  ModelSpec model_;
  Window window_;
  double volume_;
  std::vector<Point> omega_;
  std::vector<Point> points_;
  std::uint64_t seed_;
  Rng rng_;
  std::uint64_t steps_ = 0;
  std::uint64_t births_proposed_ = 0;
  std::uint64_t births_accepted_ = 0;
  std::uint64_t deaths_proposed_ = 0;
  std::uint64_t deaths_accepted_ = 0;
};

/// State of a birth–death chain after n_steps from the empty configuration.
Configuration mcmc_sample(const ModelSpec& model, const Window& window,
                          std::span<const Point> omega, std::uint64_t n_steps,
                          std::uint64_t seed);

/// Result of dominated coupling from the past. `retained` ⊆ `dominating`.
struct DominatedRun {
  Configuration dominating;
  Configuration retained;
  bool coalesced = false;
  /// -T of the last epoch tried.
  std::int64_t start_time = 0;
  int epochs = 0;
  /// Indices into dominating.points of the retained points.
  std::vector<std::size_t> retained_index;
};

/// Dominated CFTP with a Poisson(c*) dominating birth–death process and
/// upper/lower sandwich processes started at -1, -2, -4, ... Requires a locally
/// stable model (std::domain_error otherwise). A run that does not coalesce
/// within max_epochs is returned with coalesced == false.
DominatedRun cftp_sample(const ModelSpec& model, const Window& window,
                         std::span<const Point> omega, std::uint64_t seed, int max_epochs = 16);

struct PartitionEstimate {
  double c_hat = 0.0;
  double c_std_error = 0.0;
  /// terms[k] = (1/k!) ∫ u(x_1..x_k) dx, k = 0..k_max.
  std::vector<double> terms;
  std::vector<double> term_std_error;
  bool exact = false;
};

/// Thrown when the last term of the ladder is not negligible.
class PartitionNotConverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Truncated series for the partition function; Monte Carlo over uniform
/// k-tuples, exact for the Poisson model.
PartitionEstimate estimate_partition(const ModelSpec& model, const Window& window,
                                     std::span<const Point> omega, int k_max,
                                     std::uint64_t n_nodes, std::uint64_t seed,
                                     Exec exec = Exec::parallel);

struct SamplerOptions {
  SamplerKind kind = SamplerKind::cftp;
  /// MCMC steps; 0 means default_burn_in.
  std::uint64_t mcmc_steps = 0;
  int cftp_max_epochs = 16;
};

/// One draw from the local specification with the chosen sampler. Throws
/// SamplerFailure when CFTP does not coalesce, std::invalid_argument for
/// exact_poisson on a non-Poisson model.
Configuration draw(const ModelSpec& model, const Window& window, std::span<const Point> omega,
                   const SamplerOptions& options, std::uint64_t seed);

}  // namespace gibbsperc
