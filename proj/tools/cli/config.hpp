#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gibbsperc/contour.hpp"
#include "gibbsperc/models.hpp"
#include "gibbsperc/percolation.hpp"
#include "gibbsperc/sampler.hpp"

namespace gibbsperc::cli {

/// Invalid or inconsistent configuration; the message names the line and field.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string name = "poisson";
  int dim = 2;
  double beta = 1.0;
  double r = 0.0;
  double r_max = 0.0;
  double delta_tilde = 1.0;
  double gamma = 1.0;
  double r0 = 0.0;
  std::vector<double> breaks;
  std::vector<double> values;
  std::string table_class;
  std::string area_method;
  int qmc_nodes = 4096;
};

struct PercolationConfig {
  double R = 0.0;
  std::vector<double> L;
  std::vector<double> betas;
  std::size_t n_reps = 200;
  int axis = 0;
  BisectionOptions bisection;
  std::optional<double> poisson_critical;
};

struct ContourConfig {
  bool enabled = false;
  double r = 0.0;
  /// 0 selects choose_m(d, r, R).
  int m = 0;
  int k_max = kDefaultLoopCap;
  std::size_t n_reps = 2000;
  std::vector<CubeIndex> cubes;
  std::size_t random_sets = 0;
  std::size_t max_cubes = 4;
  std::optional<double> delta;
  std::optional<double> beta;
  std::size_t condition_trials = 2000;
  std::uint64_t volume_nodes = 1'000'000;
};

struct RenderConfig {
  double L = 2.0;
  double pixels = 600.0;
  bool r_circles = true;
  bool grid = true;
  bool chain = true;
  std::optional<Point> from;
  std::optional<Point> to;
};

struct OutputConfig {
  std::string dir = "results";
  /// File stem; defaults to the verb.
  std::string name;
};

struct ExperimentConfig {
  ModelConfig model;
  PercolationConfig percolation;
  SamplerOptions sampler;
  ContourConfig contour;
  RenderConfig render;
  OutputConfig output;
  std::uint64_t seed = 1;
  /// 1-based source line of every key seen, as "section.key".
  std::map<std::string, int> lines;

  /// The model at activity beta (the configured one when omitted).
  ModelSpec build_model(std::optional<double> beta = std::nullopt) const;
  int lattice_m() const;
  /// Every setting that influences results, in a stable key order.
  nlohmann::json canonical() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

enum class Verb { sweep, bisect, check_bounds, render, report, sample };

/// Verb-specific requirements, e.g. a non-empty β grid for sweep.
void validate_for(const ExperimentConfig& config, Verb verb);

}  // namespace gibbsperc::cli
