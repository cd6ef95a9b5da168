#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace gibbsperc::cli {
namespace {

std::string at(const YAML::Node& node, const std::string& field) {
  return "line " + std::to_string(node.Mark().line + 1) + ": field '" + field + "'";
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) {
  throw ConfigError(at(node, field) + ": " + what);
}

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, std::string("expected ") + type_name<T>());
  try {
    T v = node.as<T>();
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(v)) fail(node, field, "must be finite");
    }
    return v;
  } catch (const YAML::Exception&) {
    fail(node, field, std::string("expected ") + type_name<T>() + ", got '" + node.Scalar() + "'");
  }
}

template <class T>
std::vector<T> scalar_list(const YAML::Node& node, const std::string& field) {
  std::vector<T> out;
  if (node.IsScalar()) {
    out.push_back(scalar<T>(node, field));
  } else if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(scalar<T>(node[i], field + "[" + std::to_string(i) + "]"));
    }
  } else {
    fail(node, field, "expected a list");
  }
  return out;
}

double positive(const YAML::Node& node, const std::string& field) {
  double v = scalar<double>(node, field);
  if (!(v > 0.0)) fail(node, field, "must be > 0");
  return v;
}

double nonnegative(const YAML::Node& node, const std::string& field) {
  double v = scalar<double>(node, field);
  if (v < 0.0) fail(node, field, "must be >= 0");
  return v;
}

std::size_t count(const YAML::Node& node, const std::string& field, long long min) {
  long long v = scalar<long long>(node, field);
  if (v < min) fail(node, field, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

void check_keys(const YAML::Node& node, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(node, section, "expected a mapping");
  for (const auto& kv : node) {
    auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) fail(kv.first, section + "." + key, "unknown key");
  }
}

Point point(const YAML::Node& node, const std::string& field, int dim) {
  auto c = scalar_list<double>(node, field);
  if (static_cast<int>(c.size()) != dim) {
    fail(node, field, "expected " + std::to_string(dim) + " coordinates");
  }
  return Point::from_span(c);
}

void parse_model(const YAML::Node& n, ModelConfig& m) {
  check_keys(n, "model", {"name", "dim", "beta", "r", "r_max", "delta_tilde", "gamma", "r0",
                          "breaks", "values", "class", "area_method", "qmc_nodes"});
  if (n["name"]) m.name = scalar<std::string>(n["name"], "model.name");
  if (n["dim"]) {
    m.dim = static_cast<int>(count(n["dim"], "model.dim", 2));
    if (m.dim > kMaxDim) fail(n["dim"], "model.dim", "must be <= " + std::to_string(kMaxDim));
  }
  if (n["beta"]) m.beta = nonnegative(n["beta"], "model.beta");
  if (n["r"]) m.r = nonnegative(n["r"], "model.r");
  if (n["r_max"]) m.r_max = nonnegative(n["r_max"], "model.r_max");
  if (n["delta_tilde"]) m.delta_tilde = positive(n["delta_tilde"], "model.delta_tilde");
  if (n["gamma"]) m.gamma = positive(n["gamma"], "model.gamma");
  if (n["r0"]) m.r0 = positive(n["r0"], "model.r0");
  if (n["breaks"]) m.breaks = scalar_list<double>(n["breaks"], "model.breaks");
  if (n["values"]) m.values = scalar_list<double>(n["values"], "model.values");
  if (n["class"]) m.table_class = scalar<std::string>(n["class"], "model.class");
  if (n["area_method"]) {
    m.area_method = scalar<std::string>(n["area_method"], "model.area_method");
    if (m.area_method != "exact" && m.area_method != "qmc") {
      fail(n["area_method"], "model.area_method", "expected exact or qmc");
    }
  }
  if (n["qmc_nodes"]) m.qmc_nodes = static_cast<int>(count(n["qmc_nodes"], "model.qmc_nodes", 1));
}

void parse_percolation(const YAML::Node& n, PercolationConfig& p) {
  check_keys(n, "percolation",
             {"R", "L", "betas", "n_reps", "axis", "poisson_critical", "bisection"});
  if (n["R"]) p.R = positive(n["R"], "percolation.R");
  if (n["L"]) {
    p.L = scalar_list<double>(n["L"], "percolation.L");
    for (double L : p.L) {
      if (!(L > 0.0)) fail(n["L"], "percolation.L", "window sizes must be > 0");
    }
  }
  if (n["betas"]) {
    p.betas = scalar_list<double>(n["betas"], "percolation.betas");
    for (double b : p.betas) {
      if (b < 0.0) fail(n["betas"], "percolation.betas", "activities must be >= 0");
    }
  }
  if (n["n_reps"]) p.n_reps = count(n["n_reps"], "percolation.n_reps", 1);
  if (n["axis"]) {
    if (n["axis"].IsScalar() && n["axis"].Scalar() == "all") {
      p.axis = kAllAxes;
    } else {
      p.axis = static_cast<int>(count(n["axis"], "percolation.axis", 0));
    }
  }
  if (n["poisson_critical"]) {
    p.poisson_critical = positive(n["poisson_critical"], "percolation.poisson_critical");
  }
  if (const auto b = n["bisection"]) {
    check_keys(b, "percolation.bisection",
               {"lo", "hi", "tol", "n_reps", "max_iter", "rel_width", "max_expand"});
    auto& o = p.bisection;
    if (b["lo"]) o.lo = positive(b["lo"], "percolation.bisection.lo");
    if (b["hi"]) o.hi = positive(b["hi"], "percolation.bisection.hi");
    if (b["tol"]) o.tol = positive(b["tol"], "percolation.bisection.tol");
    if (b["n_reps"]) o.n_reps = count(b["n_reps"], "percolation.bisection.n_reps", 1);
    if (b["max_iter"]) {
      o.max_iter = static_cast<int>(count(b["max_iter"], "percolation.bisection.max_iter", 1));
    }
    if (b["rel_width"]) o.rel_width = positive(b["rel_width"], "percolation.bisection.rel_width");
    if (b["max_expand"]) {
      o.max_expand = static_cast<int>(count(b["max_expand"], "percolation.bisection.max_expand", 0));
    }
    if (o.lo > 0.0 && o.hi > 0.0 && o.lo >= o.hi) {
      fail(b, "percolation.bisection", "lo must be below hi");
    }
  }
}

void parse_sampler(const YAML::Node& n, SamplerOptions& s) {
  check_keys(n, "sampler", {"kind", "mcmc_steps", "cftp_max_epochs"});
  if (n["kind"]) {
    auto kind = scalar<std::string>(n["kind"], "sampler.kind");
    try {
      s.kind = parse_sampler_kind(kind);
    } catch (const std::exception&) {
      fail(n["kind"], "sampler.kind", "expected mcmc, cftp or exact-poisson");
    }
  }
  if (n["mcmc_steps"]) s.mcmc_steps = count(n["mcmc_steps"], "sampler.mcmc_steps", 0);
  if (n["cftp_max_epochs"]) {
    s.cftp_max_epochs = static_cast<int>(count(n["cftp_max_epochs"], "sampler.cftp_max_epochs", 1));
  }
}

void parse_contour(const YAML::Node& n, ContourConfig& c, int dim) {
  check_keys(n, "contour", {"r", "m", "k_max", "n_reps", "cubes", "random_sets", "max_cubes",
                            "delta", "beta", "condition_trials", "volume_nodes"});
  c.enabled = true;
  if (!n["r"]) fail(n, "contour.r", "required");
  c.r = positive(n["r"], "contour.r");
  if (n["m"]) c.m = static_cast<int>(count(n["m"], "contour.m", 1));
  if (n["k_max"]) c.k_max = static_cast<int>(count(n["k_max"], "contour.k_max", 1));
  if (n["n_reps"]) c.n_reps = count(n["n_reps"], "contour.n_reps", 1);
  if (const auto cubes = n["cubes"]) {
    if (!cubes.IsSequence()) fail(cubes, "contour.cubes", "expected a list of index tuples");
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      auto field = "contour.cubes[" + std::to_string(i) + "]";
      auto idx = scalar_list<long long>(cubes[i], field);
      if (static_cast<int>(idx.size()) != dim) {
        fail(cubes[i], field, "expected " + std::to_string(dim) + " indices");
      }
      CubeIndex z(dim);
      for (int a = 0; a < dim; ++a) z[a] = idx[static_cast<std::size_t>(a)];
      c.cubes.push_back(z);
    }
  }
  if (n["random_sets"]) c.random_sets = count(n["random_sets"], "contour.random_sets", 0);
  if (n["max_cubes"]) c.max_cubes = count(n["max_cubes"], "contour.max_cubes", 1);
  if (n["delta"]) c.delta = positive(n["delta"], "contour.delta");
  if (n["beta"]) c.beta = nonnegative(n["beta"], "contour.beta");
  if (n["condition_trials"]) c.condition_trials = count(n["condition_trials"], "contour.condition_trials", 1);
  if (n["volume_nodes"]) c.volume_nodes = count(n["volume_nodes"], "contour.volume_nodes", 1);
}

void parse_render(const YAML::Node& n, RenderConfig& r, int dim) {
  check_keys(n, "render", {"L", "pixels", "r_circles", "grid", "chain", "from", "to"});
  if (n["L"]) r.L = positive(n["L"], "render.L");
  if (n["pixels"]) r.pixels = positive(n["pixels"], "render.pixels");
  if (n["r_circles"]) r.r_circles = scalar<bool>(n["r_circles"], "render.r_circles");
  if (n["grid"]) r.grid = scalar<bool>(n["grid"], "render.grid");
  if (n["chain"]) r.chain = scalar<bool>(n["chain"], "render.chain");
  if (n["from"]) r.from = point(n["from"], "render.from", dim);
  if (n["to"]) r.to = point(n["to"], "render.to", dim);
}

void parse_output(const YAML::Node& n, OutputConfig& o) {
  check_keys(n, "output", {"dir", "name"});
  if (n["dir"]) o.dir = scalar<std::string>(n["dir"], "output.dir");
  if (n["name"]) {
    o.name = scalar<std::string>(n["name"], "output.name");
    if (o.name.empty() || o.name.find('/') != std::string::npos) {
      fail(n["name"], "output.name", "must be a plain file stem");
    }
  }
}

PairClass parse_class(const std::string& s) {
  if (s == "attractive") return PairClass::attractive_beyond_r;
  if (s == "bounded-hard-core") return PairClass::bounded_hard_core;
  if (s.empty() || s == "none") return PairClass::none;
  throw std::invalid_argument("class must be attractive, bounded-hard-core or none");
}

nlohmann::json point_json(const std::optional<Point>& p) {
  if (!p) return nullptr;
  return std::vector<double>(p->coords().begin(), p->coords().end());
}

}  // namespace

ModelSpec ExperimentConfig::build_model(std::optional<double> beta) const {
  const auto& m = model;
  double b = beta.value_or(m.beta);
  if (m.name == "poisson") return ModelSpec::poisson(m.dim, b);
  if (m.name == "hard-core") return ModelSpec::hard_core(m.dim, b, m.r);
  if (m.name == "strauss-hard-core") {
    return ModelSpec::strauss_hard_core(m.dim, b, m.r, m.r_max, m.delta_tilde);
  }
  if (m.name == "attractive-tail") {
    return ModelSpec::attractive_tail(m.dim, b, m.r, StepFunction(m.breaks, m.values));
  }
  if (m.name == "pairwise-table") {
    return ModelSpec::pairwise_table(m.dim, b, StepFunction(m.breaks, m.values),
                                     parse_class(m.table_class), m.r, m.r_max);
  }
  if (m.name == "area-interaction") {
    std::optional<AreaMethod> method;
    if (m.area_method == "exact") method = AreaMethod::exact;
    if (m.area_method == "qmc") method = AreaMethod::qmc;
    return ModelSpec::area_interaction(m.dim, b, m.gamma, m.r0, method, m.qmc_nodes);
  }
  throw std::invalid_argument("unknown model '" + m.name +
                              "' (poisson, hard-core, strauss-hard-core, attractive-tail, "
                              "pairwise-table, area-interaction)");
}

int ExperimentConfig::lattice_m() const {
  if (contour.m > 0) return contour.m;
  return choose_m(model.dim, contour.r, percolation.R);
}

nlohmann::json ExperimentConfig::canonical() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["model"] = {{"name", model.name},       {"dim", model.dim},
                {"beta", model.beta},       {"r", model.r},
                {"r_max", model.r_max},     {"delta_tilde", model.delta_tilde},
                {"gamma", model.gamma},     {"r0", model.r0},
                {"breaks", model.breaks},   {"values", model.values},
                {"class", model.table_class}, {"area_method", model.area_method},
                {"qmc_nodes", model.qmc_nodes}};
  const auto& b = percolation.bisection;
  j["percolation"] = {
      {"R", percolation.R},
      {"L", percolation.L},
      {"betas", percolation.betas},
      {"n_reps", percolation.n_reps},
      {"axis", percolation.axis},
      {"poisson_critical", percolation.poisson_critical ? nlohmann::json(*percolation.poisson_critical)
                                                        : nlohmann::json(nullptr)},
      {"bisection",
       {{"lo", b.lo}, {"hi", b.hi}, {"tol", b.tol}, {"n_reps", b.n_reps},
        {"max_iter", b.max_iter}, {"rel_width", b.rel_width}, {"max_expand", b.max_expand}}}};
  j["sampler"] = {{"kind", to_string(sampler.kind)},
                  {"mcmc_steps", sampler.mcmc_steps},
                  {"cftp_max_epochs", sampler.cftp_max_epochs}};
  if (contour.enabled) {
    std::vector<std::vector<std::int64_t>> cubes;
    for (const auto& z : contour.cubes) {
      cubes.emplace_back(z.i.begin(), z.i.begin() + z.dim);
    }
    j["contour"] = {{"r", contour.r},
                    {"m", contour.m},
                    {"k_max", contour.k_max},
                    {"n_reps", contour.n_reps},
                    {"cubes", cubes},
                    {"random_sets", contour.random_sets},
                    {"max_cubes", contour.max_cubes},
                    {"delta", contour.delta ? nlohmann::json(*contour.delta) : nlohmann::json(nullptr)},
                    {"beta", contour.beta ? nlohmann::json(*contour.beta) : nlohmann::json(nullptr)},
                    {"condition_trials", contour.condition_trials},
                    {"volume_nodes", contour.volume_nodes}};
  } else {
    j["contour"] = nullptr;
  }
  j["render"] = {{"L", render.L},       {"pixels", render.pixels},
                 {"r_circles", render.r_circles}, {"grid", render.grid},
                 {"chain", render.chain}, {"from", point_json(render.from)},
                 {"to", point_json(render.to)}};
  j["output"] = {{"name", output.name}};
  return j;
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) throw ConfigError("line 1: empty configuration");
  check_keys(root, "config",
             {"seed", "model", "percolation", "sampler", "contour", "render", "output"});
  for (const auto& section : root) {
    const auto name = section.first.as<std::string>();
    c.lines[name] = section.first.Mark().line + 1;
    if (!section.second.IsMap()) continue;
    for (const auto& kv : section.second) {
      c.lines[name + "." + kv.first.as<std::string>()] = kv.first.Mark().line + 1;
    }
  }
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["model"]) parse_model(root["model"], c.model);
  if (root["percolation"]) parse_percolation(root["percolation"], c.percolation);
  if (root["sampler"]) parse_sampler(root["sampler"], c.sampler);
  if (root["contour"]) parse_contour(root["contour"], c.contour, c.model.dim);
  if (root["render"]) parse_render(root["render"], c.render, c.model.dim);
  if (root["output"]) parse_output(root["output"], c.output);

  const YAML::Node model_node = root["model"] ? root["model"] : root;
  try {
    auto model = c.build_model();
    if (c.percolation.axis != kAllAxes && c.percolation.axis >= c.model.dim) {
      fail(root["percolation"]["axis"], "percolation.axis", "must be below model.dim");
    }
    if (c.sampler.kind == SamplerKind::exact_poisson && model.kind() != ModelKind::poisson) {
      fail(root["sampler"]["kind"], "sampler.kind", "exact-poisson requires the poisson model");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(model_node, "model", e.what());
  }
  if (c.contour.enabled) {
    const auto cn = root["contour"];
    if (!(c.percolation.R > c.contour.r)) {
      fail(cn["r"], "contour.r", "contour diagnostics need percolation.R > contour.r");
    }
    if (c.contour.m > 0) {
      try {
        CubeLattice{c.model.dim, c.contour.m}.validate(c.contour.r, c.percolation.R);
      } catch (const std::exception& e) {
        fail(cn["m"], "contour.m", e.what());
      }
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate_for(const ExperimentConfig& c, Verb verb) {
  auto fail_at = [&](const std::string& field, const std::string& what) {
    std::string where;
    for (auto key = field;; key = key.substr(0, key.rfind('.'))) {
      if (auto it = c.lines.find(key); it != c.lines.end()) {
        where = "line " + std::to_string(it->second) + ": ";
        break;
      }
      if (key.find('.') == std::string::npos) break;
    }
    throw ConfigError(where + "field '" + field + "': " + what);
  };
  switch (verb) {
    case Verb::sweep:
      if (c.percolation.betas.empty()) fail_at("percolation.betas", "empty beta grid");
      [[fallthrough]];
    case Verb::bisect:
      if (!(c.percolation.R > 0.0)) fail_at("percolation.R", "required and > 0");
      if (c.percolation.L.empty()) fail_at("percolation.L", "at least one window size");
      break;
    case Verb::check_bounds:
      if (!c.contour.enabled) fail_at("contour", "section required for check-bounds");
      break;
    case Verb::render:
      if (c.model.dim != 2) {
        fail_at("model.dim", "render draws planar scenes only; for d >= 3 use the slice "
                             "diagnostic (slice_clusters) on a planar section");
      }
      if (!(c.percolation.R > 0.0)) fail_at("percolation.R", "required and > 0");
      break;
    case Verb::sample:
    case Verb::report:
      break;
  }
}

}  // namespace gibbsperc::cli
