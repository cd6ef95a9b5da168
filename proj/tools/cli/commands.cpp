#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cli/io.hpp"
#include "cli/render.hpp"
#include "gibbsperc/random.hpp"

namespace gibbsperc::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kConditionStream = 0xC0;
constexpr std::uint64_t kCubeSetStream = 0xC5;
constexpr std::uint64_t kRenderStream = 0xD0;

std::string stem_for(const ExperimentConfig& c, const char* verb) {
  // Each verb gets its own files so runs sharing a name do not overwrite each other.
  return c.output.name.empty() ? verb : c.output.name + "." + verb;
}

json optional_json(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

/// (r, δ) and c* of the configured model, recorded in every manifest.
json model_summary(const ExperimentConfig& c) {
  const auto model = c.build_model();
  json j = {{"name", c.model.name}, {"dim", c.model.dim}, {"beta", c.model.beta}};
  if (c.model.name == "area-interaction") {
    j["gamma"] = c.model.gamma;
    j["r0"] = c.model.r0;
  } else if (c.model.name != "poisson") {
    j["r"] = c.model.r;
    if (c.model.r_max > 0.0) j["r_max"] = c.model.r_max;
    if (c.model.name == "strauss-hard-core") j["delta_tilde"] = c.model.delta_tilde;
  }
  std::optional<double> separation;
  if (c.contour.enabled) separation = c.contour.r;
  try {
    const auto cp = derive_condition_p(model, separation ? separation : std::optional<double>(1.0));
    j["condition_p"] = {{"r", cp.r}, {"delta", cp.delta}, {"any_r", cp.any_r}};
  } catch (const std::exception& e) {
    j["condition_p"] = {{"error", e.what()}};
  }
  j["stability_factor"] = optional_json(stability_factor(model));
  j["c_star"] = optional_json(local_stability_constant(model));
  return j;
}

Row estimate_row(const PercEstimate& e, double R, const std::string& model,
                 const std::string& hash) {
  return {std::to_string(e.seed),
          format_double(e.L),
          format_double(e.beta),
          std::to_string(e.n_reps),
          std::to_string(e.successes),
          format_double(e.fraction),
          format_double(e.ci_halfwidth),
          format_double(e.wilson.lo),
          format_double(e.wilson.hi),
          format_double(R),
          model,
          e.small_window ? "1" : "0",
          hash};
}

const Row kEstimateHeader = {"seed",      "L",         "beta",      "n_reps", "successes",
                             "fraction",  "ci_halfwidth", "wilson_lo", "wilson_hi", "R",
                             "model",     "small_window", "manifest"};

const Row kThresholdHeader = {"seed",  "L",     "beta",   "n_reps", "ci_lo", "ci_hi",
                              "probes", "R",    "model",  "manifest"};

const Row kKeyLemmaHeader = {"seed",  "L",        "beta",     "n_reps",   "set",
                             "cubes", "separated", "hits",    "p_hat",    "p_std_error",
                             "bound_applicable",  "bound",    "void_probability",
                             "void_std_error",    "dilated_volume", "manifest"};

PercOptions perc_options(const ExperimentConfig& c) {
  PercOptions o;
  o.sampler = c.sampler;
  o.axis = c.percolation.axis;
  return o;
}

std::string cubes_text(const CubeSet& s) {
  std::string out;
  for (const auto& z : s) {
    if (!out.empty()) out += ';';
    for (int a = 0; a < z.dim; ++a) {
      if (a) out += ':';
      out += std::to_string(z[a]);
    }
  }
  return out;
}

json cubes_json(const CubeSet& s) {
  json j = json::array();
  for (const auto& z : s) j.push_back(std::vector<std::int64_t>(z.i.begin(), z.i.begin() + z.dim));
  return j;
}

json point_json(const Point& p) { return std::vector<double>(p.coords().begin(), p.coords().end()); }

/// Random cube set of 1..max_cubes distinct cubes near the origin.
CubeSet random_cube_set(int dim, int m, std::size_t max_cubes, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = std::uniform_int_distribution<std::size_t>(1, max_cubes)(rng);
  const std::int64_t span = std::max(2, m / 2);
  std::uniform_int_distribution<std::int64_t> pick(-span, span);
  std::set<CubeIndex> s;
  while (s.size() < n) {
    CubeIndex z(dim);
    for (int a = 0; a < dim; ++a) z[a] = pick(rng);
    s.insert(z);
  }
  return {s.begin(), s.end()};
}

}  // namespace

void run_sweep(const ExperimentConfig& c, const fs::path& out) {
  validate_for(c, Verb::sweep);
  fs::create_directories(out);
  const auto stem = stem_for(c, "sweep");
  Manifest man("sweep", c.canonical(), out / (stem + ".manifest.json"));
  man.add_file(stem + ".csv");
  man.set_result({{"model", model_summary(c)}});
  man.save();
  DurableCsv csv(out / (stem + ".csv"), kEstimateHeader);
  const auto opts = perc_options(c);
  std::uint64_t cell = 0;
  for (double L : c.percolation.L) {
    for (double beta : c.percolation.betas) {
      const auto seed = derive_seed(c.seed, cell);
      const auto model = c.build_model(beta);
      const auto e = perc_probability(model, c.percolation.R, L, c.percolation.n_reps, opts, seed);
      csv.append(estimate_row(e, c.percolation.R, model.name(), man.hash()));
      man.add_task({{"cell", cell}, {"L", L}, {"beta", beta}, {"seed", seed}});
      man.save();
      ++cell;
    }
  }
  man.save(true);
}

void run_bisect(const ExperimentConfig& c, const fs::path& out) {
  validate_for(c, Verb::bisect);
  fs::create_directories(out);
  const auto stem = stem_for(c, "bisect");
  Manifest man("bisect", c.canonical(), out / (stem + ".manifest.json"));
  man.add_file(stem + ".csv");
  man.add_file(stem + ".thresholds.csv");
  json result = {{"model", model_summary(c)}};
  man.set_result(result);
  man.save();
  DurableCsv probes(out / (stem + ".csv"), kEstimateHeader);
  DurableCsv thresholds(out / (stem + ".thresholds.csv"), kThresholdHeader);

  auto L_list = c.percolation.L;
  std::sort(L_list.begin(), L_list.end());
  L_list.erase(std::unique(L_list.begin(), L_list.end()), L_list.end());
  const auto model = c.build_model();
  const auto opts = perc_options(c);
  BetaCEstimate all;
  for (std::size_t li = 0; li < L_list.size(); ++li) {
    const auto seed = derive_seed(c.seed, li);
    const double L = L_list[li];
    auto est = estimate_beta_c(model, c.percolation.R, std::span<const double>(&L, 1),
                               c.percolation.bisection, opts, seed);
    const auto& te = est.per_L.front();
    for (const auto& p : te.probes) {
      probes.append(estimate_row(p, c.percolation.R, model.name(), man.hash()));
    }
    thresholds.append({std::to_string(seed), format_double(L), format_double(te.beta_hat),
                       std::to_string(c.percolation.bisection.n_reps), format_double(te.ci.lo),
                       format_double(te.ci.hi), std::to_string(te.probes.size()),
                       format_double(c.percolation.R), model.name(), man.hash()});
    man.add_task({{"L", L}, {"seed", seed}, {"probes", te.probes.size()}});
    all.per_L.push_back(te);
    fit_trend(all);
    json per_L = json::array();
    for (const auto& t : all.per_L) {
      per_L.push_back({{"L", t.L}, {"beta_hat", t.beta_hat}, {"ci", {t.ci.lo, t.ci.hi}}});
    }
    result["thresholds"] = per_L;
    result["extrapolated"] = all.extrapolated;
    result["trend"] = all.trend;
    man.set_result(result);
    man.save();
  }
  man.save(true);
}

void run_check_bounds(const ExperimentConfig& c, const fs::path& out) {
  validate_for(c, Verb::check_bounds);
  fs::create_directories(out);
  const auto stem = stem_for(c, "check-bounds");
  Manifest man("check-bounds", c.canonical(), out / (stem + ".manifest.json"));
  man.add_file(stem + ".csv");
  json result = {{"model", model_summary(c)}};
  man.set_result(result);
  man.save();

  const int d = c.model.dim;
  const double r = c.contour.r;
  const double beta = c.contour.beta.value_or(c.model.beta);
  const auto model = c.build_model(beta);
  const int m = c.lattice_m();
  const CubeLattice lattice{d, m};

  const auto cp = derive_condition_p(model, r);
  const double delta = c.contour.delta.value_or(cp.delta);
  const auto check = check_condition_p(model, cp.any_r ? r : cp.r, cp.delta,
                                       c.contour.condition_trials,
                                       derive_seed(c.seed, kConditionStream));
  json cond = {{"r", cp.r},       {"delta", cp.delta},      {"any_r", cp.any_r},
               {"pass", check.pass}, {"worst", check.worst}, {"trials", check.trials},
               {"radius_ok", cp.any_r || r >= cp.r}};
  if (check.witness) {
    json pts = json::array();
    for (const auto& p : check.witness->second) pts.push_back(point_json(p));
    cond["witness"] = {{"x", point_json(check.witness->first)}, {"xi", pts}};
  }
  result["condition_p"] = cond;

  const auto bp = compute_beta_plus(d, m, r, delta);
  result["lattice"] = {{"m", m}, {"r", r}, {"R", c.percolation.R}};
  result["separation_constant"] = bp.c;
  result["beta_plus"] = {{"log2", bp.log2_beta_plus},
                         {"value", std::isfinite(bp.beta_plus) ? json(bp.beta_plus) : json(nullptr)},
                         {"astronomical", bp.astronomical},
                         {"delta", delta}};
  result["c_star"] = optional_json(local_stability_constant(model));
  if (c.percolation.poisson_critical) {
    try {
      result["beta_minus"] = compute_beta_minus(model, *c.percolation.poisson_critical);
    } catch (const std::domain_error& e) {
      result["beta_minus"] = {{"error", e.what()}};
    }
  } else {
    result["beta_minus"] = nullptr;
  }

  const auto tail = loop_tail_sum(d, m, beta, delta, bp.c, 3);
  result["tail_sum"] = {{"beta", beta},
                        {"q", tail.q},
                        {"converges", tail.converges},
                        {"log_value", std::isfinite(tail.log_value) ? json(tail.log_value) : json(nullptr)},
                        {"value", std::isfinite(tail.value) ? json(tail.value) : json(nullptr)}};
  man.set_result(result);
  man.save();

  if (d == 2) {
    json loops = json::array();
    bool all_ok = true;
    for (int k = 1; k <= c.contour.k_max; ++k) {
      const auto e = enumerate_loops(k, false, std::max(c.contour.k_max, kDefaultLoopCap));
      const bool ok = static_cast<double>(e.count) <= e.bound;
      all_ok = all_ok && ok;
      loops.push_back({{"k", k}, {"count", e.count}, {"shapes", e.shapes}, {"bound", e.bound},
                       {"within_bound", ok}});
    }
    int minimal = 0;
    for (const auto& l : loops) {
      if (l["count"].get<std::uint64_t>() > 0) {
        minimal = l["k"].get<int>();
        break;
      }
    }
    result["loops"] = {{"k_max", c.contour.k_max}, {"within_bound", all_ok},
                       {"minimal_length", minimal}, {"counts", loops}};
    man.set_result(result);
    man.save();
  }

  std::vector<CubeSet> sets;
  if (!c.contour.cubes.empty()) sets.push_back(c.contour.cubes);
  for (std::size_t s = 0; s < c.contour.random_sets; ++s) {
    sets.push_back(random_cube_set(d, m, c.contour.max_cubes,
                                   derive_seed(derive_seed(c.seed, kCubeSetStream), s)));
  }
  DurableCsv csv(out / (stem + ".csv"), kKeyLemmaHeader);
  KeyLemmaOptions opts;
  opts.sampler = c.sampler;
  opts.volume_nodes = c.contour.volume_nodes;
  opts.delta = c.contour.delta;
  json lemma = json::array();
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto seed = derive_seed(c.seed, s);
    const auto rep = check_key_lemma(model, sets[s], lattice, r, c.contour.n_reps, seed, opts);
    const auto kept = greedy_separated(sets[s], r, m);
    const bool greedy_ok = pairwise_separated(kept, r, m) &&
                           static_cast<double>(kept.size()) >= bp.c * static_cast<double>(sets[s].size());
    double side = 0.0;
    for (int a = 0; a < d; ++a) side = std::max(side, rep.window.side(a));
    csv.append({std::to_string(seed), format_double(side), format_double(beta),
                std::to_string(rep.n_reps), std::to_string(s), cubes_text(sets[s]),
                std::to_string(kept.size()), std::to_string(rep.hits), format_double(rep.p_hat),
                format_double(rep.p_std_error), rep.bound_applicable ? "1" : "0",
                format_double(rep.bound),
                rep.void_probability ? format_double(*rep.void_probability) : "",
                format_double(rep.void_std_error), format_double(rep.dilated_volume), man.hash()});
    const bool below_bound = !rep.bound_applicable ||
                             rep.p_hat <= rep.bound + 3.0 * rep.p_std_error;
    json entry = {{"set", s},
                  {"cubes", cubes_json(sets[s])},
                  {"p_hat", rep.p_hat},
                  {"bound_applicable", rep.bound_applicable},
                  {"bound", rep.bound},
                  {"below_bound", below_bound},
                  {"greedy_ok", greedy_ok}};
    if (rep.void_probability) {
      const double se = std::hypot(rep.p_std_error, rep.void_std_error);
      entry["void_probability"] = *rep.void_probability;
      entry["agrees_3se"] = std::abs(rep.p_hat - *rep.void_probability) <= 3.0 * se + 1e-12;
    }
    lemma.push_back(entry);
    man.add_task({{"set", s}, {"seed", seed}});
    result["key_lemma"] = lemma;
    man.set_result(result);
    man.save();
  }
  man.save(true);
}

void run_render(const ExperimentConfig& c, const fs::path& out) {
  validate_for(c, Verb::render);
  fs::create_directories(out);
  const auto stem = stem_for(c, "render");
  Manifest man("render", c.canonical(), out / (stem + ".manifest.json"));
  const auto model = c.build_model();
  const Window window = Box::cube(2, c.render.L);
  const auto seed = derive_seed(c.seed, kRenderStream);
  man.add_task({{"sample", 0}, {"seed", seed}});
  auto config = draw(model, window, {}, c.sampler, seed);

  Scene scene;
  scene.config = config;
  scene.R = c.percolation.R;
  scene.pixels = c.render.pixels;
  json result = {{"model", model_summary(c)}, {"points", config.size()}};
  json chain_doc = nullptr;
  if (c.contour.enabled) {
    const CubeLattice lattice{2, c.lattice_m()};
    if (c.render.grid) scene.lattice = lattice;
    if (c.render.r_circles) scene.r = c.contour.r;
    if (c.render.chain) {
      const BooleanModel bm{config, c.percolation.R};
      std::optional<ChainEndpoints> found;
      if (c.render.from && c.render.to) {
        auto chain = separating_chain(bm, lattice, c.contour.r, *c.render.from, *c.render.to);
        if (chain) found = ChainEndpoints{*c.render.from, *c.render.to, std::move(*chain)};
      } else {
        found = find_chain(bm, lattice, c.contour.r);
      }
      if (found) {
        scene.lattice = lattice;
        scene.chain = found->chain;
        scene.from = found->from;
        scene.to = found->to;
        double clearance = std::numeric_limits<double>::infinity();
        for (const auto& z : found->chain) {
          for (const auto& p : config.points) clearance = std::min(clearance, lattice.cube(z).distance_to(p));
        }
        chain_doc = {{"m", lattice.m},
                     {"r", c.contour.r},
                     {"from", point_json(found->from)},
                     {"to", point_json(found->to)},
                     {"cubes", cubes_json(found->chain)},
                     {"clearance", std::isfinite(clearance) ? json(clearance) : json(nullptr)}};
        write_json_atomic(out / (stem + ".chain.json"), chain_doc);
        man.add_file(stem + ".chain.json");
      }
      result["chain_found"] = found.has_value();
    }
  }
  write_file_atomic(out / (stem + ".svg"), render_svg(scene));
  man.add_file(stem + ".svg");
  write_configuration(out / (stem + ".points.csv"), config,
                      {{"window", {{"lower", point_json(window.lower())}, {"upper", point_json(window.upper())}}},
                       {"model", c.canonical()["model"]},
                       {"sampler", to_string(c.sampler.kind)},
                       {"seed", seed},
                       {"manifest", man.hash()}});
  man.add_file(stem + ".points.csv");
  man.set_result(result);
  man.save(true);
}

void run_sample(const ExperimentConfig& c, const fs::path& out) {
  validate_for(c, Verb::sample);
  fs::create_directories(out);
  const auto stem = stem_for(c, "sample");
  Manifest man("sample", c.canonical(), out / (stem + ".manifest.json"));
  const double L = c.percolation.L.empty() ? c.render.L : c.percolation.L.front();
  const Window window = Box::cube(c.model.dim, L);
  const auto seed = derive_seed(c.seed, 0);
  const auto model = c.build_model();
  json side = {{"window", {{"lower", point_json(window.lower())}, {"upper", point_json(window.upper())}}},
               {"model", c.canonical()["model"]},
               {"sampler", to_string(c.sampler.kind)},
               {"seed", seed},
               {"manifest", man.hash()}};
  Configuration config;
  if (c.sampler.kind == SamplerKind::cftp) {
    const auto run = cftp_sample(model, window, {}, seed, c.sampler.cftp_max_epochs);
    if (!run.coalesced) {
      throw SamplerFailure("CFTP did not coalesce within " +
                           std::to_string(c.sampler.cftp_max_epochs) + " epochs");
    }
    config = run.retained;
    side["start_time"] = run.start_time;
    side["dominating_points"] = run.dominating.size();
  } else {
    const auto steps = c.sampler.mcmc_steps ? c.sampler.mcmc_steps : default_burn_in(model, window);
    config = draw(model, window, {}, c.sampler, seed);
    if (c.sampler.kind == SamplerKind::mcmc) side["steps"] = steps;
  }
  write_configuration(out / (stem + ".csv"), config, side);
  man.add_task({{"sample", 0}, {"seed", seed}});
  man.add_file(stem + ".csv");
  man.set_result({{"model", model_summary(c)}, {"points", config.size()}});
  man.save(true);
}

// --- report -------------------------------------------------------------------

namespace {

struct LoadedCsv {
  fs::path path;
  std::vector<Row> rows;
  std::map<std::string, std::size_t> col;
  const std::string& at(const Row& row, const std::string& name) const { return row[col.at(name)]; }
};

std::optional<LoadedCsv> load_result_csv(const fs::path& path, const Row& header,
                                         const std::string& hash, std::ostream& warn) {
  try {
    LoadedCsv out;
    out.path = path;
    auto rows = parse_csv(read_file(path));
    if (rows.empty() || rows.front() != header) throw std::runtime_error("unexpected header");
    for (std::size_t i = 0; i < header.size(); ++i) out.col[header[i]] = i;
    rows.erase(rows.begin());
    for (const auto& row : rows) {
      if (row[out.col.at("manifest")] != hash) throw std::runtime_error("row references another manifest");
      for (const auto& k : {"seed", "L", "beta", "n_reps"}) {
        if (row[out.col.at(k)].empty()) throw std::runtime_error(std::string("row lacks ") + k);
      }
    }
    out.rows = std::move(rows);
    return out;
  } catch (const std::exception& e) {
    warn << "warning: skipping " << path.string() << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::string fmt_json(const json& v, int digits = 6) {
  if (v.is_null()) return "n/a";
  if (v.is_number()) return fmt(v.get<double>(), digits);
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (v.is_object() && v.contains("error")) return "n/a";
  return v.dump();
}

std::string model_label(const json& m) {
  std::string s = m.value("name", "?");
  std::string params;
  for (const auto& k : {"gamma", "r0", "r", "r_max", "delta_tilde"}) {
    if (m.contains(k)) params += std::string(params.empty() ? "" : ", ") + k + "=" + fmt_json(m[k]);
  }
  return params.empty() ? s : s + " (" + params + ")";
}

/// β at which the crossing fraction first passes 1/2, by linear interpolation.
std::optional<double> interpolate_half(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto [b0, f0] = pts[i - 1];
    const auto [b1, f1] = pts[i];
    if (f0 <= 0.5 && f1 >= 0.5 && f1 > f0) return b0 + (0.5 - f0) * (b1 - b0) / (f1 - f0);
  }
  return std::nullopt;
}

}  // namespace

fs::path run_report(const fs::path& dir, std::ostream& warn) {
  if (!fs::is_directory(dir)) throw ReportError("results directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.size() > 14 && name.ends_with(".manifest.json")) manifests.push_back(entry.path());
  }
  std::sort(manifests.begin(), manifests.end());

  std::string thresholds, constants, bounds, lemma, runs;
  std::size_t valid = 0;
  for (const auto& mpath : manifests) {
    json man;
    try {
      man = json::parse(read_file(mpath));
      (void)man.at("config_hash").get<std::string>();
      (void)man.at("verb").get<std::string>();
    } catch (const std::exception& e) {
      warn << "warning: skipping " << mpath.string() << ": " << e.what() << "\n";
      continue;
    }
    const std::string hash = man["config_hash"];
    const std::string verb = man["verb"];
    const std::string stem = mpath.filename().string().substr(0, mpath.filename().string().size() - 14);
    const json summary = man["result"].is_object() && man["result"].contains("model")
                             ? man["result"]["model"]
                             : json::object();
    const std::string label = model_label(summary);
    const std::string R = man["config"]["percolation"].contains("R")
                              ? fmt_json(man["config"]["percolation"]["R"])
                              : "n/a";
    bool used = false;

    if (verb == "sweep") {
      if (auto csv = load_result_csv(dir / (stem + ".csv"), kEstimateHeader, hash, warn)) {
        used = true;
        std::map<double, std::vector<std::pair<double, double>>> by_L;
        for (const auto& row : csv->rows) {
          by_L[to_double(csv->at(row, "L"))].emplace_back(to_double(csv->at(row, "beta")),
                                                          to_double(csv->at(row, "fraction")));
        }
        for (const auto& [L, pts] : by_L) {
          const auto b = interpolate_half(pts);
          thresholds += "| " + stem + " | " + label + " | " + R + " | " + fmt(L) + " | " +
                        (b ? fmt(*b) : std::string("not bracketed")) + " | grid interpolation (" +
                        std::to_string(pts.size()) + " β values) | `" + hash + "` |\n";
        }
      }
    } else if (verb == "bisect") {
      if (auto csv = load_result_csv(dir / (stem + ".thresholds.csv"), kThresholdHeader, hash, warn)) {
        used = true;
        for (const auto& row : csv->rows) {
          thresholds += "| " + stem + " | " + label + " | " + R + " | " + csv->at(row, "L") +
                        " | " + fmt(to_double(csv->at(row, "beta"))) + " | bisection, bracket [" +
                        fmt(to_double(csv->at(row, "ci_lo"))) + ", " +
                        fmt(to_double(csv->at(row, "ci_hi"))) + "] | `" + hash + "` |\n";
        }
        const auto& res = man["result"];
        if (res.contains("extrapolated") && res["thresholds"].size() > 1) {
          thresholds += "| " + stem + " | " + label + " | " + R + " | ∞ | " +
                        fmt_json(res["extrapolated"]) + " | fit a + b/L, b = " +
                        fmt_json(res["trend"]) + " | `" + hash + "` |\n";
        }
      }
    } else if (verb == "check-bounds") {
      if (auto csv = load_result_csv(dir / (stem + ".csv"), kKeyLemmaHeader, hash, warn)) {
        used = true;
        const auto& res = man["result"];
        const auto& cond = res.value("condition_p", json::object());
        const auto& bp = res.value("beta_plus", json::object());
        const auto& loops = res.value("loops", json::object());
        const auto& tail = res.value("tail_sum", json::object());
        bounds += "| " + stem + " | " + label + " | " + fmt_json(cond.value("pass", json())) + " | " +
                  fmt_json(res.value("separation_constant", json())) + " | " +
                  fmt_json(bp.value("log2", json()), 10) + " | " +
                  fmt_json(bp.value("astronomical", json())) + " | " +
                  fmt_json(res.value("beta_minus", json())) + " | " +
                  (loops.is_object() && loops.contains("k_max")
                       ? "k ≤ " + fmt_json(loops["k_max"]) + ": " + fmt_json(loops["within_bound"]) +
                             ", shortest " + fmt_json(loops["minimal_length"])
                       : std::string("n/a")) +
                  " | " + fmt_json(tail.value("q", json())) + " | `" + hash + "` |\n";
        for (const auto& e : res.value("key_lemma", json::array())) {
          lemma += "| " + stem + " | " + fmt_json(e["set"]) + " | " + std::to_string(e["cubes"].size()) +
                   " | " + fmt_json(e["p_hat"]) + " | " +
                   (e.contains("void_probability") ? fmt_json(e["void_probability"]) + " (" +
                                                         fmt_json(e["agrees_3se"]) + ")"
                                                   : std::string("n/a")) +
                   " | " + (e["bound_applicable"].get<bool>() ? fmt_json(e["bound"]) : std::string("not applicable")) +
                   " | " + fmt_json(e["below_bound"]) + " | " + fmt_json(e["greedy_ok"]) + " |\n";
        }
      }
    } else {
      continue;
    }
    if (!used) continue;
    ++valid;
    const auto& cp = summary.value("condition_p", json::object());
    constants += "| " + stem + " | " + label + " | " + fmt_json(summary.value("beta", json())) + " | " +
                 (cp.contains("r") ? fmt_json(cp["r"]) + (cp.value("any_r", false) ? " (any)" : "")
                                   : std::string("n/a")) +
                 " | " + fmt_json(cp.value("delta", json()), 10) + " | " +
                 fmt_json(summary.value("stability_factor", json()), 10) + " | " +
                 fmt_json(summary.value("c_star", json()), 10) + " | `" + hash + "` |\n";
    runs += "| " + stem + " | " + verb + " | " + man.value("code_version", "?") + " | " +
            man["started"].get<std::string>() + " | " +
            (man["finished"].is_null() ? std::string("incomplete") : man["finished"].get<std::string>()) +
            " | `" + hash + "` |\n";
  }
  if (valid == 0) throw ReportError("no usable results in '" + dir.string() + "'");

  std::string md = "# Results summary\n\n";
  md += "## Runs\n\n| run | verb | version | started | finished | manifest |\n|---|---|---|---|---|---|\n" + runs;
  if (!thresholds.empty()) {
    md += "\n## Critical activity estimates β̂(L)\n\n| run | model | R | L | β̂ | method | manifest |\n"
          "|---|---|---|---|---|---|---|\n" + thresholds;
  }
  md += "\n## Model constants\n\n| run | model | β | r | δ | K = c*/β | c* | manifest |\n"
        "|---|---|---|---|---|---|---|---|\n" + constants;
  if (!bounds.empty()) {
    md += "\n## Bound checks\n\n| run | model | condition (P) check | c | log2 β₊ | astronomical | β₋ | "
          "loop counts within bound | tail ratio q | manifest |\n|---|---|---|---|---|---|---|---|---|---|\n" +
          bounds;
  }
  if (!lemma.empty()) {
    md += "\n## Key-lemma estimates\n\n| run | set | cubes | empirical | void probability (3σ) | bound | "
          "below bound | greedy separation |\n|---|---|---|---|---|---|---|---|\n" + lemma;
  }
  const auto path = dir / "report.md";
  write_file_atomic(path, md);
  return path;
}

}  // namespace gibbsperc::cli
