#include "gibbsperc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gibbsperc {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::exact_poisson: return "exact-poisson";
    case SamplerKind::mcmc: return "mcmc";
    case SamplerKind::cftp: return "cftp";
  }
  return "?";
}

SamplerKind parse_sampler_kind(const std::string& s) {
  if (s == "exact-poisson") return SamplerKind::exact_poisson;
  if (s == "mcmc") return SamplerKind::mcmc;
  if (s == "cftp") return SamplerKind::cftp;
  throw std::invalid_argument("unknown sampler '" + s + "' (expected mcmc | cftp | exact-poisson)");
}

Configuration sample_poisson(double beta, const Window& window, Rng& rng) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("sample_poisson needs beta >= 0");
  Configuration c{window, {}};
  if (beta == 0.0) return c;
  const auto n = std::poisson_distribution<std::int64_t>(beta * window.volume())(rng);
  c.points.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) c.points.push_back(uniform_point(window, rng));
  return c;
}

Configuration sample_poisson(double beta, const Window& window, std::uint64_t seed) {
  Rng rng(seed);
  return sample_poisson(beta, window, rng);
}

std::vector<Point> prune_boundary(const ModelSpec& model, const Window& window,
                                  std::span<const Point> omega) {
  std::vector<Point> out;
  const double reach = model.reach();
  for (const auto& y : omega) {
    if (window.contains(y)) throw std::invalid_argument("boundary condition has a point inside the window");
    if (window.distance_to(y) < reach) out.push_back(y);
  }
  return out;
}

std::uint64_t default_burn_in(const ModelSpec& model, const Window& window) {
  return static_cast<std::uint64_t>(
      std::ceil(1e4 * window.volume() * std::max(model.beta(), 1.0)));
}

double birth_ratio(const ModelSpec& model, const Point& x, std::span<const Point> xi,
                   std::span<const Point> omega, double volume) {
  return conditional_intensity(model, x, xi, omega) * volume /
         static_cast<double>(xi.size() + 1);
}

double death_ratio(const ModelSpec& model, const Point& y, std::span<const Point> rest,
                   std::span<const Point> omega, double volume) {
  const double lam = conditional_intensity(model, y, rest, omega);
  if (lam == 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(rest.size() + 1) / (lam * volume);
}

// --- birth–death chain ----------------------------------------------------------

BirthDeathChain::BirthDeathChain(ModelSpec model, Window window, std::span<const Point> omega,
                                 std::uint64_t seed)
    : model_(std::move(model)),
      window_(window),
      volume_(window.volume()),
      omega_(prune_boundary(model_, window_, omega)),
      seed_(seed),
      rng_(seed) {}

void BirthDeathChain::step() {
  ++steps_;
  if (uniform01(rng_) < 0.5) {
    ++births_proposed_;
    const Point x = uniform_point(window_, rng_);
    const double a = birth_ratio(model_, x, points_, omega_, volume_);
    if (uniform01(rng_) < a) {
      points_.push_back(x);
      ++births_accepted_;
    }
    return;
  }
  ++deaths_proposed_;
  if (points_.empty()) return;
  const auto n = points_.size();
  const auto i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  std::swap(points_[i], points_.back());
  const double a = death_ratio(model_, points_.back(),
                               std::span<const Point>(points_).first(n - 1), omega_, volume_);
  if (uniform01(rng_) < a) {
    points_.pop_back();
    ++deaths_accepted_;
  }
}

void BirthDeathChain::run(std::uint64_t n_steps) {
  for (std::uint64_t s = 0; s < n_steps; ++s) step();
}

Configuration mcmc_sample(const ModelSpec& model, const Window& window,
                          std::span<const Point> omega, std::uint64_t n_steps,
                          std::uint64_t seed) {
  if (n_steps == 0) throw std::invalid_argument("mcmc_sample needs n_steps >= 1");
  BirthDeathChain chain(model, window, omega, seed);
  chain.run(n_steps);
  return chain.configuration();
}

// --- dominated CFTP ---------------------------------------------------------------

namespace {

/// Point set with O(1) insert/remove by id; the first `pinned` entries are never removed.
class IndexedSet {
public:
  IndexedSet(std::size_t capacity_hint, std::span<const Point> pinned)
      : pts_(pinned.begin(), pinned.end()), ids_(pinned.size(), kNone), pinned_(pinned.size()) {
    pos_.reserve(capacity_hint);
  }

  void insert(std::size_t id, const Point& p) {
    if (pos_.size() <= id) pos_.resize(id + 1, kNone);
    pos_[id] = pts_.size();
    pts_.push_back(p);
    ids_.push_back(id);
  }

  bool erase(std::size_t id) {
    if (id >= pos_.size() || pos_[id] == kNone) return false;
    const std::size_t at = pos_[id];
    const std::size_t last = pts_.size() - 1;
    if (at != last) {
      pts_[at] = pts_[last];
      ids_[at] = ids_[last];
      pos_[ids_[at]] = at;
    }
    pts_.pop_back();
    ids_.pop_back();
    pos_[id] = kNone;
    return true;
  }

  std::span<const Point> points() const { return pts_; }
  std::span<const std::size_t> ids() const {
    return std::span<const std::size_t>(ids_).subspan(pinned_);
  }
  std::size_t free_size() const { return pts_.size() - pinned_; }

private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<Point> pts_;
  std::vector<std::size_t> ids_;
  std::vector<std::size_t> pos_;
  std::size_t pinned_;
};

struct PathEvent {
  std::size_t id;
  /// Forward-time birth (a death in the backward construction) carries a mark.
  bool birth;
  double mark;
};

}  // namespace

DominatedRun cftp_sample(const ModelSpec& model, const Window& window,
                         std::span<const Point> omega, std::uint64_t seed, int max_epochs) {
  const auto c_star = local_stability_constant(model);
  if (!c_star) throw std::domain_error("cftp_sample: model is not locally stable");
  if (max_epochs < 1) throw std::invalid_argument("cftp_sample needs max_epochs >= 1");
  const auto omega_near = prune_boundary(model, window, omega);
  Rng rng(seed);

  DominatedRun run;
  const Configuration d0 = sample_poisson(*c_star, window, rng);
  run.dominating = d0;
  run.retained.window = window;

  if (model.kind() == ModelKind::poisson) {
    // λ ≡ c*: every dominating birth is retained.
    run.retained = d0;
    run.coalesced = true;
    run.start_time = -1;
    run.epochs = 1;
    run.retained_index.resize(d0.size());
    for (std::size_t i = 0; i < d0.size(); ++i) run.retained_index[i] = i;
    return run;
  }

  // Backward construction of the dominating path. Ids < |D0| are the time-0 points.
  std::vector<Point> pts = d0.points;
  std::vector<std::size_t> alive(pts.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
  std::vector<PathEvent> events;
  const double birth_rate = *c_star * window.volume();
  double t = 0.0;

  double horizon = 1.0;
  for (int epoch = 1; epoch <= max_epochs; ++epoch, horizon *= 2.0) {
    while (true) {
      const double total = birth_rate + static_cast<double>(alive.size());
      const double dt = std::exponential_distribution<double>(total)(rng);
      if (t + dt > horizon) break;  // memoryless: discarding the overshoot is exact
      t += dt;
      if (uniform01(rng) * total < birth_rate) {
        // Backward birth = forward death of a fresh point.
        pts.push_back(uniform_point(window, rng));
        alive.push_back(pts.size() - 1);
        events.push_back({pts.size() - 1, false, 0.0});
      } else {
        const auto k = std::uniform_int_distribution<std::size_t>(0, alive.size() - 1)(rng);
        const std::size_t id = alive[k];
        alive[k] = alive.back();
        alive.pop_back();
        events.push_back({id, true, uniform01(rng)});
      }
    }
    t = horizon;

    // Forward sweep from -horizon: upper starts at the dominating state, lower empty.
    IndexedSet lower(pts.size(), omega_near);
    IndexedSet gap(pts.size(), {});
    for (std::size_t id : alive) gap.insert(id, pts[id]);
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
      if (!it->birth) {
        if (!lower.erase(it->id)) gap.erase(it->id);
        continue;
      }
      const Point& x = pts[it->id];
      const auto b = sandwich_bounds(model, x, lower.points(), gap.points());
      const double threshold = it->mark * *c_star;
      if (threshold < b.lo) {
        lower.insert(it->id, x);
      } else if (threshold < b.hi) {
        gap.insert(it->id, x);
      }
    }

    run.epochs = epoch;
    run.start_time = -static_cast<std::int64_t>(horizon);
    if (gap.free_size() == 0) {
      run.coalesced = true;
      std::vector<std::size_t> ids(lower.ids().begin(), lower.ids().end());
      std::sort(ids.begin(), ids.end());
      for (std::size_t id : ids) {
        run.retained.points.push_back(pts[id]);
        run.retained_index.push_back(id);
      }
      return run;
    }
  }
  run.coalesced = false;
  return run;
}

// --- partition function ------------------------------------------------------------

PartitionEstimate estimate_partition(const ModelSpec& model, const Window& window,
                                     std::span<const Point> omega, int k_max,
                                     std::uint64_t n_nodes, std::uint64_t seed, Exec exec) {
  if (k_max < 0) throw std::invalid_argument("estimate_partition needs k_max >= 0");
  if (n_nodes == 0) throw std::invalid_argument("estimate_partition needs n_nodes >= 1");
  const double vol = window.volume();
  PartitionEstimate out;
  out.terms.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  out.term_std_error.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  out.terms[0] = 1.0;

  if (model.kind() == ModelKind::poisson) {
    const double mu = model.beta() * vol;
    for (int k = 1; k <= k_max; ++k) out.terms[static_cast<std::size_t>(k)] = out.terms[static_cast<std::size_t>(k) - 1] * mu / k;
    out.c_hat = std::exp(mu);
    out.exact = true;
    return out;
  }

  const auto omega_near = prune_boundary(model, window, omega);
  constexpr std::uint64_t kChunk = 1 << 14;
  const std::uint64_t n_chunks = (n_nodes + kChunk - 1) / kChunk;
  double scale = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    scale *= vol / k;
    double sum = 0.0;
    double sum2 = 0.0;
    auto chunk = [&](std::uint64_t c, double& s1, double& s2) {
      Rng rng(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(k)), c));
      std::vector<Point> xs(static_cast<std::size_t>(k));
      const std::uint64_t end = std::min(n_nodes, (c + 1) * kChunk);
      for (std::uint64_t i = c * kChunk; i < end; ++i) {
        for (auto& x : xs) x = uniform_point(window, rng);
        const double w = weight(model, xs, omega_near);
        s1 += w;
        s2 += w * w;
      }
    };
    if (exec == Exec::serial) {
      for (std::uint64_t c = 0; c < n_chunks; ++c) chunk(c, sum, sum2);
    } else {
      const auto chunks = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for schedule(dynamic) reduction(+ : sum, sum2)
      for (std::int64_t c = 0; c < chunks; ++c) chunk(static_cast<std::uint64_t>(c), sum, sum2);
    }
    const double n = static_cast<double>(n_nodes);
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    out.terms[static_cast<std::size_t>(k)] = scale * mean;
    out.term_std_error[static_cast<std::size_t>(k)] = scale * std::sqrt(var / n);
  }
  double total = 0.0;
  double var = 0.0;
  for (std::size_t k = 0; k < out.terms.size(); ++k) {
    total += out.terms[k];
    var += out.term_std_error[k] * out.term_std_error[k];
  }
  if (out.terms.back() > 1e-6 * total) {
    throw PartitionNotConverged("estimate_partition: term k_max = " + std::to_string(k_max) +
                                " is not below 1e-6 of the sum; increase k_max");
  }
  out.c_hat = total;
  out.c_std_error = std::sqrt(var);
  return out;
}

Configuration draw(const ModelSpec& model, const Window& window, std::span<const Point> omega,
                   const SamplerOptions& options, std::uint64_t seed) {
  switch (options.kind) {
    case SamplerKind::exact_poisson:
      if (model.kind() != ModelKind::poisson) {
        throw std::invalid_argument("exact-poisson sampler requires the poisson model");
      }
      return sample_poisson(model.beta(), window, seed);
    case SamplerKind::mcmc: {
      const auto steps = options.mcmc_steps ? options.mcmc_steps : default_burn_in(model, window);
      return mcmc_sample(model, window, omega, steps, seed);
    }
    case SamplerKind::cftp: {
      auto run = cftp_sample(model, window, omega, seed, options.cftp_max_epochs);
      if (!run.coalesced) {
        throw SamplerFailure("cftp did not coalesce within " +
                             std::to_string(options.cftp_max_epochs) + " epochs");
      }
      return std::move(run.retained);
    }
  }
  throw std::invalid_argument("unknown sampler");
}

}  // namespace gibbsperc
