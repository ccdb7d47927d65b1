#include "ssm/aag_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "ssm/error.hpp"

namespace ssm {

namespace {

// Objective gain of moving from `current` to `next`, with -inf as a sentinel
// that is never preferred.
double gain(double next, double current) {
  if (next == kNegInf || std::isnan(next)) return kNegInf;
  if (current == kNegInf) return std::numeric_limits<double>::infinity();
  return next - current;
}

Aag random_aag(int n_tx, int n_active, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n_tx));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(n_active));
  return Aag::from_indices(n_tx, std::move(idx));
}

Aag swap_antennas(const Aag& aag, int on, int off) {
  std::vector<std::uint8_t> mask = aag.mask();
  mask[on] = 0;
  mask[off] = 1;
  return Aag::from_mask(std::move(mask));
}

std::vector<int> inactive_indices(const Aag& aag) {
  std::vector<int> out;
  for (int u = 0; u < aag.n_tx(); ++u) {
    if (!aag.is_active(u)) out.push_back(u);
  }
  return out;
}

int resolve(int value, int fallback) { return value > 0 ? value : fallback; }

}  // namespace

void SaParams::validate() const {
  auto bad = [](const std::string& key, const std::string& why) {
    fail(ErrorKind::kInvalidConfig, "sa." + key + ": " + why);
  };
  if (!(cf > 0.0)) bad("cf", "must be > 0");
  if (c0 && !(*c0 > cf)) bad("c0", "must exceed cf");
  if (!(cooling_alpha > 0.0 && cooling_alpha < 1.0)) bad("cooling_alpha", "must lie in (0, 1)");
  if (sample_size < 0) bad("sample_size", "must be >= 1 (or 0 for N_s)");
  if (equilibrium_len < 0) bad("equilibrium_len", "must be >= 1 (or 0 for 10 N_s)");
  if (max_mutations < 1) bad("max_mutations", "must be >= 1");
  if (probes < 1) bad("probes", "must be >= 1");
  if (!(chi0 > 0.0 && chi0 < 1.0)) bad("chi0", "must lie in (0, 1)");
}

double ObjectiveHandle::operator()(const Aag& aag) {
  if (!memoize_) {
    ++evaluations_;
    return f_(aag);
  }
  const std::string key = aag.key();
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  ++evaluations_;
  const double v = f_(aag);
  cache_.emplace(key, v);
  return v;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

std::vector<Aag> enumerate_aags(int n_tx, int n_active) {
  if (n_active < 1 || n_active > n_tx) {
    fail(ErrorKind::kInvalidConfig, "enumerate_aags needs 1 <= n_active <= n_tx");
  }
  std::vector<Aag> out;
  out.reserve(static_cast<std::size_t>(binomial(n_tx, n_active)));
  std::vector<int> idx(static_cast<std::size_t>(n_active));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(Aag::from_indices(n_tx, idx));
    int pos = n_active - 1;
    while (pos >= 0 && idx[pos] == n_tx - n_active + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int k = pos + 1; k < n_active; ++k) idx[k] = idx[k - 1] + 1;
  }
  return out;
}

Aag neighbor(const Aag& aag, Rng& rng) {
  if (aag.n_active() == aag.n_tx()) {
    fail(ErrorKind::kInvalidConfig, "an AAG with every antenna active has no neighbors");
  }
  const std::vector<int> off = inactive_indices(aag);
  std::uniform_int_distribution<int> pick_on(0, aag.n_active() - 1);
  std::uniform_int_distribution<int> pick_off(0, static_cast<int>(off.size()) - 1);
  const int on = aag.active_indices()[pick_on(rng)];
  return swap_antennas(aag, on, off[pick_off(rng)]);
}

std::vector<Aag> neighborhood(const Aag& aag) {
  const std::vector<int> off = inactive_indices(aag);
  std::vector<Aag> out;
  out.reserve(aag.active_indices().size() * off.size());
  for (int on : aag.active_indices()) {
    for (int o : off) out.push_back(swap_antennas(aag, on, o));
  }
  return out;
}

bool metropolis_accept(double delta, double c, Rng& rng) {
  const double eta = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (delta == kNegInf || std::isnan(delta)) return false;
  const double p = delta >= 0.0 ? 1.0 : std::exp(delta / c);
  return p > eta;
}

double initial_temperature(ObjectiveHandle& objective, const Aag& seed, int probes, double chi0,
                           Rng& rng) {
  if (!(chi0 > 0.0 && chi0 < 1.0)) fail(ErrorKind::kInvalidConfig, "chi0 must lie in (0, 1)");
  if (seed.n_active() == seed.n_tx()) return 1.0;
  Aag s = seed;
  double v = objective(s);
  double worse_sum = 0.0;
  int worse_count = 0;
  double max_abs = 0.0;
  for (int p = 0; p < probes; ++p) {
    Aag next = neighbor(s, rng);
    const double v_next = objective(next);
    const double d = v_next - v;
    if (std::isfinite(d)) {
      max_abs = std::max(max_abs, std::abs(d));
      if (d < 0.0) {
        worse_sum += -d;
        ++worse_count;
      }
    }
    if (std::isfinite(v_next)) {
      s = std::move(next);
      v = v_next;
    }
  }
  const double scale = std::log(1.0 / chi0);
  if (worse_count > 0 && worse_sum > 0.0) return (worse_sum / worse_count) / scale;
  return max_abs > 0.0 ? max_abs : 1.0;
}

SaResult sa_search(ObjectiveHandle& objective, const Aag& seed, const SaParams& params, Rng& rng) {
  params.validate();
  Aag s = seed;
  double v = objective(s);
  if (v == kNegInf) {
    Aag fallback = Aag::leading(seed.n_tx(), seed.n_active());
    const double fv = objective(fallback);
    if (fv != kNegInf) {
      s = std::move(fallback);
      v = fv;
    }
  }

  SaResult out{s, v, s, v, 0.0, 0, {}};
  out.trace.entries.push_back({0, v, v, 0.0});
  if (s.n_active() == s.n_tx()) {
    out.trace.converged = true;
    out.trace.reason = StopReason::kTolerance;
    return out;
  }

  const int ns = s.n_active();
  const int hood = ns * (s.n_tx() - ns);
  const int sample = params.steepest ? hood : std::min(resolve(params.sample_size, ns), hood);
  const int equilibrium = resolve(params.equilibrium_len, 10 * ns);
  double c = params.c0 ? *params.c0 : initial_temperature(objective, s, params.probes, params.chi0, rng);
  out.c0 = c;

  auto record = [&](const Aag& a, double value) {
    if (gain(value, out.best_value) > 0.0) {
      out.best = a;
      out.best_value = value;
    }
  };

  int k = 0;
  do {
    // mutation at fixed temperature
    for (int e = 0; e < equilibrium; ++e) {
      Aag next = neighbor(s, rng);
      const double v_next = objective(next);
      if (metropolis_accept(gain(v_next, v), c, rng)) {
        s = std::move(next);
        v = v_next;
        record(s, v);
      }
    }

    // integer sampling: hill-climb over distinct neighbors
    bool improved = true;
    while (improved) {
      improved = false;
      std::unordered_set<std::string> visited{s.key()};
      std::vector<Aag> fresh = neighborhood(s);
      for (int drawn = 0; drawn < sample; ++drawn) {
        if (fresh.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, fresh.size() - 1);
        const std::size_t at = pick(rng);
        Aag cand = std::move(fresh[at]);
        fresh[at] = std::move(fresh.back());
        fresh.pop_back();
        visited.insert(cand.key());
        const double v_cand = objective(cand);
        if (gain(v_cand, v) > 0.0) {
          s = std::move(cand);
          v = v_cand;
          record(s, v);
          improved = true;
          fresh.clear();
          for (Aag& a : neighborhood(s)) {
            if (!visited.count(a.key())) fresh.push_back(std::move(a));
          }
        }
      }
    }

    c *= params.cooling_alpha;
    ++k;
    out.trace.entries.push_back({k, v, out.best_value, c});
  } while (c > params.cf && k < params.max_mutations);

  out.trace.converged = c <= params.cf;
  out.trace.reason = out.trace.converged ? StopReason::kTolerance : StopReason::kMaxIter;
  out.temperature_steps = k;
  out.final_state = s;
  out.final_value = v;
  return out;
}

std::map<std::string, int> run_metropolis_chain(ObjectiveHandle& objective, const Aag& seed,
                                                double c, int steps, Rng& rng) {
  if (!(c > 0.0)) fail(ErrorKind::kInvalidConfig, "chain temperature must be > 0");
  std::map<std::string, int> visits;
  Aag s = seed;
  double v = objective(s);
  for (int t = 0; t < steps; ++t) {
    Aag next = neighbor(s, rng);
    const double v_next = objective(next);
    if (metropolis_accept(gain(v_next, v), c, rng)) {
      s = std::move(next);
      v = v_next;
    }
    ++visits[s.key()];
  }
  return visits;
}

ExhaustiveResult exhaustive_search(ObjectiveHandle& objective, int n_tx, int n_active) {
  const std::vector<Aag> all = enumerate_aags(n_tx, n_active);
  ExhaustiveResult best{all.front(), objective(all.front())};
  for (std::size_t i = 1; i < all.size(); ++i) {
    const double v = objective(all[i]);
    if (gain(v, best.value) > 0.0) best = {all[i], v};
  }
  return best;
}

SchemeResult joint_sa_max_asr(const ChannelRealization& ch, const SystemConfig& config,
                              const SuperAlphabet& alphabet, const SaParams& params,
                              const ScaOptions& sca, Rng& rng) {
  std::unordered_map<std::string, ScaResult> designs;
  std::size_t solves = 0;
  ObjectiveHandle objective([&](const Aag& aag) {
    const SubChannel sub = select_subchannel(ch, aag);
    ScaResult r = sca_max_asr(AsrModel(sub.h, sub.g_est, config, alphabet),
                              AnCovariance::scaled_identity(aag.n_active()), sca);
    ++solves;
    const double value = r.r_a;
    designs.emplace(aag.key(), std::move(r));
    return value;
  });
  const Aag seed = random_aag(config.n_tx, config.n_active, rng);
  SaResult sa = sa_search(objective, seed, params, rng);
  const ScaResult& design = designs.at(sa.best.key());
  SchemeResult out{sa.best, design.q, design.r_a, 0.0, {}, {}};
  out.selection_trace = std::move(sa.trace);
  out.q_trace = design.trace;
  out.objective_evaluations = objective.evaluations();
  out.q_solver_calls = solves;
  out.iterations = sa.temperature_steps;
  return out;
}

SchemeResult separate_sa_max_asr(const ChannelRealization& ch, const SystemConfig& config,
                                 const SuperAlphabet& alphabet, const SaParams& params,
                                 const ScaOptions& sca, Rng& rng) {
  const TriangularTables tables = build_triangular_tables(ch, config, alphabet.constellation());
  ObjectiveHandle objective(
      [&](const Aag& aag) { return separate_rate_from_tables(tables, aag); });
  const Aag seed = random_aag(config.n_tx, config.n_active, rng);
  SaResult sa = sa_search(objective, seed, params, rng);
  const SubChannel sub = select_subchannel(ch, sa.best);
  ScaResult design = sca_max_asr(AsrModel(sub.h, sub.g_est, config, alphabet),
                                 AnCovariance::scaled_identity(config.n_active), sca);
  SchemeResult out{sa.best, design.q, design.r_a, 0.0, {}, {}};
  out.selection_trace = std::move(sa.trace);
  out.q_trace = std::move(design.trace);
  out.objective_evaluations = objective.evaluations();
  out.q_solver_calls = 1;
  out.iterations = sa.temperature_steps;
  return out;
}

SchemeResult max_r_sinr_scheme(const ChannelRealization& ch, const SystemConfig& config,
                               const SaParams& params, const DinkelbachOptions& dinkelbach,
                               Rng& rng, bool use_es) {
  ObjectiveHandle objective(
      [&](const Aag& aag) {
        const SubChannel sub = select_subchannel(ch, aag);
        return det_ratio_logscore(sub.h, sub.g_est, config);
      },
      /*memoize=*/false);

  Aag chosen = Aag::leading(config.n_tx, config.n_active);
  OptimTrace selection;
  int iterations = 0;
  if (use_es && binomial(config.n_tx, config.n_active) <= kMaxExhaustiveGroups) {
    chosen = exhaustive_search(objective, config.n_tx, config.n_active).best;
  } else {
    SaParams steep = params;
    steep.steepest = true;
    SaResult sa = sa_search(objective, random_aag(config.n_tx, config.n_active, rng), steep, rng);
    chosen = sa.best;
    selection = std::move(sa.trace);
    iterations = sa.temperature_steps;
  }

  const SubChannel sub = select_subchannel(ch, chosen);
  DinkelbachResult d = dinkelbach_ancm(sub.h, sub.g_est, config, dinkelbach);
  SchemeResult out{chosen, d.q, d.lambda, d.lambda, {}, {}};
  out.selection_trace = std::move(selection);
  out.q_trace = std::move(d.trace);
  out.objective_evaluations = objective.evaluations();
  out.iterations = iterations;
  return out;
}

}  // namespace ssm
