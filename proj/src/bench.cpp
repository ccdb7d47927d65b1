#include "ssm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ssm/error.hpp"
#include "ssm/rates.hpp"

namespace ssm {

namespace {

constexpr const char* kSnrDefinition = "sigma_B^2 = sigma_E^2 = P_s * 10^(-snr_db/10)";

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr SchemeName kSchemeNames[] = {
    {Scheme::kEsGd, "es-gd"},
    {Scheme::kJointSa, "joint-sa"},
    {Scheme::kSeparateSa, "separate-sa"},
    {Scheme::kMaxRSinr, "max-r-sinr"},
    {Scheme::kNspBaseline, "nsp-baseline"},
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

// Typed read of node[key] with the key named on failure.
template <typename T>
T read(const YAML::Node& node, const std::string& key, const std::string& prefix = "") {
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorKind::kParse, "key '" + prefix + key + "' has the wrong type");
  }
}

template <typename T>
void read_opt(const YAML::Node& node, const std::string& key, T& target,
              const std::string& prefix = "") {
  if (node[key]) target = read<T>(node, key, prefix);
}

void reject_unknown(const YAML::Node& node, const std::set<std::string>& known,
                    const std::string& prefix) {
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!known.count(key)) fail(ErrorKind::kParse, "unknown key '" + prefix + key + "'");
  }
}

YAML::Node section(const YAML::Node& root, const std::string& key) {
  const YAML::Node n = root[key];
  if (n && !n.IsMap()) fail(ErrorKind::kParse, "key '" + key + "' must be a mapping");
  return n;
}

// Antennas with the strongest legitimate gains; ties keep the lower index.
Aag strongest_antennas(const RowVec& h, int n_active) {
  std::vector<int> idx(static_cast<std::size_t>(h.size()));
  for (int u = 0; u < h.size(); ++u) idx[u] = u;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::norm(h[a]) > std::norm(h[b]); });
  idx.resize(static_cast<std::size_t>(n_active));
  return Aag::from_indices(static_cast<int>(h.size()), std::move(idx));
}

}  // namespace

const char* to_string(Scheme s) noexcept {
  for (const auto& e : kSchemeNames) {
    if (e.scheme == s) return e.name;
  }
  return "unknown";
}

const char* to_string(RateMetric m) noexcept {
  return m == RateMetric::kExactMc ? "exact-mc" : "asr-closed";
}

Scheme parse_scheme(const std::string& name) {
  for (const auto& e : kSchemeNames) {
    if (name == e.name) return e.scheme;
  }
  fail(ErrorKind::kParse, "unknown scheme '" + name + "'");
}

RateMetric parse_rate_metric(const std::string& name) {
  if (name == "exact-mc") return RateMetric::kExactMc;
  if (name == "asr-closed") return RateMetric::kAsrClosed;
  fail(ErrorKind::kParse, "unknown rate_metric '" + name + "'");
}

void ExperimentSpec::validate() const {
  SystemConfig probe = system;
  probe.validate();
  make_constellation(system.mod_order);
  if (snr_db.empty()) fail(ErrorKind::kInvalidConfig, "snr: grid must be nonempty");
  for (double s : snr_db) {
    if (!std::isfinite(s)) fail(ErrorKind::kInvalidConfig, "snr: entries must be finite");
  }
  if (n_realizations < 1) fail(ErrorKind::kInvalidConfig, "n_realizations: must be >= 1");
  if (schemes.empty()) fail(ErrorKind::kInvalidConfig, "schemes: at least one scheme required");
  if (mc_samples < 1) fail(ErrorKind::kInvalidConfig, "mc_samples: must be >= 1");
  sa.validate();
  if (!(es_gd.gd.mu0 > 0.0)) fail(ErrorKind::kInvalidConfig, "gd.mu0: must be > 0");
  if (!(es_gd.gd.mu_min > 0.0)) fail(ErrorKind::kInvalidConfig, "gd.mu_min: must be > 0");
  if (es_gd.gd.n_mc < 1) fail(ErrorKind::kInvalidConfig, "gd.n_mc: must be >= 1");
  if (es_gd.restarts < 1) fail(ErrorKind::kInvalidConfig, "gd.restarts: must be >= 1");
  if (!(sca.epsilon > 0.0)) fail(ErrorKind::kInvalidConfig, "sca.epsilon: must be > 0");
  if (sca.max_outer < 1) fail(ErrorKind::kInvalidConfig, "sca.max_outer: must be >= 1");
  if (!(dinkelbach.epsilon > 0.0)) {
    fail(ErrorKind::kInvalidConfig, "dinkelbach.epsilon: must be > 0");
  }
  if (dinkelbach.max_iter < 1) fail(ErrorKind::kInvalidConfig, "dinkelbach.max_iter: must be >= 1");
}

double noise_variance(double total_power, double snr_db) {
  return total_power * std::pow(10.0, -snr_db / 10.0);
}

SystemConfig config_at_snr(const ExperimentSpec& spec, double snr_db) {
  SystemConfig c = spec.system;
  c.noise_var_bob = noise_variance(c.total_power, snr_db);
  c.noise_var_eve = c.noise_var_bob;
  return c;
}

ExperimentSpec parse_spec_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::kParse, std::string("malformed spec: ") + e.what());
  }
  if (!root.IsMap()) fail(ErrorKind::kParse, "spec must be a mapping");
  reject_unknown(root,
                 {"n_tx", "n_active", "mod_order", "power_split", "total_power", "csi_err_var",
                  "snr", "n_realizations", "schemes", "mc_samples", "rate_metric", "output",
                  "seed", "sa", "gd", "sca", "dinkelbach"},
                 "");
  for (const char* key : {"n_tx", "snr", "schemes"}) {
    if (!root[key]) fail(ErrorKind::kParse, std::string("missing required key '") + key + "'");
  }

  ExperimentSpec spec;
  SystemConfig& sys = spec.system;
  sys.n_tx = read<int>(root, "n_tx");
  if (sys.n_tx < 2) fail(ErrorKind::kInvalidConfig, "n_tx: must be >= 2");
  sys.n_active = derive_n_active(sys.n_tx);
  read_opt(root, "n_active", sys.n_active);
  sys.mod_order = 4;
  read_opt(root, "mod_order", sys.mod_order);
  sys.power_split = 0.5;
  read_opt(root, "power_split", sys.power_split);
  sys.total_power = sys.n_active;
  read_opt(root, "total_power", sys.total_power);
  read_opt(root, "csi_err_var", sys.csi_err_var);

  spec.snr_db = read<std::vector<double>>(root, "snr");
  for (const std::string& s : read<std::vector<std::string>>(root, "schemes")) {
    spec.schemes.push_back(parse_scheme(s));
  }
  read_opt(root, "n_realizations", spec.n_realizations);
  read_opt(root, "mc_samples", spec.mc_samples);
  read_opt(root, "output", spec.output);
  read_opt(root, "seed", spec.seed);
  sys.rng_seed = spec.seed;
  spec.rate_metric = sys.alphabet_size() <= kExactMetricMaxAlphabet ? RateMetric::kExactMc
                                                                     : RateMetric::kAsrClosed;
  if (root["rate_metric"]) spec.rate_metric = parse_rate_metric(read<std::string>(root, "rate_metric"));

  if (const YAML::Node sa = section(root, "sa")) {
    reject_unknown(sa,
                   {"c0", "cf", "cooling_alpha", "sample_size", "equilibrium_len",
                    "max_mutations", "steepest", "probes", "chi0"},
                   "sa.");
    if (sa["c0"]) spec.sa.c0 = read<double>(sa, "c0", "sa.");
    read_opt(sa, "cf", spec.sa.cf, "sa.");
    read_opt(sa, "cooling_alpha", spec.sa.cooling_alpha, "sa.");
    read_opt(sa, "sample_size", spec.sa.sample_size, "sa.");
    read_opt(sa, "equilibrium_len", spec.sa.equilibrium_len, "sa.");
    read_opt(sa, "max_mutations", spec.sa.max_mutations, "sa.");
    read_opt(sa, "steepest", spec.sa.steepest, "sa.");
    read_opt(sa, "probes", spec.sa.probes, "sa.");
    read_opt(sa, "chi0", spec.sa.chi0, "sa.");
  }
  if (spec.sa.sample_size == 0) spec.sa.sample_size = sys.n_active;
  if (spec.sa.equilibrium_len == 0) spec.sa.equilibrium_len = 10 * sys.n_active;

  if (const YAML::Node gd = section(root, "gd")) {
    reject_unknown(gd, {"mu0", "mu_min", "max_iter", "n_mc", "restarts", "max_groups"}, "gd.");
    read_opt(gd, "mu0", spec.es_gd.gd.mu0, "gd.");
    read_opt(gd, "mu_min", spec.es_gd.gd.mu_min, "gd.");
    read_opt(gd, "max_iter", spec.es_gd.gd.max_iter, "gd.");
    read_opt(gd, "n_mc", spec.es_gd.gd.n_mc, "gd.");
    read_opt(gd, "restarts", spec.es_gd.restarts, "gd.");
    read_opt(gd, "max_groups", spec.es_gd.max_groups, "gd.");
  }
  if (const YAML::Node sca = section(root, "sca")) {
    reject_unknown(sca, {"epsilon", "max_outer", "max_inner"}, "sca.");
    read_opt(sca, "epsilon", spec.sca.epsilon, "sca.");
    read_opt(sca, "max_outer", spec.sca.max_outer, "sca.");
    read_opt(sca, "max_inner", spec.sca.max_inner, "sca.");
  }
  if (const YAML::Node d = section(root, "dinkelbach")) {
    reject_unknown(d, {"epsilon", "max_iter"}, "dinkelbach.");
    read_opt(d, "epsilon", spec.dinkelbach.epsilon, "dinkelbach.");
    read_opt(d, "max_iter", spec.dinkelbach.max_iter, "dinkelbach.");
  }

  // noise variances follow the SNR grid; keep a valid placeholder
  sys.noise_var_bob = noise_variance(sys.total_power, spec.snr_db.empty() ? 0.0 : spec.snr_db[0]);
  sys.noise_var_eve = sys.noise_var_bob;
  spec.validate();
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

std::string serialize_spec(const ExperimentSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  const SystemConfig& s = spec.system;
  out << YAML::BeginMap;
  out << YAML::Key << "n_tx" << YAML::Value << s.n_tx;
  out << YAML::Key << "n_active" << YAML::Value << s.n_active;
  out << YAML::Key << "mod_order" << YAML::Value << s.mod_order;
  out << YAML::Key << "power_split" << YAML::Value << s.power_split;
  out << YAML::Key << "total_power" << YAML::Value << s.total_power;
  out << YAML::Key << "csi_err_var" << YAML::Value << s.csi_err_var;
  out << YAML::Key << "snr" << YAML::Value << YAML::Flow << spec.snr_db;
  out << YAML::Key << "n_realizations" << YAML::Value << spec.n_realizations;
  out << YAML::Key << "schemes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Scheme sc : spec.schemes) out << to_string(sc);
  out << YAML::EndSeq;
  out << YAML::Key << "mc_samples" << YAML::Value << spec.mc_samples;
  out << YAML::Key << "rate_metric" << YAML::Value << to_string(spec.rate_metric);
  out << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << spec.output;
  out << YAML::Key << "seed" << YAML::Value << spec.seed;

  out << YAML::Key << "sa" << YAML::Value << YAML::BeginMap;
  if (spec.sa.c0) out << YAML::Key << "c0" << YAML::Value << *spec.sa.c0;
  out << YAML::Key << "cf" << YAML::Value << spec.sa.cf;
  out << YAML::Key << "cooling_alpha" << YAML::Value << spec.sa.cooling_alpha;
  out << YAML::Key << "sample_size" << YAML::Value << spec.sa.sample_size;
  out << YAML::Key << "equilibrium_len" << YAML::Value << spec.sa.equilibrium_len;
  out << YAML::Key << "max_mutations" << YAML::Value << spec.sa.max_mutations;
  out << YAML::Key << "steepest" << YAML::Value << spec.sa.steepest;
  out << YAML::Key << "probes" << YAML::Value << spec.sa.probes;
  out << YAML::Key << "chi0" << YAML::Value << spec.sa.chi0;
  out << YAML::EndMap;

  out << YAML::Key << "gd" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mu0" << YAML::Value << spec.es_gd.gd.mu0;
  out << YAML::Key << "mu_min" << YAML::Value << spec.es_gd.gd.mu_min;
  out << YAML::Key << "max_iter" << YAML::Value << spec.es_gd.gd.max_iter;
  out << YAML::Key << "n_mc" << YAML::Value << spec.es_gd.gd.n_mc;
  out << YAML::Key << "restarts" << YAML::Value << spec.es_gd.restarts;
  out << YAML::Key << "max_groups" << YAML::Value << spec.es_gd.max_groups;
  out << YAML::EndMap;

  out << YAML::Key << "sca" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilon" << YAML::Value << spec.sca.epsilon;
  out << YAML::Key << "max_outer" << YAML::Value << spec.sca.max_outer;
  out << YAML::Key << "max_inner" << YAML::Value << spec.sca.max_inner;
  out << YAML::EndMap;

  out << YAML::Key << "dinkelbach" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilon" << YAML::Value << spec.dinkelbach.epsilon;
  out << YAML::Key << "max_iter" << YAML::Value << spec.dinkelbach.max_iter;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint32_t> indices) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  words.insert(words.end(), indices.begin(), indices.end());
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

ChannelRealization sweep_channel(const ExperimentSpec& spec, int realization) {
  Rng rng = derive_rng(spec.seed, {0u, static_cast<std::uint32_t>(realization)});
  return sample_channel(spec.system, rng);
}

SchemeOutcome run_scheme(Scheme scheme, const ChannelRealization& ch, const SystemConfig& config,
                         const SuperAlphabet& alphabet, const ExperimentSpec& spec, Rng& rng) {
  switch (scheme) {
    case Scheme::kEsGd: {
      const EsGdResult r = es_plus_gd(ch, config, alphabet, spec.es_gd, rng);
      CMat q = r.t.covariance();
      q = (q + q.adjoint()) / 2.0;
      return {r.aag, AnCovariance(q / q.trace().real()), static_cast<double>(r.iterations)};
    }
    case Scheme::kJointSa: {
      const SchemeResult r = joint_sa_max_asr(ch, config, alphabet, spec.sa, spec.sca, rng);
      return {r.aag, r.q, static_cast<double>(r.iterations)};
    }
    case Scheme::kSeparateSa: {
      const SchemeResult r = separate_sa_max_asr(ch, config, alphabet, spec.sa, spec.sca, rng);
      return {r.aag, r.q, static_cast<double>(r.iterations)};
    }
    case Scheme::kMaxRSinr: {
      const SchemeResult r = max_r_sinr_scheme(ch, config, spec.sa, spec.dinkelbach, rng, true);
      return {r.aag, r.q, static_cast<double>(r.q_trace.entries.size() - 1)};
    }
    case Scheme::kNspBaseline: {
      const Aag aag = strongest_antennas(ch.h, config.n_active);
      return {aag, nsp_baseline(restrict_to(ch.h, aag)), 0.0};
    }
  }
  fail(ErrorKind::kRuntime, "unhandled scheme");
}

double evaluate_sr(const SchemeOutcome& outcome, const ChannelRealization& ch,
                   const SystemConfig& config, const SuperAlphabet& alphabet,
                   const ExperimentSpec& spec, Rng& rng) {
  const SubChannel sub = select_subchannel(ch, outcome.aag);
  double sr = 0.0;
  if (spec.rate_metric == RateMetric::kExactMc) {
    const double i_b = mi_bob_exact(sub.h, outcome.q, alphabet, config, spec.mc_samples, rng);
    const double i_e = mi_eve_exact(sub.g_est, outcome.q, alphabet, config, spec.mc_samples, rng);
    sr = instantaneous_sr(i_b, i_e).sr;
  } else {
    sr = std::max(asr_closed(sub.h, sub.g_est, outcome.q, config, alphabet).r_a, 0.0);
  }
  if (!std::isfinite(sr)) fail(ErrorKind::kNumeric, "non-finite secrecy rate");
  return sr;
}

SweepResult run_sweep(const ExperimentSpec& spec, int workers) {
  spec.validate();
  if (workers < 1) fail(ErrorKind::kInvalidConfig, "workers must be >= 1");
  const SuperAlphabet alphabet = build_super_alphabet(spec.system);
  const std::size_t n_snr = spec.snr_db.size();
  const std::size_t n_sch = spec.schemes.size();
  const std::size_t n_real = static_cast<std::size_t>(spec.n_realizations);

  struct Cell {
    double sr = 0.0;
    double iterations = 0.0;
    double seconds = 0.0;
    bool ok = false;
    std::string error;
  };
  std::vector<Cell> cells(n_real * n_snr * n_sch);
  auto cell = [&](std::size_t r, std::size_t k, std::size_t s) -> Cell& {
    return cells[(r * n_snr + k) * n_sch + s];
  };

  auto work = [&](std::size_t first) {
    for (std::size_t r = first; r < n_real; r += static_cast<std::size_t>(workers)) {
      const ChannelRealization ch = sweep_channel(spec, static_cast<int>(r));
      for (std::size_t k = 0; k < n_snr; ++k) {
        const SystemConfig config = config_at_snr(spec, spec.snr_db[k]);
        for (std::size_t s = 0; s < n_sch; ++s) {
          Cell& c = cell(r, k, s);
          Rng rng = derive_rng(spec.seed, {1u, static_cast<std::uint32_t>(r),
                                           static_cast<std::uint32_t>(k),
                                           static_cast<std::uint32_t>(spec.schemes[s])});
          const auto start = std::chrono::steady_clock::now();
          try {
            const SchemeOutcome o = run_scheme(spec.schemes[s], ch, config, alphabet, spec, rng);
            c.sr = evaluate_sr(o, ch, config, alphabet, spec, rng);
            c.iterations = o.iterations;
            c.ok = true;
          } catch (const Error& e) {
            c.error = e.what();
          }
          c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, static_cast<std::size_t>(w));
    for (std::thread& t : pool) t.join();
  }

  SweepResult result;
  result.metadata = {
      {"version", kVersion},
      {"seed", std::to_string(spec.seed)},
      {"snr_definition", kSnrDefinition},
      {"rate_metric", to_string(spec.rate_metric)},
  };
  std::istringstream resolved(serialize_spec(spec));
  for (std::string line; std::getline(resolved, line);) result.metadata.emplace_back("config", line);

  for (std::size_t s = 0; s < n_sch; ++s) {
    for (std::size_t k = 0; k < n_snr; ++k) {
      double sum = 0.0;
      double sum_sq = 0.0;
      double iters = 0.0;
      double secs = 0.0;
      std::size_t ok = 0;
      for (std::size_t r = 0; r < n_real; ++r) {
        const Cell& c = cell(r, k, s);
        secs += c.seconds;
        if (!c.ok) {
          std::cerr << "warning: " << to_string(spec.schemes[s]) << " failed on realization " << r
                    << " at " << spec.snr_db[k] << " dB: " << c.error << "\n";
          continue;
        }
        ++ok;
        sum += c.sr;
        sum_sq += c.sr * c.sr;
        iters += c.iterations;
      }
      const std::size_t failed = n_real - ok;
      if (static_cast<double>(failed) > 0.05 * static_cast<double>(n_real)) {
        fail(ErrorKind::kRuntime, fmt::format("{} failed on {} of {} realizations at {} dB",
                                              to_string(spec.schemes[s]), failed, n_real,
                                              spec.snr_db[k]));
      }
      const double n = static_cast<double>(ok);
      const double mean = sum / n;
      const double var = ok > 1 ? std::max(sum_sq - n * mean * mean, 0.0) / (n - 1.0) : 0.0;
      result.rows.push_back({to_string(spec.schemes[s]), spec.snr_db[k], mean,
                             std::sqrt(var / n), iters / n,
                             secs / static_cast<double>(n_real)});
    }
  }
  return result;
}

std::vector<TraceRow> run_trace(const ExperimentSpec& spec, Scheme scheme, double snr_db) {
  spec.validate();
  const SuperAlphabet alphabet = build_super_alphabet(spec.system);
  const SystemConfig config = config_at_snr(spec, snr_db);
  const ChannelRealization ch = sweep_channel(spec, 0);
  Rng rng = derive_rng(spec.seed, {2u, static_cast<std::uint32_t>(scheme)});

  std::vector<TraceRow> rows;
  auto dump = [&](const std::string& phase, const OptimTrace& trace) {
    for (const TraceEntry& e : trace.entries) {
      rows.push_back({phase, e.step, e.objective, e.best, e.param});
    }
  };
  switch (scheme) {
    case Scheme::kJointSa: {
      const SchemeResult r = joint_sa_max_asr(ch, config, alphabet, spec.sa, spec.sca, rng);
      dump("selection", r.selection_trace);
      dump("sca", r.q_trace);
      break;
    }
    case Scheme::kSeparateSa: {
      const SchemeResult r = separate_sa_max_asr(ch, config, alphabet, spec.sa, spec.sca, rng);
      dump("selection", r.selection_trace);
      dump("sca", r.q_trace);
      break;
    }
    case Scheme::kMaxRSinr: {
      const SchemeResult r = max_r_sinr_scheme(ch, config, spec.sa, spec.dinkelbach, rng, true);
      dump("selection", r.selection_trace);
      dump("dinkelbach", r.q_trace);
      break;
    }
    case Scheme::kEsGd: {
      const SubChannel sub = select_subchannel(ch, Aag::leading(config.n_tx, config.n_active));
      const GdResult r = gd_anpm(sub.h, sub.g_est, config, alphabet,
                                 AnProjection::random(config.n_active, rng), spec.es_gd.gd, rng);
      dump("gd", r.trace);
      break;
    }
    case Scheme::kNspBaseline: {
      const Aag aag = strongest_antennas(ch.h, config.n_active);
      const SubChannel sub = select_subchannel(ch, aag);
      const double r_a = asr_closed(sub.h, sub.g_est, nsp_baseline(sub.h), config, alphabet).r_a;
      rows.push_back({"nsp", 0, r_a, r_a, 0.0});
      break;
    }
  }
  return rows;
}

void write_csv(const SweepResult& result, std::ostream& out) {
  for (const auto& [key, value] : result.metadata) out << "# " << key << ": " << value << "\n";
  out << "scheme,snr_db,ergodic_sr_bits,std_error,mean_iterations,wall_time_s\n";
  for (const SweepRow& r : result.rows) {
    out << r.scheme << ',' << num(r.snr_db) << ',' << num(r.ergodic_sr_bits) << ','
        << num(r.std_error) << ',' << num(r.mean_iterations) << ',' << num(r.wall_time_s) << "\n";
  }
}

void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  write_csv(result, out);
  out.flush();
  if (!out) fail(ErrorKind::kIo, "write to '" + path + "' failed");
}

void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out) {
  out << "phase,step,objective,best,param\n";
  for (const TraceRow& r : rows) {
    out << r.phase << ',' << r.step << ',' << num(r.objective) << ',' << num(r.best) << ','
        << num(r.param) << "\n";
  }
}

}  // namespace ssm
