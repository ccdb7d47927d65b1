#include "ssm/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "ssm/aag_select.hpp"
#include "ssm/an_optim.hpp"
#include "ssm/bench.hpp"
#include "ssm/core_model.hpp"
#include "ssm/error.hpp"
#include "ssm/rates.hpp"

namespace ssm {

namespace {

RowVec random_row(int n, Rng& rng) {
  RowVec r(n);
  for (int k = 0; k < n; ++k) r[k] = complex_normal(rng);
  return r;
}

// Random trace-1 PSD matrix; rank drawn uniformly in [1, n].
CMat random_covariance(int n, Rng& rng) {
  const int rank = std::uniform_int_distribution<int>(1, n)(rng);
  CMat a(n, rank);
  for (int c = 0; c < rank; ++c) {
    for (int r = 0; r < n; ++r) a(r, c) = complex_normal(rng);
  }
  CMat q = a * a.adjoint();
  q = (q + q.adjoint()) / 2.0;
  return q / q.trace().real();
}

SystemConfig config_for(int n_tx, int n_active, int mod_order, double snr_db, double csi_err) {
  SystemConfig c;
  c.n_tx = n_tx;
  c.n_active = n_active;
  c.mod_order = mod_order;
  c.total_power = n_active;
  c.power_split = 0.5;
  c.noise_var_bob = noise_variance(c.total_power, snr_db);
  c.noise_var_eve = c.noise_var_bob;
  c.csi_err_var = csi_err;
  return c;
}

struct Outcome {
  bool passed;
  std::string detail;
};

// 1: analytic gradient vs central differences on frozen draws
Outcome check_gradient(std::uint64_t seed) {
  Rng rng(seed);
  const SystemConfig config = config_for(5, 4, 2, 6.0, 0.25);
  const SuperAlphabet alphabet = build_super_alphabet(config);
  const ChannelRealization ch = sample_channel(config, rng);
  const SubChannel sub = select_subchannel(ch, Aag::leading(5, 4));
  const FrozenSrEstimator est(sub.h, sub.g_est, config, alphabet, draw_mc(4, 200, rng));
  const CMat t = AnProjection::random(4, rng).matrix();
  const CMat analytic = 2.0 * est.gradient(t);  // gradient in (Re T, Im T)

  const double step = 1e-5;
  auto sr_at = [&](const CMat& m) { return est.secrecy_rate(CMat(m * m.adjoint())); };
  double worst = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      CMat up = t, dn = t;
      up(r, c) += step;
      dn(r, c) -= step;
      const double d_re = (sr_at(up) - sr_at(dn)) / (2.0 * step);
      up = t;
      dn = t;
      up(r, c) += cplx(0.0, step);
      dn(r, c) -= cplx(0.0, step);
      const double d_im = (sr_at(up) - sr_at(dn)) / (2.0 * step);
      const cplx fd(d_re, d_im);
      const double rel = std::abs(fd - analytic(r, c)) / std::max(std::abs(analytic(r, c)), 1e-12);
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-3, fmt::format("max per-entry relative error {:.3e} (bound 1e-3)", worst)};
}

// 2: B <= B-tilde, E-tilde >= E-bar, tight at Q = Q0
Outcome check_sandwich(std::uint64_t seed) {
  Rng rng(seed);
  int violations = 0;
  double worst_tight = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double snr = std::uniform_real_distribution<double>(-5.0, 25.0)(rng);
    const double err = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    const SystemConfig config = config_for(4, 4, 4, snr, err);
    const SuperAlphabet alphabet = build_super_alphabet(config);
    const AsrModel model(random_row(4, rng), random_row(4, rng), config, alphabet);
    const CMat q = random_covariance(4, rng);
    const CMat q0 = random_covariance(4, rng);
    const double sb = model.s_bob(q), se = model.s_eve(q);
    const double sb0 = model.s_bob(q0), se0 = model.s_eve(q0);
    const SurrogateValue v = model.surrogate(sb, se, sb0, se0);
    if (model.bob_term(sb) > v.b_upper + 1e-9) ++violations;
    if (model.eve_term(se) < v.e_lower - 1e-9) ++violations;
    const SurrogateValue tight = model.surrogate(sb0, se0, sb0, se0);
    const double gap = std::max(std::abs(tight.b_upper - model.bob_term(sb0)),
                                std::abs(tight.e_lower - model.eve_term(se0)));
    worst_tight = std::max(worst_tight, gap);
    if (gap > 1e-9) ++violations;
  }
  return {violations == 0,
          fmt::format("{} violations over 100 pairs, max tightness gap {:.2e}", violations,
                      worst_tight)};
}

// 3: R_A nondecreasing over outer iterations, converges within 200
Outcome check_mm(std::uint64_t seed) {
  Rng rng(seed);
  int bad_steps = 0;
  int unconverged = 0;
  int longest = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double snr = std::uniform_real_distribution<double>(0.0, 20.0)(rng);
    const SystemConfig config = config_for(4, 4, 4, snr, 0.25);
    const SuperAlphabet alphabet = build_super_alphabet(config);
    const AsrModel model(random_row(4, rng), random_row(4, rng), config, alphabet);
    const ScaResult r = sca_max_asr(model, AnCovariance(random_covariance(4, rng)),
                                    ScaOptions{1e-4, 200, 500});
    const auto& e = r.trace.entries;
    for (std::size_t k = 1; k < e.size(); ++k) {
      if (e[k].objective < e[k - 1].objective - 1e-8) ++bad_steps;
    }
    if (!r.trace.converged) ++unconverged;
    longest = std::max(longest, static_cast<int>(e.size()) - 1);
  }
  return {bad_steps == 0 && unconverged == 0,
          fmt::format("{} decreasing steps, {} unconverged, longest run {} outer iterations",
                      bad_steps, unconverged, longest)};
}

// Local random search over unit u (Q = u u^H): 1000 uniform starts, then
// Gaussian perturbations of the incumbent with 1/5-success step control.
double rank1_search_oracle(const RowVec& h, const RowVec& g, const SystemConfig& config,
                           int budget, Rng& rng) {
  const int n = static_cast<int>(h.size());
  auto ratio = [&](const CVec& u) {
    const double gu = std::norm((g * u).value());
    const double hu = std::norm((h * u).value());
    return (config.p2() * gu + config.csi_err_var * config.p2() + config.noise_var_eve) /
           (config.p2() * hu + config.noise_var_bob);
  };
  auto unit = [&](double scale, const CVec& centre) {
    CVec u = centre;
    for (int k = 0; k < n; ++k) u[k] += scale * complex_normal(rng);
    return CVec(u / u.norm());
  };
  const int starts = std::min(1000, budget);
  CVec best = unit(1.0, CVec::Zero(n));
  double best_value = ratio(best);
  for (int s = 1; s < starts; ++s) {
    const CVec u = unit(1.0, CVec::Zero(n));
    const double v = ratio(u);
    if (v > best_value) {
      best = u;
      best_value = v;
    }
  }
  double radius = 0.3;
  for (int s = starts; s < budget; ++s) {
    const CVec u = unit(radius, best);
    const double v = ratio(u);
    if (v > best_value) {
      best = u;
      best_value = v;
      radius = std::min(1.0, radius * 2.0);
    } else {
      radius = std::max(1e-12, radius * 0.8408964152537145);  // 2^(-1/4)
    }
  }
  return best_value;
}

// 4: Dinkelbach monotonicity, fixed point and rank-1 random-search oracle
Outcome check_dinkelbach(std::uint64_t seed) {
  Rng rng(seed);
  int failures = 0;
  double worst_gap = 0.0;
  double worst_fixed = 0.0;
  int longest = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const double snr = std::uniform_real_distribution<double>(0.0, 20.0)(rng);
    const SystemConfig config = config_for(4, 4, 4, snr, 0.25);
    const RowVec h = random_row(4, rng);
    const RowVec g = random_row(4, rng);
    const DinkelbachResult d = dinkelbach_ancm(h, g, config, DinkelbachOptions{1e-4, 50});
    const auto& e = d.trace.entries;
    for (std::size_t k = 1; k < e.size(); ++k) {
      if (e[k].objective < e[k - 1].objective - 1e-10) ++failures;
    }
    if (!d.trace.converged) ++failures;
    longest = std::max(longest, static_cast<int>(e.size()) - 1);
    const double fixed = std::abs(d.lambda - eve_sinr_term(g, d.q.matrix(), config) /
                                                 bob_sinr_term(h, d.q.matrix(), config));
    worst_fixed = std::max(worst_fixed, fixed);
    if (fixed > 1e-9) ++failures;

    const double oracle = rank1_search_oracle(h, g, config, 100000, rng);
    const double gap = std::abs(d.lambda - oracle);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-3) ++failures;
  }
  return {failures == 0,
          fmt::format("{} failures; max |lambda - oracle| {:.2e}, max fixed-point error {:.2e}, "
                      "longest run {} iterations",
                      failures, worst_gap, worst_fixed, longest)};
}

// 5: SA reaches the exhaustive optimum of both selection objectives
Outcome check_sa_vs_es(std::uint64_t seed) {
  Rng rng(seed);
  int hits_det = 0;
  int hits_table = 0;
  for (int run = 0; run < 100; ++run) {
    const SystemConfig config = config_for(7, 4, 4, 10.0, 0.25);
    const ChannelRealization ch = sample_channel(config, rng);
    const SuperAlphabet alphabet = build_super_alphabet(config);
    SaParams params;

    ObjectiveHandle det([&](const Aag& a) {
      const SubChannel sub = select_subchannel(ch, a);
      return det_ratio_logscore(sub.h, sub.g_est, config);
    });
    const double det_best = exhaustive_search(det, 7, 4).value;
    const SaResult sa_det = sa_search(det, Aag::leading(7, 4), params, rng);
    if (sa_det.best_value >= det_best - 1e-12) ++hits_det;

    const TriangularTables tables = build_triangular_tables(ch, config, alphabet.constellation());
    ObjectiveHandle table([&](const Aag& a) { return separate_rate_from_tables(tables, a); });
    const double table_best = exhaustive_search(table, 7, 4).value;
    const SaResult sa_table = sa_search(table, Aag::leading(7, 4), params, rng);
    if (sa_table.best_value >= table_best - 1e-12) ++hits_table;
  }
  return {hits_det >= 90 && hits_table >= 90,
          fmt::format("det-ratio {}/100, table objective {}/100 (need 90 each)", hits_det,
                      hits_table)};
}

// 6: neighbor sampler is uniform over the 12 swaps of a (7,4) mask
Outcome check_uniformity(std::uint64_t seed) {
  Rng rng(seed);
  const Aag base = Aag::from_indices(7, {0, 2, 3, 5});
  const std::vector<Aag> hood = neighborhood(base);
  std::vector<int> counts(hood.size(), 0);
  const int draws = 12000;
  for (int k = 0; k < draws; ++k) {
    const Aag n = neighbor(base, rng);
    const auto it = std::find(hood.begin(), hood.end(), n);
    if (it == hood.end()) return {false, "sampled mask outside the swap neighborhood"};
    ++counts[static_cast<std::size_t>(it - hood.begin())];
  }
  const double expected = static_cast<double>(draws) / hood.size();
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 99th percentile of chi-square with 11 degrees of freedom
  const double critical = 24.724970311318277;
  return {hood.size() == 12 && chi2 < critical,
          fmt::format("chi2 = {:.3f} over {} cells (p > 0.01 iff chi2 < {:.3f})", chi2,
                      hood.size(), critical)};
}

// 7: table-based separate rate equals the direct pair sums
Outcome check_tables(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double snr = std::uniform_real_distribution<double>(-5.0, 25.0)(rng);
    const double err = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    const SystemConfig config = config_for(8, 4, 4, snr, err);
    const SuperAlphabet alphabet = build_super_alphabet(config);
    const ChannelRealization ch = sample_channel(config, rng);
    std::vector<int> idx{0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(4);
    const Aag aag = Aag::from_indices(8, idx);
    const TriangularTables t = build_triangular_tables(ch, config, alphabet.constellation());
    const SubChannel sub = select_subchannel(ch, aag);
    const SeparateRates direct = separate_rate_direct(sub.h, sub.g_est, config, alphabet);
    worst = std::max(worst, std::abs(separate_rate_from_tables(t, aag) -
                                     (direct.i_e_s - direct.i_b_s)));
  }
  return {worst <= 1e-9, fmt::format("max deviation {:.2e} over 100 instances", worst)};
}

// 8: R_A approaches log2 of the large-scale ratio as N_s grows
Outcome check_large_scale(std::uint64_t seed) {
  Rng rng(seed);
  auto mean_gap = [&](int ns) {
    const SystemConfig config = config_for(ns, ns, 4, 10.0, 0.25);
    const SuperAlphabet alphabet = build_super_alphabet(config);
    double sum = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const RowVec h = random_row(ns, rng);
      const RowVec g = random_row(ns, rng);
      const AnCovariance q(random_covariance(ns, rng));
      const double r_a = asr_closed(h, g, q, config, alphabet).r_a;
      sum += std::abs(r_a - std::log2(large_scale_ratio(h, g, q, config)));
    }
    return sum / 20.0;
  };
  const double gap8 = mean_gap(8);
  const double gap64 = mean_gap(64);
  return {gap64 < gap8,
          fmt::format("mean |R_A - log2 R_L'|: {:.4f} at N_s=8, {:.4f} at N_s=64", gap8, gap64)};
}

std::string ordering_table(const SweepResult& r) {
  std::ostringstream os;
  for (const SweepRow& row : r.rows) {
    os << fmt::format("{}@{}dB={:.3f} ", row.scheme, row.snr_db, row.ergodic_sr_bits);
  }
  return os.str();
}

// 9: joint >= separate >= null-space baseline at every SNR point
Outcome check_small_array_ordering(std::uint64_t seed) {
  ExperimentSpec spec = parse_spec_text(
      "{n_tx: 7, n_active: 4, mod_order: 4, csi_err_var: 0.25, snr: [0, 5, 10, 15], "
      "n_realizations: 100, schemes: [joint-sa, separate-sa, nsp-baseline], "
      "rate_metric: exact-mc}");
  spec.seed = seed;
  const SweepResult r = run_sweep(spec, 1);
  bool ok = true;
  const std::size_t n_snr = spec.snr_db.size();
  for (std::size_t k = 0; k < n_snr; ++k) {
    const double joint = r.rows[0 * n_snr + k].ergodic_sr_bits;
    const double separate = r.rows[1 * n_snr + k].ergodic_sr_bits;
    const double nsp = r.rows[2 * n_snr + k].ergodic_sr_bits;
    ok = ok && joint >= separate && separate >= nsp;
  }
  return {ok, ordering_table(r)};
}

// 10: large-array Max-R-SINR operating point
Outcome check_large_array_point(std::uint64_t seed) {
  ExperimentSpec spec = parse_spec_text(
      "{n_tx: 100, n_active: 64, mod_order: 4, csi_err_var: 0.25, snr: [20], "
      "n_realizations: 20, schemes: [max-r-sinr], rate_metric: asr-closed}");
  spec.seed = seed;
  const SweepResult r = run_sweep(spec, 1);
  const double sr = r.rows.at(0).ergodic_sr_bits;
  return {sr >= 7.0, fmt::format("ergodic SR {:.4f} bits (bound 7.0, ceiling 8)", sr)};
}

// 11: null-space AN is invisible to Bob
Outcome check_nsp(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 16)(rng);
    const RowVec h = random_row(n, rng);
    worst = std::max(worst, quad_form(h, nsp_baseline(h).matrix()));
  }
  return {worst <= 1e-12, fmt::format("max h Q h^H = {:.2e} over 1000 channels", worst)};
}

std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
    out << line << "\n";
  }
  return out.str();
}

// 12: same spec and seed give the same bytes
Outcome check_determinism(std::uint64_t seed) {
  ExperimentSpec spec = parse_spec_text(
      "{n_tx: 5, n_active: 4, mod_order: 2, csi_err_var: 0.25, snr: [0, 10], "
      "n_realizations: 3, schemes: [es-gd, joint-sa, separate-sa, max-r-sinr, nsp-baseline], "
      "mc_samples: 100, gd: {n_mc: 100, restarts: 2, max_iter: 20}}");
  spec.seed = seed;
  std::ostringstream a, b;
  write_csv(run_sweep(spec, 1), a);
  write_csv(run_sweep(spec, 2), b);
  const bool same = strip_wall_time(a.str()) == strip_wall_time(b.str());
  return {same, same ? "two runs (1 and 2 workers) byte-identical apart from wall time"
                     : "CSV outputs differ"};
}

struct CheckDef {
  const char* name;
  std::function<Outcome(std::uint64_t)> run;
};

const std::vector<CheckDef>& checks() {
  static const std::vector<CheckDef> defs = {
      {"gradient-fidelity", check_gradient},
      {"surrogate-sandwich", check_sandwich},
      {"mm-monotonicity", check_mm},
      {"dinkelbach-correctness", check_dinkelbach},
      {"sa-vs-exhaustive", check_sa_vs_es},
      {"neighbor-uniformity", check_uniformity},
      {"separate-table-equivalence", check_tables},
      {"large-scale-trend", check_large_scale},
      {"small-array-ordering", check_small_array_ordering},
      {"large-array-point", check_large_array_point},
      {"nsp-invariant", check_nsp},
      {"determinism", check_determinism},
  };
  return defs;
}

}  // namespace

CheckResult run_check(int id, std::uint64_t seed) {
  CheckResult r;
  r.id = id;
  if (id < 1 || id > kAcceptanceCount) {
    r.name = "unknown";
    r.detail = "no such check";
    return r;
  }
  const CheckDef& def = checks()[static_cast<std::size_t>(id - 1)];
  r.name = def.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Outcome o = def.run(seed + static_cast<std::uint64_t>(id));
    r.passed = o.passed;
    r.detail = o.detail;
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CheckResult> run_acceptance(const std::vector<int>& ids, std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(run_check(id, seed));
  return out;
}

std::string format_check(const CheckResult& r) {
  return fmt::format("{} {:>2} {:<27} {} ({:.2f} s)", r.passed ? "PASS" : "FAIL", r.id, r.name,
                     r.detail, r.seconds);
}

}  // namespace ssm
