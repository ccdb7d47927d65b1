#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "ssm/aag_select.hpp"
#include "ssm/an_optim.hpp"
#include "test_util.hpp"

using namespace ssm;
using ssm::testing::throws_kind;

namespace {

int hamming(const Aag& a, const Aag& b) {
  int d = 0;
  for (int k = 0; k < a.n_tx(); ++k) d += a.mask()[k] != b.mask()[k];
  return d;
}

ObjectiveHandle::Function det_objective(const ChannelRealization& ch, const SystemConfig& c) {
  return [&ch, &c](const Aag& a) {
    const SubChannel sc = select_subchannel(ch, a);
    return det_ratio_logscore(sc.h, sc.g_est, c);
  };
}

}  // namespace

TEST_CASE("enumeration") {
  CHECK(binomial(7, 4) == 35.0);
  CHECK(binomial(15, 8) == 6435.0);
  const auto a = enumerate_aags(7, 4);
  CHECK(a.size() == 35);
  std::set<std::string> keys;
  for (const Aag& g : a) {
    keys.insert(g.key());
    CHECK(g.n_active() == 4);
  }
  CHECK(keys.size() == 35);
  CHECK(enumerate_aags(15, 8).size() == 6435);
  const auto one = enumerate_aags(4, 4);
  REQUIRE(one.size() == 1);
  CHECK(one[0].key() == "1111");
}

TEST_CASE("neighbors") {
  Rng rng(1);
  const Aag seed = Aag::from_indices(7, {0, 2, 3, 6});
  const auto hood = neighborhood(seed);
  CHECK(hood.size() == 12);
  std::map<std::string, int> counts;
  for (const Aag& n : hood) {
    CHECK(hamming(n, seed) == 2);
    counts[n.key()] = 0;
  }
  CHECK(counts.size() == 12);

  const int draws = 12000;
  for (int t = 0; t < draws; ++t) {
    const Aag n = neighbor(seed, rng);
    CHECK(n.n_active() == 4);
    REQUIRE(counts.count(n.key()) == 1);
    ++counts[n.key()];
  }
  double chi2 = 0.0;
  const double expected = draws / 12.0;
  for (const auto& [key, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 24.724970311318277);  // 0.99 quantile, 11 degrees of freedom

  Aag walk = Aag::leading(20, 9);
  for (int t = 0; t < 1000; ++t) {
    walk = neighbor(walk, rng);
    CHECK(std::count(walk.mask().begin(), walk.mask().end(), 1) == 9);
  }
}

TEST_CASE("Metropolis rule") {
  Rng rng(2);
  int accepted = 0;
  for (int t = 0; t < 1000; ++t) {
    CHECK(metropolis_accept(0.0, 0.1, rng));
    CHECK(metropolis_accept(3.0, 0.1, rng));
    CHECK_FALSE(metropolis_accept(kNegInf, 1e9, rng));
  }
  const double c = 0.37;
  for (int t = 0; t < 10000; ++t) accepted += metropolis_accept(-c * std::log(2.0), c, rng);
  CHECK(std::abs(accepted / 10000.0 - 0.5) <= 0.02);
}

TEST_CASE("initial temperature") {
  Rng rng(3);
  SUBCASE("flat objective falls back to one") {
    ObjectiveHandle flat([](const Aag&) { return 2.5; });
    CHECK(initial_temperature(flat, Aag::leading(7, 4), 50, 0.8, rng) == 1.0);
  }
  SUBCASE("single deteriorating probe") {
    const Aag seed = Aag::leading(7, 4);
    const double d = 0.3;
    ObjectiveHandle f([&](const Aag& a) { return -d * hamming(a, seed) / 2.0; });
    CHECK(initial_temperature(f, seed, 1, 0.8, rng) ==
          doctest::Approx(d / std::log(1.25)).epsilon(1e-14));
  }
  SUBCASE("acceptance of deteriorating moves is near the target ratio") {
    SystemConfig c = SystemConfig::for_antennas(15);
    const ChannelRealization ch = sample_channel(c, rng);
    ObjectiveHandle f(det_objective(ch, c));
    const Aag seed = Aag::leading(15, 8);
    const double c0 = initial_temperature(f, seed, 50, 0.8, rng);
    Aag s = seed;
    double v = f(s);
    int worse = 0;
    int taken = 0;
    for (int t = 0; t < 5000; ++t) {
      const Aag n = neighbor(s, rng);
      const double vn = f(n);
      if (vn < v) {
        ++worse;
        taken += metropolis_accept(vn - v, c0, rng);
      }
      s = n;
      v = vn;
    }
    REQUIRE(worse > 100);
    CHECK(std::abs(static_cast<double>(taken) / worse - 0.8) <= 0.1);
  }
}

TEST_CASE("objective memoization") {
  int calls = 0;
  ObjectiveHandle f([&](const Aag& a) {
    ++calls;
    return static_cast<double>(a.active_indices().front());
  });
  const Aag a = Aag::leading(5, 2);
  const Aag b = Aag::from_indices(5, {3, 4});
  CHECK(f(a) == 0.0);
  CHECK(f(b) == 3.0);
  CHECK(f(a) == 0.0);
  CHECK(calls == 2);
  CHECK(f.evaluations() == 2);

  int raw = 0;
  ObjectiveHandle g([&](const Aag&) { return static_cast<double>(++raw); }, false);
  g(a);
  g(a);
  CHECK(raw == 2);
}

TEST_CASE("annealing search") {
  SUBCASE("finds a hidden target mask") {
    const Aag target = Aag::from_indices(10, {1, 4, 5, 8});
    int hits = 0;
    for (int run = 0; run < 100; ++run) {
      Rng rng(1000 + run);
      ObjectiveHandle f([&](const Aag& a) { return -static_cast<double>(hamming(a, target)); });
      const SaResult r = sa_search(f, Aag::leading(10, 4), {}, rng);
      hits += r.best == target;
      for (std::size_t k = 1; k < r.trace.entries.size(); ++k) {
        CHECK(r.trace.entries[k].best >= r.trace.entries[k - 1].best);
      }
    }
    CHECK(hits >= 95);
  }
  SUBCASE("matches exhaustive search on the determinant score") {
    const SystemConfig c = SystemConfig::for_antennas(7);
    int hits = 0;
    for (int run = 0; run < 100; ++run) {
      Rng rng(2000 + run);
      const ChannelRealization ch = sample_channel(c, rng);
      ObjectiveHandle es(det_objective(ch, c));
      ObjectiveHandle sa(det_objective(ch, c));
      const double best = exhaustive_search(es, 7, 4).value;
      hits += sa_search(sa, Aag::leading(7, 4), {}, rng).best_value == best;
    }
    CHECK(hits >= 90);
  }
  SUBCASE("single group returns the seed") {
    Rng rng(3);
    ObjectiveHandle f([](const Aag&) { return 1.0; });
    const SaResult r = sa_search(f, Aag::leading(4, 4), {}, rng);
    CHECK(r.best == Aag::leading(4, 4));
    CHECK(r.temperature_steps == 0);
  }
  SUBCASE("invalid parameters") {
    SaParams p;
    p.cooling_alpha = 1.0;
    CHECK(throws_kind(ErrorKind::kInvalidConfig, [&] { p.validate(); }));
    p = {};
    p.c0 = 1e-4;
    CHECK(throws_kind(ErrorKind::kInvalidConfig, [&] { p.validate(); }));
  }
}

TEST_CASE("lower final temperature ends in the optimum more often") {
  SystemConfig c = SystemConfig::for_antennas(7);
  Rng chan(100);
  const ChannelRealization ch = sample_channel(c, chan);
  ObjectiveHandle es(det_objective(ch, c));
  const Aag opt = exhaustive_search(es, 7, 4).best;
  auto hits = [&](double cf) {
    int n = 0;
    for (int run = 0; run < 100; ++run) {
      SaParams p;
      p.cf = cf;
      ObjectiveHandle f(det_objective(ch, c));
      Rng rng(7 * run + 1);
      n += sa_search(f, Aag::leading(7, 4), p, rng).final_state == opt;
    }
    return n;
  };
  const int warm = hits(0.1);
  const int cold = hits(0.001);
  CHECK(cold > warm);
}

TEST_CASE("homogeneous chain visits the optimum most") {
  SystemConfig c = SystemConfig::for_antennas(6);
  c.n_active = 4;
  Rng rng(5);
  const ChannelRealization ch = sample_channel(c, rng);
  ObjectiveHandle f(det_objective(ch, c));
  const Aag opt = exhaustive_search(f, 6, 4).best;
  const auto visits = run_metropolis_chain(f, Aag::leading(6, 4), 0.05, 10000, rng);
  const int top = visits.at(opt.key());
  for (const auto& [key, n] : visits) {
    if (key != opt.key()) CHECK(n < top);
  }
}

TEST_CASE("joint and separate ASR schemes") {
  const SystemConfig c = SystemConfig::for_antennas(7);
  const SuperAlphabet s = build_super_alphabet(c);
  SUBCASE("joint beats separate and matches an exhaustive scan") {
    int joint_wins = 0;
    int es_hits = 0;
    double gap = 0.0;
    const int runs = 100;
    for (int run = 0; run < runs; ++run) {
      Rng rng(3000 + run);
      const ChannelRealization ch = sample_channel(c, rng);
      const std::size_t before = sca_call_count();
      const SchemeResult j = joint_sa_max_asr(ch, c, s, {}, {}, rng);
      CHECK(sca_call_count() - before == j.q_solver_calls);
      CHECK(j.q_solver_calls == j.objective_evaluations);
      CHECK(j.q_solver_calls <= 35);
      AnCovariance check(j.q.matrix());
      const SchemeResult sep = separate_sa_max_asr(ch, c, s, {}, {}, rng);
      joint_wins += j.value >= sep.value;
      gap += sep.value - j.value;

      double scan = kNegInf;
      for (const Aag& a : enumerate_aags(7, 4)) {
        const SubChannel sc = select_subchannel(ch, a);
        scan = std::max(scan,
                        sca_max_asr(sc.h, sc.g_est, c, s, AnCovariance::scaled_identity(4)).r_a);
      }
      es_hits += std::abs(j.value - scan) <= 1e-6;
    }
    CHECK(joint_wins >= 80);
    CHECK(gap / runs <= 0.05);
    CHECK(es_hits >= 90);
  }
  SUBCASE("separate stage one never runs the AN solver") {
    for (int run = 0; run < 20; ++run) {
      Rng rng(4000 + run);
      const ChannelRealization ch = sample_channel(c, rng);
      const std::size_t before = sca_call_count();
      const SchemeResult r = separate_sa_max_asr(ch, c, s, {}, {}, rng);
      CHECK(sca_call_count() - before == 1);
      CHECK(r.q_solver_calls == 1);
      CHECK(r.objective_evaluations > 1);
    }
  }
  SUBCASE("separate stage one matches exhaustive search on the table rate") {
    int hits = 0;
    for (int run = 0; run < 100; ++run) {
      Rng rng(5000 + run);
      const ChannelRealization ch = sample_channel(c, rng);
      const TriangularTables t = build_triangular_tables(ch, c, s.constellation());
      ObjectiveHandle es([&](const Aag& a) { return separate_rate_from_tables(t, a); });
      const double best = exhaustive_search(es, 7, 4).value;
      const SchemeResult r = separate_sa_max_asr(ch, c, s, {}, {}, rng);
      hits += separate_rate_from_tables(t, r.aag) == best;
    }
    CHECK(hits >= 90);
  }
}

TEST_CASE("Max-R-SINR scheme") {
  SUBCASE("exhaustive and steepest annealing agree") {
    const SystemConfig c = SystemConfig::for_antennas(7);
    int agree = 0;
    for (int run = 0; run < 100; ++run) {
      Rng chan(6000 + run);
      const ChannelRealization ch = sample_channel(c, chan);
      SaParams p;
      p.steepest = true;
      Rng r1(run), r2(run);
      const SchemeResult es = max_r_sinr_scheme(ch, c, p, {}, r1, true);
      const SchemeResult sa = max_r_sinr_scheme(ch, c, p, {}, r2, false);
      agree += es.aag == sa.aag;
      const SubChannel sc = select_subchannel(ch, es.aag);
      CHECK(es.lambda == doctest::Approx(eve_sinr_term(sc.g_est, es.q.matrix(), c) /
                                         bob_sinr_term(sc.h, es.q.matrix(), c))
                             .epsilon(1e-9));
    }
    CHECK(agree >= 95);
  }
  SUBCASE("large array beats random groups") {
    const SystemConfig c = SystemConfig::for_antennas(100);
    REQUIRE(c.n_active == 64);
    Rng rng(7);
    const ChannelRealization ch = sample_channel(c, rng);
    SaParams p;
    p.steepest = true;
    const SchemeResult r = max_r_sinr_scheme(ch, c, p, {}, rng, true);
    auto score = [&](const Aag& a) {
      const SubChannel sc = select_subchannel(ch, a);
      return det_ratio_logscore(sc.h, sc.g_est, c);
    };
    const double chosen = score(r.aag);
    for (int t = 0; t < 100; ++t) {
      std::vector<int> idx(100);
      for (int k = 0; k < 100; ++k) idx[k] = k;
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(64);
      CHECK(chosen >= score(Aag::from_indices(100, idx)));
    }
  }
}
