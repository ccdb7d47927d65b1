#include "ssm/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ssm/error.hpp"

namespace ssm {

namespace {

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

// log2 of sum_j exp(x_j), shifted by the largest exponent.
double log2_sum_exp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return (m + std::log(s)) * kInvLn2;
}

// log2(n + 2 * sum_k exp(-num_k / denom)); all exponents are <= 0 so the
// diagonal term exp(0) is already the maximum.
double log2_pair_sum(std::span<const double> num, double denom, int n) {
  double s = 0.0;
  for (double a : num) s += std::exp(-a / denom);
  return std::log2(static_cast<double>(n) + 2.0 * s);
}

// One symbol-averaged MC term: (1/NM) sum_i mean_s log2 sum_j exp(-f_ijs / denom)
// for a fixed received-point set and a single noise sample.
void accumulate_log_partition(const std::vector<cplx>& points, double amp, cplx noise,
                              double denom, std::vector<double>& scratch, double& acc) {
  const int n = static_cast<int>(points.size());
  const double noise_energy = std::norm(noise);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double f = std::norm(amp * (points[i] - points[j]) + noise) - noise_energy;
      scratch[j] = -f / denom;
    }
    acc += log2_sum_exp(scratch);
  }
}

}  // namespace

AnCovariance::AnCovariance(CMat q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() == 0) {
    fail(ErrorKind::kInvariantViolation, "AN covariance must be a nonempty square matrix");
  }
  if ((q_ - q_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    fail(ErrorKind::kInvariantViolation, "AN covariance is not Hermitian");
  }
  const double tr = q_.trace().real();
  if (std::abs(tr - 1.0) > 1e-9) {
    fail(ErrorKind::kInvariantViolation, "AN covariance trace " + std::to_string(tr) + " != 1");
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(q_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::kNumeric, "eigensolver failed while checking AN covariance");
  }
  if (es.eigenvalues().minCoeff() < -1e-10) {
    fail(ErrorKind::kInvariantViolation, "AN covariance is not PSD");
  }
}

AnCovariance AnCovariance::scaled_identity(int n) {
  return AnCovariance(CMat::Identity(n, n) / static_cast<double>(n));
}

double quad_form(const RowVec& x, const CMat& q) {
  const cplx v = (x * q * x.adjoint())(0, 0);
  const double scale = 1.0 + x.squaredNorm() * q.cwiseAbs().maxCoeff();
  if (std::abs(v.imag()) > 1e-10 * scale) {
    fail(ErrorKind::kNumeric, "quadratic form has a non-negligible imaginary part");
  }
  return v.real();
}

RateBreakdown instantaneous_sr(double i_bob, double i_eve) {
  return {i_bob, i_eve, std::max(i_bob - i_eve, 0.0)};
}

McDraws draw_mc(int n_active, int n_mc, Rng& rng) {
  McDraws d;
  d.bob_noise.reserve(n_mc);
  d.eve_noise.reserve(n_mc);
  d.csi_error.reserve(n_mc);
  for (int s = 0; s < n_mc; ++s) {
    d.bob_noise.push_back(complex_normal(rng));
    d.eve_noise.push_back(complex_normal(rng));
    RowVec e(n_active);
    for (int k = 0; k < n_active; ++k) e[k] = complex_normal(rng);
    d.csi_error.push_back(std::move(e));
  }
  return d;
}

double mi_bob_mc(const RowVec& h_l, const CMat& q, const SuperAlphabet& alphabet,
                 const SystemConfig& config, std::span<const cplx> unit_noise) {
  const int n = alphabet.size();
  const double denom = config.p2() * quad_form(h_l, q) + config.noise_var_bob;
  const double amp = std::sqrt(config.p1());
  const double sigma = std::sqrt(config.noise_var_bob);
  const std::vector<cplx> points = alphabet.effective_points(h_l);
  std::vector<double> scratch(n);
  double acc = 0.0;
  for (cplx z : unit_noise) accumulate_log_partition(points, amp, sigma * z, denom, scratch, acc);
  return std::log2(static_cast<double>(n)) -
         acc / (static_cast<double>(n) * static_cast<double>(unit_noise.size()));
}

double mi_eve_mc(const RowVec& g_est_l, const CMat& q, const SuperAlphabet& alphabet,
                 const SystemConfig& config, std::span<const cplx> unit_noise,
                 std::span<const RowVec> unit_error) {
  if (unit_noise.size() != unit_error.size()) {
    fail(ErrorKind::kInvariantViolation, "Eve MC needs one CSI-error draw per noise draw");
  }
  const int n = alphabet.size();
  const double amp = std::sqrt(config.p1());
  const double sigma = std::sqrt(config.noise_var_eve);
  const double sigma_err = std::sqrt(config.csi_err_var);
  std::vector<double> scratch(n);
  double acc = 0.0;
  for (std::size_t s = 0; s < unit_noise.size(); ++s) {
    const RowVec g = g_est_l + sigma_err * unit_error[s];
    const double denom = config.p2() * quad_form(g, q) + config.noise_var_eve;
    accumulate_log_partition(alphabet.effective_points(g), amp, sigma * unit_noise[s], denom,
                             scratch, acc);
  }
  return std::log2(static_cast<double>(n)) -
         acc / (static_cast<double>(n) * static_cast<double>(unit_noise.size()));
}

double mi_bob_exact(const RowVec& h_l, const AnCovariance& q, const SuperAlphabet& alphabet,
                    const SystemConfig& config, int n_mc, Rng& rng) {
  if (n_mc < 1) fail(ErrorKind::kInvalidConfig, "n_mc must be >= 1");
  std::vector<cplx> noise(n_mc);
  for (cplx& z : noise) z = complex_normal(rng);
  const double cap = std::log2(static_cast<double>(alphabet.size()));
  return std::clamp(mi_bob_mc(h_l, q.matrix(), alphabet, config, noise), 0.0, cap);
}

double mi_eve_exact(const RowVec& g_est_l, const AnCovariance& q, const SuperAlphabet& alphabet,
                    const SystemConfig& config, int n_mc, Rng& rng) {
  if (n_mc < 1) fail(ErrorKind::kInvalidConfig, "n_mc must be >= 1");
  const McDraws d = draw_mc(static_cast<int>(g_est_l.size()), n_mc, rng);
  const double cap = std::log2(static_cast<double>(alphabet.size()));
  return std::clamp(mi_eve_mc(g_est_l, q.matrix(), alphabet, config, d.eve_noise, d.csi_error),
                    0.0, cap);
}

double ami_bob(const RowVec& h_l, const AnCovariance& q, const SuperAlphabet& alphabet,
               const SystemConfig& config) {
  const AsrModel model(h_l, RowVec::Zero(h_l.size()), config, alphabet);
  const double zeta = 2.0 * std::log2(static_cast<double>(alphabet.size()));
  return zeta - model.bob_term(model.s_bob(q.matrix()));
}

AsrTerms asr_closed(const RowVec& h_l, const RowVec& g_est_l, const AnCovariance& q,
                    const SystemConfig& config, const SuperAlphabet& alphabet) {
  const AsrModel model(h_l, g_est_l, config, alphabet);
  const double b = model.bob_term(model.s_bob(q.matrix()));
  const double e = model.eve_term(model.s_eve(q.matrix()));
  return {e - b, e, b};
}

AsrModel::AsrModel(const RowVec& h_l, const RowVec& g_est_l, const SystemConfig& config,
                   const SuperAlphabet& alphabet)
    : h_(h_l),
      g_(g_est_l),
      n_symbols_(alphabet.size()),
      p2_(config.p2()),
      sigma_bob_(config.noise_var_bob),
      sigma_eve_(config.noise_var_eve),
      sigma_err_(config.csi_err_var) {
  if (h_l.size() != alphabet.n_active() || g_est_l.size() != alphabet.n_active()) {
    fail(ErrorKind::kInvariantViolation, "sub-channel length does not match N_s");
  }
  const std::vector<cplx> ph = alphabet.effective_points(h_l);
  const std::vector<cplx> pg = alphabet.effective_points(g_est_l);
  const double quarter_p1 = config.p1() / 4.0;
  const std::size_t pairs = static_cast<std::size_t>(n_symbols_) * (n_symbols_ - 1) / 2;
  bob_num_.reserve(pairs);
  eve_num_.reserve(pairs);
  for (int i = 0; i < n_symbols_; ++i) {
    for (int j = i + 1; j < n_symbols_; ++j) {
      bob_num_.push_back(quarter_p1 * std::norm(ph[i] - ph[j]));
      eve_num_.push_back(quarter_p1 * (std::norm(pg[i] - pg[j]) +
                                       sigma_err_ * alphabet.difference_energy(i, j)));
    }
  }
}

double AsrModel::bob_term(double s_bob) const {
  return log2_pair_sum(bob_num_, bob_denominator(s_bob), n_symbols_);
}

double AsrModel::eve_term(double s_eve) const {
  return log2_pair_sum(eve_num_, eve_denominator(s_eve), n_symbols_);
}

SurrogateValue AsrModel::surrogate(double s_bob, double s_eve, double s0_bob,
                                   double s0_eve) const {
  SurrogateValue v{};
  const double n = static_cast<double>(n_symbols_);

  // Bob: each exponent -a / D(s) replaced by its tangent at s0.
  {
    const double d0 = bob_denominator(s0_bob);
    const double ds = s_bob - s0_bob;
    double shift = 0.0;
    for (double a : bob_num_) shift = std::max(shift, -a / d0 + a * p2_ * ds / (d0 * d0));
    double sum = n * std::exp(-shift);
    double dsum = 0.0;
    for (double a : bob_num_) {
      const double slope = a * p2_ / (d0 * d0);
      const double w = std::exp(-a / d0 + slope * ds - shift);
      sum += 2.0 * w;
      dsum += 2.0 * w * slope;
    }
    v.b_upper = (shift + std::log(sum)) * kInvLn2;
    v.d_bob = v.b_upper > 0.0 ? -(dsum / sum) * kInvLn2 : 0.0;
  }

  // Eve: exp(-c / D(s)) replaced by its first-order minorant around s0.
  {
    const double d0 = eve_denominator(s0_eve);
    const double d = eve_denominator(s_eve);
    double sum = n;
    double dsum = 0.0;
    for (double c : eve_num_) {
      const double r0 = c / d0;
      const double w = std::exp(-r0);
      sum += 2.0 * w * (1.0 + r0 - c / d);
      dsum += 2.0 * w * c * p2_ / (d * d);
    }
    if (sum <= 0.0) {
      v.e_lower = kNegInf;
      v.value = kNegInf;
      v.d_eve = 0.0;
      return v;
    }
    v.e_lower = std::log2(sum);
    const double cap = 2.0 * std::log2(n);
    v.d_eve = v.e_lower < cap ? (dsum / sum) * kInvLn2 : 0.0;
    v.value = std::min(v.e_lower, cap) - std::max(v.b_upper, 0.0);
  }
  return v;
}

CMat AsrModel::surrogate_gradient(const SurrogateValue& v) const {
  return v.d_bob * (h_.adjoint() * h_) + v.d_eve * (g_.adjoint() * g_);
}

double surrogate_objective(const AnCovariance& q, const AnCovariance& q0, const RowVec& h_l,
                           const RowVec& g_est_l, const SystemConfig& config,
                           const SuperAlphabet& alphabet) {
  const AsrModel model(h_l, g_est_l, config, alphabet);
  return model
      .surrogate(model.s_bob(q.matrix()), model.s_eve(q.matrix()), model.s_bob(q0.matrix()),
                 model.s_eve(q0.matrix()))
      .value;
}

SeparateRates separate_rate_direct(const RowVec& h_l, const RowVec& g_est_l,
                                   const SystemConfig& config, const SuperAlphabet& alphabet) {
  const int n = alphabet.size();
  const std::vector<cplx> ph = alphabet.effective_points(h_l);
  const std::vector<cplx> pg = alphabet.effective_points(g_est_l);
  std::vector<double> bob;
  std::vector<double> eve;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bob.push_back(config.p1() * std::norm(ph[i] - ph[j]) / 4.0);
      eve.push_back(config.p1() *
                    (std::norm(pg[i] - pg[j]) + config.csi_err_var * alphabet.difference_energy(i, j)) /
                    4.0);
    }
  }
  return {log2_pair_sum(bob, config.noise_var_bob, n), log2_pair_sum(eve, config.noise_var_eve, n)};
}

TriangularTables build_triangular_tables(const ChannelRealization& ch, const SystemConfig& config,
                                         const std::vector<cplx>& constellation) {
  const int nt = static_cast<int>(ch.h.size());
  const int m = static_cast<int>(constellation.size());
  const double kb = config.p1() / (4.0 * config.noise_var_bob);
  const double ke = config.p1() / (4.0 * config.noise_var_eve);
  const double se = config.csi_err_var;
  TriangularTables t;
  t.mod_order = m;
  t.u_bob = Eigen::MatrixXd::Zero(nt, nt);
  t.u_eve = Eigen::MatrixXd::Zero(nt, nt);
  for (int u = 0; u < nt; ++u) {
    const double gain_h = std::norm(ch.h[u]);
    const double gain_g = std::norm(ch.g_est[u]) + se;
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < a; ++b) {
        const double d = std::norm(constellation[a] - constellation[b]);
        t.u_bob(u, u) += std::exp(-kb * gain_h * d);
        t.u_eve(u, u) += std::exp(-ke * gain_g * d);
      }
    }
    for (int v = u + 1; v < nt; ++v) {
      double sb = 0.0;
      double sev = 0.0;
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          const cplx sa = constellation[a];
          const cplx sbv = constellation[b];
          sb += std::exp(-kb * std::norm(ch.h[u] * sa - ch.h[v] * sbv));
          sev += std::exp(-ke * (std::norm(ch.g_est[u] * sa - ch.g_est[v] * sbv) +
                                 se * (std::norm(sa) + std::norm(sbv))));
        }
      }
      t.u_bob(u, v) = sb;
      t.u_eve(u, v) = sev;
    }
  }
  return t;
}

double separate_rate_from_tables(const TriangularTables& tables, const Aag& aag) {
  if (tables.u_bob.rows() != aag.n_tx() || tables.u_eve.rows() != aag.n_tx()) {
    fail(ErrorKind::kInvariantViolation, "AAG size does not match the triangular tables");
  }
  const auto& idx = aag.active_indices();
  double sum_b = 0.0;
  double sum_e = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a; b < idx.size(); ++b) {
      sum_b += tables.u_bob(idx[a], idx[b]);
      sum_e += tables.u_eve(idx[a], idx[b]);
    }
  }
  const double n = static_cast<double>(aag.n_active()) * tables.mod_order;
  return std::log2(n + 2.0 * sum_e) - std::log2(n + 2.0 * sum_b);
}

double large_scale_ratio(const RowVec& h_l, const RowVec& g_est_l, const AnCovariance& q,
                         const SystemConfig& config) {
  const double p2 = config.p2();
  const double sigma_eff = config.csi_err_var * p2 + config.noise_var_eve;
  const double ns = static_cast<double>(h_l.size());
  const double num = h_l.squaredNorm() * (p2 * quad_form(g_est_l, q.matrix()) + sigma_eff);
  const double den = (g_est_l.squaredNorm() + ns * config.csi_err_var) *
                     (p2 * quad_form(h_l, q.matrix()) + config.noise_var_bob);
  return num / den;
}

double det_ratio_logscore(const RowVec& h_l, const RowVec& g_est_l, const SystemConfig& config) {
  const double p2 = config.p2();
  const double psi_e = (config.csi_err_var * p2 + config.noise_var_eve) / p2;
  const double psi_b = config.noise_var_bob / p2;
  const double hh = h_l.squaredNorm();
  const double gg = g_est_l.squaredNorm();
  const double ns = static_cast<double>(h_l.size());
  return std::log(hh) + std::log(psi_e + gg) - std::log(gg + config.csi_err_var * ns) -
         std::log(psi_b + hh) + (ns - 1.0) * (std::log(psi_e) - std::log(psi_b));
}

}  // namespace ssm
