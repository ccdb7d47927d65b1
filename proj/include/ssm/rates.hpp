#pragma once

// Rate quantities for a fixed antenna group: Monte-Carlo mutual information,
// the closed-form approximate secrecy rate (ASR), its concave surrogate, the
// AN-free table rates used for antenna-group selection and the large-scale
// SINR-ratio objective.

#include <limits>
#include <span>
#include <vector>

#include "ssm/core_model.hpp"

namespace ssm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Hermitian PSD AN covariance with unit trace.
class AnCovariance {
 public:
  /// Throws Error(kInvariantViolation) if q is not Hermitian, PSD and trace-1.
  explicit AnCovariance(CMat q);

  static AnCovariance scaled_identity(int n);

  const CMat& matrix() const noexcept { return q_; }
  int dim() const noexcept { return static_cast<int>(q_.rows()); }

 private:
  CMat q_;
};

/// Real value of x Q x^H. Throws kNumeric if the imaginary part exceeds 1e-10
/// relative to the magnitude of the form.
double quad_form(const RowVec& x, const CMat& q);

struct RateBreakdown {
  double i_bob;
  double i_eve;
  double sr;
};

RateBreakdown instantaneous_sr(double i_bob, double i_eve);

/// Frozen unit-variance draws for the Monte-Carlo MI estimators. Reusing one
/// set across calls gives common random numbers.
struct McDraws {
  std::vector<cplx> bob_noise;    // CN(0,1), scaled by sigma_B inside
  std::vector<cplx> eve_noise;    // CN(0,1), scaled by sigma_E inside
  std::vector<RowVec> csi_error;  // CN(0,I), scaled by sigma_e inside

  int size() const noexcept { return static_cast<int>(bob_noise.size()); }
};

McDraws draw_mc(int n_active, int n_mc, Rng& rng);

/// Monte-Carlo estimate of Bob's MI with AN covariance q (not clamped).
/// The noise expectation uses the same draws for every transmitted symbol.
double mi_bob_mc(const RowVec& h_l, const CMat& q, const SuperAlphabet& alphabet,
                 const SystemConfig& config, std::span<const cplx> unit_noise);

/// Monte-Carlo estimate of Eve's MI over (CSI error, noise) pairs (not clamped).
double mi_eve_mc(const RowVec& g_est_l, const CMat& q, const SuperAlphabet& alphabet,
                 const SystemConfig& config, std::span<const cplx> unit_noise,
                 std::span<const RowVec> unit_error);

/// Bob's MI in bits, clamped to [0, log2(N_s M)].
double mi_bob_exact(const RowVec& h_l, const AnCovariance& q, const SuperAlphabet& alphabet,
                    const SystemConfig& config, int n_mc, Rng& rng);

/// Eve's MI in bits, clamped to [0, log2(N_s M)].
double mi_eve_exact(const RowVec& g_est_l, const AnCovariance& q, const SuperAlphabet& alphabet,
                    const SystemConfig& config, int n_mc, Rng& rng);

/// Approximate MI of Bob.
double ami_bob(const RowVec& h_l, const AnCovariance& q, const SuperAlphabet& alphabet,
               const SystemConfig& config);

struct AsrTerms {
  double r_a;     // e_tilde - b_term
  double e_tilde; // Eve's log-pair-sum, CSI error averaged in closed form
  double b_term;  // Bob's log-pair-sum
};

AsrTerms asr_closed(const RowVec& h_l, const RowVec& g_est_l, const AnCovariance& q,
                    const SystemConfig& config, const SuperAlphabet& alphabet);

/// Value of the concave surrogate and its derivatives with respect to the
/// two scalars through which Q enters: s_bob = h Q h^H and s_eve = g Q g^H.
struct SurrogateValue {
  double value;        // E' - B', may be kNegInf
  double b_upper;      // B-tilde, tangent upper bound of B
  double e_lower;      // E-bar, minorant of E-tilde (kNegInf if its sum <= 0)
  double d_bob;        // d value / d s_bob
  double d_eve;        // d value / d s_eve
};

/// Precomputed pairwise distances of one sub-channel. Every rate in this
/// module is a log2 of N_sM + 2 * sum over unordered symbol pairs.
class AsrModel {
 public:
  AsrModel(const RowVec& h_l, const RowVec& g_est_l, const SystemConfig& config,
           const SuperAlphabet& alphabet);

  double s_bob(const CMat& q) const { return quad_form(h_, q); }
  double s_eve(const CMat& q) const { return quad_form(g_, q); }

  /// B as a function of s_bob.
  double bob_term(double s_bob) const;
  /// E-tilde as a function of s_eve.
  double eve_term(double s_eve) const;
  double asr(const CMat& q) const { return eve_term(s_eve(q)) - bob_term(s_bob(q)); }

  SurrogateValue surrogate(double s_bob, double s_eve, double s0_bob, double s0_eve) const;

  /// Hermitian ascent direction d_bob h^H h + d_eve g^H g of the surrogate.
  CMat surrogate_gradient(const SurrogateValue& v) const;

  const RowVec& h() const noexcept { return h_; }
  const RowVec& g_est() const noexcept { return g_; }
  int alphabet_size() const noexcept { return n_symbols_; }

 private:
  double bob_denominator(double s) const { return p2_ * s + sigma_bob_; }
  double eve_denominator(double s) const { return p2_ * s + p2_ * sigma_err_ + sigma_eve_; }

  RowVec h_;
  RowVec g_;
  int n_symbols_;
  double p2_;
  double sigma_bob_;
  double sigma_eve_;
  double sigma_err_;
  std::vector<double> bob_num_;  // P1 |h d|^2 / 4 per unordered pair
  std::vector<double> eve_num_;  // P1 d^H (g^H g + sigma_e^2 I) d / 4 per unordered pair
};

/// Surrogate R_s^c(Q; Q0) = E' - B'.
double surrogate_objective(const AnCovariance& q, const AnCovariance& q0, const RowVec& h_l,
                           const RowVec& g_est_l, const SystemConfig& config,
                           const SuperAlphabet& alphabet);

struct SeparateRates {
  double i_b_s;
  double i_e_s;
};

/// AN-free log-pair-sums of Bob and Eve used by the two-stage scheme.
SeparateRates separate_rate_direct(const RowVec& h_l, const RowVec& g_est_l,
                                   const SystemConfig& config, const SuperAlphabet& alphabet);

/// Upper-triangular per-antenna-pair tables over all N_t antennas.
struct TriangularTables {
  Eigen::MatrixXd u_bob;
  Eigen::MatrixXd u_eve;
  int mod_order = 0;
};

TriangularTables build_triangular_tables(const ChannelRealization& ch, const SystemConfig& config,
                                         const std::vector<cplx>& constellation);

/// log2 D_E - log2 D_B with D = N_s M + 2 * (sum of the active sub-triangle).
double separate_rate_from_tables(const TriangularTables& tables, const Aag& aag);

/// Large-scale Bob-to-Eve SINR ratio R_L'.
double large_scale_ratio(const RowVec& h_l, const RowVec& g_est_l, const AnCovariance& q,
                         const SystemConfig& config);

/// Natural log of the determinant-ratio antenna-group score.
double det_ratio_logscore(const RowVec& h_l, const RowVec& g_est_l, const SystemConfig& config);

}  // namespace ssm
