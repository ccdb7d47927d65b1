#pragma once

// Artificial-noise design for a fixed antenna group.

#include <cstddef>
#include <vector>

#include "ssm/core_model.hpp"
#include "ssm/rates.hpp"

namespace ssm {

/// AN projection matrix T with tr(T T^H) = 1.
class AnProjection {
 public:
  explicit AnProjection(CMat t);

  /// T / ||T||_F. Throws kNumeric for a zero or non-finite matrix.
  static AnProjection normalized(const CMat& t);
  static AnProjection random(int n, Rng& rng);

  const CMat& matrix() const noexcept { return t_; }
  CMat covariance() const { return t_ * t_.adjoint(); }

 private:
  CMat t_;
};

enum class StopReason { kTolerance, kMaxIter, kSentinel };

const char* to_string(StopReason r) noexcept;

struct TraceEntry {
  int step = 0;
  double objective = 0.0;
  double best = 0.0;   // best value seen so far
  double param = 0.0;  // step size, temperature or lambda
};

struct OptimTrace {
  std::vector<TraceEntry> entries;
  bool converged = false;
  StopReason reason = StopReason::kMaxIter;
};

/// Exact-MI secrecy rate of one sub-channel estimated on frozen draws, so
/// repeated evaluations (and finite differences) see identical noise.
class FrozenSrEstimator {
 public:
  FrozenSrEstimator(RowVec h_l, RowVec g_est_l, const SystemConfig& config,
                    const SuperAlphabet& alphabet, McDraws draws);

  /// Unclamped I_B - I_E for AN covariance q.
  double secrecy_rate(const CMat& q) const;
  double secrecy_rate(const AnProjection& t) const { return secrecy_rate(t.covariance()); }

  /// Wirtinger gradient dR/dT* of the frozen estimate. The gradient with
  /// respect to (Re T, Im T) is twice this matrix.
  CMat gradient(const CMat& t) const;

  const McDraws& draws() const noexcept { return draws_; }

 private:
  RowVec h_;
  RowVec g_;
  SystemConfig config_;
  SuperAlphabet alphabet_;
  McDraws draws_;
};

CMat grad_sr_wrt_t(const AnProjection& t, const RowVec& h_l, const RowVec& g_est_l,
                   const SystemConfig& config, const SuperAlphabet& alphabet, int n_mc, Rng& rng);

struct GdOptions {
  double mu0 = 1.0;
  double mu_min = 1e-3;
  int max_iter = 100;  // accepted steps; the literal loop has no bound of its own
  int n_mc = 500;
};

struct GdResult {
  AnProjection t;
  double sr;
  OptimTrace trace;
};

/// Backtracking gradient ascent of the frozen-draw secrecy rate: accept
/// T + mu grad (renormalized) if the rate strictly improves, else halve mu; stop
/// once mu < mu_min. mu is never restored after halving.
GdResult gd_anpm(const FrozenSrEstimator& estimator, const AnProjection& t0,
                 const GdOptions& options);

GdResult gd_anpm(const RowVec& h_l, const RowVec& g_est_l, const SystemConfig& config,
                 const SuperAlphabet& alphabet, const AnProjection& t0, const GdOptions& options,
                 Rng& rng);

struct EsGdOptions {
  int restarts = 5;
  std::size_t max_groups = 1000;
  GdOptions gd;
};

struct EsGdResult {
  Aag aag;
  AnProjection t;
  double sr;
  std::size_t groups = 0;
  int iterations = 0;  // accepted GD steps summed over all runs
};

/// Exhaustive search over antenna groups with `restarts` GD runs per group.
/// Throws kInvalidConfig when C(N_t, N_s) exceeds max_groups.
EsGdResult es_plus_gd(const ChannelRealization& ch, const SystemConfig& config,
                      const SuperAlphabet& alphabet, const EsGdOptions& options, Rng& rng);

/// Euclidean projection onto {Q Hermitian PSD, tr Q = 1}: eigenvalues of the
/// Hermitian part projected onto the unit simplex.
AnCovariance project_feasible(const CMat& m);

/// Same projection without the invariant re-check, for inner loops.
CMat project_feasible_matrix(const CMat& m);

struct ScaOptions {
  double epsilon = 1e-4;
  int max_outer = 200;
  int max_inner = 500;
};

struct ScaResult {
  AnCovariance q;
  double r_a;
  OptimTrace trace;
};

/// Successive maximization of the concave surrogate of the ASR. Each outer
/// step re-linearizes at the current Q and solves the surrogate problem by
/// projected gradient ascent to tolerance epsilon/10.
ScaResult sca_max_asr(const RowVec& h_l, const RowVec& g_est_l, const SystemConfig& config,
                      const SuperAlphabet& alphabet, const AnCovariance& q_init,
                      const ScaOptions& options = {});

ScaResult sca_max_asr(const AsrModel& model, const AnCovariance& q_init,
                      const ScaOptions& options = {});

/// Process-wide count of sca_max_asr invocations.
std::size_t sca_call_count() noexcept;

struct DinkelbachOptions {
  double epsilon = 1e-4;
  int max_iter = 50;
};

struct DinkelbachResult {
  AnCovariance q;
  double lambda;
  OptimTrace trace;
};

/// Signal-plus-noise terms S_E(Q), S_B(Q) of the large-scale ratio.
double eve_sinr_term(const RowVec& g_est_l, const CMat& q, const SystemConfig& config);
double bob_sinr_term(const RowVec& h_l, const CMat& q, const SystemConfig& config);

/// Unit top eigenvector of g^H g - lambda h^H h, computed in span{g^H, h^H}.
CVec top_eigvec_rank2(const RowVec& g, const RowVec& h, double lambda);

/// Dinkelbach iteration for max S_E(Q)/S_B(Q) over trace-1 PSD Q.
DinkelbachResult dinkelbach_ancm(const RowVec& h_l, const RowVec& g_est_l,
                                 const SystemConfig& config, const DinkelbachOptions& options = {});

/// Uniform AN over the null space of h_l: (I - h^H h / ||h||^2) / (N_s - 1).
AnCovariance nsp_baseline(const RowVec& h_l);

}  // namespace ssm
