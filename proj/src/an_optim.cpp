#include "ssm/an_optim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>

#include "ssm/aag_select.hpp"
#include "ssm/error.hpp"

namespace ssm {

namespace {

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

std::atomic<std::size_t> g_sca_calls{0};

// Sum over (i, s) of sum_j kappa_ijs f_ijs, where kappa is the softmax of
// -f / denom over j. This is the common factor of the MI derivative in denom.
double weighted_distance_sum(const std::vector<cplx>& points, double amp, cplx noise,
                             double denom, std::vector<double>& f, std::vector<double>& x) {
  const int n = static_cast<int>(points.size());
  const double noise_energy = std::norm(noise);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      f[j] = std::norm(amp * (points[i] - points[j]) + noise) - noise_energy;
      x[j] = -f[j] / denom;
      top = std::max(top, x[j]);
    }
    double z = 0.0;
    double zf = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = std::exp(x[j] - top);
      z += w;
      zf += w * f[j];
    }
    total += zf / z;
  }
  return total;
}

// Euclidean projection of v onto {x >= 0, sum x = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

double frob_inner(const CMat& a, const CMat& b) { return (a.adjoint() * b).trace().real(); }

}  // namespace

AnProjection::AnProjection(CMat t) : t_(std::move(t)) {
  if (t_.rows() != t_.cols() || t_.rows() == 0) {
    fail(ErrorKind::kInvariantViolation, "AN projection must be a nonempty square matrix");
  }
  const double tr = t_.squaredNorm();
  if (std::abs(tr - 1.0) > 1e-9) {
    fail(ErrorKind::kInvariantViolation, "tr(T T^H) = " + std::to_string(tr) + " != 1");
  }
}

AnProjection AnProjection::normalized(const CMat& t) {
  const double norm = t.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    fail(ErrorKind::kNumeric, "cannot normalize a zero or non-finite AN projection");
  }
  return AnProjection(t / norm);
}

AnProjection AnProjection::random(int n, Rng& rng) {
  CMat t(n, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) t(r, c) = complex_normal(rng);
  }
  return normalized(t);
}

const char* to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::kTolerance: return "tolerance";
    case StopReason::kMaxIter: return "max-iter";
    case StopReason::kSentinel: return "sentinel";
  }
  return "unknown";
}

FrozenSrEstimator::FrozenSrEstimator(RowVec h_l, RowVec g_est_l, const SystemConfig& config,
                                     const SuperAlphabet& alphabet, McDraws draws)
    : h_(std::move(h_l)),
      g_(std::move(g_est_l)),
      config_(config),
      alphabet_(alphabet),
      draws_(std::move(draws)) {
  if (h_.size() != alphabet_.n_active() || g_.size() != alphabet_.n_active()) {
    fail(ErrorKind::kInvariantViolation, "sub-channel length does not match N_s");
  }
  if (draws_.size() < 1) fail(ErrorKind::kInvalidConfig, "estimator needs at least one MC draw");
}

double FrozenSrEstimator::secrecy_rate(const CMat& q) const {
  return mi_bob_mc(h_, q, alphabet_, config_, draws_.bob_noise) -
         mi_eve_mc(g_, q, alphabet_, config_, draws_.eve_noise, draws_.csi_error);
}

CMat FrozenSrEstimator::gradient(const CMat& t) const {
  const int n = alphabet_.size();
  const double p2 = config_.p2();
  const double amp = std::sqrt(config_.p1());
  const double sigma_b = std::sqrt(config_.noise_var_bob);
  const double sigma_e = std::sqrt(config_.noise_var_eve);
  const double sigma_err = std::sqrt(config_.csi_err_var);
  const double scale = kInvLn2 / (static_cast<double>(n) * draws_.size());
  std::vector<double> f(n);
  std::vector<double> x(n);

  // dI/dT* = -(scale) sum_s (P2 / D_s^2) W_s x_s^H x_s T for receiver row x_s.
  const CMat q = t * t.adjoint();
  const double denom_b = p2 * quad_form(h_, q) + config_.noise_var_bob;
  const std::vector<cplx> points_b = alphabet_.effective_points(h_);
  double w_b = 0.0;
  for (cplx z : draws_.bob_noise) {
    w_b += weighted_distance_sum(points_b, amp, sigma_b * z, denom_b, f, x);
  }
  CMat acc = -(scale * p2 * w_b / (denom_b * denom_b)) * (h_.adjoint() * h_);

  for (int s = 0; s < draws_.size(); ++s) {
    const RowVec g = g_ + sigma_err * draws_.csi_error[s];
    const double denom_e = p2 * quad_form(g, q) + config_.noise_var_eve;
    const double w_e = weighted_distance_sum(alphabet_.effective_points(g), amp,
                                             sigma_e * draws_.eve_noise[s], denom_e, f, x);
    acc += (scale * p2 * w_e / (denom_e * denom_e)) * (g.adjoint() * g);
  }
  return acc * t;
}

CMat grad_sr_wrt_t(const AnProjection& t, const RowVec& h_l, const RowVec& g_est_l,
                   const SystemConfig& config, const SuperAlphabet& alphabet, int n_mc, Rng& rng) {
  if (n_mc < 100) fail(ErrorKind::kInvalidConfig, "n_mc must be >= 100");
  const FrozenSrEstimator est(h_l, g_est_l, config, alphabet,
                              draw_mc(static_cast<int>(h_l.size()), n_mc, rng));
  return est.gradient(t.matrix());
}

GdResult gd_anpm(const FrozenSrEstimator& estimator, const AnProjection& t0,
                 const GdOptions& options) {
  if (!(options.mu_min > 0.0)) fail(ErrorKind::kInvalidConfig, "gd.mu_min must be > 0");
  CMat t = t0.matrix();
  double sr = estimator.secrecy_rate(t0);
  double mu = options.mu0;
  GdResult out{t0, sr, {}};
  out.trace.entries.push_back({0, sr, sr, mu});
  int accepted = 0;
  int step = 0;
  CMat grad;
  bool stale = true;
  while (mu >= options.mu_min) {
    if (accepted >= options.max_iter) {
      out.trace.reason = StopReason::kMaxIter;
      break;
    }
    if (stale) {
      grad = estimator.gradient(t);
      stale = false;
    }
    if (!grad.allFinite()) {
      fail(ErrorKind::kNumeric, "non-finite SR gradient at GD step " + std::to_string(step));
    }
    const CMat cand = t + mu * grad;
    const double norm = cand.norm();
    bool improved = false;
    if (norm > 0.0 && std::isfinite(norm)) {
      const CMat next = cand / norm;
      const double sr_next = estimator.secrecy_rate(CMat(next * next.adjoint()));
      if (sr_next > sr) {
        t = next;
        sr = sr_next;
        improved = true;
        stale = true;
        ++accepted;
      }
    }
    if (!improved) mu /= 2.0;
    ++step;
    out.trace.entries.push_back({step, sr, sr, mu});
  }
  if (mu < options.mu_min) {
    out.trace.converged = true;
    out.trace.reason = StopReason::kTolerance;
  }
  out.t = AnProjection(t);
  out.sr = sr;
  return out;
}

GdResult gd_anpm(const RowVec& h_l, const RowVec& g_est_l, const SystemConfig& config,
                 const SuperAlphabet& alphabet, const AnProjection& t0, const GdOptions& options,
                 Rng& rng) {
  const FrozenSrEstimator est(h_l, g_est_l, config, alphabet,
                              draw_mc(static_cast<int>(h_l.size()), options.n_mc, rng));
  return gd_anpm(est, t0, options);
}

EsGdResult es_plus_gd(const ChannelRealization& ch, const SystemConfig& config,
                      const SuperAlphabet& alphabet, const EsGdOptions& options, Rng& rng) {
  const double groups = binomial(config.n_tx, config.n_active);
  if (groups > static_cast<double>(options.max_groups)) {
    fail(ErrorKind::kInvalidConfig,
         "exhaustive search over L=" + std::to_string(static_cast<long long>(groups)) +
             " antenna groups exceeds the guard of " + std::to_string(options.max_groups));
  }
  if (options.restarts < 1) fail(ErrorKind::kInvalidConfig, "restarts must be >= 1");
  const std::vector<Aag> aags = enumerate_aags(config.n_tx, config.n_active);
  std::optional<EsGdResult> best;
  int iterations = 0;
  for (const Aag& aag : aags) {
    const SubChannel sub = select_subchannel(ch, aag);
    const FrozenSrEstimator est(sub.h, sub.g_est, config, alphabet,
                                draw_mc(config.n_active, options.gd.n_mc, rng));
    for (int r = 0; r < options.restarts; ++r) {
      const GdResult run = gd_anpm(est, AnProjection::random(config.n_active, rng), options.gd);
      for (const TraceEntry& e : run.trace.entries) {
        if (e.step > 0 && e.objective > run.trace.entries[e.step - 1].objective) ++iterations;
      }
      if (!best || run.sr > best->sr) best = EsGdResult{aag, run.t, run.sr, 0, 0};
    }
  }
  best->groups = aags.size();
  best->iterations = iterations;
  return *best;
}

CMat project_feasible_matrix(const CMat& m) {
  if (!m.allFinite()) fail(ErrorKind::kNumeric, "cannot project a non-finite matrix");
  const CMat herm = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(herm);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::kNumeric, "eigensolver failed during feasibility projection");
  }
  const Eigen::VectorXd lam = project_simplex(es.eigenvalues());
  const CMat& v = es.eigenvectors();
  CMat q = v * lam.cast<cplx>().asDiagonal() * v.adjoint();
  q = (q + q.adjoint()) / 2.0;
  return q / q.trace().real();
}

AnCovariance project_feasible(const CMat& m) { return AnCovariance(project_feasible_matrix(m)); }

ScaResult sca_max_asr(const RowVec& h_l, const RowVec& g_est_l, const SystemConfig& config,
                      const SuperAlphabet& alphabet, const AnCovariance& q_init,
                      const ScaOptions& options) {
  return sca_max_asr(AsrModel(h_l, g_est_l, config, alphabet), q_init, options);
}

ScaResult sca_max_asr(const AsrModel& model, const AnCovariance& q_init,
                      const ScaOptions& options) {
  if (!(options.epsilon > 0.0)) fail(ErrorKind::kInvalidConfig, "sca.epsilon must be > 0");
  g_sca_calls.fetch_add(1, std::memory_order_relaxed);

  CMat q = q_init.matrix();
  double r = model.asr(q);
  if (!std::isfinite(r)) {
    q = AnCovariance::scaled_identity(q_init.dim()).matrix();
    r = model.asr(q);
    if (!std::isfinite(r)) fail(ErrorKind::kNumeric, "ASR is not finite at the initial point");
  }

  ScaResult out{AnCovariance(q), r, {}};
  out.trace.entries.push_back({0, r, r, 0.0});
  const double inner_tol = options.epsilon / 10.0;

  for (int outer = 1; outer <= options.max_outer; ++outer) {
    const double s0_b = model.s_bob(q);
    const double s0_e = model.s_eve(q);
    CMat x = q;
    SurrogateValue v = model.surrogate(s0_b, s0_e, s0_b, s0_e);
    double step = 0.0;
    for (int inner = 0; inner < options.max_inner; ++inner) {
      const CMat grad = model.surrogate_gradient(v);
      const double gnorm = grad.norm();
      if (!(gnorm > 0.0)) break;
      if (step == 0.0) step = 1.0 / gnorm;
      bool moved = false;
      CMat x_next;
      SurrogateValue v_next{};
      while (step > 1e-14) {
        x_next = project_feasible_matrix(x + step * grad);
        const CMat delta = x_next - x;
        v_next = model.surrogate(model.s_bob(x_next), model.s_eve(x_next), s0_b, s0_e);
        const double model_gain = frob_inner(grad, delta) - delta.squaredNorm() / (2.0 * step);
        if (v_next.value >= v.value + model_gain && v_next.value >= v.value) {
          moved = true;
          break;
        }
        step /= 2.0;
      }
      if (!moved) break;
      const double gain = v_next.value - v.value;
      x = x_next;
      v = v_next;
      step *= 2.0;
      if (gain < inner_tol) break;
    }

    const double r_next = model.asr(x);
    // MM guarantees r_next >= r; guard against round-off in the inner solve
    const bool accepted = r_next >= r;
    if (accepted) q = x;
    const double change = accepted ? r_next - r : 0.0;
    if (accepted) r = r_next;
    out.trace.entries.push_back({outer, r, r, step});
    if (std::abs(change) < options.epsilon) {
      out.trace.converged = true;
      out.trace.reason = StopReason::kTolerance;
      break;
    }
  }
  out.q = AnCovariance(q);
  out.r_a = r;
  return out;
}

std::size_t sca_call_count() noexcept { return g_sca_calls.load(std::memory_order_relaxed); }

double eve_sinr_term(const RowVec& g_est_l, const CMat& q, const SystemConfig& config) {
  const double p2 = config.p2();
  return p2 * quad_form(g_est_l, q) + config.csi_err_var * p2 + config.noise_var_eve;
}

double bob_sinr_term(const RowVec& h_l, const CMat& q, const SystemConfig& config) {
  return config.p2() * quad_form(h_l, q) + config.noise_var_bob;
}

CVec top_eigvec_rank2(const RowVec& g, const RowVec& h, double lambda) {
  const int n = static_cast<int>(g.size());
  if (h.size() != n) fail(ErrorKind::kInvariantViolation, "channel lengths differ");

  // orthonormal basis of span{g^H, h^H}
  std::vector<CVec> basis;
  const double scale = std::max({g.norm(), h.norm(), 1e-300});
  for (const RowVec* row : {&g, &h}) {
    CVec w = row->adjoint();
    for (const CVec& b : basis) w -= b * b.dot(w);
    const double len = w.norm();
    if (len > 1e-12 * scale) basis.push_back(w / len);
  }

  CVec best;
  double best_value = 0.0;
  if (!basis.empty()) {
    const int k = static_cast<int>(basis.size());
    CMat u(n, k);
    for (int c = 0; c < k; ++c) u.col(c) = basis[c];
    const CVec gu = (g * u).adjoint();  // k x 1: U^H g^H
    const CVec hu = (h * u).adjoint();
    CMat small = gu * gu.adjoint() - lambda * (hu * hu.adjoint());
    small = (small + small.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(small);
    if (es.info() != Eigen::Success) fail(ErrorKind::kNumeric, "2x2 eigensolver failed");
    best_value = es.eigenvalues()[k - 1];
    best = u * es.eigenvectors().col(k - 1);
  }

  // the orthogonal complement carries eigenvalue 0
  if (static_cast<int>(basis.size()) < n && (basis.empty() || best_value < 0.0)) {
    CVec pick;
    double pick_len = -1.0;
    for (int e = 0; e < n; ++e) {
      CVec w = CVec::Unit(n, e);
      for (const CVec& b : basis) w -= b * b.dot(w);
      const double len = w.norm();
      if (len > pick_len) {
        pick_len = len;
        pick = w / len;
      }
    }
    best = pick;
  }
  return best / best.norm();
}

DinkelbachResult dinkelbach_ancm(const RowVec& h_l, const RowVec& g_est_l,
                                 const SystemConfig& config, const DinkelbachOptions& options) {
  if (!(options.epsilon > 0.0)) fail(ErrorKind::kInvalidConfig, "dinkelbach.epsilon must be > 0");
  const int n = static_cast<int>(h_l.size());
  const CMat q0 = AnCovariance::scaled_identity(n).matrix();
  double lambda = eve_sinr_term(g_est_l, q0, config) / bob_sinr_term(h_l, q0, config);

  DinkelbachResult out{AnCovariance(q0), lambda, {}};
  out.trace.entries.push_back({0, lambda, lambda, lambda});
  CMat q = q0;
  for (int t = 1; t <= options.max_iter; ++t) {
    const CVec u = top_eigvec_rank2(g_est_l, h_l, lambda);
    q = u * u.adjoint();
    const double next = eve_sinr_term(g_est_l, q, config) / bob_sinr_term(h_l, q, config);
    const double change = next - lambda;
    lambda = next;
    out.trace.entries.push_back({t, lambda, lambda, lambda});
    if (std::abs(change) < options.epsilon) {
      out.trace.converged = true;
      out.trace.reason = StopReason::kTolerance;
      break;
    }
  }
  out.q = AnCovariance(q);
  out.lambda = lambda;
  return out;
}

AnCovariance nsp_baseline(const RowVec& h_l) {
  const int n = static_cast<int>(h_l.size());
  if (n < 2) fail(ErrorKind::kInvalidConfig, "null-space AN needs N_s >= 2");
  const double hh = h_l.squaredNorm();
  if (!(hh > 0.0)) fail(ErrorKind::kInvalidConfig, "null-space AN needs a nonzero channel");
  CMat q = CMat::Identity(n, n) - (h_l.adjoint() * h_l) / hh;
  q = (q + q.adjoint()) / 2.0;
  return AnCovariance(q / q.trace().real());
}

}  // namespace ssm
