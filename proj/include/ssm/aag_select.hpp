#pragma once

// Antenna-group selection: exhaustive enumeration, simulated annealing over
// swap neighborhoods, and the three composed selection + AN design schemes.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssm/an_optim.hpp"
#include "ssm/core_model.hpp"
#include "ssm/rates.hpp"

namespace ssm {

struct SaParams {
  std::optional<double> c0;  // empty: derive with initial_temperature()
  double cf = 1e-3;
  double cooling_alpha = 0.95;
  int sample_size = 0;       // 0: N_s
  int equilibrium_len = 0;   // 0: 10 * N_s moves per temperature
  int max_mutations = 10000; // cap on temperature steps
  bool steepest = false;     // sample the whole neighborhood
  int probes = 50;
  double chi0 = 0.8;

  void validate() const;
};

/// Memoizing wrapper around an antenna-group objective. Values may be kNegInf.
class ObjectiveHandle {
 public:
  using Function = std::function<double(const Aag&)>;

  explicit ObjectiveHandle(Function f, bool memoize = true)
      : f_(std::move(f)), memoize_(memoize) {}

  double operator()(const Aag& aag);

  /// Calls forwarded to the wrapped function.
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  Function f_;
  bool memoize_;
  std::unordered_map<std::string, double> cache_;
  std::size_t evaluations_ = 0;
};

/// C(n, k) as a double (exact below 2^53).
double binomial(int n, int k);

/// All C(n_tx, n_active) groups, lexicographic in their sorted index lists.
std::vector<Aag> enumerate_aags(int n_tx, int n_active);

/// Uniform swap of one active and one inactive antenna.
Aag neighbor(const Aag& aag, Rng& rng);

/// Every swap neighbor, ordered by (active position, inactive position).
std::vector<Aag> neighborhood(const Aag& aag);

/// min{1, exp(delta / c)} > eta with eta ~ U[0,1). One uniform is drawn per call.
bool metropolis_accept(double delta, double c, Rng& rng);

/// Initial temperature giving an acceptance ratio of about chi0 for the
/// deteriorating moves seen on a `probes`-step random neighbor walk.
double initial_temperature(ObjectiveHandle& objective, const Aag& seed, int probes, double chi0,
                           Rng& rng);

struct SaResult {
  Aag best;
  double best_value;
  Aag final_state;
  double final_value;
  double c0;
  int temperature_steps = 0;
  OptimTrace trace;  // one entry per temperature: current, best-seen, C_k
};

SaResult sa_search(ObjectiveHandle& objective, const Aag& seed, const SaParams& params, Rng& rng);

/// Homogeneous Metropolis chain at fixed temperature; visit count per mask key.
std::map<std::string, int> run_metropolis_chain(ObjectiveHandle& objective, const Aag& seed,
                                                double c, int steps, Rng& rng);

struct ExhaustiveResult {
  Aag best;
  double value;
};

/// Strict-improvement scan, so ties keep the lexicographically first group.
ExhaustiveResult exhaustive_search(ObjectiveHandle& objective, int n_tx, int n_active);

struct SchemeResult {
  Aag aag;
  AnCovariance q;
  double value;                 // R_A for the ASR schemes, lambda* for Max-R-SINR
  double lambda = 0.0;          // Dinkelbach ratio (Max-R-SINR only)
  OptimTrace selection_trace;   // SA (or empty for exhaustive selection)
  OptimTrace q_trace;           // SCA outer R_A or Dinkelbach lambda of the winner
  std::size_t objective_evaluations = 0;
  std::size_t q_solver_calls = 0;
  int iterations = 0;
};

SchemeResult joint_sa_max_asr(const ChannelRealization& ch, const SystemConfig& config,
                              const SuperAlphabet& alphabet, const SaParams& params,
                              const ScaOptions& sca, Rng& rng);

SchemeResult separate_sa_max_asr(const ChannelRealization& ch, const SystemConfig& config,
                                 const SuperAlphabet& alphabet, const SaParams& params,
                                 const ScaOptions& sca, Rng& rng);

inline constexpr double kMaxExhaustiveGroups = 1e4;

SchemeResult max_r_sinr_scheme(const ChannelRealization& ch, const SystemConfig& config,
                               const SaParams& params, const DinkelbachOptions& dinkelbach,
                               Rng& rng, bool use_es);

}  // namespace ssm
