#pragma once

// System model of a secure spatial-modulation link: a multi-antenna
// transmitter, a single-antenna legitimate receiver (Bob) and a single-antenna
// eavesdropper (Eve) whose channel is only known up to an additive Gaussian
// estimation error.

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ssm {

using cplx = std::complex<double>;
using RowVec = Eigen::RowVectorXcd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

/// Number of active antennas for an n_tx-antenna transmitter: 2^floor(log2 n_tx).
int derive_n_active(int n_tx);

struct SystemConfig {
  int n_tx = 7;
  int n_active = 4;
  int mod_order = 4;
  double total_power = 4.0;
  double power_split = 0.5;  // beta, P1 = beta * Ps
  double noise_var_bob = 1.0;
  double noise_var_eve = 1.0;
  double csi_err_var = 0.25;
  std::uint64_t rng_seed = 1;

  /// Defaults used by the experiments: derived N_s, QPSK, P_s = N_s.
  static SystemConfig for_antennas(int n_tx);

  double p1() const noexcept { return power_split * total_power; }
  double p2() const noexcept { return total_power - p1(); }
  int alphabet_size() const noexcept { return n_active * mod_order; }

  /// Throws Error(kInvalidConfig) naming the offending field.
  void validate() const;
};

/// Unit-average-energy constellation: PSK for M <= 8, square QAM above.
/// PSK points are listed in increasing angle (M = 4 starts at pi/4); QAM
/// points row-major over the in-phase/quadrature levels.
std::vector<cplx> make_constellation(int mod_order);

/// Standard circular complex Gaussian CN(0, variance).
cplx complex_normal(Rng& rng, double variance = 1.0);

struct ChannelRealization {
  RowVec h;      // Alice -> Bob
  RowVec g;      // Alice -> Eve, true
  RowVec g_est;  // Alice's estimate of g
  RowVec g_err;  // g - g_est
};

/// i.i.d. Rayleigh draws: h, g_est ~ CN(0,1), g_err ~ CN(0, sigma_e^2).
ChannelRealization sample_channel(const SystemConfig& config, Rng& rng);

/// Active antenna group: a 0-1 mask over the transmit antennas.
class Aag {
 public:
  static Aag from_mask(std::vector<std::uint8_t> mask);
  static Aag from_indices(int n_tx, std::vector<int> indices);
  /// The first n_active antennas.
  static Aag leading(int n_tx, int n_active);

  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  const std::vector<int>& active_indices() const noexcept { return active_; }
  int n_tx() const noexcept { return static_cast<int>(mask_.size()); }
  int n_active() const noexcept { return static_cast<int>(active_.size()); }
  bool is_active(int antenna) const { return mask_.at(antenna) != 0; }

  /// Mask rendered as a string of '0'/'1', usable as a map key.
  std::string key() const;

  friend bool operator==(const Aag& a, const Aag& b) { return a.mask_ == b.mask_; }

 private:
  Aag(std::vector<std::uint8_t> mask, std::vector<int> active)
      : mask_(std::move(mask)), active_(std::move(active)) {}

  std::vector<std::uint8_t> mask_;
  std::vector<int> active_;
};

/// Entries of `row` at the active antennas, ascending index order.
RowVec restrict_to(const RowVec& row, const Aag& aag);

/// Explicit N_t x N_s selection matrix S_l (column k selects active antenna k).
Eigen::MatrixXd selection_matrix(const Aag& aag);

struct SubChannel {
  RowVec h;
  RowVec g_est;
};

SubChannel select_subchannel(const ChannelRealization& ch, const Aag& aag);

/// One spatial-modulation transmit vector e_antenna * b_level.
struct SmSymbol {
  int antenna;
  int level;
  cplx value;
};

/// The N_s*M legitimate transmit vectors, antenna-major.
class SuperAlphabet {
 public:
  SuperAlphabet(int n_active, std::vector<cplx> constellation);

  int n_active() const noexcept { return n_active_; }
  int mod_order() const noexcept { return static_cast<int>(constellation_.size()); }
  int size() const noexcept { return static_cast<int>(symbols_.size()); }
  const std::vector<cplx>& constellation() const noexcept { return constellation_; }
  const std::vector<SmSymbol>& symbols() const noexcept { return symbols_; }

  /// Dense length-N_s vector of symbol k.
  CVec vector(int k) const;

  /// Scalars h_l * x_k for every symbol.
  std::vector<cplx> effective_points(const RowVec& h_l) const;

  /// ||x_i - x_j||^2.
  double difference_energy(int i, int j) const;

 private:
  int n_active_;
  std::vector<cplx> constellation_;
  std::vector<SmSymbol> symbols_;
};

SuperAlphabet build_super_alphabet(const SystemConfig& config);

struct Detection {
  int index;  // ordinal in the super-alphabet
  int antenna;
  int level;
};

/// argmin_k |y - sqrt(p1) h_l x_k|^2, ties resolved to the lowest ordinal.
Detection ml_detect(cplx y, const RowVec& h_l, const SuperAlphabet& alphabet, double p1);

}  // namespace ssm
