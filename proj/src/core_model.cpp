#include "ssm/core_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "ssm/error.hpp"

namespace ssm {

int derive_n_active(int n_tx) {
  if (n_tx < 2) {
    fail(ErrorKind::kInvalidConfig, "n_tx must be >= 2, got " + std::to_string(n_tx));
  }
  return static_cast<int>(std::bit_floor(static_cast<unsigned>(n_tx)));
}

SystemConfig SystemConfig::for_antennas(int n_tx) {
  SystemConfig c;
  c.n_tx = n_tx;
  c.n_active = derive_n_active(n_tx);
  c.mod_order = 4;
  c.total_power = c.n_active;
  return c;
}

void SystemConfig::validate() const {
  auto bad = [](const std::string& key, const std::string& why) {
    fail(ErrorKind::kInvalidConfig, key + ": " + why);
  };
  if (n_tx < 1) bad("n_tx", "must be >= 1");
  if (n_active < 1 || n_active > n_tx) bad("n_active", "must lie in [1, n_tx]");
  if (mod_order < 1) bad("mod_order", "must be >= 1");
  if (!(total_power > 0.0) || !std::isfinite(total_power)) bad("total_power", "must be > 0");
  if (!(power_split > 0.0 && power_split < 1.0)) bad("power_split", "must lie strictly in (0, 1)");
  if (!(noise_var_bob > 0.0) || !std::isfinite(noise_var_bob)) bad("noise_var_bob", "must be > 0");
  if (!(noise_var_eve > 0.0) || !std::isfinite(noise_var_eve)) bad("noise_var_eve", "must be > 0");
  if (!(csi_err_var >= 0.0) || !std::isfinite(csi_err_var)) bad("csi_err_var", "must be >= 0");
}

std::vector<cplx> make_constellation(int mod_order) {
  if (mod_order < 2 || !std::has_single_bit(static_cast<unsigned>(mod_order))) {
    fail(ErrorKind::kInvalidConfig,
         "mod_order must be a power of two >= 2, got " + std::to_string(mod_order));
  }
  std::vector<cplx> points;
  points.reserve(mod_order);
  if (mod_order <= 8) {
    const double offset = mod_order == 4 ? std::numbers::pi / 4.0 : 0.0;
    for (int k = 0; k < mod_order; ++k) {
      points.push_back(std::polar(1.0, offset + 2.0 * std::numbers::pi * k / mod_order));
    }
    if (mod_order == 2) {
      // exact +-1 rather than polar(1, pi) = (-1, 1.2e-16)
      points = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
    }
    return points;
  }
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(mod_order))));
  if (side * side != mod_order) {
    fail(ErrorKind::kInvalidConfig,
         "QAM requires a square order, got " + std::to_string(mod_order));
  }
  // average energy of the odd-integer lattice is 2(M-1)/3
  const double scale = 1.0 / std::sqrt(2.0 * (mod_order - 1) / 3.0);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const double re = 2.0 * col - (side - 1);
      const double im = (side - 1) - 2.0 * row;
      points.emplace_back(re * scale, im * scale);
    }
  }
  return points;
}

cplx complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  const double re = gauss(rng);
  const double im = gauss(rng);
  return {re, im};
}

ChannelRealization sample_channel(const SystemConfig& config, Rng& rng) {
  const int n = config.n_tx;
  ChannelRealization ch;
  ch.h.resize(n);
  ch.g_est.resize(n);
  ch.g_err.resize(n);
  for (int i = 0; i < n; ++i) ch.h[i] = complex_normal(rng);
  for (int i = 0; i < n; ++i) ch.g_est[i] = complex_normal(rng);
  for (int i = 0; i < n; ++i) {
    ch.g_err[i] = config.csi_err_var > 0.0 ? complex_normal(rng, config.csi_err_var) : cplx(0.0);
  }
  ch.g = ch.g_est + ch.g_err;
  return ch;
}

Aag Aag::from_mask(std::vector<std::uint8_t> mask) {
  std::vector<int> active;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] > 1) {
      fail(ErrorKind::kInvariantViolation, "AAG mask entries must be 0 or 1");
    }
    if (mask[i] == 1) active.push_back(static_cast<int>(i));
  }
  if (active.empty()) {
    fail(ErrorKind::kInvariantViolation, "AAG must activate at least one antenna");
  }
  return Aag(std::move(mask), std::move(active));
}

Aag Aag::from_indices(int n_tx, std::vector<int> indices) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n_tx), 0);
  for (int idx : indices) {
    if (idx < 0 || idx >= n_tx) {
      fail(ErrorKind::kInvariantViolation,
           "antenna index " + std::to_string(idx) + " out of range for n_tx=" + std::to_string(n_tx));
    }
    if (mask[idx] != 0) {
      fail(ErrorKind::kInvariantViolation, "duplicate antenna index " + std::to_string(idx));
    }
    mask[idx] = 1;
  }
  return from_mask(std::move(mask));
}

Aag Aag::leading(int n_tx, int n_active) {
  if (n_active < 1 || n_active > n_tx) {
    fail(ErrorKind::kInvariantViolation, "n_active must lie in [1, n_tx]");
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n_tx), 0);
  std::fill_n(mask.begin(), n_active, std::uint8_t{1});
  return from_mask(std::move(mask));
}

std::string Aag::key() const {
  std::string k(mask_.size(), '0');
  for (int i : active_) k[i] = '1';
  return k;
}

RowVec restrict_to(const RowVec& row, const Aag& aag) {
  if (row.size() != aag.n_tx()) {
    fail(ErrorKind::kInvariantViolation,
         "AAG over " + std::to_string(aag.n_tx()) + " antennas applied to a length-" +
             std::to_string(row.size()) + " channel");
  }
  RowVec out(aag.n_active());
  for (int k = 0; k < aag.n_active(); ++k) out[k] = row[aag.active_indices()[k]];
  return out;
}

Eigen::MatrixXd selection_matrix(const Aag& aag) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(aag.n_tx(), aag.n_active());
  for (int k = 0; k < aag.n_active(); ++k) s(aag.active_indices()[k], k) = 1.0;
  return s;
}

SubChannel select_subchannel(const ChannelRealization& ch, const Aag& aag) {
  return {restrict_to(ch.h, aag), restrict_to(ch.g_est, aag)};
}

SuperAlphabet::SuperAlphabet(int n_active, std::vector<cplx> constellation)
    : n_active_(n_active), constellation_(std::move(constellation)) {
  if (n_active_ < 1 || constellation_.empty()) {
    fail(ErrorKind::kInvalidConfig, "super-alphabet needs N_s >= 1 and a nonempty constellation");
  }
  symbols_.reserve(static_cast<std::size_t>(n_active_) * constellation_.size());
  for (int i = 0; i < n_active_; ++i) {
    for (int j = 0; j < mod_order(); ++j) symbols_.push_back({i, j, constellation_[j]});
  }
}

CVec SuperAlphabet::vector(int k) const {
  const SmSymbol& s = symbols_.at(k);
  CVec x = CVec::Zero(n_active_);
  x[s.antenna] = s.value;
  return x;
}

std::vector<cplx> SuperAlphabet::effective_points(const RowVec& h_l) const {
  std::vector<cplx> p;
  p.reserve(symbols_.size());
  for (const SmSymbol& s : symbols_) p.push_back(h_l[s.antenna] * s.value);
  return p;
}

double SuperAlphabet::difference_energy(int i, int j) const {
  const SmSymbol& a = symbols_[i];
  const SmSymbol& b = symbols_[j];
  if (a.antenna == b.antenna) return std::norm(a.value - b.value);
  return std::norm(a.value) + std::norm(b.value);
}

SuperAlphabet build_super_alphabet(const SystemConfig& config) {
  return SuperAlphabet(config.n_active, make_constellation(config.mod_order));
}

Detection ml_detect(cplx y, const RowVec& h_l, const SuperAlphabet& alphabet, double p1) {
  const double amp = std::sqrt(p1);
  int best = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  const auto& symbols = alphabet.symbols();
  for (int k = 0; k < alphabet.size(); ++k) {
    const double metric = std::norm(y - amp * h_l[symbols[k].antenna] * symbols[k].value);
    if (metric < best_metric) {
      best_metric = metric;
      best = k;
    }
  }
  return {best, symbols[best].antenna, symbols[best].level};
}

}  // namespace ssm
