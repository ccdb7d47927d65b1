#pragma once

// Experiment driver: YAML experiment specs, paired-seed ergodic SNR sweeps,
// single-realization optimizer traces and CSV output.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ssm/aag_select.hpp"
#include "ssm/an_optim.hpp"
#include "ssm/core_model.hpp"

namespace ssm {

inline constexpr const char* kVersion = "0.1.0";

enum class Scheme { kEsGd, kJointSa, kSeparateSa, kMaxRSinr, kNspBaseline };
enum class RateMetric { kExactMc, kAsrClosed };

const char* to_string(Scheme s) noexcept;
const char* to_string(RateMetric m) noexcept;
/// Throws kParse for an unknown name.
Scheme parse_scheme(const std::string& name);
RateMetric parse_rate_metric(const std::string& name);

/// Alphabet sizes above this use the closed-form metric unless overridden.
inline constexpr int kExactMetricMaxAlphabet = 64;

struct ExperimentSpec {
  SystemConfig system;  // noise variances are overwritten per SNR point
  std::vector<double> snr_db;
  int n_realizations = 500;
  std::vector<Scheme> schemes;
  int mc_samples = 500;
  RateMetric rate_metric = RateMetric::kExactMc;
  std::string output;
  std::uint64_t seed = 1;

  SaParams sa;
  EsGdOptions es_gd;
  ScaOptions sca;
  DinkelbachOptions dinkelbach;

  void validate() const;
};

/// Noise variance sigma_B^2 = sigma_E^2 = P_s 10^(-snr/10).
double noise_variance(double total_power, double snr_db);

/// System config at one SNR point.
SystemConfig config_at_snr(const ExperimentSpec& spec, double snr_db);

/// Errors name the offending key; kParse for malformed YAML or wrong types,
/// kInvalidConfig for values outside their domain, kIo for unreadable files.
ExperimentSpec parse_spec_text(const std::string& text);
ExperimentSpec parse_spec_file(const std::string& path);

/// Fully resolved YAML; parse_spec_text(serialize_spec(s)) reproduces s.
std::string serialize_spec(const ExperimentSpec& spec);

struct SweepRow {
  std::string scheme;
  double snr_db;
  double ergodic_sr_bits;
  double std_error;
  double mean_iterations;
  double wall_time_s;
};

struct SweepResult {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<SweepRow> rows;
};

/// Outcome of one scheme on one realization and SNR point.
struct SchemeOutcome {
  Aag aag;
  AnCovariance q;
  double iterations;
};

SchemeOutcome run_scheme(Scheme scheme, const ChannelRealization& ch, const SystemConfig& config,
                         const SuperAlphabet& alphabet, const ExperimentSpec& spec, Rng& rng);

/// Instantaneous secrecy rate of (aag, q) under the spec's metric, clamped at 0.
double evaluate_sr(const SchemeOutcome& outcome, const ChannelRealization& ch,
                   const SystemConfig& config, const SuperAlphabet& alphabet,
                   const ExperimentSpec& spec, Rng& rng);

/// Generator for a named stream; identical (seed, indices) give identical streams.
Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint32_t> indices);

/// Realization r of a sweep; shared by every scheme and SNR point.
ChannelRealization sweep_channel(const ExperimentSpec& spec, int realization);

SweepResult run_sweep(const ExperimentSpec& spec, int workers = 1);

struct TraceRow {
  std::string phase;  // "selection" or the AN-design stage
  int step;
  double objective;
  double best;
  double param;
};

std::vector<TraceRow> run_trace(const ExperimentSpec& spec, Scheme scheme, double snr_db);

void write_csv(const SweepResult& result, std::ostream& out);
/// Throws kIo naming the path on failure.
void emit_csv(const SweepResult& result, const std::string& path);

void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out);

}  // namespace ssm
