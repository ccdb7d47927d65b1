// Command-line front end: sweep, trace, validate, enumerate.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssm/aag_select.hpp"
#include "ssm/bench.hpp"
#include "ssm/error.hpp"
#include "ssm/validation.hpp"

namespace {

ssm::ExperimentSpec load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  ssm::ExperimentSpec spec = ssm::parse_spec_file(path);
  if (seed) spec.seed = *seed;
  return spec;
}

// Writes via `emit` to `path`, or stdout when path is empty.
template <typename Emit>
void write_to(const std::string& path, Emit emit) {
  if (path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) ssm::fail(ssm::ErrorKind::kIo, "cannot open '" + path + "' for writing");
  emit(out);
  if (!out) ssm::fail(ssm::ErrorKind::kIo, "write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure spatial modulation: antenna-group selection and artificial-noise design"};
  app.require_subcommand(1);

  std::string spec_path;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out_path;

  auto* sweep = app.add_subcommand("sweep", "Ergodic secrecy-rate sweep over the SNR grid");
  sweep->add_option("--spec", spec_path, "YAML experiment spec")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seed", seed, "Override the spec seed");
  sweep->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_path, "CSV output path (default: spec output, else stdout)");

  std::string scheme_name;
  double snr_db = 10.0;
  auto* trace = app.add_subcommand("trace", "Per-iteration optimizer trace on one realization");
  trace->add_option("--spec", spec_path, "YAML experiment spec")->required()->check(CLI::ExistingFile);
  trace->add_option("--scheme", scheme_name, "Scheme name (default: first in spec)");
  trace->add_option("--snr", snr_db, "SNR in dB");
  trace->add_option("--seed", seed, "Override the spec seed");
  trace->add_option("--out", out_path, "CSV output path (default: stdout)");

  std::vector<int> ids;
  std::uint64_t check_seed = 20240611;
  auto* validate = app.add_subcommand("validate", "Run the acceptance checks");
  validate->add_option("--check", ids, "Check ids to run (default: all)")
      ->check(CLI::Range(1, ssm::kAcceptanceCount));
  validate->add_option("--seed", check_seed, "Base seed");

  int n_tx = 0;
  int n_active = 0;
  auto* enumerate = app.add_subcommand("enumerate", "Number of antenna groups and search guards");
  enumerate->add_option("--n-tx", n_tx, "Transmit antennas")->check(CLI::PositiveNumber);
  enumerate->add_option("--n-active", n_active, "Active antennas (default: derived)");
  enumerate->add_option("--spec", spec_path, "Read n_tx/n_active from a spec instead");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      const ssm::ExperimentSpec spec = load(spec_path, seed);
      const ssm::SweepResult result = ssm::run_sweep(spec, workers);
      const std::string path = out_path.empty() ? spec.output : out_path;
      write_to(path, [&](std::ostream& os) { ssm::write_csv(result, os); });
    } else if (*trace) {
      const ssm::ExperimentSpec spec = load(spec_path, seed);
      const ssm::Scheme scheme =
          scheme_name.empty() ? spec.schemes.front() : ssm::parse_scheme(scheme_name);
      const auto rows = ssm::run_trace(spec, scheme, snr_db);
      write_to(out_path, [&](std::ostream& os) { ssm::write_trace_csv(rows, os); });
    } else if (*validate) {
      if (ids.empty()) {
        for (int i = 1; i <= ssm::kAcceptanceCount; ++i) ids.push_back(i);
      }
      bool all = true;
      for (int id : ids) {
        const ssm::CheckResult r = ssm::run_check(id, check_seed);
        std::cout << ssm::format_check(r) << std::endl;
        all = all && r.passed;
      }
      return all ? 0 : ssm::exit_code(ssm::ErrorKind::kInvariantViolation);
    } else if (*enumerate) {
      if (!spec_path.empty()) {
        const ssm::ExperimentSpec spec = ssm::parse_spec_file(spec_path);
        n_tx = spec.system.n_tx;
        n_active = spec.system.n_active;
      }
      if (n_tx == 0) ssm::fail(ssm::ErrorKind::kInvalidConfig, "enumerate needs --n-tx or --spec");
      if (n_active == 0) n_active = ssm::derive_n_active(n_tx);
      if (n_active < 1 || n_active > n_tx) {
        ssm::fail(ssm::ErrorKind::kInvalidConfig, "n_active must lie in [1, n_tx]");
      }
      const double groups = ssm::binomial(n_tx, n_active);
      const ssm::EsGdOptions es;
      std::cout << "n_tx=" << n_tx << " n_active=" << n_active << "\n";
      if (groups < 1e15) {
        std::cout << "L=" << std::llround(groups) << "\n";
      } else {
        std::cout << "L~" << std::setprecision(6) << groups << "\n";
      }
      std::cout << "es-gd guard=" << es.max_groups << " "
                << (groups <= static_cast<double>(es.max_groups) ? "allowed" : "refused") << "\n";
      std::cout << "max-r-sinr exhaustive guard=" << static_cast<long long>(ssm::kMaxExhaustiveGroups)
                << " " << (groups <= ssm::kMaxExhaustiveGroups ? "exhaustive" : "annealing")
                << "\n";
      std::cout << "neighborhood=" << n_active * (n_tx - n_active) << "\n";
    }
  } catch (const ssm::Error& e) {
    std::cerr << "error (" << ssm::to_string(e.kind()) << "): " << e.what() << "\n";
    return ssm::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ssm::exit_code(ssm::ErrorKind::kRuntime);
  }
  return 0;
}
