#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ssm/bench.hpp"
#include "test_util.hpp"

using namespace ssm;
using ssm::testing::throws_kind;

namespace fs = std::filesystem;

namespace {

const char* kMinimal = "n_tx: 7\nsnr: [0]\nschemes: [nsp-baseline]\n";

std::string error_message(const std::string& text) {
  try {
    parse_spec_text(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

ErrorKind error_kind(const std::string& text) {
  try {
    parse_spec_text(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kRuntime;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  return out;
}

// Data lines with the trailing wall-time column removed.
std::string without_wall_time(const std::string& csv) {
  std::istringstream is(csv);
  std::string line, out;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
    out += line + "\n";
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "ssm_test_bench";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd =
      std::string("\"") + SSM_CLI_PATH + "\" " + args + " > \"" + stdout_file.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("minimal spec takes the documented defaults") {
  const ExperimentSpec s = parse_spec_text(kMinimal);
  CHECK(s.system.n_tx == 7);
  CHECK(s.system.n_active == 4);
  CHECK(s.system.mod_order == 4);
  CHECK(s.system.power_split == 0.5);
  CHECK(s.system.total_power == 4.0);
  CHECK(s.system.csi_err_var == 0.25);
  CHECK(s.n_realizations == 500);
  CHECK(s.mc_samples == 500);
  CHECK(s.rate_metric == RateMetric::kExactMc);
  CHECK(s.sa.sample_size == 4);
  CHECK(s.sa.equilibrium_len == 40);
  REQUIRE(s.schemes.size() == 1);
  CHECK(s.schemes[0] == Scheme::kNspBaseline);

  const ExperimentSpec big = parse_spec_text("n_tx: 100\nsnr: [0]\nschemes: [max-r-sinr]\n");
  CHECK(big.system.n_active == 64);
  CHECK(big.rate_metric == RateMetric::kAsrClosed);
}

TEST_CASE("spec errors name the offending key") {
  CHECK(error_kind(std::string(kMinimal) + "power_split: 1.0\n") == ErrorKind::kInvalidConfig);
  CHECK(error_message(std::string(kMinimal) + "power_split: 1.0\n").find("power_split") !=
        std::string::npos);
  CHECK(error_kind(std::string(kMinimal) + "power_split: 0.0\n") == ErrorKind::kInvalidConfig);

  CHECK(error_kind(std::string(kMinimal) + "colour: red\n") == ErrorKind::kParse);
  CHECK(error_message(std::string(kMinimal) + "colour: red\n").find("colour") != std::string::npos);

  CHECK(error_message("n_tx: 7\nschemes: [nsp-baseline]\n").find("snr") != std::string::npos);
  CHECK(error_message(std::string(kMinimal) + "sa:\n  cf: fast\n").find("sa.cf") !=
        std::string::npos);
  CHECK(error_message(std::string(kMinimal) + "sa:\n  temp: 3\n").find("sa.temp") !=
        std::string::npos);
  CHECK(error_kind("n_tx: 7\nsnr: [0]\nschemes: [brute-force]\n") == ErrorKind::kParse);
  CHECK(error_kind("n_tx: 7\nsnr: []\nschemes: [nsp-baseline]\n") == ErrorKind::kInvalidConfig);
  CHECK(error_kind(std::string(kMinimal) + "n_realizations: 0\n") == ErrorKind::kInvalidConfig);
  CHECK(error_kind(std::string(kMinimal) + "mod_order: 6\n") == ErrorKind::kInvalidConfig);
  CHECK(error_kind("n_tx: [7\n") == ErrorKind::kParse);
  CHECK(throws_kind(ErrorKind::kIo, [] { parse_spec_file("/nonexistent/spec.yaml"); }));
}

TEST_CASE("spec serialization round-trips") {
  const std::string text =
      "n_tx: 9\nn_active: 4\nmod_order: 2\npower_split: 0.3\ncsi_err_var: 0.1\n"
      "snr: [-5, 2.5, 17]\nschemes: [joint-sa, max-r-sinr]\nn_realizations: 12\n"
      "mc_samples: 321\nrate_metric: asr-closed\nseed: 18446744073709551615\n"
      "output: out.csv\nsa:\n  c0: 2.0\n  cf: 0.01\n  cooling_alpha: 0.9\n  steepest: true\n"
      "gd:\n  mu0: 0.5\n  restarts: 3\nsca:\n  epsilon: 0.001\ndinkelbach:\n  max_iter: 20\n";
  const ExperimentSpec a = parse_spec_text(text);
  const std::string once = serialize_spec(a);
  const ExperimentSpec b = parse_spec_text(once);
  CHECK(serialize_spec(b) == once);
  CHECK(b.system.n_tx == 9);
  CHECK(b.system.power_split == 0.3);
  CHECK(b.snr_db == std::vector<double>{-5.0, 2.5, 17.0});
  CHECK(b.seed == std::numeric_limits<std::uint64_t>::max());
  CHECK(b.sa.c0.value() == 2.0);
  CHECK(b.sa.steepest);
  CHECK(b.es_gd.restarts == 3);
  CHECK(b.sca.epsilon == 0.001);
  CHECK(b.dinkelbach.max_iter == 20);
  CHECK(b.rate_metric == RateMetric::kAsrClosed);
  CHECK(b.output == "out.csv");
}

TEST_CASE("SNR convention") {
  CHECK(noise_variance(4.0, 0.0) == 4.0);
  CHECK(noise_variance(4.0, 10.0) == doctest::Approx(0.4).epsilon(1e-15));
  const ExperimentSpec s = parse_spec_text(kMinimal);
  const SystemConfig c = config_at_snr(s, 20.0);
  CHECK(c.noise_var_bob == c.noise_var_eve);
  CHECK(c.noise_var_bob == doctest::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("paired channel realizations") {
  const ExperimentSpec s = parse_spec_text(kMinimal);
  const ChannelRealization a = sweep_channel(s, 3);
  const ChannelRealization b = sweep_channel(s, 3);
  const ChannelRealization c = sweep_channel(s, 4);
  CHECK(a.h == b.h);
  CHECK(a.g_est == b.g_est);
  CHECK(a.h != c.h);
  Rng x = derive_rng(5, {1, 2, 3});
  Rng y = derive_rng(5, {1, 2, 3});
  Rng z = derive_rng(5, {1, 2, 4});
  const auto vx = x();
  CHECK(vx == y());
  CHECK(vx != z());
}

TEST_CASE("noise-dominated sweep carries almost nothing") {
  ExperimentSpec s = parse_spec_text(kMinimal);
  s.snr_db = {-30.0};
  s.n_realizations = 20;
  s.mc_samples = 200;
  const SweepResult r = run_sweep(s);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].scheme == "nsp-baseline");
  CHECK(r.rows[0].ergodic_sr_bits >= 0.0);
  CHECK(r.rows[0].ergodic_sr_bits <= 0.1);
}

TEST_CASE("sweeps are deterministic") {
  ExperimentSpec s = parse_spec_text(
      "n_tx: 5\nsnr: [0, 10]\nschemes: [joint-sa, separate-sa, max-r-sinr, nsp-baseline]\n"
      "n_realizations: 6\nmc_samples: 100\nseed: 11\n");
  const std::string one = csv_of(run_sweep(s, 1));
  const std::string again = csv_of(run_sweep(s, 1));
  const std::string threaded = csv_of(run_sweep(s, 3));
  CHECK(without_wall_time(one) == without_wall_time(again));
  CHECK(without_wall_time(one) == without_wall_time(threaded));

  const SweepResult r = run_sweep(s);
  CHECK(r.rows.size() == 8);
  for (const SweepRow& row : r.rows) CHECK(row.ergodic_sr_bits >= 0.0);
  // scheme-major order
  CHECK(r.rows[0].scheme == "joint-sa");
  CHECK(r.rows[0].snr_db == 0.0);
  CHECK(r.rows[1].snr_db == 10.0);

  s.seed = 12;
  CHECK(without_wall_time(csv_of(run_sweep(s))) != without_wall_time(one));
}

TEST_CASE("CSV output") {
  SweepResult r;
  r.metadata = {{"version", kVersion}, {"rate_metric", "exact-mc"}};
  SUBCASE("header-only when there are no rows") {
    const std::string csv = csv_of(r);
    CHECK(csv == "# version: " + std::string(kVersion) +
                     "\n# rate_metric: exact-mc\n"
                     "scheme,snr_db,ergodic_sr_bits,std_error,mean_iterations,wall_time_s\n");
  }
  SUBCASE("column order matches the golden file") {
    std::istringstream is(csv_of(r));
    std::string line, header;
    while (std::getline(is, line)) {
      if (line[0] != '#') header = line + "\n";
    }
    CHECK(header == read_file(fs::path(SSM_GOLDEN_DIR) / "sweep_columns.csv"));

    std::ostringstream trace;
    write_trace_csv({}, trace);
    CHECK(trace.str() == read_file(fs::path(SSM_GOLDEN_DIR) / "trace_columns.csv"));
  }
  SUBCASE("values parse back exactly") {
    r.rows.push_back({"joint-sa", -2.5, 0.1 + 0.2, 1.0 / 3.0, 12.125, 3.0e-7});
    r.rows.push_back({"nsp-baseline", 17.0, std::nextafter(1.0, 2.0), 0.0, 1.0, 123456.789});
    r.rows.push_back({"max-r-sinr", 1e-300, 4.9406564584124654e-324, 1e300, 0.0, 0.0});
    const std::string csv = csv_of(r);
    CHECK(csv.back() == '\n');
    std::istringstream is(csv);
    std::string line;
    std::size_t k = 0;
    while (std::getline(is, line)) {
      if (line[0] == '#' || line.rfind("scheme,", 0) == 0) continue;
      const auto cells = split(line, ',');
      REQUIRE(cells.size() == 6);
      REQUIRE(k < r.rows.size());
      const SweepRow& want = r.rows[k++];
      CHECK(cells[0] == want.scheme);
      CHECK(std::strtod(cells[1].c_str(), nullptr) == want.snr_db);
      CHECK(std::strtod(cells[2].c_str(), nullptr) == want.ergodic_sr_bits);
      CHECK(std::strtod(cells[3].c_str(), nullptr) == want.std_error);
      CHECK(std::strtod(cells[4].c_str(), nullptr) == want.mean_iterations);
      CHECK(std::strtod(cells[5].c_str(), nullptr) == want.wall_time_s);
    }
    CHECK(k == r.rows.size());
  }
  SUBCASE("unwritable path") {
    try {
      emit_csv(r, "/nonexistent/dir/out.csv");
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kIo);
      CHECK(std::string(e.what()).find("/nonexistent/dir/out.csv") != std::string::npos);
    }
  }
}

TEST_CASE("sweep metadata") {
  ExperimentSpec s = parse_spec_text(kMinimal);
  s.n_realizations = 2;
  s.mc_samples = 100;
  const SweepResult r = run_sweep(s);
  auto has = [&](const std::string& key) {
    for (const auto& [k, v] : r.metadata) {
      if (k == key) return true;
    }
    return false;
  };
  CHECK(has("version"));
  CHECK(has("seed"));
  CHECK(has("snr_definition"));
  CHECK(has("rate_metric"));
}

TEST_CASE("optimizer traces") {
  const ExperimentSpec s = parse_spec_text("n_tx: 7\nsnr: [10]\nschemes: [joint-sa]\n");
  SUBCASE("joint annealing best-seen never drops") {
    const auto rows = run_trace(s, Scheme::kJointSa, 10.0);
    int selection = 0;
    int sca = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].phase == "selection") {
        ++selection;
        if (k > 0 && rows[k - 1].phase == "selection") CHECK(rows[k].best >= rows[k - 1].best);
      } else if (rows[k].phase == "sca") {
        ++sca;
      }
    }
    CHECK(selection > 0);
    CHECK(selection <= s.sa.max_mutations + 1);
    CHECK(sca <= s.sca.max_outer + 1);
  }
  SUBCASE("Dinkelbach lambda never drops") {
    const auto rows = run_trace(s, Scheme::kMaxRSinr, 10.0);
    int n = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (rows[k].phase == "dinkelbach" && rows[k - 1].phase == "dinkelbach") {
        CHECK(rows[k].param >= rows[k - 1].param - 1e-10);
      }
      n += rows[k].phase == "dinkelbach";
    }
    CHECK(n >= 1);
    CHECK(n <= s.dinkelbach.max_iter + 1);
  }
  SUBCASE("gradient ascent stays within its cap") {
    ExperimentSpec g = s;
    g.es_gd.gd.n_mc = 100;
    const auto rows = run_trace(g, Scheme::kEsGd, 10.0);
    REQUIRE(!rows.empty());
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].objective >= rows[k - 1].objective);
  }
}

TEST_CASE("command line") {
  const fs::path dir = scratch_dir();
  const fs::path spec = dir / "tiny.yaml";
  {
    std::ofstream out(spec);
    out << "n_tx: 5\nsnr: [0]\nschemes: [nsp-baseline, max-r-sinr]\nn_realizations: 3\n"
           "mc_samples: 100\n";
  }
  const fs::path csv = dir / "tiny.csv";
  fs::remove(csv);
  CHECK(run_cli("sweep --spec \"" + spec.string() + "\" --out \"" + csv.string() + "\"") == 0);
  const std::string body = read_file(csv);
  CHECK(body.find("scheme,snr_db,ergodic_sr_bits") != std::string::npos);
  CHECK(body.find("max-r-sinr,0,") != std::string::npos);

  const fs::path seeded = dir / "seeded.csv";
  CHECK(run_cli("sweep --spec \"" + spec.string() + "\" --seed 99 --workers 2 --out \"" +
                seeded.string() + "\"") == 0);
  CHECK(read_file(seeded).find("# seed: 99") != std::string::npos);

  const fs::path enum_out = dir / "enum.txt";
  CHECK(run_cli("enumerate --n-tx 7", enum_out) == 0);
  CHECK(read_file(enum_out).find("L=35") != std::string::npos);
  CHECK(run_cli("enumerate --n-tx 15 --n-active 8", enum_out) == 0);
  CHECK(read_file(enum_out).find("L=6435") != std::string::npos);

  const fs::path trace_out = dir / "trace.csv";
  CHECK(run_cli("trace --spec \"" + spec.string() + "\" --scheme max-r-sinr --snr 5 --out \"" +
                trace_out.string() + "\"") == 0);
  CHECK(read_file(trace_out).rfind("phase,step,objective,best,param\n", 0) == 0);

  CHECK(run_cli("validate --check 11") == 0);

  const fs::path bad = dir / "bad.yaml";
  {
    std::ofstream out(bad);
    out << "n_tx: 5\nsnr: [0]\nschemes: [nsp-baseline]\nunknown_key: 1\n";
  }
  CHECK(run_cli("sweep --spec \"" + bad.string() + "\"") == exit_code(ErrorKind::kParse));
  {
    std::ofstream out(bad);
    out << "n_tx: 5\nsnr: [0]\nschemes: [nsp-baseline]\npower_split: 1.5\n";
  }
  CHECK(run_cli("sweep --spec \"" + bad.string() + "\"") == exit_code(ErrorKind::kInvalidConfig));
  CHECK(run_cli("sweep --spec \"" + spec.string() + "\" --out /nonexistent/dir/x.csv") ==
        exit_code(ErrorKind::kIo));
  CHECK(run_cli("enumerate") == exit_code(ErrorKind::kInvalidConfig));
  CHECK(run_cli("sweep --spec /nonexistent.yaml") != 0);
  CHECK(run_cli("") != 0);
}
