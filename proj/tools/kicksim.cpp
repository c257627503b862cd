#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "kicksim/experiment.hpp"
#include "kicksim/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { ok = 0, internal = 1, invalid = 2, guard = 3, check_failed = 4 };

// Held for the lifetime of a run; a second run into the same directory fails.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".kicksim.lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw std::runtime_error("output directory '" + dir.string() + "' is locked by another run (" +
                                     path_.string() + ")");
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

// Writes via a temporary name then renames, so readers never see half a file.
void write_file(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::size_t env_threads() {
  if (const char* s = std::getenv("KICKSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

json verdict_json(const kicksim::Verdict& v) {
  json checks = json::array();
  for (const auto& c : v.checks)
    checks.push_back({{"name", c.name}, {"value", kicksim::num(c.value)}, {"threshold", kicksim::num(c.threshold)},
                      {"pass", c.pass}});
  return {{"suite", v.suite}, {"checks", checks}, {"pass", v.pass()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kicksim: which-way detection, quantum erasure and momentum-kick equivalence"};
  app.require_subcommand(1);

  std::size_t threads = 0;
  bool as_json = false;
  app.add_option("--threads", threads, "worker threads (default: $KICKSIM_THREADS, else hardware concurrency)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json", as_json, "machine-readable output");

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "experiment config (see `kicksim defaults`)")->required();
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Monte Carlo seed (overrides seed)");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--json", as_json, "print the report to stdout");

  auto* verify = app.add_subcommand("verify", "run an acceptance suite and print its verdict");
  std::string suite;
  double sigma_over_d = 1.0 / 20.0;
  std::size_t samples = 100000;
  std::uint64_t verify_seed = 20240601;
  verify->add_option("suite", suite, "equivalence | eraser | spectrum | pspace | montecarlo | all")->required();
  verify->add_option("--sigma-over-d", sigma_over_d, "slit width as a fraction of d")->capture_default_str();
  verify->add_option("--samples", samples, "Monte Carlo samples per run")->capture_default_str();
  verify->add_option("--seed", verify_seed, "Monte Carlo seed")->capture_default_str();
  verify->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  verify->add_flag("--json", as_json, "print only the verdict JSON");

  auto* spectrum = app.add_subcommand("spectrum", "print the momentum-kick spectrum of an n-slit Fourier basis");
  long n_slits = 0;
  double d = 1.0;
  bool folded = false;
  spectrum->add_option("n", n_slits, "slit count")->required();
  spectrum->add_option("d", d, "slit spacing")->capture_default_str();
  spectrum->add_flag("--folded", folded, "fold kicks into (-h/2d, h/2d]");
  spectrum->add_flag("--json", as_json, "machine-readable output");

  app.add_subcommand("defaults", "print a config file listing every key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return invalid;
  }
  kicksim::set_threads(threads > 0 ? threads : env_threads());

  try {
    if (app.got_subcommand("defaults")) {
      std::cout << kicksim::defaults_text();
      return ok;
    }

    if (*spectrum) {
      if (n_slits < 2) {
        std::cerr << "error: n must be >= 2 (got " << n_slits << ")\n";
        return invalid;
      }
      if (!(d > 0.0)) {
        std::cerr << "error: d must be > 0\n";
        return invalid;
      }
      const auto s = kicksim::kick_spectrum(static_cast<std::size_t>(n_slits), d, folded);
      if (as_json) {
        json kicks = json::array();
        for (const auto& k : s.kicks)
          kicks.push_back({{"outcome", k.outcome},
                           {"h_over_d", std::to_string(k.in_h_over_d.num) + "/" + std::to_string(k.in_h_over_d.den)},
                           {"momentum", kicksim::num(k.momentum)},
                           {"probability", kicksim::num(k.probability)}});
        std::cout << json{{"n", s.n}, {"d", kicksim::num(d)}, {"folded", folded}, {"kicks", kicks}}.dump(2) << "\n";
      } else {
        std::printf("%8s  %12s  %16s  %12s\n", "outcome", "p / (h/d)", "p (hbar=1)", "probability");
        for (const auto& k : s.kicks) {
          const std::string frac = k.in_h_over_d.num == 0
                                       ? "0"
                                       : std::to_string(k.in_h_over_d.num) + "/" + std::to_string(k.in_h_over_d.den);
          std::printf("%8zu  %12s  %16.12g  %12.12g\n", k.outcome, frac.c_str(), k.momentum, k.probability);
        }
      }
      return ok;
    }

    if (*verify) {
      const auto& names = kicksim::suite_names();
      if (std::find(names.begin(), names.end(), suite) == names.end()) {
        std::cerr << "error: unknown suite '" << suite << "'\n";
        return invalid;
      }
      if (!(sigma_over_d > 0.0) || sigma_over_d > 0.25) {
        std::cerr << "error: --sigma-over-d must satisfy 0 < value <= 1/4\n";
        return invalid;
      }
      kicksim::VerifyOptions opts;
      opts.sigma_over_d = sigma_over_d;
      opts.mc_samples = samples;
      opts.seed = verify_seed;
      const auto verdict = kicksim::run_suite(suite, opts);
      if (!as_json)
        for (const auto& c : verdict.checks)
          std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << " " << c.relation << " "
                    << c.threshold << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
      std::cout << verdict_json(verdict).dump(2) << "\n";
      return verdict.pass() ? ok : check_failed;
    }

    // run
    kicksim::ExperimentConfig cfg = kicksim::load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    const fs::path dir(cfg.output_dir);
    kicksim::ExperimentResult result = kicksim::run_experiment(cfg);
    {
      DirLock lock(dir);
      write_file(dir / "patterns.csv", result.patterns_csv);
      write_file(dir / "report.json", result.report.dump(2) + "\n");
      if (result.samples_csv) write_file(dir / "samples.csv", *result.samples_csv);
      if (result.histogram) write_file(dir / "histogram.json", result.histogram->dump(2) + "\n");
    }
    if (as_json) std::cout << result.report.dump(2) << "\n";
    else std::cerr << "wrote " << dir.string() << "\n";
    return ok;
  } catch (const kicksim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const kicksim::Error& e) {
    std::cerr << "error [" << kicksim::errc_name(e.code()) << "]: " << e.what() << "\n";
    return e.is_numerical_guard() ? guard : internal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return internal;
  }
}
