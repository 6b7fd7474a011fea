// despeckle: synthesize speckle, denoise, evaluate and benchmark.
//
// Exit codes: 0 success, 2 usage or parameter error, 1 runtime/numeric error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "despeckle/despeckle.hpp"

namespace {

using namespace despeckle;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

GrayImage read_input(const std::string& path) {
  if (!std::filesystem::exists(path)) throw UsageError(path + ": input file not found");
  return load_pgm(path);
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string model = "mult-gauss";
  double sigma = 0.2;
  std::uint64_t seed = 0;
  std::string input, output;
  int maxval = 255;
};

int run_synth(const SynthOptions& o) {
  const GrayImage clean = read_input(o.input);
  GrayImage noisy;
  if (o.model == "gauss") {
    noisy = add_gaussian_noise(clean, o.sigma, o.seed);
  } else {
    const SpeckleModel m = o.model == "rayleigh" ? SpeckleModel::kRayleigh
                                                 : SpeckleModel::kMultiplicativeGaussian;
    noisy = add_multiplicative_speckle(clean, {m, o.sigma, o.seed});
  }
  save_pgm(noisy, o.output, o.maxval);
  const std::string sidecar = o.output + ".noise.txt";
  std::ofstream side(sidecar);
  if (!side) throw IoError(sidecar, "cannot open for writing");
  side << "model = " << o.model << "\n"
       << "sigma = " << o.sigma << "\n"
       << "seed = " << o.seed << "\n"
       << "input = " << o.input << "\n";
  std::cerr << "synth: model=" << o.model << " sigma=" << o.sigma << " seed=" << o.seed << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct FilterOptions {
  std::string filter = "robust-nlm";
  std::string domain;
  std::string self_weight = "natural";
  FilterConfig config;
  // Optional values land here first so "unset" stays distinguishable.
  double sigma_n = -1, h = -1, h2 = -1, patch_sigma = -1, lee_sigma = -1;
};

void add_filter_flags(CLI::App* cmd, FilterOptions& o) {
  auto& c = o.config;
  cmd->add_option("--filter", o.filter, "nlm | robust-nlm | lee | frost | srad")
      ->check(CLI::IsMember({"nlm", "robust-nlm", "lee", "frost", "srad"}));
  cmd->add_option("--domain", o.domain, "linear | log (default: log for robust-nlm, else linear)")
      ->check(CLI::IsMember({"linear", "log"}));
  cmd->add_option("--epsilon", c.log_epsilon, "log-compression offset");
  cmd->add_option("--sigma-n", o.sigma_n, "noise std; skips estimation");
  cmd->add_option("--search-radius", c.search_radius, "NL-means search radius R (window 2R+1)");
  cmd->add_option("--patch-radius", c.patch_radius, "NL-means patch radius r (patch 2r+1)");
  cmd->add_option("--patch-sigma", o.patch_sigma, "patch kernel std (default r/2)");
  cmd->add_option("--h,--h1", o.h, "distance decay (default 9*sigma_n)");
  cmd->add_option("--h2", o.h2, "corruption decay (default 148/sigma_n)");
  cmd->add_option("--prefilter-sigma", c.prefilter_sigma, "Gaussian prefilter std");
  cmd->add_option("--self-weight", o.self_weight, "natural | max-neighbor")
      ->check(CLI::IsMember({"natural", "max-neighbor"}));
  cmd->add_option("--window-radius", c.window_radius, "Lee/Frost window radius");
  cmd->add_option("--noise-sigma", o.lee_sigma, "Lee noise coefficient of variation");
  cmd->add_option("--damping", c.frost_damping, "Frost damping K");
  cmd->add_option("--iterations", c.srad_iterations, "SRAD iterations");
  cmd->add_option("--dt", c.srad_dt, "SRAD time step");
  cmd->add_option("--q0", c.srad_q0, "SRAD initial speckle scale");
  cmd->add_option("--rho", c.srad_rho, "SRAD speckle-scale decay");
}

FilterConfig finish(FilterOptions o, CLI::App* cmd) {
  FilterConfig c = o.config;
  c.filter = *parse_filter(o.filter);
  if (!o.domain.empty()) c.domain = parse_domain(o.domain);
  c.self_weight = *parse_self_weight(o.self_weight);
  auto opt = [&](const char* flag, double v) -> std::optional<double> {
    if (cmd->count(flag) == 0) return std::nullopt;
    return v;
  };
  c.sigma_n = opt("--sigma-n", o.sigma_n);
  c.h = opt("--h", o.h);
  c.h2 = opt("--h2", o.h2);
  c.patch_sigma = opt("--patch-sigma", o.patch_sigma);
  c.lee_sigma = opt("--noise-sigma", o.lee_sigma);
  return c;
}

struct DenoiseOptions {
  FilterOptions filter;
  std::string input, output;
  int maxval = 255;
};

int run_denoise(const DenoiseOptions& o, const FilterConfig& config) {
  const GrayImage input = read_input(o.input);
  const ResolvedFilter resolved = resolve(config, input);
  std::cerr << "resolved configuration:\n" << resolved.describe() << "threads = " << num_threads() << "\n";
  save_pgm(apply(resolved, input), o.output, o.maxval);
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string reference, test, report;
  std::string image_id, filter_name = "unknown";
  double peak = 255.0;
};

int run_eval(const EvalOptions& o) {
  const GrayImage ref = read_input(o.reference);
  const GrayImage test = read_input(o.test);
  if (ref.rows() != test.rows() || ref.cols() != test.cols())
    throw UsageError("image dimensions differ: " + o.reference + " vs " + o.test);
  const std::string id = o.image_id.empty() ? std::filesystem::path(o.test).stem().string() : o.image_id;
  const std::string row = to_csv_row(id, o.filter_name, evaluate(ref, test, o.peak));
  if (!o.report.empty()) {
    const bool fresh = !std::filesystem::exists(o.report) || std::filesystem::file_size(o.report) == 0;
    std::ofstream out(o.report, std::ios::app);
    if (!out) throw IoError(o.report, "cannot open for appending");
    if (fresh) out << kReportCsvHeader << "\n";
    out << row << "\n";
  }
  std::cout << row << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchOptions {
  FilterOptions filter;
  std::string input;
  int repeats = 3;
  bool thread_sweep = false;
};

int run_bench(const BenchOptions& o, const FilterConfig& config) {
  const GrayImage input = read_input(o.input);
  const ResolvedFilter resolved = resolve(config, input);
  std::cerr << "resolved configuration:\n" << resolved.describe();

  std::vector<int> thread_counts{num_threads()};
  if (o.thread_sweep) {
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    thread_counts = {1, 2, hw};
  }

  const double pixels = static_cast<double>(input.size());
  bool identical = true;
  std::uint64_t reference_sum = 0;
  bool have_reference = false;
  for (const int threads : thread_counts) {
    set_num_threads(threads);
    std::vector<double> seconds;
    for (int rep = 0; rep < o.repeats; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const GrayImage out = apply(resolved, input);
      seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      const std::uint64_t sum = checksum(out);
      if (!have_reference) {
        reference_sum = sum;
        have_reference = true;
      } else if (sum != reference_sum) {
        identical = false;
      }
      std::printf("run threads=%d repeat=%d seconds=%.6f checksum=%016llx\n", threads, rep, seconds.back(),
                  static_cast<unsigned long long>(sum));
    }
    std::sort(seconds.begin(), seconds.end());
    const double median = seconds[seconds.size() / 2];
    std::printf("summary threads=%d min=%.6f median=%.6f pixels_per_second=%.1f\n", threads,
                seconds.front(), median, pixels / median);
  }
  std::printf("deterministic=%s\n", identical ? "yes" : "no");
  return identical ? 0 : kExitRuntime;
}

int run_phantom(int width, int height, const std::string& output) {
  save_pgm(make_phantom(height, width), output, 255);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speckle denoising: robust NL-means, NL-means, Lee, Frost and SRAD"};
  // -h would clash with the --h filter option.
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, std::string("worker cap, 0 = auto (env ") + kThreadsEnvVar + ")")
      ->check(CLI::NonNegativeNumber);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "add synthetic noise to a PGM");
  synth_cmd->add_option("--model", synth.model, "mult-gauss | rayleigh | gauss")
      ->check(CLI::IsMember({"mult-gauss", "rayleigh", "gauss"}));
  synth_cmd->add_option("--sigma", synth.sigma, "noise level")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth.seed, "random seed");
  synth_cmd->add_option("--maxval", synth.maxval, "output maxval")->check(CLI::IsMember({255, 65535}));
  synth_cmd->add_option("input", synth.input)->required();
  synth_cmd->add_option("output", synth.output)->required();

  DenoiseOptions denoise;
  auto* denoise_cmd = app.add_subcommand("denoise", "filter a PGM");
  add_filter_flags(denoise_cmd, denoise.filter);
  denoise_cmd->add_option("--maxval", denoise.maxval, "output maxval")->check(CLI::IsMember({255, 65535}));
  denoise_cmd->add_option("input", denoise.input)->required();
  denoise_cmd->add_option("output", denoise.output)->required();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM/EPI of a test image against a reference");
  eval_cmd->add_option("--report", eval.report, "CSV file to append the row to");
  eval_cmd->add_option("--image-id", eval.image_id, "image_id column (default: test file stem)");
  eval_cmd->add_option("--filter-name", eval.filter_name, "filter_name column");
  eval_cmd->add_option("--peak", eval.peak, "PSNR peak value")->check(CLI::PositiveNumber);
  eval_cmd->add_option("reference", eval.reference)->required();
  eval_cmd->add_option("test", eval.test)->required();

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "time a filter and check determinism");
  add_filter_flags(bench_cmd, bench.filter);
  bench_cmd->add_option("--repeats", bench.repeats, "runs per thread count")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--thread-sweep", bench.thread_sweep, "repeat with 1, 2 and all threads");
  bench_cmd->add_option("input", bench.input)->required();

  int width = 256, height = 256;
  std::string phantom_out;
  auto* phantom_cmd = app.add_subcommand("phantom", "write the piecewise-constant test phantom");
  phantom_cmd->add_option("--width", width)->check(CLI::PositiveNumber);
  phantom_cmd->add_option("--height", height)->check(CLI::PositiveNumber);
  phantom_cmd->add_option("output", phantom_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    set_num_threads(threads);
    if (*synth_cmd) return run_synth(synth);
    if (*denoise_cmd) return run_denoise(denoise, finish(denoise.filter, denoise_cmd));
    if (*eval_cmd) return run_eval(eval);
    if (*bench_cmd) return run_bench(bench, finish(bench.filter, bench_cmd));
    if (*phantom_cmd) return run_phantom(width, height, phantom_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
