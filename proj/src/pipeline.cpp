#include "despeckle/pipeline.hpp"

#include <cstring>
#include <sstream>

#include "despeckle/noise.hpp"

namespace despeckle {

std::string to_string(FilterKind f) {
  switch (f) {
    case FilterKind::kNlm: return "nlm";
    case FilterKind::kRobustNlm: return "robust-nlm";
    case FilterKind::kLee: return "lee";
    case FilterKind::kFrost: return "frost";
    case FilterKind::kSrad: return "srad";
  }
  return "unknown";
}

std::string to_string(Domain d) { return d == Domain::kLog ? "log" : "linear"; }

std::string to_string(SelfWeight s) {
  return s == SelfWeight::kNatural ? "natural" : "max-neighbor";
}

std::optional<FilterKind> parse_filter(std::string_view s) {
  for (auto f : {FilterKind::kNlm, FilterKind::kRobustNlm, FilterKind::kLee, FilterKind::kFrost,
                 FilterKind::kSrad})
    if (s == to_string(f)) return f;
  return std::nullopt;
}

std::optional<Domain> parse_domain(std::string_view s) {
  if (s == "linear") return Domain::kLinear;
  if (s == "log") return Domain::kLog;
  return std::nullopt;
}

std::optional<SelfWeight> parse_self_weight(std::string_view s) {
  if (s == "natural") return SelfWeight::kNatural;
  if (s == "max-neighbor") return SelfWeight::kMaxNeighbor;
  return std::nullopt;
}

namespace {

void require(bool ok, const char* flag, const char* rule) {
  if (!ok) throw ParameterError(std::string(flag) + " " + rule);
}

void check_config(const FilterConfig& c) {
  require(c.log_epsilon > 0, "--epsilon", "must be > 0");
  if (c.sigma_n) require(*c.sigma_n >= 0 && std::isfinite(*c.sigma_n), "--sigma-n", "must be >= 0");
  require(c.search_radius >= 1, "--search-radius", "must be >= 1");
  require(c.patch_radius >= 1, "--patch-radius", "must be >= 1");
  if (c.patch_sigma) require(*c.patch_sigma > 0, "--patch-sigma", "must be > 0");
  if (c.h) require(*c.h > 0 && std::isfinite(*c.h), c.filter == FilterKind::kNlm ? "--h" : "--h1", "must be > 0");
  if (c.h2) require(*c.h2 > 0, "--h2", "must be > 0");
  require(c.prefilter_sigma > 0, "--prefilter-sigma", "must be > 0");
  require(c.window_radius >= 1, "--window-radius", "must be >= 1");
  if (c.lee_sigma) require(*c.lee_sigma >= 0, "--noise-sigma", "must be >= 0");
  require(c.frost_damping > 0, "--damping", "must be > 0");
  require(c.srad_iterations >= 0, "--iterations", "must be >= 0");
  require(c.srad_dt > 0 && c.srad_dt <= 0.25, "--dt", "must be in (0, 0.25]");
  require(c.srad_q0 > 0, "--q0", "must be > 0");
  require(c.srad_rho >= 0, "--rho", "must be >= 0");
}

GrayImage to_domain(const GrayImage& img, Domain d, double epsilon) {
  return d == Domain::kLog ? log_compress(img, epsilon) : img;
}

}  // namespace

ResolvedFilter resolve(const FilterConfig& config, const GrayImage& input) {
  check_config(config);
  ResolvedFilter r;
  r.filter = config.filter;
  r.domain = config.domain.value_or(config.filter == FilterKind::kRobustNlm ? Domain::kLog
                                                                            : Domain::kLinear);
  r.log_epsilon = config.log_epsilon;

  const GrayImage working = to_domain(input, r.domain, r.log_epsilon);
  if (config.sigma_n) {
    r.sigma_n = *config.sigma_n;
  } else {
    r.sigma_n = estimate_noise_sigma(working).sigma_n;
    r.sigma_n_estimated = true;
  }

  r.nlm = robust_nlm_defaults(r.sigma_n);
  r.nlm.base.search_radius = config.search_radius;
  r.nlm.base.patch_radius = config.patch_radius;
  r.nlm.base.patch_sigma = config.patch_sigma.value_or(0.5 * config.patch_radius);
  r.nlm.base.self_weight = config.self_weight;
  r.nlm.prefilter_sigma = config.prefilter_sigma;
  if (config.h) r.nlm.base.h = *config.h;
  if (config.h2) r.nlm.h2 = std::min(*config.h2, kH2Cap);

  r.lee.window_radius = config.window_radius;
  if (config.lee_sigma) {
    r.lee.noise_sigma = *config.lee_sigma;
  } else {
    const double mean = working.mean();
    r.lee.noise_sigma = mean != 0 ? std::abs(r.sigma_n / mean) : 0.0;
  }
  r.frost.window_radius = config.window_radius;
  r.frost.damping = config.frost_damping;
  r.srad = {config.srad_iterations, config.srad_dt, config.srad_q0, config.srad_rho};
  return r;
}

std::string ResolvedFilter::describe() const {
  std::ostringstream out;
  out.precision(10);
  out << "filter = " << to_string(filter) << "\n";
  out << "domain = " << to_string(domain) << "\n";
  if (domain == Domain::kLog) out << "log_epsilon = " << log_epsilon << "\n";
  out << "sigma_n = " << sigma_n << (sigma_n_estimated ? " (estimated)" : " (given)") << "\n";
  switch (filter) {
    case FilterKind::kNlm:
    case FilterKind::kRobustNlm: {
      const int sw = 2 * nlm.base.search_radius + 1;
      const int pw = 2 * nlm.base.patch_radius + 1;
      out << "search_window = " << sw << "x" << sw << "\n";
      out << "patch = " << pw << "x" << pw << "\n";
      out << "patch_sigma = " << nlm.base.effective_patch_sigma() << "\n";
      out << "self_weight = " << to_string(nlm.base.self_weight) << "\n";
      if (filter == FilterKind::kNlm) {
        out << "h = " << nlm.base.h << "\n";
      } else {
        out << "h1 = " << nlm.base.h << "\n";
        out << "h2 = " << nlm.h2 << "\n";
        out << "prefilter_sigma = " << nlm.prefilter_sigma << "\n";
      }
      break;
    }
    case FilterKind::kLee:
      out << "window_radius = " << lee.window_radius << "\n";
      out << "noise_sigma = " << lee.noise_sigma << "\n";
      break;
    case FilterKind::kFrost:
      out << "window_radius = " << frost.window_radius << "\n";
      out << "damping = " << frost.damping << "\n";
      break;
    case FilterKind::kSrad:
      out << "iterations = " << srad.iterations << "\n";
      out << "dt = " << srad.dt << "\n";
      out << "q0 = " << srad.q0 << "\n";
      out << "rho = " << srad.rho << "\n";
      break;
  }
  return out.str();
}

GrayImage apply(const ResolvedFilter& f, const GrayImage& input) {
  const GrayImage working = to_domain(input, f.domain, f.log_epsilon);
  GrayImage out;
  switch (f.filter) {
    case FilterKind::kNlm:
      out = nlm_denoise(working, f.nlm.base);
      break;
    case FilterKind::kRobustNlm:
      out = robust_nlm_denoise(working, f.nlm);
      break;
    case FilterKind::kLee:
      out = lee_filter(working, f.lee);
      break;
    case FilterKind::kFrost:
      out = frost_filter(working, f.frost);
      break;
    case FilterKind::kSrad: {
      const double lo = working.minCoeff();
      const double shift = lo > 0 ? 0.0 : 1.0 - lo;
      out = shift == 0 ? srad(working, f.srad) : GrayImage(srad(GrayImage(working + shift), f.srad) - shift);
      break;
    }
  }
  return f.domain == Domain::kLog ? exp_expand(out, f.log_epsilon) : out;
}

std::uint64_t checksum(const GrayImage& img) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(img.data());
  const std::size_t n = static_cast<std::size_t>(img.size()) * sizeof(double);
  for (std::size_t k = 0; k < n; ++k) {
    hash ^= bytes[k];
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

}  // namespace despeckle
