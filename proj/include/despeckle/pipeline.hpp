#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "despeckle/baselines.hpp"
#include "despeckle/image.hpp"
#include "despeckle/nlm.hpp"

namespace despeckle {

enum class FilterKind { kNlm, kRobustNlm, kLee, kFrost, kSrad };
enum class Domain { kLinear, kLog };

std::string to_string(FilterKind f);
std::string to_string(Domain d);
std::string to_string(SelfWeight s);
std::optional<FilterKind> parse_filter(std::string_view s);
std::optional<Domain> parse_domain(std::string_view s);
std::optional<SelfWeight> parse_self_weight(std::string_view s);

/// User-facing filter request; every unset field resolves to its default.
struct FilterConfig {
  FilterKind filter = FilterKind::kRobustNlm;
  /// Log for robust NL-means, linear otherwise.
  std::optional<Domain> domain;
  double log_epsilon = kDefaultLogEpsilon;
  /// Bypasses noise estimation when set.
  std::optional<double> sigma_n;

  // NL-means family.
  int search_radius = 10;
  int patch_radius = 3;
  std::optional<double> patch_sigma;
  std::optional<double> h;  ///< h for nlm, h1 for robust-nlm
  std::optional<double> h2;
  double prefilter_sigma = 1.5;
  SelfWeight self_weight = SelfWeight::kNatural;

  // Lee / Frost.
  int window_radius = 2;
  std::optional<double> lee_sigma;  ///< defaults to sigma_n / mean
  double frost_damping = 1.0;

  // SRAD.
  int srad_iterations = 100;
  double srad_dt = 0.05;
  double srad_q0 = 1.0;
  double srad_rho = 1.0;
};

/// A FilterConfig with every parameter fixed for one input image.
struct ResolvedFilter {
  FilterKind filter = FilterKind::kRobustNlm;
  Domain domain = Domain::kLinear;
  double log_epsilon = kDefaultLogEpsilon;
  double sigma_n = 0;
  bool sigma_n_estimated = false;
  RobustNlmParams nlm;  ///< nlm.base for the classic filter
  LeeParams lee;
  FrostParams frost;
  SradParams srad;

  /// One line per effective parameter, "key = value".
  std::string describe() const;
};

/// Resolves defaults against `input` (in the linear domain). sigma_n is
/// estimated in the working domain when not given.
ResolvedFilter resolve(const FilterConfig& config, const GrayImage& input);

/// Runs the resolved filter, including the log/exp domain round trip. SRAD
/// inputs with non-positive pixels are shifted to a minimum of 1 and
/// shifted back afterwards.
GrayImage apply(const ResolvedFilter& filter, const GrayImage& input);

/// FNV-1a over the raw bytes of the raster, for determinism checks.
std::uint64_t checksum(const GrayImage& img);

}  // namespace despeckle
