#pragma once

// Location estimation for an unknown POI from several relation
// observations against known landmarks. Each observation contributes its
// relation model's density, evaluated at every grid vertex with the landmark
// as reference.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "geotri/geo.hpp"
#include "geotri/predict.hpp"

namespace geotri {

struct Observation {
  std::string label;
  Poi landmark;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Scenario {
  Poi unknown;  // ground truth; only used for scoring
  std::vector<Observation> observations;
  BoundingBox bbox;
  int dim = 15;

  // Throws InvalidArgument unless there is at least one observation, every
  // landmark lies in the bbox, the bbox is non-degenerate and dim >= 2.
  void validate() const;
};

enum class FusionRule {
  Product,  // sum of log-densities across observations
  Sum,      // sum of densities
};

FusionRule fusion_rule_from_string(std::string_view s);

struct Estimate {
  std::vector<double> region_likelihoods;  // sums to 1
  GeoPoint center;                         // likelihood-weighted centroid of cell centers
  GeoPoint mode;                           // center of the most likely cell
  double error_km = 0.0;                   // center to ground truth, great circle
  double mode_error_km = 0.0;
  std::size_t observations_used = 0;
};

// ceil(fraction * n) observations drawn without replacement, returned in
// their original order. fraction must be in (0, 1].
std::vector<Observation> subsample(std::span<const Observation> observations, double fraction,
                                   std::uint64_t seed);

// Throws MissingModel naming the first observation label without a model.
Estimate fuse(const Scenario& scenario, const ModelSet& models, double fraction,
              std::uint64_t seed, FusionRule rule = FusionRule::Product);

// Header lines `bbox<TAB>min_lat<TAB>min_lon<TAB>max_lat<TAB>max_lon`,
// `dim<TAB>n`, `unknown<TAB>name<TAB>lat<TAB>lon`, then one observation per
// line `label<TAB>landmark_name<TAB>lat<TAB>lon`.
Scenario parse_scenario(std::string_view text, const std::string& source = "<memory>");
Scenario load_scenario(const std::filesystem::path& path);
std::string format_scenario(const Scenario& scenario);

// `fraction<TAB>center_lat<TAB>center_lon<TAB>error_km`
std::string format_estimate_line(double fraction, const Estimate& e);

// Fraction ladder used for ablations.
inline constexpr double kDefaultFractions[] = {0.1, 0.5, 1.0};

}  // namespace geotri
