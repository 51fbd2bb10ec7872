#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geotri/extract.hpp"
#include "geotri/geo.hpp"

namespace geotri {

// Center of a local equirectangular projection.
struct ProjectionOrigin {
  double lat0 = 0.0;
  double lon0 = 0.0;
};

struct PlanarPoint {
  double x = 0.0;  // km, east
  double y = 0.0;  // km, north
};

// Spatial relation of a subject POI to a reference POI.
struct SpatialFeatureVector {
  double distance = 0.0;     // km, >= 0
  double orientation = 0.0;  // degrees in [0, 360), counterclockwise from east

  friend bool operator==(const SpatialFeatureVector&, const SpatialFeatureVector&) = default;
};

struct TrainingSet {
  std::string relation;
  std::vector<SpatialFeatureVector> vectors;
};

PlanarPoint project(double lat, double lon, const ProjectionOrigin& origin);
PlanarPoint project(const GeoPoint& p, const ProjectionOrigin& origin);
// Inverse of project().
GeoPoint unproject(const PlanarPoint& p, const ProjectionOrigin& origin);

// Maps an angle in degrees into [0, 360).
double wrap_degrees(double deg);

// Features from planar offset (subject - reference). A zero offset yields
// orientation 0.
SpatialFeatureVector feature_from_offset(double dx, double dy);

// Feature vector of `subject` measured at `reference`.
SpatialFeatureVector feature_vector(const GeoPoint& subject, const GeoPoint& reference,
                                    const ProjectionOrigin& origin);
inline SpatialFeatureVector feature_vector(const Poi& subject, const Poi& reference,
                                           const ProjectionOrigin& origin) {
  return feature_vector(subject.point(), reference.point(), origin);
}

// Center of the bounding box of all triplet endpoints. Throws
// InvalidArgument on an empty list.
ProjectionOrigin origin_for(std::span<const Triplet> triplets);

// One training set per relation label, in order of first appearance.
std::vector<TrainingSet> build_training_sets(std::span<const Triplet> triplets,
                                             const ProjectionOrigin& origin);

const TrainingSet* find_training_set(std::span<const TrainingSet> sets, std::string_view relation);

// Training-set dump: `distance_km<TAB>orientation_deg` per line.
std::string format_training_set(const TrainingSet& set);
std::vector<SpatialFeatureVector> parse_training_set(std::string_view text,
                                                     const std::string& source = "<memory>");

}  // namespace geotri
