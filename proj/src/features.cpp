#include "geotri/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geotri/error.hpp"
#include "geotri/io.hpp"

namespace geotri {
namespace {
constexpr double kRad = std::numbers::pi / 180.0;
}

PlanarPoint project(double lat, double lon, const ProjectionOrigin& origin) {
  return {kEarthRadiusKm * std::cos(origin.lat0 * kRad) * (lon - origin.lon0) * kRad,
          kEarthRadiusKm * (lat - origin.lat0) * kRad};
}

PlanarPoint project(const GeoPoint& p, const ProjectionOrigin& origin) {
  return project(p.lat, p.lon, origin);
}

GeoPoint unproject(const PlanarPoint& p, const ProjectionOrigin& origin) {
  return {origin.lat0 + p.y / (kEarthRadiusKm * kRad),
          origin.lon0 + p.x / (kEarthRadiusKm * std::cos(origin.lat0 * kRad) * kRad)};
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  // fmod of a tiny negative value can round back up to exactly 360.
  if (w >= 360.0) w = 0.0;
  return w;
}

SpatialFeatureVector feature_from_offset(double dx, double dy) {
  const double d = std::hypot(dx, dy);
  if (d == 0.0) return {0.0, 0.0};
  return {d, wrap_degrees(std::atan2(dy, dx) / kRad)};
}

SpatialFeatureVector feature_vector(const GeoPoint& subject, const GeoPoint& reference,
                                    const ProjectionOrigin& origin) {
  const auto s = project(subject, origin);
  const auto r = project(reference, origin);
  return feature_from_offset(s.x - r.x, s.y - r.y);
}

ProjectionOrigin origin_for(std::span<const Triplet> triplets) {
  if (triplets.empty()) throw InvalidArgument("cannot derive a projection origin from no triplets");
  BoundingBox box{90.0, 180.0, -90.0, -180.0};
  auto grow = [&](const Poi& p) {
    box.min_lat = std::min(box.min_lat, p.lat);
    box.max_lat = std::max(box.max_lat, p.lat);
    box.min_lon = std::min(box.min_lon, p.lon);
    box.max_lon = std::max(box.max_lon, p.lon);
  };
  for (const auto& t : triplets) {
    grow(t.subject);
    grow(t.object);
  }
  const auto c = box.center();
  return {c.lat, c.lon};
}

std::vector<TrainingSet> build_training_sets(std::span<const Triplet> triplets,
                                             const ProjectionOrigin& origin) {
  std::vector<TrainingSet> sets;
  for (const auto& t : triplets) {
    auto it = std::find_if(sets.begin(), sets.end(),
                           [&](const TrainingSet& s) { return s.relation == t.relation; });
    if (it == sets.end()) {
      sets.push_back({t.relation, {}});
      it = std::prev(sets.end());
    }
    it->vectors.push_back(feature_vector(t.subject, t.object, origin));
  }
  return sets;
}

const TrainingSet* find_training_set(std::span<const TrainingSet> sets, std::string_view relation) {
  for (const auto& s : sets)
    if (s.relation == relation) return &s;
  return nullptr;
}

std::string format_training_set(const TrainingSet& set) {
  std::string out;
  for (const auto& v : set.vectors)
    out += io::format_exact(v.distance) + '\t' + io::format_exact(v.orientation) + '\n';
  return out;
}

std::vector<SpatialFeatureVector> parse_training_set(std::string_view text,
                                                     const std::string& source) {
  std::vector<SpatialFeatureVector> out;
  const auto lines = io::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = io::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = io::split(lines[n], '\t');
    if (cols.size() != 2) throw ParseError(source, n + 1, "expected distance<TAB>orientation");
    const auto d = io::parse_double(cols[0]);
    const auto o = io::parse_double(cols[1]);
    if (!d || !o) throw ParseError(source, n + 1, "unparsable number");
    if (*d < 0.0 || *o < 0.0 || *o >= 360.0)
      throw ParseError(source, n + 1, "distance must be >= 0 and orientation in [0, 360)");
    out.push_back({*d, *o});
  }
  return out;
}

}  // namespace geotri
