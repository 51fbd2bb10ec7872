#pragma once

#include <string>

namespace geotri {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// A named place with coordinates.
struct Poi {
  std::string name;
  double lat = 0.0;
  double lon = 0.0;

  GeoPoint point() const { return {lat, lon}; }
  friend bool operator==(const Poi&, const Poi&) = default;
};

inline bool valid_coordinates(double lat, double lon) {
  return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

// Great-circle distance in kilometers.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

struct BoundingBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;

  bool contains(const GeoPoint& p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
  }
  GeoPoint center() const { return {0.5 * (min_lat + max_lat), 0.5 * (min_lon + max_lon)}; }
  bool degenerate() const { return !(max_lat > min_lat) || !(max_lon > min_lon); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

}  // namespace geotri
