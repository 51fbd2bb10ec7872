#include <string>

#include "geotri/error.hpp"
#include "geotri/io.hpp"
#include "geotri/predict.hpp"
#include "json.hpp"

namespace geotri {

std::string surface_csv(const Grid& grid, std::span<const double> region_likelihoods) {
  if (region_likelihoods.size() != grid.region_count())
    throw InvalidArgument("region likelihoods do not match the grid");
  std::string out = "region_row,region_col,likelihood\n";
  const int cells = grid.dim - 1;
  for (int row = 0; row < cells; ++row)
    for (int col = 0; col < cells; ++col)
      out += std::to_string(row) + ',' + std::to_string(col) + ',' +
             io::format_exact(region_likelihoods[grid.region_index(row, col)]) + '\n';
  return out;
}

std::string surface_geojson(const Grid& grid, std::span<const double> region_likelihoods,
                            std::span<const MarkedPoint> points) {
  using nlohmann::json;
  if (region_likelihoods.size() != grid.region_count())
    throw InvalidArgument("region likelihoods do not match the grid");
  auto features = json::array();
  const int cells = grid.dim - 1;
  for (int row = 0; row < cells; ++row) {
    for (int col = 0; col < cells; ++col) {
      const auto r = grid.region_index(row, col);
      const auto& c = grid.regions[r];
      auto corner = [&](std::size_t v) {
        return json::array({grid.vertices[v].lon, grid.vertices[v].lat});
      };
      // Counterclockwise exterior ring, closed.
      json ring = json::array({corner(c[0]), corner(c[1]), corner(c[3]), corner(c[2]), corner(c[0])});
      features.push_back({{"type", "Feature"},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
                          {"properties",
                           {{"region_row", row}, {"region_col", col},
                            {"likelihood", region_likelihoods[r]}}}});
    }
  }
  for (const auto& p : points) {
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "Point"}, {"coordinates", json::array({p.point.lon, p.point.lat})}}},
         {"properties", {{"role", p.role}, {"name", p.name}}}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(1) + '\n';
}

}  // namespace geotri
