#pragma once

// Grid-based location prediction for a single unknown point: every grid
// vertex acts as a landmark, picks the relation model that best explains the
// point, and spreads that model's density over the grid. Summed vertex
// likelihoods are averaged into cell scores that are ranked for Top-K
// accuracy.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "geotri/features.hpp"
#include "geotri/geo.hpp"
#include "geotri/mixture.hpp"

namespace geotri {

// Constant-density stand-in for a relation model.
struct UniformDensity {
  double log_density = 0.0;
};

using RelationDensity = std::variant<GmmModel, UniformDensity>;

// Relation label -> model. Ordered, so iteration is lexicographic.
using ModelSet = std::map<std::string, RelationDensity>;

double log_density(const RelationDensity& model, const SpatialFeatureVector& x);

struct Grid {
  BoundingBox bbox;
  int dim = 0;
  // Row-major from the bottom-left vertex: index = row * dim + col, row 0 at
  // min_lat, col 0 at min_lon.
  std::vector<GeoPoint> vertices;
  // Corner vertex indices of each cell: bottom-left, bottom-right, top-left,
  // top-right. Cells are row-major with (dim - 1) per row.
  std::vector<std::array<std::size_t, 4>> regions;
  // Vertices in the local projection centered on the bbox.
  std::vector<PlanarPoint> planar;

  ProjectionOrigin origin() const { return {bbox.center().lat, bbox.center().lon}; }
  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t region_count() const { return regions.size(); }
  std::size_t vertex_index(int row, int col) const;
  std::size_t region_index(int row, int col) const;
  // Throws InvalidArgument if the point is outside the bbox.
  std::size_t region_of(const GeoPoint& p) const;
  GeoPoint region_center(std::size_t region) const;
};

// Throws InvalidArgument when dim < 2 or the bbox is degenerate.
Grid make_grid(const BoundingBox& bbox, int dim);

struct ModelChoice {
  std::string label;
  double log_density = 0.0;
  bool underflow = false;  // every model gave zero density
};

// Label whose model gives the highest density to feature_vector(point,
// reference); ties go to the lexicographically first label.
ModelChoice best_model(const GeoPoint& point, const GeoPoint& reference, const ModelSet& models,
                       const ProjectionOrigin& origin);

struct PredictionSurface {
  std::size_t vertex_count = 0;
  // Log of V_L: row = reference vertex, column = scored vertex.
  std::vector<double> vertex_log_likelihoods;
  // Column sums of V_L normalized to 1.
  std::vector<double> fused_vertex;
  // Mean of each cell's four fused_vertex values.
  std::vector<double> region_likelihoods;
  // Model picked at each reference vertex, in traversal order.
  std::vector<ModelChoice> choices;
  bool underflow = false;

  double vertex_log_likelihood(std::size_t reference, std::size_t scored) const {
    return vertex_log_likelihoods[reference * vertex_count + scored];
  }
};

PredictionSurface score_point(const GeoPoint& point, const Grid& grid, const ModelSet& models);

// Mean of the four corner values of every cell, in region order.
std::vector<double> region_means(const Grid& grid, std::span<const double> vertex_values);

// 0-based rank of `region` when cells are sorted by decreasing likelihood,
// ties broken by ascending region index.
std::size_t region_rank(std::span<const double> region_likelihoods, std::size_t region);

// Throws InvalidArgument when k is 0 or exceeds the region count, or the
// point lies outside the grid.
bool topk_hit(const PredictionSurface& surface, const GeoPoint& point, const Grid& grid,
              std::size_t k);

// Log-likelihood of one cell contributed by each reference vertex in
// traversal order (bottom-left first, row by row).
std::vector<double> region_trace(const PredictionSurface& surface, const Grid& grid,
                                 std::size_t region);

// Geometric ground truth for relation labels, used to judge whether a
// selected model describes the vertex/point pair correctly.
struct RelationOracle {
  double near_km = 2.0;          // near, next to, close to
  double at_km = 0.5;            // at
  double containment_km = 0.5;   // in
  double sector_half_width_deg = 45.0;

  // Throws InvalidArgument on non-positive thresholds or a half-width
  // outside (0, 90].
  void validate() const;
  // Unknown labels never hold.
  bool holds(const std::string& label, const SpatialFeatureVector& point_from_vertex) const;
};

// `key<TAB>value` with keys near_km, at_km, containment_km,
// sector_half_width_deg. Missing keys keep their defaults.
RelationOracle parse_oracle(std::string_view text, const std::string& source = "<memory>");

struct SelectionEntry {
  GeoPoint vertex;
  GeoPoint point;
  std::string label;
};

std::vector<SelectionEntry> selection_log(const PredictionSurface& surface, const Grid& grid,
                                          const GeoPoint& point);

double qualitative_accuracy(std::span<const SelectionEntry> log, const RelationOracle& oracle,
                            const ProjectionOrigin& origin);

// Uniform random point in the bbox (latitude and longitude drawn
// independently).
GeoPoint random_point(const BoundingBox& bbox, Rng& rng);

// Seed for the i-th random point of a run; points are independent of
// evaluation order.
std::uint64_t point_seed(std::uint64_t seed, std::size_t index);

struct AccuracyReport {
  std::vector<std::size_t> ks;
  std::vector<double> accuracy;  // per k, fraction of points hit
  double qualitative = 0.0;
  std::size_t points = 0;
  std::size_t underflow_vertices = 0;
};

AccuracyReport evaluate_prediction(const ModelSet& models, const BoundingBox& bbox, int dim,
                                   std::size_t n_points, std::span<const std::size_t> ks,
                                   std::uint64_t seed, const RelationOracle& oracle = {});

double prediction_accuracy(const ModelSet& models, const BoundingBox& bbox, int dim,
                           std::size_t n_points, std::size_t k, std::uint64_t seed);

// `region_row,region_col,likelihood` with a header line.
std::string surface_csv(const Grid& grid, std::span<const double> region_likelihoods);

struct MarkedPoint {
  std::string role;  // e.g. "landmark", "unknown", "center"
  std::string name;
  GeoPoint point;
};

// FeatureCollection with one polygon per cell carrying a `likelihood`
// property, followed by any marked points.
std::string surface_geojson(const Grid& grid, std::span<const double> region_likelihoods,
                            std::span<const MarkedPoint> points = {});

}  // namespace geotri
