#include "geotri/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geotri/error.hpp"
#include "geotri/io.hpp"

namespace geotri {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Models prepared for repeated evaluation, in label order.
class CompiledModels {
 public:
  explicit CompiledModels(const ModelSet& models) {
    if (models.empty()) throw InvalidArgument("model set is empty");
    for (const auto& [label, m] : models) {
      labels_.push_back(label);
      if (const auto* g = std::get_if<GmmModel>(&m))
        entries_.push_back(Entry{CompiledGmm(*g), 0.0});
      else
        entries_.push_back(Entry{std::nullopt, std::get<UniformDensity>(m).log_density});
    }
  }

  std::size_t size() const { return entries_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  double log_density(std::size_t i, const SpatialFeatureVector& f) const {
    const auto& e = entries_[i];
    return e.gmm ? e.gmm->log_density(to_point(f)) : e.constant;
  }

  // Index of the best model; ties keep the earlier (lexicographically
  // smaller) label.
  std::size_t best(const SpatialFeatureVector& f, double& log_density_out) const {
    std::size_t arg = 0;
    double best = kNegInf;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double v = log_density(i, f);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    log_density_out = best;
    return arg;
  }

 private:
  struct Entry {
    std::optional<CompiledGmm> gmm;
    double constant;
  };
  std::vector<std::string> labels_;
  std::vector<Entry> entries_;
};

SpatialFeatureVector planar_feature(const PlanarPoint& subject, const PlanarPoint& reference) {
  return feature_from_offset(subject.x - reference.x, subject.y - reference.y);
}

double angular_gap(double a, double b) {
  const double d = wrap_degrees(a - b);
  return std::min(d, 360.0 - d);
}

}  // namespace

double log_density(const RelationDensity& model, const SpatialFeatureVector& x) {
  if (const auto* g = std::get_if<GmmModel>(&model)) return gmm_log_density(to_point(x), *g);
  return std::get<UniformDensity>(model).log_density;
}

std::size_t Grid::vertex_index(int row, int col) const {
  return static_cast<std::size_t>(row) * static_cast<std::size_t>(dim) +
         static_cast<std::size_t>(col);
}

std::size_t Grid::region_index(int row, int col) const {
  return static_cast<std::size_t>(row) * static_cast<std::size_t>(dim - 1) +
         static_cast<std::size_t>(col);
}

std::size_t Grid::region_of(const GeoPoint& p) const {
  if (!bbox.contains(p)) throw InvalidArgument("point lies outside the grid bounding box");
  const int cells = dim - 1;
  auto cell = [cells](double v, double lo, double hi) {
    const int c = static_cast<int>(std::floor((v - lo) / (hi - lo) * cells));
    return std::clamp(c, 0, cells - 1);
  };
  return region_index(cell(p.lat, bbox.min_lat, bbox.max_lat),
                      cell(p.lon, bbox.min_lon, bbox.max_lon));
}

GeoPoint Grid::region_center(std::size_t region) const {
  const auto& r = regions.at(region);
  const auto& bl = vertices[r[0]];
  const auto& tr = vertices[r[3]];
  return {0.5 * (bl.lat + tr.lat), 0.5 * (bl.lon + tr.lon)};
}

Grid make_grid(const BoundingBox& bbox, int dim) {
  if (dim < 2) throw InvalidArgument("grid dimension must be >= 2");
  if (bbox.degenerate()) throw InvalidArgument("bounding box is degenerate");
  if (!valid_coordinates(bbox.min_lat, bbox.min_lon) ||
      !valid_coordinates(bbox.max_lat, bbox.max_lon))
    throw InvalidArgument("bounding box is outside geographic bounds");
  Grid g;
  g.bbox = bbox;
  g.dim = dim;
  const double dlat = (bbox.max_lat - bbox.min_lat) / (dim - 1);
  const double dlon = (bbox.max_lon - bbox.min_lon) / (dim - 1);
  const auto origin = g.origin();
  for (int row = 0; row < dim; ++row) {
    for (int col = 0; col < dim; ++col) {
      // Last row/column pinned to the box edge to avoid rounding drift.
      const double lat = row == dim - 1 ? bbox.max_lat : bbox.min_lat + row * dlat;
      const double lon = col == dim - 1 ? bbox.max_lon : bbox.min_lon + col * dlon;
      g.vertices.push_back({lat, lon});
      g.planar.push_back(project(lat, lon, origin));
    }
  }
  for (int row = 0; row + 1 < dim; ++row)
    for (int col = 0; col + 1 < dim; ++col)
      g.regions.push_back({g.vertex_index(row, col), g.vertex_index(row, col + 1),
                           g.vertex_index(row + 1, col), g.vertex_index(row + 1, col + 1)});
  return g;
}

ModelChoice best_model(const GeoPoint& point, const GeoPoint& reference, const ModelSet& models,
                       const ProjectionOrigin& origin) {
  const CompiledModels compiled(models);
  double ld = 0.0;
  const auto i = compiled.best(feature_vector(point, reference, origin), ld);
  return {compiled.label(i), ld, ld == kNegInf};
}

std::vector<double> region_means(const Grid& grid, std::span<const double> vertex_values) {
  std::vector<double> out;
  out.reserve(grid.region_count());
  for (const auto& r : grid.regions)
    out.push_back((vertex_values[r[0]] + vertex_values[r[1]] + vertex_values[r[2]] +
                   vertex_values[r[3]]) /
                  4.0);
  return out;
}

PredictionSurface score_point(const GeoPoint& point, const Grid& grid, const ModelSet& models) {
  const CompiledModels compiled(models);
  const auto n = grid.vertex_count();
  const auto origin = grid.origin();
  const auto p = project(point, origin);

  PredictionSurface s;
  s.vertex_count = n;
  s.vertex_log_likelihoods.resize(n * n);
  s.choices.reserve(n);
  double global_max = kNegInf;
  for (std::size_t ref = 0; ref < n; ++ref) {
    double ld = 0.0;
    const auto model = compiled.best(planar_feature(p, grid.planar[ref]), ld);
    const bool flagged = ld == kNegInf;
    s.underflow = s.underflow || flagged;
    s.choices.push_back({compiled.label(model), ld, flagged});
    double* row = &s.vertex_log_likelihoods[ref * n];
    for (std::size_t v = 0; v < n; ++v) {
      row[v] = compiled.log_density(model, planar_feature(grid.planar[v], grid.planar[ref]));
      global_max = std::max(global_max, row[v]);
    }
  }

  s.fused_vertex.assign(n, 1.0 / static_cast<double>(n));
  if (global_max != kNegInf) {
    std::vector<CompensatedSum> columns(n);
    for (std::size_t ref = 0; ref < n; ++ref) {
      const double* row = &s.vertex_log_likelihoods[ref * n];
      for (std::size_t v = 0; v < n; ++v) columns[v].add(std::exp(row[v] - global_max));
    }
    CompensatedSum total;
    for (std::size_t v = 0; v < n; ++v) {
      s.fused_vertex[v] = columns[v].value();
      total.add(s.fused_vertex[v]);
    }
    const double z = total.value();
    for (auto& f : s.fused_vertex) f /= z;
  } else {
    s.underflow = true;
  }
  s.region_likelihoods = region_means(grid, s.fused_vertex);
  return s;
}

std::size_t region_rank(std::span<const double> region_likelihoods, std::size_t region) {
  const double target = region_likelihoods[region];
  std::size_t rank = 0;
  for (std::size_t r = 0; r < region_likelihoods.size(); ++r) {
    const double v = region_likelihoods[r];
    if (v > target || (v == target && r < region)) ++rank;
  }
  return rank;
}

bool topk_hit(const PredictionSurface& surface, const GeoPoint& point, const Grid& grid,
              std::size_t k) {
  if (k == 0 || k > grid.region_count())
    throw InvalidArgument("K must be in [1, " + std::to_string(grid.region_count()) + "]");
  return region_rank(surface.region_likelihoods, grid.region_of(point)) < k;
}

std::vector<double> region_trace(const PredictionSurface& surface, const Grid& grid,
                                 std::size_t region) {
  const auto& r = grid.regions.at(region);
  std::vector<double> trace;
  trace.reserve(surface.vertex_count);
  for (std::size_t ref = 0; ref < surface.vertex_count; ++ref) {
    double m = kNegInf;
    for (auto v : r) m = std::max(m, surface.vertex_log_likelihood(ref, v));
    if (m == kNegInf) {
      trace.push_back(kNegInf);
      continue;
    }
    double sum = 0.0;
    for (auto v : r) sum += std::exp(surface.vertex_log_likelihood(ref, v) - m);
    trace.push_back(m + std::log(sum / 4.0));
  }
  return trace;
}

void RelationOracle::validate() const {
  if (!(near_km > 0.0) || !(at_km > 0.0) || !(containment_km > 0.0))
    throw InvalidArgument("oracle distance thresholds must be positive");
  if (!(sector_half_width_deg > 0.0 && sector_half_width_deg <= 90.0))
    throw InvalidArgument("sector half-width must be in (0, 90]");
}

bool RelationOracle::holds(const std::string& label, const SpatialFeatureVector& f) const {
  if (label == "near" || label == "next to" || label == "close to") return f.distance <= near_km;
  if (label == "at") return f.distance <= at_km;
  if (label == "in") return f.distance <= containment_km;
  double center = -1.0;
  if (label == "east of") center = 0.0;
  if (label == "north of") center = 90.0;
  if (label == "west of") center = 180.0;
  if (label == "south of") center = 270.0;
  if (center < 0.0 || f.distance == 0.0) return false;
  return angular_gap(f.orientation, center) <= sector_half_width_deg;
}

RelationOracle parse_oracle(std::string_view text, const std::string& source) {
  RelationOracle o;
  const auto lines = io::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = io::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = io::split(lines[n], '\t');
    if (cols.size() != 2) throw ParseError(source, n + 1, "expected key<TAB>value");
    const auto v = io::parse_double(cols[1]);
    if (!v) throw ParseError(source, n + 1, "unparsable value");
    const auto key = io::trim(cols[0]);
    if (key == "near_km")
      o.near_km = *v;
    else if (key == "at_km")
      o.at_km = *v;
    else if (key == "containment_km")
      o.containment_km = *v;
    else if (key == "sector_half_width_deg")
      o.sector_half_width_deg = *v;
    else
      throw ParseError(source, n + 1, "unknown key '" + std::string(key) + "'");
  }
  try {
    o.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
  return o;
}

std::vector<SelectionEntry> selection_log(const PredictionSurface& surface, const Grid& grid,
                                          const GeoPoint& point) {
  std::vector<SelectionEntry> out;
  out.reserve(surface.choices.size());
  for (std::size_t v = 0; v < surface.choices.size(); ++v)
    out.push_back({grid.vertices[v], point, surface.choices[v].label});
  return out;
}

double qualitative_accuracy(std::span<const SelectionEntry> log, const RelationOracle& oracle,
                            const ProjectionOrigin& origin) {
  if (log.empty()) throw InvalidArgument("selection log is empty");
  std::size_t correct = 0;
  for (const auto& e : log)
    if (oracle.holds(e.label, feature_vector(e.point, e.vertex, origin))) ++correct;
  return static_cast<double>(correct) / static_cast<double>(log.size());
}

GeoPoint random_point(const BoundingBox& bbox, Rng& rng) {
  const double lat = uniform_real(rng, bbox.min_lat, bbox.max_lat);
  const double lon = uniform_real(rng, bbox.min_lon, bbox.max_lon);
  return {lat, lon};
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  return mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(index)));
}

AccuracyReport evaluate_prediction(const ModelSet& models, const BoundingBox& bbox, int dim,
                                   std::size_t n_points, std::span<const std::size_t> ks,
                                   std::uint64_t seed, const RelationOracle& oracle) {
  if (n_points == 0) throw InvalidArgument("need at least one random point");
  oracle.validate();
  const auto grid = make_grid(bbox, dim);
  for (auto k : ks)
    if (k == 0 || k > grid.region_count())
      throw InvalidArgument("K must be in [1, " + std::to_string(grid.region_count()) + "]");

  AccuracyReport report;
  report.ks.assign(ks.begin(), ks.end());
  std::vector<std::size_t> hits(ks.size(), 0);
  std::size_t correct = 0, judged = 0;
  const auto origin = grid.origin();
  for (std::size_t i = 0; i < n_points; ++i) {
    Rng rng(point_seed(seed, i));
    const auto point = random_point(bbox, rng);
    const auto surface = score_point(point, grid, models);
    const auto rank = region_rank(surface.region_likelihoods, grid.region_of(point));
    for (std::size_t q = 0; q < ks.size(); ++q)
      if (rank < ks[q]) ++hits[q];
    for (std::size_t v = 0; v < surface.choices.size(); ++v) {
      if (surface.choices[v].underflow) ++report.underflow_vertices;
      if (oracle.holds(surface.choices[v].label, feature_vector(point, grid.vertices[v], origin)))
        ++correct;
      ++judged;
    }
  }
  for (auto h : hits)
    report.accuracy.push_back(static_cast<double>(h) / static_cast<double>(n_points));
  report.qualitative = static_cast<double>(correct) / static_cast<double>(judged);
  report.points = n_points;
  return report;
}

double prediction_accuracy(const ModelSet& models, const BoundingBox& bbox, int dim,
                           std::size_t n_points, std::size_t k, std::uint64_t seed) {
  const std::size_t ks[] = {k};
  return evaluate_prediction(models, bbox, dim, n_points, ks, seed).accuracy.front();
}

}  // namespace geotri
