#include "synthetic_city.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

namespace geotri::testing {

BoundingBox city_bbox() { return {40.0, -74.0, 40.18, -73.765}; }

GaussianComponent component(double weight, double mean_d, double mean_o, double var_d,
                            double var_o) {
  GaussianComponent c;
  c.weight = weight;
  c.mean = {mean_d, mean_o};
  c.covariance << var_d, 0.0, 0.0, var_o;
  return c;
}

std::vector<GmmModel> truth_models() {
  return {
      {"at", {component(0.5, 0.4, 90, 0.02, 900), component(0.5, 0.5, 270, 0.03, 900)}},
      {"near",
       {component(0.4, 1.2, 100, 0.25, 900), component(0.35, 1.8, 200, 0.4, 2025),
        component(0.25, 1.4, 290, 0.25, 400)}},
      {"north of", {component(0.6, 3.0, 90, 1.0, 625), component(0.4, 7.0, 95, 4.0, 400)}},
      {"west of",
       {component(0.4, 2.5, 180, 0.6, 625), component(0.35, 5.5, 175, 2.5, 400),
        component(0.25, 9.5, 185, 4.0, 225)}},
  };
}

ModelSet as_model_set(std::span<const GmmModel> models) {
  ModelSet out;
  for (const auto& m : models) out.emplace(m.relation, m);
  return out;
}

std::vector<Vec2> sample_gaussian(std::size_t n, const Vec2& mean, const Mat2& cov, Rng& rng) {
  const Mat2 l = cov.llt().matrixL();
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z0 = standard_normal(rng);
    const double z1 = standard_normal(rng);
    out.push_back(mean + l * Vec2(z0, z1));
  }
  return out;
}

Vec2 sample_mixture(const GmmModel& model, Rng& rng) {
  double u = uniform_unit(rng);
  std::size_t k = 0;
  for (; k + 1 < model.size(); ++k) {
    if (u < model.components[k].weight) break;
    u -= model.components[k].weight;
  }
  const auto& c = model.components[k];
  return sample_gaussian(1, c.mean, c.covariance, rng).front();
}

SpatialFeatureVector sample_feature(const GmmModel& model, Rng& rng) {
  for (;;) {
    const Vec2 x = sample_mixture(model, rng);
    if (x[0] >= 0.0 && x[1] >= 0.0 && x[1] < 360.0) return {x[0], x[1]};
  }
}

std::vector<Poi> landmarks(const BoundingBox& bbox, std::size_t n, Rng& rng) {
  std::vector<Poi> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = random_point(bbox, rng);
    out.push_back({"L" + std::to_string(i), p.lat, p.lon});
  }
  return out;
}

namespace {

PlanarPoint offset(const SpatialFeatureVector& f) {
  const double rad = f.orientation * std::numbers::pi / 180.0;
  return {f.distance * std::cos(rad), f.distance * std::sin(rad)};
}

}  // namespace

std::vector<Triplet> city_triplets(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const auto bbox = city_bbox();
  const ProjectionOrigin origin{bbox.center().lat, bbox.center().lon};
  const auto models = truth_models();
  const auto marks = landmarks(bbox, 80, rng);

  std::vector<Triplet> out;
  std::size_t subject_id = 0;
  while (out.size() < n) {
    const auto& v = marks[uniform_index(rng, marks.size())];
    const auto& model = models[uniform_index(rng, models.size())];
    const auto d = offset(sample_feature(model, rng));
    const auto pv = project(v.point(), origin);
    const auto pu = unproject({pv.x + d.x, pv.y + d.y}, origin);
    if (!bbox.contains(pu)) continue;
    out.push_back({Poi{"S" + std::to_string(subject_id++), pu.lat, pu.lon}, model.relation, v, {}});
  }
  return out;
}

Scenario city_scenario(std::size_t n, std::uint64_t seed, int dim) {
  Rng rng(seed);
  Scenario s;
  s.bbox = city_bbox();
  s.dim = dim;
  const ProjectionOrigin origin{s.bbox.center().lat, s.bbox.center().lon};
  const double dlat = s.bbox.max_lat - s.bbox.min_lat;
  const double dlon = s.bbox.max_lon - s.bbox.min_lon;
  const BoundingBox inner{s.bbox.min_lat + 0.25 * dlat, s.bbox.min_lon + 0.25 * dlon,
                          s.bbox.max_lat - 0.25 * dlat, s.bbox.max_lon - 0.25 * dlon};
  const auto u = random_point(inner, rng);
  s.unknown = {"unknown", u.lat, u.lon};

  const auto models = truth_models();
  const auto pu = project(u, origin);
  while (s.observations.size() < n) {
    const auto& model = models[uniform_index(rng, models.size())];
    const auto d = offset(sample_feature(model, rng));
    const auto pv = unproject({pu.x - d.x, pu.y - d.y}, origin);
    if (!s.bbox.contains(pv)) continue;
    s.observations.push_back(
        {model.relation, Poi{"L" + std::to_string(s.observations.size()), pv.lat, pv.lon}});
  }
  return s;
}

}  // namespace geotri::testing
