#pragma once

// Synthetic city used by the acceptance suite and a few unit tests: known
// relation mixtures, landmark placement, triplet and scenario generation.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geotri/extract.hpp"
#include "geotri/fuse.hpp"
#include "geotri/mixture.hpp"
#include "geotri/predict.hpp"

namespace geotri::testing {

// Roughly 20 km x 20 km.
BoundingBox city_bbox();

GaussianComponent component(double weight, double mean_d, double mean_o, double var_d,
                            double var_o);

// Ground-truth mixtures for near, at, north of and west of.
std::vector<GmmModel> truth_models();
ModelSet as_model_set(std::span<const GmmModel> models);

Vec2 sample_mixture(const GmmModel& model, Rng& rng);

// Draws from the mixture until the distance is non-negative and the
// orientation lies in [0, 360).
SpatialFeatureVector sample_feature(const GmmModel& model, Rng& rng);

std::vector<Vec2> sample_gaussian(std::size_t n, const Vec2& mean, const Mat2& cov, Rng& rng);

std::vector<Poi> landmarks(const BoundingBox& bbox, std::size_t n, Rng& rng);

// Each triplet picks a landmark and a label uniformly and places the subject
// according to the label's truth model. Subjects stay inside the bbox.
std::vector<Triplet> city_triplets(std::size_t n, std::uint64_t seed);

// Unknown POI in the central half of the bbox, described by `n`
// observations whose landmarks are placed with the truth models.
Scenario city_scenario(std::size_t n, std::uint64_t seed, int dim = 15);

}  // namespace geotri::testing
