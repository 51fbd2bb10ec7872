#pragma once

// Two-dimensional Gaussian mixtures over (distance, orientation) feature
// space: density evaluation, EM, and greedy component insertion.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "geotri/features.hpp"
#include "geotri/random.hpp"

namespace geotri {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kVarianceFloor = 1e-4;

struct GaussianComponent {
  double weight = 1.0;
  Vec2 mean = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
};

struct GmmModel {
  std::string relation;
  std::vector<GaussianComponent> components;

  std::size_t size() const noexcept { return components.size(); }
};

struct TrainingConfig {
  int max_components = 5;
  int candidates_per_component = 10;
  double em_tol = 1e-6;  // relative log-likelihood improvement
  int em_max_iter = 200;
  std::uint64_t seed = 0;
  double variance_floor = kVarianceFloor;
  // An insertion is kept only if it raises the training log-likelihood by
  // more than this many nats per data point. Zero gives the bare
  // "new likelihood must exceed the old one" rule.
  double min_gain_per_point = 0.05;

  // Throws InvalidArgument on non-positive counts or tolerances.
  void validate() const;
};

std::vector<Vec2> to_points(std::span<const SpatialFeatureVector> vectors);
inline Vec2 to_point(const SpatialFeatureVector& v) { return {v.distance, v.orientation}; }

// Throws InvalidParameter unless the covariance is symmetric positive-definite.
double gaussian_pdf(const Vec2& x, const GaussianComponent& c);
double log_gaussian_pdf(const Vec2& x, const GaussianComponent& c);

// log p(x | model), log-sum-exp over components.
double gmm_log_density(const Vec2& x, const GmmModel& model);
double gmm_density(const Vec2& x, const GmmModel& model);

// Sum of per-point log densities. Returns -infinity (does not throw) when
// some point has zero density under every component.
double gmm_log_likelihood(std::span<const Vec2> data, const GmmModel& model);

// A model with per-component inverses and normalizers cached, for repeated
// density evaluation.
class CompiledGmm {
 public:
  explicit CompiledGmm(const GmmModel& model);
  double log_density(const Vec2& x) const;

 private:
  struct Term {
    double log_weight;
    double log_norm;
    Vec2 mean;
    double i00, i01, i11;
  };
  std::vector<Term> terms_;
};

// Clamps the eigenvalues of a symmetric matrix to at least `floor`.
Mat2 floor_covariance(const Mat2& cov, double floor = kVarianceFloor);

// Single component from the sample mean and (maximum-likelihood) sample
// covariance, floored.
GmmModel moment_model(std::span<const Vec2> data, std::string relation,
                      double floor = kVarianceFloor);

struct EmResult {
  GmmModel model;
  // Log-likelihood of the input model followed by one entry per iteration,
  // including a last step that was discarded for lowering the likelihood.
  std::vector<double> log_likelihoods;
};

EmResult em_fit_traced(std::span<const Vec2> data, GmmModel model, const TrainingConfig& cfg);
GmmModel em_fit(std::span<const Vec2> data, GmmModel model, const TrainingConfig& cfg);

// Candidate components for the next insertion: data are partitioned by
// maximum responsibility and each partition with at least two points yields
// cfg.candidates_per_component candidates centered on random pair midpoints,
// with half the partition covariance.
std::vector<GaussianComponent> generate_candidates(std::span<const Vec2> data,
                                                   const GmmModel& model,
                                                   const TrainingConfig& cfg, Rng& rng);
std::vector<GaussianComponent> generate_candidates(std::span<const Vec2> data,
                                                   const GmmModel& model,
                                                   const TrainingConfig& cfg);

// Adds `c` with mixing weight `weight`, scaling existing weights by
// (1 - weight).
GmmModel insert_component(const GmmModel& model, GaussianComponent c, double weight = 0.5);

struct GreedyResult {
  GmmModel model;
  // Log-likelihood of each accepted model, starting with the 1-component fit.
  std::vector<double> accepted_log_likelihoods;
};

// Starts from the 1-component fit and repeatedly inserts a component: every
// candidate is refined by a partial EM that holds the current mixture fixed,
// the one giving the highest mixed log-likelihood is inserted with weight
// one half, and full EM follows. Stops at max_components or when the gain is
// not above min_gain_per_point per data point.
GreedyResult greedy_train_traced(std::span<const Vec2> data, const std::string& relation,
                                 const TrainingConfig& cfg);
GmmModel greedy_train(std::span<const Vec2> data, const std::string& relation,
                      const TrainingConfig& cfg);

// Per-relation seed so relations can be trained independently.
std::uint64_t relation_seed(std::uint64_t base_seed, std::string_view relation);

// Model text document with 17 significant digits per number.
std::string format_model(const GmmModel& model);
GmmModel parse_model(std::string_view text, const std::string& source = "<memory>");
void save_model(const std::filesystem::path& path, const GmmModel& model);
GmmModel load_model(const std::filesystem::path& path);

}  // namespace geotri
