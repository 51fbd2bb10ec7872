#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include <Eigen/Eigenvalues>

#include "geotri/error.hpp"
#include "geotri/mixture.hpp"
#include "quadrature.hpp"
#include "synthetic_city.hpp"

using namespace geotri;
using testing::component;

namespace {

GmmModel single(double mx, double my, double vx, double vy) {
  return {"x", {component(1.0, mx, my, vx, vy)}};
}

GmmModel three_components() {
  return {"x",
          {component(0.5, 1.0, 40.0, 0.3, 90.0), component(0.3, 4.0, 200.0, 1.0, 400.0),
           component(0.2, 2.0, 120.0, 0.5, 30.0)}};
}

// Straight sum of weighted closed-form densities, then a log per point.
double naive_log_likelihood(const std::vector<Vec2>& data, const GmmModel& m) {
  double total = 0.0;
  for (const auto& x : data) {
    double p = 0.0;
    for (const auto& c : m.components) {
      const Mat2 inv = c.covariance.inverse();
      const Vec2 d = x - c.mean;
      p += c.weight * std::exp(-0.5 * d.dot(inv * d)) /
           (2.0 * std::numbers::pi * std::sqrt(c.covariance.determinant()));
    }
    total += std::log(p);
  }
  return total;
}

std::vector<Vec2> mixture_sample(const GmmModel& m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testing::sample_mixture(m, rng));
  return out;
}

double weight_sum(const GmmModel& m) {
  double s = 0.0;
  for (const auto& c : m.components) s += c.weight;
  return s;
}

}  // namespace

TEST_CASE("gaussian pdf closed forms") {
  const auto c = component(1.0, 0.0, 0.0, 1.0, 1.0);
  CHECK(gaussian_pdf(Vec2(0, 0), c) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
  CHECK(gaussian_pdf(Vec2(0, 0), c) == doctest::Approx(0.15915).epsilon(1e-4));
  CHECK(gaussian_pdf(Vec2(1, 0), c) == doctest::Approx(std::exp(-0.5) / (2 * std::numbers::pi)));
  CHECK(gaussian_pdf(Vec2(1, 0), c) == doctest::Approx(0.09653).epsilon(1e-4));
  const auto d = component(1.0, 0.0, 0.0, 4.0, 1.0);
  const double direct = std::exp(-0.5 * (1.0 / 4.0 + 4.0)) / (2.0 * std::numbers::pi * 2.0);
  CHECK(gaussian_pdf(Vec2(1, 2), d) == doctest::Approx(direct).epsilon(1e-14));
  // Weight does not enter the component density.
  CHECK(gaussian_pdf(Vec2(1, 2), component(0.2, 0.0, 0.0, 4.0, 1.0)) == gaussian_pdf(Vec2(1, 2), d));
}

TEST_CASE("invalid covariances are rejected") {
  GaussianComponent c;
  c.covariance << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(gaussian_pdf(Vec2(0, 0), c), InvalidParameter);
  c.covariance << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(gaussian_pdf(Vec2(0, 0), c), InvalidParameter);
  c.covariance << -1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(gaussian_pdf(Vec2(0, 0), c), InvalidParameter);
}

TEST_CASE("log-likelihood examples") {
  const auto m = single(0, 0, 1, 1);
  const std::vector<Vec2> one{Vec2(0, 0)};
  CHECK(gmm_log_likelihood(one, m) == doctest::Approx(std::log(1.0 / (2 * std::numbers::pi))));
  CHECK(gmm_log_likelihood(one, m) == doctest::Approx(-1.83788).epsilon(1e-5));

  const auto data = mixture_sample(three_components(), 100, 1);
  auto twice = data;
  twice.insert(twice.end(), data.begin(), data.end());
  CHECK(gmm_log_likelihood(twice, three_components()) ==
        doctest::Approx(2.0 * gmm_log_likelihood(data, three_components())).epsilon(1e-14));
  CHECK_THROWS_AS(gmm_log_likelihood({}, m), InvalidArgument);
}

TEST_CASE("log-likelihood matches the naive double loop") {
  for (std::size_t n : {10u, 100u, 1000u}) {
    const auto m = three_components();
    const auto data = mixture_sample(m, n, n);
    const double fast = gmm_log_likelihood(data, m);
    const double slow = naive_log_likelihood(data, m);
    CHECK(std::abs(fast - slow) <= 1e-9 * std::abs(slow));
    double compiled = 0.0;
    const CompiledGmm cm(m);
    for (const auto& x : data) compiled += cm.log_density(x);
    CHECK(std::abs(compiled - slow) <= 1e-9 * std::abs(slow));
  }
}

TEST_CASE("zero density is reported, not thrown") {
  const std::vector<Vec2> far{Vec2(0, 0), Vec2(1e200, 0)};
  CHECK(gmm_log_likelihood(far, single(0, 0, 1, 1)) == -INFINITY);
}

TEST_CASE("covariance floor") {
  Mat2 c;
  c << 1e-8, 0.0, 0.0, 2.0;
  const auto f = floor_covariance(c);
  CHECK(f(0, 0) == doctest::Approx(kVarianceFloor));
  CHECK(f(1, 1) == 2.0);
  c << 1.0, 1.0, 1.0, 1.0;  // singular
  Eigen::SelfAdjointEigenSolver<Mat2> eig(floor_covariance(c));
  CHECK(eig.eigenvalues().minCoeff() >= kVarianceFloor * (1 - 1e-12));
  Mat2 fine;
  fine << 2.0, 0.3, 0.3, 1.0;
  CHECK(floor_covariance(fine) == fine);
}

TEST_CASE("EM on a single point") {
  const std::vector<Vec2> one{Vec2(3.0, 45.0)};
  const auto fit = em_fit(one, single(0, 0, 1, 1), TrainingConfig{});
  CHECK(fit.components[0].mean == Vec2(3.0, 45.0));
  CHECK(fit.components[0].covariance(0, 0) == doctest::Approx(kVarianceFloor));
  CHECK(fit.components[0].covariance(1, 1) == doctest::Approx(kVarianceFloor));
}

TEST_CASE("EM recovers the mean of a known gaussian") {
  Rng rng(99);
  Mat2 cov;
  cov << 2.0, 0.5, 0.5, 50.0;
  const Vec2 truth(6.0, 120.0);
  const auto data = testing::sample_gaussian(500, truth, cov, rng);
  const auto fit = em_fit(data, single(0, 0, 1, 1), TrainingConfig{});
  Vec2 mean = Vec2::Zero();
  for (const auto& x : data) mean += x;
  mean /= 500.0;
  CHECK((fit.components[0].mean - mean).norm() < 1e-9);
  CHECK(std::abs(mean[0] - truth[0]) < 3.0 * std::sqrt(cov(0, 0) / 500.0));
  CHECK(std::abs(mean[1] - truth[1]) < 3.0 * std::sqrt(cov(1, 1) / 500.0));
  const auto moments = moment_model(data, "x");
  CHECK((moments.components[0].mean - mean).norm() < 1e-12);
  CHECK((moments.components[0].covariance - fit.components[0].covariance).norm() < 1e-9);
}

TEST_CASE("EM is monotone and keeps weights normalized") {
  const auto data = mixture_sample(three_components(), 400, 5);
  GmmModel init{"x", {component(0.25, 1.0, 100.0, 1.0, 100.0), component(0.25, 3.0, 150.0, 1.0, 100.0),
                      component(0.25, 2.0, 50.0, 1.0, 100.0), component(0.25, 5.0, 250.0, 1.0, 100.0)}};
  TrainingConfig cfg;
  cfg.em_tol = 1e-12;
  for (int iters = 1; iters <= 30; ++iters) {
    cfg.em_max_iter = iters;
    const auto r = em_fit_traced(data, init, cfg);
    for (std::size_t i = 1; i < r.log_likelihoods.size(); ++i)
      CHECK(r.log_likelihoods[i] >= r.log_likelihoods[i - 1] - 1e-8);
    CHECK(weight_sum(r.model) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("EM needs enough points") {
  const std::vector<Vec2> one{Vec2(0, 0)};
  CHECK_THROWS_AS(em_fit(one, three_components(), TrainingConfig{}), InsufficientData);
}

TEST_CASE("training config validation") {
  TrainingConfig cfg;
  cfg.em_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.max_components = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.candidates_per_component = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("candidate counts") {
  TrainingConfig cfg;
  const auto data = mixture_sample(three_components(), 50, 2);
  const auto one = moment_model(data, "x");
  const auto c1 = generate_candidates(data, one, cfg);
  CHECK(c1.size() == 10);
  Vec2 lo = data[0], hi = data[0];
  for (const auto& x : data) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  for (const auto& c : c1) {
    CHECK((c.mean.array() >= lo.array()).all());
    CHECK((c.mean.array() <= hi.array()).all());
  }
  GmmModel two{"x", {component(0.5, 1.0, 40.0, 0.3, 90.0), component(0.5, 4.0, 200.0, 1.0, 400.0)}};
  CHECK(generate_candidates(data, two, cfg).size() <= 20);

  // One point far from everything forms its own partition.
  std::vector<Vec2> lonely(data.begin(), data.end());
  lonely.push_back(Vec2(500.0, 0.0));
  GmmModel split{"x", {moment_model(data, "x").components[0], component(0.0001, 500.0, 0.0, 1, 1)}};
  split.components[0].weight = 0.9999;
  CHECK(generate_candidates(lonely, split, cfg).size() == 10);
}

TEST_CASE("candidates are seed deterministic") {
  TrainingConfig cfg;
  cfg.seed = 17;
  const auto data = mixture_sample(three_components(), 80, 3);
  const auto m = moment_model(data, "x");
  const auto a = generate_candidates(data, m, cfg);
  const auto b = generate_candidates(data, m, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].mean == b[i].mean);
}

TEST_CASE("insertion rescales weights") {
  const auto m = insert_component(three_components(), component(1.0, 0, 0, 1, 1));
  CHECK(m.size() == 4);
  CHECK(m.components[3].weight == 0.5);
  CHECK(m.components[0].weight == 0.25);
  CHECK(weight_sum(m) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(insert_component(m, component(1, 0, 0, 1, 1), 1.0), InvalidArgument);
}

TEST_CASE("greedy training with one allowed component is plain EM") {
  const auto data = mixture_sample(three_components(), 300, 9);
  TrainingConfig cfg;
  cfg.max_components = 1;
  const auto g = greedy_train(data, "x", cfg);
  const auto e = em_fit(data, moment_model(data, "x"), cfg);
  REQUIRE(g.size() == 1);
  CHECK(g.components[0].mean == e.components[0].mean);
  CHECK(g.components[0].covariance == e.components[0].covariance);
  CHECK(g.relation == "x");
}

TEST_CASE("greedy training on one tight gaussian keeps one component") {
  Rng rng(12);
  Mat2 cov;
  cov << 0.01, 0.0, 0.0, 1.0;
  const auto data = testing::sample_gaussian(300, Vec2(0.5, 90.0), cov, rng);
  TrainingConfig cfg;
  cfg.seed = 3;
  const auto g = greedy_train(data, "at", cfg);
  CHECK(g.size() == 1);
  // Exhaustive check: EM fits of 1..5 components gain little per point
  // over the single gaussian.
  const double base = gmm_log_likelihood(data, g);
  for (int k = 2; k <= 5; ++k) {
    GmmModel init{"at", {}};
    for (int i = 0; i < k; ++i)
      init.components.push_back(component(1.0 / k, data[i * 37][0], data[i * 37][1], 0.01, 1.0));
    const auto fit = em_fit(data, init, cfg);
    CHECK((gmm_log_likelihood(data, fit) - base) / 300.0 < cfg.min_gain_per_point);
  }
}

TEST_CASE("greedy training separates two clusters") {
  Rng rng(31);
  auto data = testing::sample_gaussian(200, Vec2(10.0, 90.0), Mat2::Identity(), rng);
  const auto more = testing::sample_gaussian(200, Vec2(110.0, 90.0), Mat2::Identity(), rng);
  data.insert(data.end(), more.begin(), more.end());
  TrainingConfig cfg;
  cfg.seed = 8;
  const auto r = greedy_train_traced(data, "x", cfg);
  REQUIRE(r.model.size() == 2);
  // Oracle: EM started from the true means.
  GmmModel truth{"x", {component(0.5, 10, 90, 1, 1), component(0.5, 110, 90, 1, 1)}};
  const auto oracle = em_fit(data, truth, cfg);
  CHECK(gmm_log_likelihood(data, r.model) == doctest::Approx(gmm_log_likelihood(data, oracle)).epsilon(1e-6));
  for (std::size_t i = 1; i < r.accepted_log_likelihoods.size(); ++i)
    CHECK(r.accepted_log_likelihoods[i] > r.accepted_log_likelihoods[i - 1]);
}

TEST_CASE("greedy training is deterministic and normalized") {
  const auto data = mixture_sample(three_components(), 400, 77);
  TrainingConfig cfg;
  cfg.seed = 5;
  const auto a = greedy_train(data, "x", cfg);
  const auto b = greedy_train(data, "x", cfg);
  REQUIRE(a.size() == b.size());
  CHECK(format_model(a) == format_model(b));
  CHECK(weight_sum(a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(testing::integrate_box(a) - 1.0) < 0.02);
  for (const auto& c : a.components) {
    Eigen::SelfAdjointEigenSolver<Mat2> eig(c.covariance);
    CHECK(eig.eigenvalues().minCoeff() >= kVarianceFloor * (1 - 1e-12));
    CHECK(c.weight > 0.0);
    CHECK(c.weight <= 1.0);
  }
  std::vector<Vec2> one{Vec2(0, 0)};
  CHECK_THROWS_AS(greedy_train(one, "x", cfg), InsufficientData);
}

TEST_CASE("per-relation seeds differ") {
  CHECK(relation_seed(7, "near") != relation_seed(7, "at"));
  CHECK(relation_seed(7, "near") == relation_seed(7, "near"));
}

TEST_CASE("model file round trip is exact") {
  const auto data = mixture_sample(three_components(), 300, 4);
  TrainingConfig cfg;
  cfg.seed = 2;
  auto m = greedy_train(data, "north of", cfg);
  const auto back = parse_model(format_model(m));
  CHECK(back.relation == m.relation);
  REQUIRE(back.size() == m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(back.components[i].weight == m.components[i].weight);
    CHECK(back.components[i].mean == m.components[i].mean);
    CHECK(back.components[i].covariance == m.components[i].covariance);
  }
  CHECK(format_model(back) == format_model(m));
}

TEST_CASE("hand-written model file") {
  const auto m = parse_model(R"({"relation": "at", "component_count": 1,
    "components": [{"weight": 1, "mean": [0.5, 90], "covariance": [0.04, 0, 0, 100]}]})");
  const double at_mean = gaussian_pdf(m.components[0].mean, m.components[0]);
  CHECK(at_mean == doctest::Approx(1.0 / (2.0 * std::numbers::pi * std::sqrt(0.04 * 100))));
}

TEST_CASE("malformed model files report a line") {
  const std::string good = format_model(three_components());
  try {
    parse_model(good.substr(0, good.size() / 2), "cut.model");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 1);
    CHECK(std::string(e.what()).find("cut.model") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_model("{\"relation\": \"x\", \"component_count\": 2, \"components\": []}"),
                  ParseError);
  CHECK_THROWS_AS(parse_model(R"({"relation": "x", "component_count": 1, "components": [
    {"weight": 0.5, "mean": [0, 0], "covariance": [1, 0, 0, 1]}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_model(R"({"relation": "x", "component_count": 1, "components": [
    {"weight": 1, "mean": [0, 0], "covariance": [1, 2, 2, 1]}]})"),
                  ParseError);
  try {
    parse_model("{\n\"relation\": \"x\",\n\"component_count\": 1,\n\"components\": [\n"
                "{\"weight\": 1, \"mean\": [0], \"covariance\": [1, 0, 0, 1]}]}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
}
