#include "geotri/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "geotri/error.hpp"

namespace geotri {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Cached inverse and log-determinant of one component.
struct Prepared {
  double log_weight;
  double log_norm;  // -log(2 pi) - 0.5 log|S|
  Vec2 mean;
  double i00, i01, i11;  // inverse covariance

  double log_pdf(const Vec2& x) const {
    const double dx = x[0] - mean[0];
    const double dy = x[1] - mean[1];
    return log_norm - 0.5 * (i00 * dx * dx + 2.0 * i01 * dx * dy + i11 * dy * dy);
  }
};

Prepared prepare(const GaussianComponent& c) {
  const auto& s = c.covariance;
  const double a = s(0, 0), b = s(0, 1), d = s(1, 1);
  const double scale = std::max({std::abs(a), std::abs(d), 1.0});
  if (!(std::abs(s(0, 1) - s(1, 0)) <= 1e-12 * scale))
    throw InvalidParameter("covariance is not symmetric");
  const double det = a * d - b * b;
  if (!(a > 0.0) || !(det > 0.0) || !std::isfinite(det))
    throw InvalidParameter("covariance is not positive-definite");
  return {c.weight > 0.0 ? std::log(c.weight) : kNegInf,
          -kLog2Pi - 0.5 * std::log(det),
          c.mean,
          d / det,
          -b / det,
          a / det};
}

std::vector<Prepared> prepare_all(const GmmModel& model) {
  std::vector<Prepared> out;
  out.reserve(model.size());
  for (const auto& c : model.components) out.push_back(prepare(c));
  return out;
}

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void require_components(const GmmModel& model) {
  if (model.components.empty()) throw InvalidArgument("mixture has no components");
}

struct Estep {
  std::vector<double> resp;  // n * k responsibilities, row-major
  double log_likelihood = 0.0;
};

Estep expectation(std::span<const Vec2> data, const std::vector<Prepared>& comps) {
  const auto k = comps.size();
  Estep e;
  e.resp.resize(data.size() * k);
  for (std::size_t j = 0; j < data.size(); ++j) {
    double* row = &e.resp[j * k];
    for (std::size_t i = 0; i < k; ++i) row[i] = comps[i].log_weight + comps[i].log_pdf(data[j]);
    const double lse = log_sum_exp({row, k});
    e.log_likelihood += lse;
    for (std::size_t i = 0; i < k; ++i) row[i] = lse == kNegInf ? 0.0 : std::exp(row[i] - lse);
  }
  return e;
}

GmmModel maximization(std::span<const Vec2> data, const Estep& e, const GmmModel& prev,
                      double floor) {
  const auto k = prev.size();
  const auto n = static_cast<double>(data.size());
  GmmModel next{prev.relation, {}};
  for (std::size_t i = 0; i < k; ++i) {
    double nk = 0.0;
    Vec2 mean = Vec2::Zero();
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double r = e.resp[j * k + i];
      nk += r;
      mean += r * data[j];
    }
    // A component that owns (numerically) nothing is dropped.
    if (nk <= 1e-10) continue;
    mean /= nk;
    Mat2 cov = Mat2::Zero();
    for (std::size_t j = 0; j < data.size(); ++j) {
      const Vec2 d = data[j] - mean;
      cov += e.resp[j * k + i] * (d * d.transpose());
    }
    cov /= nk;
    cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
    next.components.push_back({nk / n, mean, floor_covariance(cov, floor)});
  }
  double total = 0.0;
  for (const auto& c : next.components) total += c.weight;
  for (auto& c : next.components) c.weight /= total;
  return next;
}

struct Refined {
  GaussianComponent component;
  double log_likelihood = kNegInf;  // of the mixture with the candidate mixed in
};

constexpr int kPartialEmIterations = 20;

// Partial EM: the current mixture stays fixed and only the candidate and its
// mixing weight are updated. `base` holds the current mixture's log density
// at every data point.
Refined partial_em(std::span<const Vec2> data, std::span<const double> base,
                   GaussianComponent cand, const TrainingConfig& cfg) {
  const auto n = data.size();
  std::vector<double> resp(n);
  double alpha = 0.5;
  auto estep = [&](const GaussianComponent& c, double a) {
    const auto p = prepare(c);
    const double la = std::log(a);
    const double lb = std::log1p(-a);
    double ll = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = la + p.log_pdf(data[j]);
      const double y = lb + base[j];
      const double m = std::max(x, y);
      const double lse = m == kNegInf ? kNegInf : m + std::log(std::exp(x - m) + std::exp(y - m));
      resp[j] = lse == kNegInf ? 0.0 : std::exp(x - lse);
      ll += lse;
    }
    return ll;
  };

  double ll = estep(cand, alpha);
  for (int it = 0; it < kPartialEmIterations; ++it) {
    double nk = 0.0;
    Vec2 mean = Vec2::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      nk += resp[j];
      mean += resp[j] * data[j];
    }
    if (nk <= 1e-10) break;
    mean /= nk;
    Mat2 cov = Mat2::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 d = data[j] - mean;
      cov += resp[j] * (d * d.transpose());
    }
    cov /= nk;
    cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
    GaussianComponent next{cand.weight, mean, floor_covariance(cov, cfg.variance_floor)};
    const double next_alpha = std::clamp(nk / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    const double next_ll = estep(next, next_alpha);
    if (!(next_ll >= ll)) break;
    const double gain = next_ll - ll;
    cand = std::move(next);
    alpha = next_alpha;
    ll = next_ll;
    if (gain <= cfg.em_tol * std::abs(ll)) break;
  }
  return {std::move(cand), ll};
}

}  // namespace

CompiledGmm::CompiledGmm(const GmmModel& model) {
  require_components(model);
  for (const auto& c : model.components) {
    const auto p = prepare(c);
    terms_.push_back({p.log_weight, p.log_norm, p.mean, p.i00, p.i01, p.i11});
  }
}

double CompiledGmm::log_density(const Vec2& x) const {
  // Two passes keep the common single-component case free of allocation.
  double m = kNegInf;
  for (const auto& t : terms_) {
    const double dx = x[0] - t.mean[0];
    const double dy = x[1] - t.mean[1];
    m = std::max(m, t.log_weight + t.log_norm -
                        0.5 * (t.i00 * dx * dx + 2.0 * t.i01 * dx * dy + t.i11 * dy * dy));
  }
  if (m == kNegInf || terms_.size() == 1) return m;
  double s = 0.0;
  for (const auto& t : terms_) {
    const double dx = x[0] - t.mean[0];
    const double dy = x[1] - t.mean[1];
    s += std::exp(t.log_weight + t.log_norm -
                  0.5 * (t.i00 * dx * dx + 2.0 * t.i01 * dx * dy + t.i11 * dy * dy) - m);
  }
  return m + std::log(s);
}

void TrainingConfig::validate() const {
  if (max_components < 1) throw InvalidArgument("max_components must be >= 1");
  if (candidates_per_component < 1) throw InvalidArgument("candidates_per_component must be >= 1");
  if (!(em_tol > 0.0)) throw InvalidArgument("em_tol must be > 0");
  if (em_max_iter < 1) throw InvalidArgument("em_max_iter must be >= 1");
  if (!(variance_floor > 0.0)) throw InvalidArgument("variance_floor must be > 0");
  if (!(min_gain_per_point >= 0.0)) throw InvalidArgument("min_gain_per_point must be >= 0");
}

std::vector<Vec2> to_points(std::span<const SpatialFeatureVector> vectors) {
  std::vector<Vec2> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(to_point(v));
  return out;
}

double gaussian_pdf(const Vec2& x, const GaussianComponent& c) {
  return std::exp(log_gaussian_pdf(x, c));
}

double log_gaussian_pdf(const Vec2& x, const GaussianComponent& c) {
  return prepare(c).log_pdf(x);
}

double gmm_log_density(const Vec2& x, const GmmModel& model) {
  require_components(model);
  std::vector<double> terms;
  terms.reserve(model.size());
  for (const auto& p : prepare_all(model)) terms.push_back(p.log_weight + p.log_pdf(x));
  return log_sum_exp(terms);
}

double gmm_density(const Vec2& x, const GmmModel& model) {
  return std::exp(gmm_log_density(x, model));
}

double gmm_log_likelihood(std::span<const Vec2> data, const GmmModel& model) {
  require_components(model);
  if (data.empty()) throw InvalidArgument("log-likelihood of an empty dataset");
  const auto comps = prepare_all(model);
  std::vector<double> terms(comps.size());
  double total = 0.0;
  for (const auto& x : data) {
    for (std::size_t i = 0; i < comps.size(); ++i)
      terms[i] = comps[i].log_weight + comps[i].log_pdf(x);
    const double l = log_sum_exp(terms);
    if (l == kNegInf) return kNegInf;
    total += l;
  }
  return total;
}

Mat2 floor_covariance(const Mat2& cov, double floor) {
  Mat2 sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Mat2> eig(sym);
  Vec2 vals = eig.eigenvalues();
  if (vals.minCoeff() >= floor) return sym;
  vals = vals.cwiseMax(floor);
  Mat2 out = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  out(0, 1) = out(1, 0) = 0.5 * (out(0, 1) + out(1, 0));
  // Rounding in the reconstruction can leave an eigenvalue a hair under the
  // floor; nudge the diagonal until the clamp holds.
  Eigen::SelfAdjointEigenSolver<Mat2> check(out, Eigen::EigenvaluesOnly);
  if (check.eigenvalues().minCoeff() < floor)
    out += (floor - check.eigenvalues().minCoeff()) * Mat2::Identity();
  return out;
}

GmmModel moment_model(std::span<const Vec2> data, std::string relation, double floor) {
  if (data.empty()) throw InsufficientData("moment estimate needs at least one point");
  Vec2 mean = Vec2::Zero();
  for (const auto& x : data) mean += x;
  mean /= static_cast<double>(data.size());
  Mat2 cov = Mat2::Zero();
  for (const auto& x : data) cov += (x - mean) * (x - mean).transpose();
  cov /= static_cast<double>(data.size());
  return {std::move(relation), {{1.0, mean, floor_covariance(cov, floor)}}};
}

EmResult em_fit_traced(std::span<const Vec2> data, GmmModel model, const TrainingConfig& cfg) {
  cfg.validate();
  require_components(model);
  if (data.size() < model.size())
    throw InsufficientData("EM needs at least as many points as components (" +
                           std::to_string(data.size()) + " < " + std::to_string(model.size()) +
                           ")");
  EmResult result;
  auto e = expectation(data, prepare_all(model));
  double ll = e.log_likelihood;
  result.log_likelihoods.push_back(ll);
  for (int it = 0; it < cfg.em_max_iter; ++it) {
    auto next = maximization(data, e, model, cfg.variance_floor);
    auto next_e = expectation(data, prepare_all(next));
    const double next_ll = next_e.log_likelihood;
    result.log_likelihoods.push_back(next_ll);
    // EM cannot decrease the likelihood; a decrease here is rounding noise
    // at convergence, so keep the previous parameters.
    if (!(next_ll >= ll)) break;
    const double gain = next_ll - ll;
    const double prev_ll = ll;
    model = std::move(next);
    e = std::move(next_e);
    ll = next_ll;
    if (gain <= cfg.em_tol * std::abs(prev_ll)) break;
  }
  result.model = std::move(model);
  return result;
}

GmmModel em_fit(std::span<const Vec2> data, GmmModel model, const TrainingConfig& cfg) {
  return em_fit_traced(data, std::move(model), cfg).model;
}

std::vector<GaussianComponent> generate_candidates(std::span<const Vec2> data,
                                                   const GmmModel& model,
                                                   const TrainingConfig& cfg, Rng& rng) {
  require_components(model);
  const auto comps = prepare_all(model);
  std::vector<std::vector<std::size_t>> parts(comps.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    std::size_t arg = 0;
    double best = kNegInf;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const double v = comps[i].log_weight + comps[i].log_pdf(data[j]);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    parts[arg].push_back(j);
  }

  std::vector<GaussianComponent> out;
  for (const auto& part : parts) {
    if (part.size() < 2) continue;
    Vec2 mean = Vec2::Zero();
    for (auto j : part) mean += data[j];
    mean /= static_cast<double>(part.size());
    Mat2 cov = Mat2::Zero();
    for (auto j : part) cov += (data[j] - mean) * (data[j] - mean).transpose();
    cov /= static_cast<double>(part.size());
    const Mat2 cand_cov = floor_covariance(0.5 * cov, cfg.variance_floor);
    for (int c = 0; c < cfg.candidates_per_component; ++c) {
      const auto a = uniform_index(rng, part.size());
      auto b = uniform_index(rng, part.size() - 1);
      if (b >= a) ++b;
      out.push_back({0.5, 0.5 * (data[part[a]] + data[part[b]]), cand_cov});
    }
  }
  return out;
}

std::vector<GaussianComponent> generate_candidates(std::span<const Vec2> data,
                                                   const GmmModel& model,
                                                   const TrainingConfig& cfg) {
  Rng rng(cfg.seed);
  return generate_candidates(data, model, cfg, rng);
}

GmmModel insert_component(const GmmModel& model, GaussianComponent c, double weight) {
  if (!(weight > 0.0 && weight < 1.0)) throw InvalidArgument("insertion weight must be in (0, 1)");
  GmmModel out = model;
  for (auto& existing : out.components) existing.weight *= 1.0 - weight;
  c.weight = weight;
  out.components.push_back(std::move(c));
  return out;
}

GreedyResult greedy_train_traced(std::span<const Vec2> data, const std::string& relation,
                                 const TrainingConfig& cfg) {
  cfg.validate();
  if (data.size() < 2) throw InsufficientData("greedy training needs at least 2 points");
  Rng rng(cfg.seed);

  GreedyResult result;
  result.model = em_fit(data, moment_model(data, relation, cfg.variance_floor), cfg);
  double ll = gmm_log_likelihood(data, result.model);
  result.accepted_log_likelihoods.push_back(ll);
  const double min_gain = cfg.min_gain_per_point * static_cast<double>(data.size());

  // EM may drop a starved component, so the number of attempts is bounded
  // separately from the component count.
  for (int attempt = 1; attempt < cfg.max_components &&
                        static_cast<int>(result.model.size()) < cfg.max_components &&
                        data.size() > result.model.size();
       ++attempt) {
    const auto candidates = generate_candidates(data, result.model, cfg, rng);
    if (candidates.empty()) break;

    const CompiledGmm current(result.model);
    std::vector<double> base(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) base[j] = current.log_density(data[j]);

    // Each candidate is refined by partial EM before scoring; the first one
    // wins ties.
    Refined best;
    bool have_best = false;
    for (const auto& cand : candidates) {
      auto refined = partial_em(data, base, cand, cfg);
      if (!have_best || refined.log_likelihood > best.log_likelihood) {
        best = std::move(refined);
        have_best = true;
      }
    }
    auto best_mix = insert_component(result.model, best.component);
    auto grown = em_fit(data, std::move(best_mix), cfg);
    const double grown_ll = gmm_log_likelihood(data, grown);
    if (!(grown_ll - ll > min_gain)) break;
    result.model = std::move(grown);
    ll = grown_ll;
    result.accepted_log_likelihoods.push_back(ll);
  }
  return result;
}

GmmModel greedy_train(std::span<const Vec2> data, const std::string& relation,
                      const TrainingConfig& cfg) {
  return greedy_train_traced(data, relation, cfg).model;
}

std::uint64_t relation_seed(std::uint64_t base_seed, std::string_view relation) {
  return base_seed ^ fnv1a(relation);
}

}  // namespace geotri
