#include "geotri/fuse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "geotri/error.hpp"
#include "geotri/io.hpp"

namespace geotri {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t subsample_size(std::size_t n, double fraction) {
  // Guard against products like 0.1 * 30 landing a hair above an integer.
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, n == 0 ? 0 : 1, n);
}

}  // namespace

void Scenario::validate() const {
  if (observations.empty()) throw InvalidArgument("scenario has no observations");
  if (bbox.degenerate()) throw InvalidArgument("scenario bounding box is degenerate");
  if (dim < 2) throw InvalidArgument("grid dimension must be >= 2");
  for (const auto& o : observations)
    if (!bbox.contains(o.landmark.point()))
      throw InvalidArgument("landmark '" + o.landmark.name + "' lies outside the bounding box");
}

FusionRule fusion_rule_from_string(std::string_view s) {
  if (s == "product") return FusionRule::Product;
  if (s == "sum") return FusionRule::Sum;
  throw InvalidArgument("fusion rule must be 'sum' or 'product'");
}

std::vector<Observation> subsample(std::span<const Observation> observations, double fraction,
                                   std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must be in (0, 1]");
  const auto n = observations.size();
  const auto k = subsample_size(n, fraction);
  if (k == n) return {observations.begin(), observations.end()};
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<Observation> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(observations[idx[i]]);
  return out;
}

Estimate fuse(const Scenario& scenario, const ModelSet& models, double fraction,
              std::uint64_t seed, FusionRule rule) {
  scenario.validate();
  for (const auto& o : scenario.observations)
    if (!models.contains(o.label)) throw MissingModel(o.label);

  auto selected = subsample(scenario.observations, fraction, seed);
  // Canonical accumulation order makes the result independent of how the
  // observations were listed. Names are deliberately not part of the key.
  std::sort(selected.begin(), selected.end(), [](const Observation& a, const Observation& b) {
    return std::tie(a.label, a.landmark.lat, a.landmark.lon) <
           std::tie(b.label, b.landmark.lat, b.landmark.lon);
  });

  const auto grid = make_grid(scenario.bbox, scenario.dim);
  const auto origin = grid.origin();
  const auto n = grid.vertex_count();
  std::vector<double> acc(n, rule == FusionRule::Product ? 0.0 : kNegInf);
  for (const auto& o : selected) {
    const auto& model = models.at(o.label);
    std::optional<CompiledGmm> compiled;
    if (const auto* g = std::get_if<GmmModel>(&model)) compiled.emplace(*g);
    const auto ref = project(o.landmark.point(), origin);
    for (std::size_t v = 0; v < n; ++v) {
      const auto f = feature_from_offset(grid.planar[v].x - ref.x, grid.planar[v].y - ref.y);
      const double ld = compiled ? compiled->log_density(to_point(f)) : log_density(model, f);
      if (rule == FusionRule::Product) {
        acc[v] += ld;
      } else if (ld != kNegInf) {
        const double m = std::max(acc[v], ld);
        acc[v] = m + std::log(std::exp(acc[v] - m) + std::exp(ld - m));
      }
    }
  }

  const double peak = *std::max_element(acc.begin(), acc.end());
  std::vector<double> vertex(n, 1.0 / static_cast<double>(n));
  if (peak != kNegInf) {
    double z = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      vertex[v] = std::exp(acc[v] - peak);
      z += vertex[v];
    }
    for (auto& x : vertex) x /= z;
  }

  Estimate est;
  est.observations_used = selected.size();
  est.region_likelihoods = region_means(grid, vertex);
  const double total = std::accumulate(est.region_likelihoods.begin(), est.region_likelihoods.end(), 0.0);
  for (auto& r : est.region_likelihoods) r /= total;

  std::size_t best = 0;
  est.center = {0.0, 0.0};
  for (std::size_t r = 0; r < grid.region_count(); ++r) {
    const auto c = grid.region_center(r);
    est.center.lat += est.region_likelihoods[r] * c.lat;
    est.center.lon += est.region_likelihoods[r] * c.lon;
    if (est.region_likelihoods[r] > est.region_likelihoods[best]) best = r;
  }
  // Clamp rounding spill just outside the box.
  est.center.lat = std::clamp(est.center.lat, scenario.bbox.min_lat, scenario.bbox.max_lat);
  est.center.lon = std::clamp(est.center.lon, scenario.bbox.min_lon, scenario.bbox.max_lon);
  est.mode = grid.region_center(best);
  est.error_km = haversine_km(est.center, scenario.unknown.point());
  est.mode_error_km = haversine_km(est.mode, scenario.unknown.point());
  return est;
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  Scenario s;
  bool have_bbox = false, have_dim = false, have_unknown = false;
  const auto lines = io::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = io::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = io::split(lines[n], '\t');
    const auto key = io::trim(cols[0]);
    auto num = [&](std::size_t i) {
      const auto v = io::parse_double(cols[i]);
      if (!v) throw ParseError(source, n + 1, "unparsable number '" + cols[i] + "'");
      return *v;
    };
    if (key == "bbox") {
      if (cols.size() != 5) throw ParseError(source, n + 1, "bbox needs 4 numbers");
      s.bbox = {num(1), num(2), num(3), num(4)};
      have_bbox = true;
    } else if (key == "dim") {
      const auto d = cols.size() == 2 ? io::parse_int(cols[1]) : std::nullopt;
      if (!d || *d < 2 || *d > 1000) throw ParseError(source, n + 1, "dim must be an integer >= 2");
      s.dim = static_cast<int>(*d);
      have_dim = true;
    } else if (key == "unknown") {
      if (cols.size() != 4) throw ParseError(source, n + 1, "unknown needs name, lat, lon");
      s.unknown = {std::string(io::trim(cols[1])), num(2), num(3)};
      have_unknown = true;
    } else {
      if (cols.size() != 4) throw ParseError(source, n + 1, "observation needs label, name, lat, lon");
      Observation o{std::string(key), {std::string(io::trim(cols[1])), num(2), num(3)}};
      if (!valid_coordinates(o.landmark.lat, o.landmark.lon))
        throw ParseError(source, n + 1, "landmark coordinates out of range");
      s.observations.push_back(std::move(o));
    }
  }
  if (!have_bbox || !have_dim || !have_unknown)
    throw ParseError(source, lines.size(), "scenario needs bbox, dim and unknown header lines");
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(io::read_file(path), path.string());
}

std::string format_scenario(const Scenario& s) {
  using io::format_shortest;
  std::string out = "bbox\t" + format_shortest(s.bbox.min_lat) + '\t' +
                    format_shortest(s.bbox.min_lon) + '\t' + format_shortest(s.bbox.max_lat) +
                    '\t' + format_shortest(s.bbox.max_lon) + '\n';
  out += "dim\t" + std::to_string(s.dim) + '\n';
  out += "unknown\t" + s.unknown.name + '\t' + format_shortest(s.unknown.lat) + '\t' +
         format_shortest(s.unknown.lon) + '\n';
  for (const auto& o : s.observations)
    out += o.label + '\t' + o.landmark.name + '\t' + format_shortest(o.landmark.lat) + '\t' +
           format_shortest(o.landmark.lon) + '\n';
  return out;
}

std::string format_estimate_line(double fraction, const Estimate& e) {
  return io::format_shortest(fraction) + '\t' + io::format_exact(e.center.lat) + '\t' +
         io::format_exact(e.center.lon) + '\t' + io::format_exact(e.error_km) + '\n';
}

}  // namespace geotri
