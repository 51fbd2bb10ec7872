#include <algorithm>
#include <cmath>

#include "geotri/error.hpp"
#include "geotri/io.hpp"
#include "geotri/mixture.hpp"
#include "json.hpp"

namespace geotri {
namespace {

using nlohmann::json;

std::size_t line_at(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

// Best-effort location for schema errors: the line of the first occurrence
// of the quoted key, or line 1.
std::size_t line_of_key(std::string_view text, std::string_view key) {
  const auto pos = text.find("\"" + std::string(key) + "\"");
  return pos == std::string_view::npos ? 1 : line_at(text, pos);
}

double number_at(const json& j, std::string_view text, const std::string& source,
                 std::string_view key) {
  if (!j.is_number())
    throw ParseError(source, line_of_key(text, key), "'" + std::string(key) + "' must be a number");
  return j.get<double>();
}

}  // namespace

std::string format_model(const GmmModel& model) {
  std::string out = "{\n";
  out += "  \"relation\": " + json(model.relation).dump() + ",\n";
  out += "  \"component_count\": " + std::to_string(model.size()) + ",\n";
  out += "  \"components\": [\n";
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& c = model.components[i];
    out += "    {\"weight\": " + io::format_exact(c.weight) + ", \"mean\": [" +
           io::format_exact(c.mean[0]) + ", " + io::format_exact(c.mean[1]) +
           "], \"covariance\": [" + io::format_exact(c.covariance(0, 0)) + ", " +
           io::format_exact(c.covariance(0, 1)) + ", " + io::format_exact(c.covariance(1, 0)) +
           ", " + io::format_exact(c.covariance(1, 1)) + "]}";
    out += i + 1 < model.size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

GmmModel parse_model(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(source, line_at(text, e.byte == 0 ? 0 : e.byte - 1), "malformed model document");
  }
  if (!doc.is_object()) throw ParseError(source, 1, "model document must be an object");

  GmmModel model;
  if (!doc.contains("relation") || !doc["relation"].is_string())
    throw ParseError(source, line_of_key(text, "relation"), "missing string 'relation'");
  model.relation = doc["relation"].get<std::string>();
  if (!doc.contains("component_count") || !doc["component_count"].is_number_unsigned())
    throw ParseError(source, line_of_key(text, "component_count"),
                     "missing non-negative integer 'component_count'");
  const auto count = doc["component_count"].get<std::size_t>();
  if (!doc.contains("components") || !doc["components"].is_array())
    throw ParseError(source, line_of_key(text, "components"), "missing array 'components'");
  const auto& comps = doc["components"];
  if (count == 0 || comps.size() != count)
    throw ParseError(source, line_of_key(text, "components"),
                     "component_count does not match the number of components");

  double total = 0.0;
  for (const auto& c : comps) {
    if (!c.is_object() || !c.contains("weight") || !c.contains("mean") || !c.contains("covariance"))
      throw ParseError(source, line_of_key(text, "components"),
                       "component needs weight, mean and covariance");
    const auto& mean = c["mean"];
    const auto& cov = c["covariance"];
    if (!mean.is_array() || mean.size() != 2)
      throw ParseError(source, line_of_key(text, "mean"), "'mean' must hold 2 numbers");
    if (!cov.is_array() || cov.size() != 4)
      throw ParseError(source, line_of_key(text, "covariance"),
                       "'covariance' must hold 4 numbers (row-major)");
    GaussianComponent g;
    g.weight = number_at(c["weight"], text, source, "weight");
    if (!(g.weight > 0.0 && g.weight <= 1.0))
      throw ParseError(source, line_of_key(text, "weight"), "weight must be in (0, 1]");
    g.mean = {number_at(mean[0], text, source, "mean"), number_at(mean[1], text, source, "mean")};
    g.covariance << number_at(cov[0], text, source, "covariance"),
        number_at(cov[1], text, source, "covariance"),
        number_at(cov[2], text, source, "covariance"),
        number_at(cov[3], text, source, "covariance");
    try {
      (void)log_gaussian_pdf(g.mean, g);
    } catch (const InvalidParameter& e) {
      throw ParseError(source, line_of_key(text, "covariance"), e.what());
    }
    total += g.weight;
    model.components.push_back(std::move(g));
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ParseError(source, line_of_key(text, "weight"), "weights must sum to 1");
  return model;
}

void save_model(const std::filesystem::path& path, const GmmModel& model) {
  io::write_file_atomic(path, format_model(model));
}

GmmModel load_model(const std::filesystem::path& path) {
  return parse_model(io::read_file(path), path.string());
}

}  // namespace geotri
