#include "geotri/cli.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "geotri/error.hpp"
#include "geotri/extract.hpp"
#include "geotri/features.hpp"
#include "geotri/fuse.hpp"
#include "geotri/gazetteer.hpp"
#include "geotri/io.hpp"
#include "geotri/mixture.hpp"
#include "geotri/predict.hpp"

namespace geotri::cli {
namespace {

namespace fs = std::filesystem;

// key=value summary; values with spaces are quoted.
class Summary {
 public:
  template <typename T>
  Summary& add(const std::string& key, const T& value) {
    std::ostringstream v;
    v << value;
    auto s = v.str();
    if (s.find(' ') != std::string::npos || s.empty()) s = '"' + s + '"';
    fields_.push_back(key + "=" + s);
    return *this;
  }
  Summary& add(const std::string& key, double value) { return add(key, io::format_shortest(value)); }

  void print(std::ostream& out) const {
    for (std::size_t i = 0; i < fields_.size(); ++i) out << (i ? " " : "") << fields_[i];
    out << '\n';
  }

 private:
  std::vector<std::string> fields_;
};

BoundingBox parse_bbox(const std::string& s) {
  const auto parts = io::split(s, ',');
  if (parts.size() != 4) throw InvalidArgument("--bbox expects min_lat,min_lon,max_lat,max_lon");
  double v[4];
  for (int i = 0; i < 4; ++i) {
    auto d = io::parse_double(parts[i]);
    if (!d) throw InvalidArgument("--bbox has an unparsable number '" + parts[i] + "'");
    v[i] = *d;
  }
  BoundingBox b{v[0], v[1], v[2], v[3]};
  if (b.degenerate() || !valid_coordinates(b.min_lat, b.min_lon) ||
      !valid_coordinates(b.max_lat, b.max_lon))
    throw InvalidArgument("--bbox must be a non-degenerate box within geographic bounds");
  return b;
}

ModelSet load_models(const std::vector<std::string>& paths) {
  if (paths.empty()) throw InvalidArgument("--models needs at least one model file");
  ModelSet models;
  for (const auto& p : paths) {
    auto m = load_model(p);
    auto label = m.relation;
    if (!models.emplace(label, std::move(m)).second)
      throw InvalidArgument("two model files for relation '" + label + "'");
  }
  return models;
}

std::string file_stem_label(const fs::path& p) {
  auto stem = p.stem().string();
  std::replace(stem.begin(), stem.end(), '_', ' ');
  return stem;
}

std::string label_file_name(std::string label) {
  std::replace(label.begin(), label.end(), ' ', '_');
  return label + ".tsv";
}

struct GeocodeArgs {
  std::string gazetteer, name;
  std::size_t max_edit = kDefaultMaxEdit;
};

struct ExtractArgs {
  std::string corpus, gazetteer, patterns, out;
  ExtractOptions opts;
};

struct FeaturesArgs {
  std::string triplets, out_dir;
  std::vector<double> origin;
};

struct TrainArgs {
  std::string features, relation, out;
  TrainingConfig cfg;
};

struct PredictArgs {
  std::vector<std::string> models;
  std::string bbox, oracle, csv, geojson;
  int grid_dim = 15;
  std::size_t points = 1000;
  std::vector<std::size_t> topk{1, 5, 10, 20};
};

struct FuseArgs {
  std::vector<std::string> models;
  std::string scenario, out, geojson, fusion = "product";
  std::vector<double> fractions{std::begin(kDefaultFractions), std::end(kDefaultFractions)};
};

int do_geocode(const GeocodeArgs& a, std::ostream& out) {
  const auto g = load_gazetteer(a.gazetteer);
  Summary s;
  if (auto poi = g.geocode(a.name, a.max_edit)) {
    s.add("found", 1).add("name", poi->name).add("lat", poi->lat).add("lon", poi->lon);
  } else {
    s.add("found", 0).add("query", a.name);
  }
  s.print(out);
  return kOk;
}

int do_extract(const ExtractArgs& a, std::ostream& out) {
  if (a.opts.max_span < 1) throw InvalidArgument("--max-span must be >= 1");
  if (a.opts.max_gap < 1) throw InvalidArgument("--max-gap must be >= 1");
  const auto g = load_gazetteer(a.gazetteer);
  const auto patterns = load_patterns(a.patterns);
  const auto corpus = split_corpus(io::read_file(a.corpus));
  const auto triplets = extract_triplets(corpus, g, patterns, a.opts);
  io::write_file_atomic(a.out, format_triplets(triplets));
  Summary()
      .add("texts", corpus.size())
      .add("triplets", triplets.size())
      .add("gazetteer_skipped", g.skipped_rows())
      .add("out", a.out)
      .print(out);
  return kOk;
}

int do_features(const FeaturesArgs& a, std::ostream& out) {
  const auto text = io::read_file(a.triplets);
  const auto triplets = parse_triplets(text, a.triplets);
  if (triplets.empty()) throw InvalidArgument("no triplets in '" + a.triplets + "'");
  ProjectionOrigin origin;
  if (a.origin.empty()) {
    origin = origin_for(triplets);
  } else {
    if (a.origin.size() != 2 || !valid_coordinates(a.origin[0], a.origin[1]))
      throw InvalidArgument("--origin expects lat,lon within geographic bounds");
    origin = {a.origin[0], a.origin[1]};
  }
  const auto sets = build_training_sets(triplets, origin);
  fs::create_directories(a.out_dir);
  std::size_t total = 0;
  for (const auto& set : sets) {
    io::write_file_atomic(fs::path(a.out_dir) / label_file_name(set.relation),
                          format_training_set(set));
    total += set.vectors.size();
  }
  Summary()
      .add("relations", sets.size())
      .add("vectors", total)
      .add("origin_lat", origin.lat0)
      .add("origin_lon", origin.lon0)
      .add("out_dir", a.out_dir)
      .print(out);
  return kOk;
}

int do_train(TrainArgs a, std::ostream& out) {
  a.cfg.validate();
  const auto relation = a.relation.empty() ? file_stem_label(a.features) : a.relation;
  const auto vectors = parse_training_set(io::read_file(a.features), a.features);
  const auto data = to_points(vectors);
  if (data.size() < 2) throw InsufficientData("training needs at least 2 feature vectors");
  a.cfg.seed = relation_seed(a.cfg.seed, relation);
  const auto result = greedy_train_traced(data, relation, a.cfg);
  save_model(a.out, result.model);
  Summary()
      .add("relation", relation)
      .add("points", data.size())
      .add("components", result.model.size())
      .add("log_likelihood", result.accepted_log_likelihoods.back())
      .add("out", a.out)
      .print(out);
  return kOk;
}

int do_predict(const PredictArgs& a, std::uint64_t seed, std::ostream& out) {
  if (a.grid_dim < 2) throw InvalidArgument("--grid-dim must be >= 2");
  if (a.points < 1) throw InvalidArgument("--points must be >= 1");
  const auto bbox = parse_bbox(a.bbox);
  const auto regions = static_cast<std::size_t>(a.grid_dim - 1) * (a.grid_dim - 1);
  for (auto k : a.topk)
    if (k < 1 || k > regions)
      throw InvalidArgument("--topk values must be in [1, " + std::to_string(regions) + "]");
  const auto models = load_models(a.models);
  const auto oracle =
      a.oracle.empty() ? RelationOracle{} : parse_oracle(io::read_file(a.oracle), a.oracle);

  const auto report = evaluate_prediction(models, bbox, a.grid_dim, a.points, a.topk, seed, oracle);

  if (!a.csv.empty() || !a.geojson.empty()) {
    // Export the surface of the first random point of the run.
    const auto grid = make_grid(bbox, a.grid_dim);
    Rng rng(point_seed(seed, 0));
    const auto point = random_point(bbox, rng);
    const auto surface = score_point(point, grid, models);
    if (!a.csv.empty()) io::write_file_atomic(a.csv, surface_csv(grid, surface.region_likelihoods));
    if (!a.geojson.empty()) {
      const MarkedPoint marks[] = {{"random_point", "R_P", point}};
      io::write_file_atomic(a.geojson, surface_geojson(grid, surface.region_likelihoods, marks));
    }
  }

  Summary s;
  s.add("points", report.points).add("grid_dim", a.grid_dim).add("models", models.size());
  for (std::size_t i = 0; i < report.ks.size(); ++i)
    s.add("top" + std::to_string(report.ks[i]), report.accuracy[i]);
  s.add("qualitative", report.qualitative).add("underflow_vertices", report.underflow_vertices);
  s.print(out);
  return kOk;
}

int do_fuse(const FuseArgs& a, std::uint64_t seed, std::ostream& out) {
  const auto rule = fusion_rule_from_string(a.fusion);
  if (a.fractions.empty()) throw InvalidArgument("--fraction needs at least one value");
  for (double f : a.fractions)
    if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("--fraction values must be in (0, 1]");
  const auto scenario = load_scenario(a.scenario);
  const auto models = load_models(a.models);

  std::string lines;
  Summary s;
  s.add("observations", scenario.observations.size());
  Estimate last;
  for (double f : a.fractions) {
    last = fuse(scenario, models, f, seed, rule);
    lines += format_estimate_line(f, last);
    s.add("error_km@" + io::format_shortest(f), last.error_km);
  }
  if (!a.out.empty()) io::write_file_atomic(a.out, lines);
  if (!a.geojson.empty()) {
    const auto grid = make_grid(scenario.bbox, scenario.dim);
    std::vector<MarkedPoint> marks;
    for (const auto& o : scenario.observations)
      marks.push_back({"landmark", o.landmark.name, o.landmark.point()});
    marks.push_back({"unknown", scenario.unknown.name, scenario.unknown.point()});
    marks.push_back({"center", "estimate", last.center});
    io::write_file_atomic(a.geojson, surface_geojson(grid, last.region_likelihoods, marks));
  }
  s.add("center_lat", last.center.lat).add("center_lon", last.center.lon);
  s.print(out);
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial relation extraction, modeling and location estimation", "geotri"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;

  GeocodeArgs geo;
  auto* geocode_cmd = app.add_subcommand("geocode", "Resolve a place name against a gazetteer");
  geocode_cmd->add_option("--gazetteer", geo.gazetteer, "Gazetteer TSV")->required();
  geocode_cmd->add_option("--name", geo.name, "Place name to resolve")->required();
  geocode_cmd->add_option("--max-edit", geo.max_edit, "Maximum edit distance")->capture_default_str();

  ExtractArgs ex;
  auto* extract_cmd = app.add_subcommand("extract", "Extract relation triplets from a corpus");
  extract_cmd->add_option("--corpus", ex.corpus, "Corpus text, blank-line separated texts")->required();
  extract_cmd->add_option("--gazetteer", ex.gazetteer, "Gazetteer TSV")->required();
  extract_cmd->add_option("--patterns", ex.patterns, "Pattern rules TSV")->required();
  extract_cmd->add_option("--out", ex.out, "Output triplet TSV")->required();
  extract_cmd->add_option("--max-edit", ex.opts.max_edit, "Maximum edit distance")->capture_default_str();
  extract_cmd->add_option("--max-span", ex.opts.max_span, "Maximum tokens per entity")->capture_default_str();
  extract_cmd->add_option("--max-gap", ex.opts.max_gap, "Maximum tokens between entities")->capture_default_str();

  FeaturesArgs fe;
  auto* features_cmd = app.add_subcommand("features", "Turn triplets into per-relation feature sets");
  features_cmd->add_option("--triplets", fe.triplets, "Triplet TSV")->required();
  features_cmd->add_option("--out-dir", fe.out_dir, "Directory for <relation>.tsv files")->required();
  features_cmd->add_option("--origin", fe.origin, "Projection origin lat,lon")->delimiter(',');

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Fit a relation mixture with greedy EM");
  train_cmd->add_option("--features", tr.features, "Feature TSV")->required();
  train_cmd->add_option("--relation", tr.relation, "Relation label (default: file stem)");
  train_cmd->add_option("--out", tr.out, "Output model file")->required();
  train_cmd->add_option("--max-components", tr.cfg.max_components)->capture_default_str();
  train_cmd->add_option("--candidates", tr.cfg.candidates_per_component,
                        "Candidates per component")->capture_default_str();
  train_cmd->add_option("--em-tol", tr.cfg.em_tol)->capture_default_str();
  train_cmd->add_option("--em-max-iter", tr.cfg.em_max_iter)->capture_default_str();
  train_cmd->add_option("--min-gain", tr.cfg.min_gain_per_point,
                        "Per-point log-likelihood gain required to keep an insertion")
      ->capture_default_str();

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Random point Top-K prediction accuracy");
  predict_cmd->add_option("--models", pr.models, "Model files")->required()->delimiter(',');
  predict_cmd->add_option("--bbox", pr.bbox, "min_lat,min_lon,max_lat,max_lon")->required();
  predict_cmd->add_option("--grid-dim", pr.grid_dim)->capture_default_str();
  predict_cmd->add_option("--points", pr.points)->capture_default_str();
  predict_cmd->add_option("--topk", pr.topk)->delimiter(',')->capture_default_str();
  predict_cmd->add_option("--oracle", pr.oracle, "Relation oracle thresholds");
  predict_cmd->add_option("--csv", pr.csv, "Surface CSV of the first point");
  predict_cmd->add_option("--geojson", pr.geojson, "Surface GeoJSON of the first point");

  FuseArgs fu;
  auto* fuse_cmd = app.add_subcommand("fuse", "Estimate an unknown location from relations");
  fuse_cmd->add_option("--scenario", fu.scenario, "Scenario file")->required();
  fuse_cmd->add_option("--models", fu.models, "Model files")->required()->delimiter(',');
  fuse_cmd->add_option("--fraction", fu.fractions, "Fractions of observations")->delimiter(',');
  fuse_cmd->add_option("--fusion", fu.fusion, "product or sum")->capture_default_str();
  fuse_cmd->add_option("--out", fu.out, "Estimate TSV");
  fuse_cmd->add_option("--geojson", fu.geojson, "Surface GeoJSON of the last fraction");

  for (auto* cmd : {train_cmd, predict_cmd, fuse_cmd})
    cmd->add_option("--seed", seed, "Random seed")->envname("GEOTRI_SEED");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidationError;
  }

  try {
    if (*geocode_cmd) return do_geocode(geo, out);
    if (*extract_cmd) return do_extract(ex, out);
    if (*features_cmd) return do_features(fe, out);
    if (*train_cmd) {
      tr.cfg.seed = seed;
      return do_train(tr, out);
    }
    if (*predict_cmd) return do_predict(pr, seed, out);
    if (*fuse_cmd) return do_fuse(fu, seed, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
  err << app.help();
  return kValidationError;
}

}  // namespace geotri::cli
