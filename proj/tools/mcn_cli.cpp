// mcn: batch driver for tiling, threshold planning, feature extraction,
// leave-one-out classification and measure-map rendering.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcn/classify.hpp"
#include "mcn/dataset.hpp"
#include "mcn/descriptor.hpp"
#include "mcn/image_io.hpp"
#include "mcn/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using mcn::InvalidParameter;
using mcn::IoError;

/// "1,2,3", "1-5" and mixtures such as "1-3,6".
std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    int a = 0, b = 0;
    char tail = 0;
    if (std::sscanf(tok.c_str(), "%d-%d%c", &a, &b, &tail) == 2) {
      if (b < a) throw InvalidParameter("bad range '" + tok + "'");
      for (int v = a; v <= b; ++v) out.push_back(v);
    } else if (std::sscanf(tok.c_str(), "%d%c", &a, &tail) == 1) {
      out.push_back(a);
    } else {
      throw InvalidParameter("expected an integer or range, got '" + tok + "'");
    }
  }
  return out;
}

std::vector<mcn::NetworkVariant> parse_variants(const std::string& text) {
  std::vector<mcn::NetworkVariant> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(mcn::parse_variant(tok));
  return out;
}

void check_output(const fs::path& path, bool force) {
  if (!force && fs::exists(path))
    throw IoError("output " + path.string() + " already exists (pass --force to overwrite)");
}

unsigned env_jobs() {
  const char* env = std::getenv("MCN_NUM_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw InvalidParameter("MCN_NUM_THREADS must be a positive integer");
  return static_cast<unsigned>(v);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Extraction and classification settings shared by several subcommands.
/// Values come from defaults, then the --config JSON file, then flags.
struct Settings {
  std::string radii = "1-5";
  int m = 10;
  std::string variants = "N,W,B";
  std::string rule = "quantile";
  double quantile = 0.9;
  double lambda = mcn::kDefaultShrinkage;
  std::string sigma_mode = "normalized";
  int histogram_radius = 1;
  unsigned jobs = 1;
  std::string config_path;
  bool force = false;

  struct Options {
    CLI::Option* radii = nullptr;
    CLI::Option* m = nullptr;
    CLI::Option* variants = nullptr;
    CLI::Option* rule = nullptr;
    CLI::Option* quantile = nullptr;
    CLI::Option* lambda = nullptr;
    CLI::Option* sigma_mode = nullptr;
    CLI::Option* histogram_radius = nullptr;
    CLI::Option* jobs = nullptr;
  } opt;

  bool given(CLI::Option* o) const { return o && o->count() > 0; }

  /// Fills every field not set on the command line from the config file,
  /// then applies the MCN_NUM_THREADS fallback for jobs.
  void resolve() {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot open config file " + config_path);
      json cfg;
      try {
        cfg = json::parse(in);
      } catch (const json::exception& e) {
        throw InvalidParameter("config file " + config_path + ": " + e.what());
      }
      if (!cfg.is_object()) throw InvalidParameter("config file must hold a JSON object");
      static const std::set<std::string> known = {"radii",  "thresholds_m", "variants",
                                                  "rule",   "quantile",     "lambda",
                                                  "sigma_mode", "histogram_radius", "jobs"};
      for (const auto& [key, value] : cfg.items())
        if (!known.count(key)) throw InvalidParameter("unknown config key '" + key + "'");
      try {
        auto take = [&](const char* key, CLI::Option* o, auto& field) {
          if (cfg.contains(key) && !given(o)) field = cfg[key].get<std::decay_t<decltype(field)>>();
        };
        if (cfg.contains("radii") && !given(opt.radii)) {
          const auto& r = cfg["radii"];
          if (r.is_array()) {
            radii.clear();
            for (const auto& v : r) radii += (radii.empty() ? "" : ",") + std::to_string(v.get<int>());
          } else {
            radii = r.get<std::string>();
          }
        }
        if (cfg.contains("variants") && !given(opt.variants)) {
          const auto& v = cfg["variants"];
          if (v.is_array()) {
            variants.clear();
            for (const auto& s : v) variants += (variants.empty() ? "" : ",") + s.get<std::string>();
          } else {
            variants = v.get<std::string>();
          }
        }
        take("thresholds_m", opt.m, m);
        take("rule", opt.rule, rule);
        take("quantile", opt.quantile, quantile);
        take("lambda", opt.lambda, lambda);
        take("sigma_mode", opt.sigma_mode, sigma_mode);
        take("histogram_radius", opt.histogram_radius, histogram_radius);
        if (!given(opt.jobs) && cfg.contains("jobs") && env_jobs() == 0) jobs = cfg["jobs"].get<unsigned>();
      } catch (const json::exception& e) {
        throw InvalidParameter("config file " + config_path + ": " + e.what());
      }
    }
    if (!given(opt.jobs))
      if (const unsigned e = env_jobs()) jobs = e;
    if (jobs < 1) throw InvalidParameter("--jobs must be >= 1");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("--lambda must lie in [0, 1]");
  }

  mcn::ExtractionConfig extraction() const {
    mcn::ExtractionConfig cfg;
    cfg.radii = parse_int_list(radii);
    cfg.m = m;
    cfg.variants = parse_variants(variants);
    cfg.sigma_mode = mcn::parse_sigma_mode(sigma_mode);
    cfg.histogram_radius = histogram_radius;
    cfg.rule = mcn::parse_upper_rule(rule);
    cfg.quantile = quantile;
    cfg.validate();
    return cfg;
  }
};

void add_extraction_flags(CLI::App* cmd, Settings& s) {
  s.opt.radii = cmd->add_option("--radii", s.radii, "radius set, e.g. 1-5 or 1,2,4")->capture_default_str();
  s.opt.m = cmd->add_option("-m,--thresholds-m", s.m, "number of thresholds")->capture_default_str();
  s.opt.variants = cmd->add_option("--variants", s.variants, "network variants, subset of N,W,B")
                       ->capture_default_str();
  s.opt.sigma_mode = cmd->add_option("--sigma-mode", s.sigma_mode, "normalized or verbatim")
                         ->check(CLI::IsMember({"normalized", "verbatim"}))
                         ->capture_default_str();
}

void add_plan_flags(CLI::App* cmd, Settings& s, const std::string& radius_names = "--histogram-radius") {
  s.opt.rule = cmd->add_option("--rule", s.rule, "upper-limit rule")
                   ->check(CLI::IsMember({"quantile", "mean-degree"}))
                   ->capture_default_str();
  s.opt.quantile = cmd->add_option("--quantile", s.quantile, "mass for the quantile rule")->capture_default_str();
  s.opt.histogram_radius =
      cmd->add_option(radius_names, s.histogram_radius, "radius of the weight histogram")
          ->capture_default_str();
}

void add_common_flags(CLI::App* cmd, Settings& s) {
  s.opt.jobs = cmd->add_option("-j,--jobs", s.jobs, "worker threads (fallback: MCN_NUM_THREADS)");
  cmd->add_option("--config", s.config_path, "JSON config file; flags take precedence");
  cmd->add_flag("--force", s.force, "overwrite existing outputs");
}

json plan_to_json(const mcn::ThresholdPlan& plan) {
  return {{"t1", plan.t1}, {"tm", plan.tm}, {"m", plan.m()}, {"thresholds", plan.thresholds},
          {"warnings", plan.warnings}};
}

mcn::ThresholdPlan plan_from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open threshold plan " + path.string());
  try {
    const auto j = json::parse(in);
    mcn::ThresholdPlan plan;
    plan.t1 = j.at("t1").get<double>();
    plan.tm = j.at("tm").get<double>();
    plan.thresholds = j.at("thresholds").get<std::vector<double>>();
    if (plan.thresholds.size() < 2) throw InvalidParameter("threshold plan needs at least 2 thresholds");
    for (std::size_t i = 1; i < plan.thresholds.size(); ++i)
      if (plan.thresholds[i] < plan.thresholds[i - 1])
        throw InvalidParameter("threshold plan is not ascending");
    return plan;
  } catch (const json::exception& e) {
    throw InvalidParameter("malformed threshold plan " + path.string() + ": " + e.what());
  }
}

json extraction_to_json(const mcn::ExtractionConfig& cfg) {
  std::vector<std::string> variants;
  for (auto v : cfg.variants) variants.emplace_back(mcn::to_string(v));
  return {{"radii", cfg.radii},
          {"thresholds_m", cfg.m},
          {"variants", variants},
          {"sigma_mode", cfg.sigma_mode == mcn::SigmaMode::Normalized ? "normalized" : "verbatim"}};
}

json rule_to_json(const Settings& s) {
  return {{"rule", s.rule}, {"quantile", s.quantile}, {"histogram_radius", s.histogram_radius}};
}

// ---------------------------------------------------------------- split

int cmd_split(const fs::path& root, const fs::path& out, const std::string& protocol_name,
              const std::string& tile, bool force) {
  auto protocol = mcn::tile_protocol(protocol_name);
  if (!tile.empty()) {
    int w = 0, h = 0;
    char tail = 0;
    if (std::sscanf(tile.c_str(), "%dx%d%c", &w, &h, &tail) != 2 || w < 1 || h < 1)
      throw InvalidParameter("--tile expects WxH, got '" + tile + "'");
    protocol.tile = std::pair{w, h};
  }
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: " + root.string());
  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!force) throw IoError("output directory " + out.string() + " is not empty (pass --force to overwrite)");
    fs::remove_all(out);
  }
  std::vector<std::string> warnings;
  const auto manifest = mcn::tile_dataset(root, protocol, out, &warnings);
  mcn::write_manifest(out / "manifest.csv", manifest);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << manifest.entries.size() << " images in " << manifest.class_count() << " classes -> "
            << (out / "manifest.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- index

int cmd_index(const fs::path& root, const fs::path& out, bool force) {
  check_output(out, force);
  auto manifest = mcn::directory_manifest(root);
  // Entry paths are stored relative to the manifest's own directory.
  const auto base = fs::absolute(out).parent_path();
  for (auto& e : manifest.entries)
    e.path = fs::relative(fs::absolute(root / e.path), base).generic_string();
  mcn::write_manifest(out, manifest);
  std::cout << manifest.entries.size() << " images in " << manifest.class_count() << " classes -> "
            << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const fs::path& out, int classes, int per_class, int size, std::uint64_t seed,
              const std::string& kind, bool force) {
  if (classes < 1 || per_class < 1 || size < 1) throw InvalidParameter("--classes, --per-class and --size must be >= 1");
  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!force) throw IoError("output directory " + out.string() + " is not empty (pass --force to overwrite)");
    fs::remove_all(out);
  }
  fs::create_directories(out);
  std::mt19937_64 rng(seed);
  mcn::Manifest manifest;
  manifest.dataset = "synthetic";
  for (int c = 0; c < classes; ++c) {
    const auto params = kind == "natural" ? mcn::synth::correlated_params(rng) : mcn::synth::random_params(rng);
    char dir[32];
    std::snprintf(dir, sizeof dir, "class%03d", c);
    fs::create_directories(out / dir);
    for (int i = 0; i < per_class; ++i) {
      const auto img = kind == "noise" ? mcn::synth::uniform_noise(size, size, 3, rng)
                                       : mcn::synth::gradient_texture(size, size, params, rng);
      char name[32];
      std::snprintf(name, sizeof name, "img%03d.png", i);
      const auto rel = (fs::path(dir) / name).generic_string();
      mcn::write_png(out / rel, img);
      manifest.entries.push_back({rel, c, rel, 0});
    }
  }
  mcn::write_manifest(out / "manifest.csv", manifest);
  std::cout << manifest.entries.size() << " synthetic images -> " << (out / "manifest.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- thresholds

int cmd_thresholds(const fs::path& manifest_path, const fs::path& out, const std::string& hist_out,
                   Settings& s) {
  s.resolve();
  const auto rule = mcn::parse_upper_rule(s.rule);
  if (s.m < 2) throw InvalidParameter("--thresholds-m must be >= 2");
  if (!(s.quantile > 0.0 && s.quantile < 1.0)) throw InvalidParameter("--quantile must lie in (0, 1)");
  if (s.histogram_radius < 1) throw InvalidParameter("--histogram-radius must be >= 1");
  check_output(out, s.force);
  if (!hist_out.empty()) check_output(hist_out, s.force);

  const auto manifest = mcn::load_manifest(manifest_path);
  if (manifest.entries.empty()) throw InvalidParameter("manifest " + manifest_path.string() + " is empty");
  std::vector<mcn::EdgeWeightHistogram> parts(manifest.entries.size());
  int max_level = -1;
  std::mutex level_mutex;
  mcn::parallel_for(parts.size(), s.jobs, [&](std::size_t i) {
    const auto img = mcn::load_image(manifest.resolve(manifest.entries[i]));
    {
      std::lock_guard lock(level_mutex);
      if (max_level < 0) max_level = img.max_level();
      if (img.max_level() != max_level) throw InvalidParameter("corpus mixes intensity depths");
    }
    parts[i] = mcn::edge_weight_histogram(img, s.histogram_radius);
  });
  mcn::EdgeWeightHistogram hist;
  hist.source_radius = s.histogram_radius;
  for (const auto& p : parts) hist.merge(p);  // fixed order keeps the result schedule independent

  auto plan = mcn::plan_from_histogram(hist, s.m, rule, s.quantile);
  if (manifest.entries.size() == 1)
    plan.warnings.push_back("threshold plan estimated from a single image; the sample may be unrepresentative");
  auto j = plan_to_json(plan);
  j["config"] = rule_to_json(s);
  j["config"]["thresholds_m"] = s.m;
  j["images"] = manifest.entries.size();
  j["manifest"] = manifest_path.generic_string();
  mcn::write_text_atomically(out, j.dump(2) + "\n");
  if (!hist_out.empty()) {
    std::ostringstream os;
    mcn::write_histogram_csv(os, hist);
    mcn::write_text_atomically(hist_out, os.str());
  }
  for (const auto& w : plan.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "t1=" << format_double(plan.t1) << " tm=" << format_double(plan.tm) << " m=" << plan.m()
            << " -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- extract

int cmd_extract(const fs::path& manifest_path, const fs::path& out, const std::string& plan_path,
                const std::string& descriptor, Settings& s) {
  s.resolve();
  const bool color = descriptor == "color-stats";
  auto cfg = s.extraction();
  std::optional<mcn::ThresholdPlan> plan;
  if (!color && !plan_path.empty()) {
    plan = plan_from_file(plan_path);
    if (plan->m() != static_cast<std::size_t>(cfg.m)) {
      if (s.given(s.opt.m))
        throw InvalidParameter("--thresholds-m " + std::to_string(cfg.m) + " conflicts with the plan's " +
                               std::to_string(plan->m()) + " thresholds");
      cfg.m = static_cast<int>(plan->m());
    }
  }
  check_output(out, s.force);

  const auto manifest = mcn::load_manifest(manifest_path);
  if (manifest.entries.empty()) throw InvalidParameter("manifest " + manifest_path.string() + " is empty");
  const auto corpus = mcn::load_corpus(manifest);

  json config;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows(corpus.size());
  if (color) {
    for (const auto& img : corpus)
      if (img.channels() != 3) throw mcn::Unsupported("color statistics need RGB images");
    static const char* channels[] = {"R", "G", "B"};
    static const char* stats[] = {"mean", "variance", "entropy", "moment3", "moment4"};
    for (auto* c : channels)
      for (auto* st : stats) columns.push_back(std::string(c) + "_" + st);
    mcn::parallel_for(corpus.size(), s.jobs, [&](std::size_t i) {
      const auto v = mcn::color_statistics(corpus[i]);
      rows[i].assign(v.begin(), v.end());
    });
    config = {{"descriptor", "color-stats"}};
  } else {
    const int z = corpus.front().channels();
    for (const auto& img : corpus)
      if (img.channels() != z) throw InvalidParameter("corpus mixes images with different channel counts");
    if (!plan) plan = mcn::corpus_plan(corpus, cfg);
    for (const auto& w : plan->warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& col : mcn::feature_layout(cfg)) columns.push_back(col.name());
    mcn::parallel_for(corpus.size(), s.jobs,
                      [&](std::size_t i) { rows[i] = mcn::extract(corpus[i], cfg, *plan).values; });
    config = extraction_to_json(cfg);
    config["descriptor"] = "mcn";
    config["t1"] = plan->t1;
    config["tm"] = plan->tm;
    config["thresholds"] = plan->thresholds;
    config["plan_source"] = plan_path.empty() ? json(rule_to_json(s)) : json(plan_path);
  }
  config["manifest"] = manifest_path.generic_string();

  std::string text = "# " + config.dump() + "\nimage_id,label";
  for (const auto& c : columns) text += "," + c;
  text += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    text += manifest.entries[i].path + "," + std::to_string(manifest.entries[i].label);
    for (double v : rows[i]) text += "," + format_double(v);
    text += "\n";
  }
  mcn::write_text_atomically(out, text);
  std::cout << rows.size() << " x " << columns.size() << " features -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- classify

struct FeatureTable {
  json config = json::object();
  std::vector<std::string> ids;
  std::vector<int> labels;
  mcn::FeatureRows rows;
};

FeatureTable read_features(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open features file " + path.string());
  FeatureTable t;
  std::string line;
  std::size_t columns = 0, lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      try {
        t.config = json::parse(line.substr(1));
      } catch (const json::exception&) {
        // Free-form comment; no config echo to carry over.
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (!header) {
      if (fields.size() < 3 || fields[0] != "image_id" || fields[1] != "label")
        throw InvalidParameter("features header must start with image_id,label and name at least one column");
      columns = fields.size() - 2;
      header = true;
      continue;
    }
    if (fields.size() != columns + 2)
      throw InvalidParameter("features line " + std::to_string(lineno) + ": expected " +
                             std::to_string(columns + 2) + " fields, got " + std::to_string(fields.size()));
    t.ids.push_back(fields[0]);
    std::vector<double> row(columns);
    try {
      t.labels.push_back(std::stoi(fields[1]));
      for (std::size_t k = 0; k < columns; ++k) {
        std::size_t used = 0;
        row[k] = std::stod(fields[k + 2], &used);
        if (used != fields[k + 2].size()) throw std::invalid_argument("trailing characters");
      }
    } catch (const std::logic_error&) {
      throw InvalidParameter("features line " + std::to_string(lineno) + ": non-numeric value");
    }
    t.rows.push_back(std::move(row));
  }
  if (!header) throw InvalidParameter("features file " + path.string() + " has no header");
  return t;
}

int cmd_classify(const fs::path& features, const fs::path& out, const std::string& text_out, Settings& s) {
  s.resolve();
  check_output(out, s.force);
  if (!text_out.empty()) check_output(text_out, s.force);
  const auto table = read_features(features);
  auto rep = mcn::loo_evaluate(table.rows, table.labels, s.lambda, s.jobs);
  rep.config = table.config;
  rep.config["lambda"] = s.lambda;
  rep.config["features"] = features.generic_string();
  auto j = mcn::report_to_json(rep);
  json preds = json::array();
  for (std::size_t i = 0; i < table.ids.size(); ++i)
    preds.push_back({{"image_id", table.ids[i]}, {"label", table.labels[i]}, {"predicted", rep.predictions[i]}});
  j["predictions"] = preds;
  mcn::write_text_atomically(out, j.dump(2) + "\n");
  std::ostringstream text;
  mcn::write_report_text(text, rep);
  if (!text_out.empty()) mcn::write_text_atomically(text_out, text.str());
  std::cout << text.str();
  return 0;
}

// ---------------------------------------------------------------- render

int cmd_render(const fs::path& image, const fs::path& out, int radius, double threshold,
               const std::string& variant, const std::string& measure, const std::string& field_csv,
               bool force) {
  const auto v = mcn::parse_variant(variant);
  if (measure != "degree" && measure != "clustering")
    throw InvalidParameter("--measure must be degree or clustering");
  if (radius < 1) throw InvalidParameter("--radius must be >= 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidParameter("--threshold must lie in [0, 1]");
  check_output(out, force);
  if (!field_csv.empty()) check_output(field_csv, force);
  const auto img = mcn::load_image(image);
  if (img.channels() != 3) throw mcn::Unsupported("render needs a 3-channel image");
  const std::vector<double> t{threshold};
  const mcn::ThresholdSweep sweep(img, mcn::build_stencil(radius, img.channels()), t);
  const auto field = sweep.field(v, 0);
  const auto map =
      mcn::render_measure_map(field, measure == "degree" ? mcn::Measure::Degree : mcn::Measure::Clustering);
  mcn::save_image(out, map);
  if (!field_csv.empty()) {
    std::ostringstream os;
    mcn::write_field_csv(os, field);
    mcn::write_text_atomically(field_csv, os.str());
  }
  std::cout << variant << " " << measure << " map (r=" << radius << ", t=" << threshold
            << ") -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilayer complex network colour-texture descriptors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mcn 1.0.0");

  // split
  auto* split = app.add_subcommand("split", "tile a dataset directory and write manifest.csv");
  std::string split_root, split_out, protocol = "none", tile;
  bool split_force = false;
  split->add_option("dataset", split_root, "dataset directory (class subdirectories or flat)")->required();
  split->add_option("-o,--out", split_out, "output directory")->required();
  split->add_option("--protocol", protocol, "vistex, usptex, mbt, outex13, curet or none")->capture_default_str();
  split->add_option("--tile", tile, "tile geometry WxH, overrides the protocol");
  split->add_flag("--force", split_force, "replace a non-empty output directory");

  // index
  auto* index = app.add_subcommand("index", "manifest from a directory tree, one class per subdirectory");
  std::string index_root, index_out;
  bool index_force = false;
  index->add_option("dataset", index_root, "dataset directory")->required();
  index->add_option("-o,--out", index_out, "manifest CSV")->required();
  index->add_flag("--force", index_force, "overwrite an existing manifest");

  // synth
  auto* synth = app.add_subcommand("synth", "write a seeded synthetic texture corpus");
  std::string synth_out, synth_kind = "gradient";
  int classes = 4, per_class = 5, size = 64;
  std::uint64_t seed = 1;
  bool synth_force = false;
  synth->add_option("-o,--out", synth_out, "output directory")->required();
  synth->add_option("--classes", classes)->capture_default_str();
  synth->add_option("--per-class", per_class)->capture_default_str();
  synth->add_option("--size", size, "image side in pixels")->capture_default_str();
  synth->add_option("--seed", seed)->capture_default_str();
  synth->add_option("--kind", synth_kind)->check(CLI::IsMember({"gradient", "natural", "noise"}))->capture_default_str();
  synth->add_flag("--force", synth_force, "replace a non-empty output directory");

  // thresholds
  auto* thresholds = app.add_subcommand("thresholds", "estimate the threshold plan from a corpus");
  Settings ts;
  std::string th_manifest, th_out, th_hist;
  thresholds->add_option("manifest", th_manifest, "manifest CSV")->required();
  thresholds->add_option("-o,--out", th_out, "plan JSON")->required();
  thresholds->add_option("--histogram", th_hist, "also write the edge-weight histogram CSV");
  ts.opt.m = thresholds->add_option("-m,--thresholds-m", ts.m, "number of thresholds")->capture_default_str();
  add_plan_flags(thresholds, ts, "-r,--histogram-radius");
  add_common_flags(thresholds, ts);

  // extract
  auto* extract = app.add_subcommand("extract", "compute feature vectors for every manifest entry");
  Settings es;
  std::string ex_manifest, ex_out, ex_plan, descriptor = "mcn";
  extract->add_option("manifest", ex_manifest, "manifest CSV")->required();
  extract->add_option("-o,--out", ex_out, "features CSV")->required();
  extract->add_option("--plan", ex_plan, "threshold plan JSON (default: estimate from the manifest)");
  extract->add_option("--descriptor", descriptor, "mcn or color-stats")
      ->check(CLI::IsMember({"mcn", "color-stats"}))
      ->capture_default_str();
  add_extraction_flags(extract, es);
  add_plan_flags(extract, es);
  add_common_flags(extract, es);

  // classify
  auto* classify = app.add_subcommand("classify", "leave-one-out LDA on a features CSV");
  Settings cs;
  std::string cl_features, cl_out, cl_text;
  classify->add_option("features", cl_features, "features CSV")->required();
  classify->add_option("-o,--out", cl_out, "report JSON")->required();
  classify->add_option("--text", cl_text, "also write the text report here");
  cs.opt.lambda = classify->add_option("--lambda", cs.lambda, "covariance shrinkage in [0, 1]")->capture_default_str();
  add_common_flags(classify, cs);

  // render
  auto* render = app.add_subcommand("render", "render a degree or clustering map as an RGB image");
  std::string rd_image, rd_out, rd_variant = "N", rd_measure = "degree", rd_field;
  int rd_radius = 4;
  double rd_threshold = 0.08;
  bool rd_force = false;
  render->add_option("image", rd_image, "RGB PNG or PPM")->required();
  render->add_option("-o,--out", rd_out, "output PNG (or .ppm)")->required();
  render->add_option("-r,--radius", rd_radius)->capture_default_str();
  render->add_option("-t,--threshold", rd_threshold)->capture_default_str();
  render->add_option("--variant", rd_variant, "N, W or B")->capture_default_str();
  render->add_option("--measure", rd_measure, "degree or clustering")->capture_default_str();
  render->add_option("--field-csv", rd_field, "also write the raw field CSV");
  render->add_flag("--force", rd_force, "overwrite existing outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*split) return cmd_split(split_root, split_out, protocol, tile, split_force);
    if (*index) return cmd_index(index_root, index_out, index_force);
    if (*synth) return cmd_synth(synth_out, classes, per_class, size, seed, synth_kind, synth_force);
    if (*thresholds) return cmd_thresholds(th_manifest, th_out, th_hist, ts);
    if (*extract) return cmd_extract(ex_manifest, ex_out, ex_plan, descriptor, es);
    if (*classify) return cmd_classify(cl_features, cl_out, cl_text, cs);
    if (*render)
      return cmd_render(rd_image, rd_out, rd_radius, rd_threshold, rd_variant, rd_measure, rd_field, rd_force);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
