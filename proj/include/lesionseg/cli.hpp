#pragma once

// Command-line front end: preprocess, cluster, stats, train, segment, eval.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lesionseg/training.hpp"

namespace lesionseg::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Invalid flag or config-file values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class LogLevel { quiet, info, debug };

struct RunConfig {
  SegmentationConfig segmentation;
  std::string mask_suffix = "_segmentation";
  LogLevel log_level = LogLevel::info;
  int jobs = 1;
};

namespace detail {

template <typename T>
T json_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

inline LogLevel parse_log_level(const std::string& s) {
  if (s == "quiet") return LogLevel::quiet;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  throw ConfigError("unknown log level '" + s + "' (expected quiet, info or debug)");
}

inline void apply_config_file(RunConfig& rc, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config " + path.string() + ": expected a JSON object");
  static const std::vector<std::string> known = {"seed",     "k_start",     "k_max",     "improvement_tol",
                                                 "min_area", "mask_suffix", "log_level", "jobs"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("config " + path.string() + ": unknown key '" + key + "'");
  auto& s = rc.segmentation;
  if (j.contains("seed")) s.seed = json_field<std::uint64_t>(j, "seed");
  if (j.contains("k_start")) s.k_start = json_field<int>(j, "k_start");
  if (j.contains("k_max")) s.k_max = json_field<int>(j, "k_max");
  if (j.contains("improvement_tol")) s.improvement_tol = json_field<double>(j, "improvement_tol");
  if (j.contains("min_area")) s.min_area = json_field<std::size_t>(j, "min_area");
  if (j.contains("mask_suffix")) rc.mask_suffix = json_field<std::string>(j, "mask_suffix");
  if (j.contains("log_level")) rc.log_level = parse_log_level(json_field<std::string>(j, "log_level"));
  if (j.contains("jobs")) rc.jobs = json_field<int>(j, "jobs");
}

/// Flag values as parsed; only flags actually given override the config.
struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  int k_start = 0, k_max = 0, jobs = 0;
  double improvement_tol = 0.0;
  std::size_t min_area = 0;
  std::string mask_suffix, log_level;

  CLI::Option* o_seed = nullptr;
  CLI::Option* o_k_start = nullptr;
  CLI::Option* o_k_max = nullptr;
  CLI::Option* o_tol = nullptr;
  CLI::Option* o_min_area = nullptr;
  CLI::Option* o_suffix = nullptr;
  CLI::Option* o_log = nullptr;
  CLI::Option* o_jobs = nullptr;
  CLI::Option* o_config = nullptr;

  void add_common(CLI::App& app) {
    o_config = app.add_option("--config", config, "JSON config file (flags override it)");
    o_seed = app.add_option("--seed", seed, "random seed");
    o_log = app.add_option("--log-level", log_level, "quiet, info or debug");
  }
  void add_loop(CLI::App& app) {
    o_k_start = app.add_option("--k-start", k_start, "first cluster count");
    o_k_max = app.add_option("--k-max", k_max, "largest cluster count tried");
    o_tol = app.add_option("--improvement-tol", improvement_tol, "minimum score gain to keep increasing k");
    o_min_area = app.add_option("--min-area", min_area, "smallest region (pixels, normalized frame)");
  }
  void add_corpus(CLI::App& app) {
    o_suffix = app.add_option("--mask-suffix", mask_suffix, "mask file name suffix");
    o_jobs = app.add_option("--jobs", jobs, "worker threads");
  }

  RunConfig resolve() const {
    RunConfig rc;
    if (o_config && o_config->count()) apply_config_file(rc, config);
    auto given = [](CLI::Option* o) { return o && o->count() > 0; };
    if (given(o_seed)) rc.segmentation.seed = seed;
    if (given(o_k_start)) rc.segmentation.k_start = k_start;
    if (given(o_k_max)) rc.segmentation.k_max = k_max;
    if (given(o_tol)) rc.segmentation.improvement_tol = improvement_tol;
    if (given(o_min_area)) rc.segmentation.min_area = min_area;
    if (given(o_suffix)) rc.mask_suffix = mask_suffix;
    if (given(o_log)) rc.log_level = parse_log_level(log_level);
    if (given(o_jobs)) rc.jobs = jobs;
    try {
      rc.segmentation.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (rc.jobs < 1) throw ConfigError("jobs must be >= 1");
    return rc;
  }
};

class Logger {
 public:
  Logger(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
  void info(const std::string& msg) const {
    if (level_ != LogLevel::quiet) err_ << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ == LogLevel::debug) err_ << msg << '\n';
  }
  void all(const std::vector<std::string>& msgs) const {
    for (const auto& m : msgs) info("warning: " + m);
  }

 private:
  std::ostream& err_;
  LogLevel level_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Sidecar written next to a preprocessed image: same path, `.json` extension.
inline std::filesystem::path sidecar_path(const std::filesystem::path& image_out) {
  std::filesystem::path p = image_out;
  return p.replace_extension(".json");
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  using detail::Flags;

  CLI::App app{"Dermoscopic lesion segmentation: k-means regions scored by a forest + SVR ensemble", "lesionseg"};
  app.set_version_flag("--version", std::string("lesionseg ") + kToolVersion + " (model format " +
                                        std::to_string(kModelFormatVersion) + ", feature stats format " +
                                        std::to_string(kFeatureStatsFormatVersion) + ")");
  app.require_subcommand(1);

  // preprocess
  Flags f_pre;
  std::string pre_in, pre_out;
  auto* pre = app.add_subcommand("preprocess", "Normalize one image; writes the image and a pad_info sidecar");
  pre->add_option("input", pre_in, "input image")->required();
  pre->add_option("output", pre_out, "output PNG (sidecar goes to the same path with .json)")->required();
  f_pre.add_common(*pre);

  // cluster
  Flags f_cl;
  std::string cl_in, cl_dir = ".";
  int cl_k = 3;
  auto* cl = app.add_subcommand("cluster", "Write the cleaned per-cluster masks for one k");
  cl->add_option("input", cl_in, "input image")->required();
  cl->add_option("--k", cl_k, "cluster count")->required();
  cl->add_option("--out-dir", cl_dir, "directory for cluster_<i>.png");
  f_cl.add_common(*cl);

  // stats
  Flags f_st;
  std::string st_images, st_masks, st_out;
  auto* st = app.add_subcommand("stats", "Compute corpus feature statistics");
  st->add_option("--images", st_images, "image directory")->required();
  st->add_option("--masks", st_masks, "ground-truth mask directory")->required();
  st->add_option("--out", st_out, "output JSON")->required();
  f_st.add_common(*st);
  f_st.add_corpus(*st);

  // train
  Flags f_tr;
  std::string tr_images, tr_masks, tr_out;
  auto* tr = app.add_subcommand("train", "Train a model bundle from images and ground-truth masks");
  tr->add_option("--images", tr_images, "image directory")->required();
  tr->add_option("--masks", tr_masks, "ground-truth mask directory")->required();
  tr->add_option("--out", tr_out, "output bundle JSON")->required();
  f_tr.add_common(*tr);
  f_tr.add_loop(*tr);
  f_tr.add_corpus(*tr);

  // segment
  Flags f_sg;
  std::string sg_in, sg_model, sg_out, sg_diag;
  auto* sg = app.add_subcommand("segment", "Segment one image");
  sg->add_option("image", sg_in, "input image")->required();
  sg->add_option("--model", sg_model, "model bundle")->required();
  sg->add_option("--out", sg_out, "output mask PNG")->required();
  sg->add_option("--diagnostics", sg_diag, "optional JSON with per-k scores");
  f_sg.add_common(*sg);
  f_sg.add_loop(*sg);

  // eval
  Flags f_ev;
  std::string ev_images, ev_masks, ev_model, ev_report;
  auto* ev = app.add_subcommand("eval", "Segment a corpus and report Jaccard indices");
  ev->add_option("--images", ev_images, "image directory")->required();
  ev->add_option("--masks", ev_masks, "ground-truth mask directory")->required();
  ev->add_option("--model", ev_model, "model bundle")->required();
  ev->add_option("--report", ev_report, "report path (.csv for CSV, JSON otherwise)")->required();
  f_ev.add_common(*ev);
  f_ev.add_loop(*ev);
  f_ev.add_corpus(*ev);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* target = &app;
    for (const CLI::App* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  Flags* flags = active == pre ? &f_pre
                 : active == cl ? &f_cl
                 : active == st ? &f_st
                 : active == tr ? &f_tr
                 : active == sg ? &f_sg
                                : &f_ev;
  try {
    const RunConfig rc = flags->resolve();
    const detail::Logger log(err, rc.log_level);
    const auto& cfg = rc.segmentation;

    if (active == pre) {
      const NormalizedImage norm = preprocess(read_image(pre_in));
      write_image(pre_out, norm.image);
      nlohmann::ordered_json side;
      side["source"] = pre_in;
      side["pad_info"] = {{"original_width", norm.pad_info.original_width},
                          {"original_height", norm.pad_info.original_height},
                          {"pad_left", norm.pad_info.pad_left},
                          {"pad_top", norm.pad_info.pad_top},
                          {"side", norm.pad_info.side}};
      side["normalized_side"] = kNormalizedSide;
      side["warnings"] = norm.warnings;
      detail::write_json(detail::sidecar_path(pre_out), side);
      log.all(norm.warnings);
    } else if (active == cl) {
      const NormalizedImage norm = preprocess(read_image(cl_in));
      const ClusterMasks masks = cluster_masks(norm.image, cl_k, k_seed(cfg.seed, cl_k));
      fs::create_directories(cl_dir);
      for (std::size_t c = 0; c < masks.masks.size(); ++c)
        write_mask(fs::path(cl_dir) / ("cluster_" + std::to_string(c) + ".png"), masks.masks[c]);
      log.debug("k-means objective " + std::to_string(masks.kmeans.objective) + " after " +
                std::to_string(masks.kmeans.iterations) + " iterations");
    } else if (active == st) {
      const Corpus corpus = Corpus::from_directories(st_images, st_masks, rc.mask_suffix);
      Log notes;
      const FeatureStats stats = corpus_feature_stats(corpus, rc.jobs, &notes);
      log.all(notes);
      save_feature_stats(st_out, stats);
    } else if (active == tr) {
      const Corpus corpus = Corpus::from_directories(tr_images, tr_masks, rc.mask_suffix);
      log.info("training on " + std::to_string(corpus.size()) + " images");
      Log notes;
      const FeatureStats stats = corpus_feature_stats(corpus, rc.jobs, &notes);
      const auto samples = generate_samples(corpus, stats, cfg, rc.jobs, &notes);
      log.all(notes);
      log.info(std::to_string(samples.size()) + " training samples");
      save_bundle(train_bundle(samples, stats, cfg.seed), tr_out);
    } else if (active == sg) {
      const ModelBundle bundle = load_bundle(sg_model);
      const SegmentationOutcome res = segment(read_image(sg_in), bundle, cfg);
      write_mask(sg_out, res.mask);
      log.all(res.warnings);
      log.debug("best k " + std::to_string(res.best_k) + ", score " + std::to_string(res.best_score));
      if (!sg_diag.empty()) {
        nlohmann::ordered_json d;
        d["best_k"] = res.best_k;
        d["best_score"] = res.best_score;
        d["per_k_best"] = nlohmann::ordered_json::array();
        for (const auto& [k, s] : res.per_k_best) d["per_k_best"].push_back({{"k", k}, {"score", s}});
        d["warnings"] = res.warnings;
        detail::write_json(sg_diag, d);
      }
    } else {
      const Corpus corpus = Corpus::from_directories(ev_images, ev_masks, rc.mask_suffix);
      const ModelBundle bundle = load_bundle(ev_model);
      const EvaluationReport report = evaluate(corpus, bundle, cfg, rc.jobs);
      report.write(ev_report);
      for (const auto& e : report.entries)
        if (!e.error.empty()) log.info("warning: " + e.name + ": " + e.error);
      log.info("mean Jaccard " + std::to_string(report.mean) + ", median " + std::to_string(report.median));
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kUsage;
  } catch (const InvalidK& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace lesionseg::cli
