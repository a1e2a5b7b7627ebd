#pragma once

// Corpus handling, training-sample generation with the naive score, model
// training and evaluation.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "lesionseg/image_io.hpp"
#include "lesionseg/pipeline.hpp"

namespace lesionseg {

inline double jaccard(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw DimensionMismatch("jaccard: mask dimensions differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Jaccard of a region against a full-size mask holding `truth_count` pixels.
inline double jaccard(const Region& region, const BinaryMask& truth, std::size_t truth_count) {
  if (region.image_width != truth.width() || region.image_height != truth.height())
    throw DimensionMismatch("jaccard: region and mask dimensions differ");
  std::size_t inter = 0;
  region.for_each_pixel([&](int x, int y) { inter += truth(x, y) != 0; });
  const std::size_t uni = region.area + truth_count - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double naive_score(const FeatureVector& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads. f must only write to
/// per-index state, so results are independent of the schedule.
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct CorpusEntry {
  std::string name;  // shared file stem
  std::filesystem::path image;
  std::filesystem::path mask;
};

/// Image/ground-truth pairs, loaded on demand.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<CorpusEntry> entries) : entries_(std::move(entries)) {}

  /// Pairs `<stem>.{jpg,jpeg,png}` in `images` with `<stem><suffix>.png` in
  /// `masks`, sorted by stem. Images without a mask are an error.
  static Corpus from_directories(const std::filesystem::path& images, const std::filesystem::path& masks,
                                 const std::string& mask_suffix = "_segmentation") {
    namespace fs = std::filesystem;
    if (!fs::is_directory(images)) throw DataError("not a directory: " + images.string());
    if (!fs::is_directory(masks)) throw DataError("not a directory: " + masks.string());
    std::map<std::string, fs::path> found;
    for (const auto& e : fs::directory_iterator(images)) {
      if (!e.is_regular_file()) continue;
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext != ".jpg" && ext != ".jpeg" && ext != ".png") continue;
      const std::string stem = e.path().stem().string();
      // A shared directory may hold masks next to the images.
      if (!mask_suffix.empty() && stem.size() > mask_suffix.size() &&
          stem.compare(stem.size() - mask_suffix.size(), mask_suffix.size(), mask_suffix) == 0)
        continue;
      if (!found.emplace(stem, e.path()).second) throw DataError("duplicate image stem: " + stem);
    }
    std::vector<CorpusEntry> entries;
    for (const auto& [stem, path] : found) {
      const fs::path mask = masks / (stem + mask_suffix + ".png");
      if (!fs::is_regular_file(mask)) throw DataError("no ground-truth mask for " + path.string() + " (expected " +
                                                      mask.string() + ")");
      entries.push_back({stem, path, mask});
    }
    if (entries.empty()) throw EmptyCorpus("no images found in " + images.string());
    return Corpus(std::move(entries));
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const CorpusEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<CorpusEntry>& entries() const noexcept { return entries_; }

  std::pair<RgbImage, BinaryMask> load(std::size_t i) const {
    const CorpusEntry& e = entries_[i];
    RgbImage img = read_image(e.image);
    BinaryMask mask = read_mask(e.mask);
    if (!img.planes[0].same_shape(mask))
      throw DimensionMismatch(e.name + ": image is " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()) + " but mask is " + std::to_string(mask.width()) + "x" +
                              std::to_string(mask.height()));
    return {std::move(img), std::move(mask)};
  }

 private:
  std::vector<CorpusEntry> entries_;
};

/// Diagnostics collected while working through a corpus.
using Log = std::vector<std::string>;

/// Statistics from the ground truth of every loadable corpus entry.
inline FeatureStats corpus_feature_stats(const Corpus& corpus, int jobs = 1, Log* log = nullptr) {
  if (corpus.empty()) throw EmptyCorpus("corpus is empty");
  std::vector<std::optional<LesionSummary>> per(corpus.size());
  std::vector<std::string> notes(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    try {
      auto [img, truth] = corpus.load(i);
      const NormalizedImage norm = preprocess(img);
      LesionSummary l;
      if (summarize_lesion(norm.image, normalize_mask(truth), l)) per[i] = l;
      else notes[i] = corpus[i].name + ": empty ground-truth mask skipped";
    } catch (const DataError& e) {
      notes[i] = corpus[i].name + ": skipped (" + e.what() + ")";
    }
  });
  std::vector<LesionSummary> lesions;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (per[i]) lesions.push_back(*per[i]);
    if (log && !notes[i].empty()) log->push_back(notes[i]);
  }
  if (lesions.empty()) throw EmptyCorpus("corpus has no usable ground-truth lesions");
  return build_feature_stats(std::span<const LesionSummary>(lesions));
}

/// Samples for one preprocessed image: the k loop driven by the naive score,
/// with every scored region recorded against the normalized ground truth.
/// `clusterer(k, seed)` returns the candidate regions for k.
template <typename Clusterer>
std::vector<TrainingSample> generate_samples_for_image(const NormalizedImage& norm, const BinaryMask& truth,
                                                       const FeatureStats& stats, const SegmentationConfig& cfg,
                                                       Clusterer&& clusterer) {
  const std::size_t truth_count = count(truth);
  const FeatureExtractor extract(norm.image, stats);
  std::vector<TrainingSample> samples;
  FeatureVector last{};
  run_k_loop(
      cfg, std::forward<Clusterer>(clusterer),
      [&](const CandidateRegion& c) {
        last = extract(c.region);
        return naive_score(last);
      },
      [&](int, const CandidateRegion& c, double) {
        samples.push_back({last, jaccard(c.region, truth, truth_count)});
      });
  return samples;
}

inline std::vector<TrainingSample> generate_samples_for_image(const RgbImage& img, const BinaryMask& truth,
                                                              const FeatureStats& stats,
                                                              const SegmentationConfig& cfg) {
  if (!img.planes[0].same_shape(truth)) throw DimensionMismatch("generate_samples: image/mask size differ");
  const NormalizedImage norm = preprocess(img);
  return generate_samples_for_image(norm, normalize_mask(truth), stats, cfg, [&](int k, std::uint64_t seed) {
    return cluster_regions(norm, k, seed, cfg.min_area);
  });
}

/// Samples from every image, concatenated in corpus order. Images that fail
/// to load or process are logged and skipped.
inline std::vector<TrainingSample> generate_samples(const Corpus& corpus, const FeatureStats& stats,
                                                    const SegmentationConfig& cfg, int jobs = 1, Log* log = nullptr) {
  if (corpus.empty()) throw EmptyCorpus("corpus is empty");
  cfg.validate();
  std::vector<std::vector<TrainingSample>> per(corpus.size());
  std::vector<std::string> notes(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    try {
      auto [img, truth] = corpus.load(i);
      per[i] = generate_samples_for_image(img, truth, stats, cfg);
    } catch (const Error& e) {
      notes[i] = corpus[i].name + ": skipped (" + e.what() + ")";
    }
  });
  std::vector<TrainingSample> samples;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    samples.insert(samples.end(), per[i].begin(), per[i].end());
    if (log && !notes[i].empty()) log->push_back(notes[i]);
  }
  return samples;
}

inline ModelBundle train_bundle(std::span<const TrainingSample> samples, const FeatureStats& stats,
                                std::uint64_t seed, const SvrParams& svr = {}) {
  if (samples.empty()) throw NoSamples("training produced no samples");
  ModelBundle b;
  b.stats = stats;
  b.forest = train_forest(samples, seed);
  b.svr = train_svr(samples, svr);
  return b;
}

/// Statistics, samples, then both regressors. Clustering uses cfg.seed and
/// the forest uses `seed`.
inline ModelBundle train(const Corpus& corpus, const SegmentationConfig& cfg, std::uint64_t seed, int jobs = 1,
                         Log* log = nullptr) {
  const FeatureStats stats = corpus_feature_stats(corpus, jobs, log);
  const auto samples = generate_samples(corpus, stats, cfg, jobs, log);
  return train_bundle(samples, stats, seed);
}

struct EvaluationEntry {
  std::string name;
  double jaccard = 0.0;
  std::string error;  // empty on success
};

struct EvaluationReport {
  std::vector<EvaluationEntry> entries;
  double mean = 0.0;
  double median = 0.0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["mean_jaccard"] = mean;
    j["median_jaccard"] = median;
    j["images"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
      nlohmann::ordered_json row;
      row["name"] = e.name;
      row["jaccard"] = e.jaccard;
      if (!e.error.empty()) row["error"] = e.error;
      j["images"].push_back(std::move(row));
    }
    return j;
  }

  std::string to_csv() const {
    auto quote = [](const std::string& s) {
      std::string out = "\"";
      for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
      return out + "\"";
    };
    std::ostringstream os;
    os.precision(17);
    os << "name,jaccard,error\n";
    for (const auto& e : entries) os << quote(e.name) << ',' << e.jaccard << ',' << quote(e.error) << '\n';
    return os.str();
  }

  /// CSV when the extension is .csv, JSON otherwise.
  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    out << (ext == ".csv" ? to_csv() : to_json().dump(2) + "\n");
  }
};

inline void summarize(EvaluationReport& report) {
  std::vector<double> v;
  for (const auto& e : report.entries) v.push_back(e.jaccard);
  if (v.empty()) return;
  double sum = 0.0;
  for (double x : v) sum += x;
  report.mean = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  report.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Scores `segmenter(image) -> mask` against ground truth at original
/// resolution. Failures count as Jaccard 0 with the error recorded.
template <typename Segmenter>
EvaluationReport evaluate_with(const Corpus& corpus, Segmenter&& segmenter, int jobs = 1) {
  EvaluationReport report;
  report.entries.resize(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    EvaluationEntry& e = report.entries[i];
    e.name = corpus[i].name;
    try {
      auto [img, truth] = corpus.load(i);
      e.jaccard = jaccard(segmenter(img), truth);
    } catch (const std::exception& ex) {
      e.jaccard = 0.0;
      e.error = ex.what();
    }
  });
  summarize(report);
  return report;
}

inline EvaluationReport evaluate(const Corpus& corpus, const ModelBundle& bundle, const SegmentationConfig& cfg,
                                 int jobs = 1) {
  return evaluate_with(corpus, [&](const RgbImage& img) { return segment(img, bundle, cfg).mask; }, jobs);
}

}  // namespace lesionseg
