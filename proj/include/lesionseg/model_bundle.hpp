#pragma once

// Trained forest + SVR + the feature statistics they were trained against,
// persisted as one checksummed JSON document.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "lesionseg/features.hpp"
#include "lesionseg/forest.hpp"
#include "lesionseg/svr.hpp"

namespace lesionseg {

inline constexpr int kModelFormatVersion = 1;

struct ModelBundle {
  ForestModel forest;
  SvrModel svr;
  FeatureStats stats;

  bool operator==(const ModelBundle&) const = default;
};

/// Mean of the two regressors, clamped to the Jaccard range.
inline double ensemble_score(const ModelBundle& bundle, const FeatureVector& x) {
  const double s = 0.5 * (predict_forest(bundle.forest, x) + predict_svr(bundle.svr, x));
  return std::clamp(s, 0.0, 1.0);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline nlohmann::json forest_to_json(const ForestModel& forest) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : forest.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    trees.push_back(std::move(nodes));
  }
  return {{"seed", forest.seed}, {"trees", std::move(trees)}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  ForestModel f;
  f.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& tj : j.at("trees")) {
    RegressionTree tree;
    for (const auto& nj : tj) {
      if (!nj.is_array() || nj.size() != 5) throw CorruptFile("model: malformed tree node");
      TreeNode n;
      n.feature = nj[0].get<int>();
      n.threshold = nj[1].get<double>();
      n.left = nj[2].get<int>();
      n.right = nj[3].get<int>();
      n.value = nj[4].get<double>();
      tree.nodes.push_back(n);
    }
    const auto count = static_cast<int>(tree.nodes.size());
    if (count == 0) throw CorruptFile("model: empty tree");
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) continue;
      if (n.feature >= static_cast<int>(kFeatureCount) || n.left <= 0 || n.right <= 0 || n.left >= count ||
          n.right >= count)
        throw CorruptFile("model: tree node references out of range");
    }
    f.trees.push_back(std::move(tree));
  }
  if (f.trees.empty()) throw CorruptFile("model: forest has no trees");
  return f;
}

inline nlohmann::json svr_to_json(const SvrModel& svr) {
  nlohmann::json support = nlohmann::json::array();
  for (const auto& s : svr.support) support.push_back(s);
  return {{"C", svr.params.C},
          {"gamma", svr.params.gamma},
          {"epsilon", svr.params.epsilon},
          {"tol", svr.params.tol},
          {"kernel", "rbf"},
          {"bias", svr.bias},
          {"coef", svr.coef},
          {"support", std::move(support)}};
}

inline SvrModel svr_from_json(const nlohmann::json& j) {
  SvrModel m;
  m.params.C = j.at("C").get<double>();
  m.params.gamma = j.at("gamma").get<double>();
  m.params.epsilon = j.at("epsilon").get<double>();
  m.params.tol = j.at("tol").get<double>();
  m.bias = j.at("bias").get<double>();
  m.coef = j.at("coef").get<std::vector<double>>();
  for (const auto& s : j.at("support")) {
    if (!s.is_array() || s.size() != kFeatureCount) throw CorruptFile("model: support point has wrong dimension");
    m.support.push_back(s.get<FeatureVector>());
  }
  if (m.support.size() != m.coef.size()) throw CorruptFile("model: support/coef length mismatch");
  return m;
}

}  // namespace detail

inline nlohmann::json bundle_payload(const ModelBundle& bundle) {
  nlohmann::json order = nlohmann::json::array();
  for (auto name : kFeatureNames) order.push_back(std::string(name));
  return {{"feature_order", std::move(order)},
          {"stats", to_json_value(bundle.stats)},
          {"forest", detail::forest_to_json(bundle.forest)},
          {"svr", detail::svr_to_json(bundle.svr)}};
}

/// Serialized document; identical bundles give identical bytes.
inline std::string serialize_bundle(const ModelBundle& bundle) {
  const nlohmann::json payload = bundle_payload(bundle);
  nlohmann::ordered_json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["checksum"] = "fnv1a64:" + detail::hex64(fnv1a64(payload.dump()));
  doc["payload"] = payload;
  return doc.dump() + "\n";
}

inline ModelBundle deserialize_bundle(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("model: not a valid JSON document (") + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("format_version")) throw CorruptFile("model: missing format_version");
  if (doc.at("format_version") != kModelFormatVersion)
    throw VersionMismatch("model: format_version " + doc.at("format_version").dump() + " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
  if (!doc.contains("payload") || !doc.contains("checksum") || !doc.at("checksum").is_string())
    throw CorruptFile("model: missing payload or checksum");
  const std::string expected = "fnv1a64:" + detail::hex64(fnv1a64(doc.at("payload").dump()));
  if (doc.at("checksum").get<std::string>() != expected) throw CorruptFile("model: checksum mismatch");

  const auto& p = doc.at("payload");
  try {
    std::vector<std::string> order = p.at("feature_order").get<std::vector<std::string>>();
    if (order.size() != kFeatureCount || !std::equal(order.begin(), order.end(), kFeatureNames.begin()))
      throw CorruptFile("model: feature order does not match this build");
    ModelBundle b;
    b.stats = feature_stats_from_json(p.at("stats"));
    b.forest = detail::forest_from_json(p.at("forest"));
    b.svr = detail::svr_from_json(p.at("svr"));
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("model: ") + e.what());
  }
}

inline void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_bundle(bundle);
  if (!out) throw DataError("failed writing " + path.string());
}

inline ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_bundle(ss.str());
}

}  // namespace lesionseg
