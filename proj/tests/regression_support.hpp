#pragma once

// Data generators and reference computations shared by the regression tests
// and the acceptance run.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lesionseg/forest.hpp"
#include "lesionseg/svr.hpp"

namespace testsupport {

inline lesionseg::FeatureVector random_features(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lesionseg::FeatureVector f{};
  for (double& v : f) v = u(rng);
  return f;
}

/// target = mean(features) + N(0, sigma)
inline std::vector<lesionseg::TrainingSample> mean_plus_noise(std::mt19937_64& rng, std::size_t n, double sigma) {
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<lesionseg::TrainingSample> out(n);
  for (auto& s : out) {
    s.features = random_features(rng);
    double m = 0.0;
    for (double v : s.features) m += v;
    s.target = m / static_cast<double>(s.features.size()) + noise(rng);
  }
  return out;
}

struct OobResult {
  double mse = 0.0;
  double target_variance = 0.0;
  std::size_t scored = 0;
};

/// Out-of-bag error recomputed from the public bootstrap draws.
inline OobResult out_of_bag(const lesionseg::ForestModel& model, const std::vector<lesionseg::TrainingSample>& samples) {
  const std::size_t n = samples.size();
  std::vector<double> sum(n, 0.0);
  std::vector<int> votes(n, 0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    std::vector<char> in_bag(n, 0);
    for (std::size_t i : lesionseg::bootstrap_indices(n, model.seed, static_cast<int>(t))) in_bag[i] = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_bag[i]) {
        sum[i] += model.trees[t].predict(samples[i].features);
        ++votes[i];
      }
  }
  OobResult r;
  double mean = 0.0;
  for (const auto& s : samples) mean += s.target / static_cast<double>(n);
  for (const auto& s : samples) r.target_variance += (s.target - mean) * (s.target - mean) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (votes[i] == 0) continue;
    const double d = sum[i] / votes[i] - samples[i].target;
    r.mse += d * d;
    ++r.scored;
  }
  r.mse /= static_cast<double>(r.scored);
  return r;
}

/// Dense reference for the SVR dual. Minimizes 1/2 a'Qa + p'a over
/// 0 <= a <= C, y'a = 0 (a = (alpha, alpha*)) with accelerated projected
/// gradient; the projection solves for the multiplier by bisection. Returns
/// the maximized dual objective.
inline double reference_svr_dual(const std::vector<lesionseg::TrainingSample>& samples,
                                 const lesionseg::SvrParams& params, int iterations = 5000) {
  const std::size_t n = samples.size(), m = 2 * n;
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      K[i * n + j] = lesionseg::rbf_kernel(samples[i].features, samples[j].features, params.gamma);
  auto sign = [n](std::size_t s) { return s < n ? 1.0 : -1.0; };
  auto Q = [&](std::size_t s, std::size_t t) { return sign(s) * sign(t) * K[(s % n) * n + (t % n)]; };
  std::vector<double> p(m);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = params.epsilon - samples[i].target;
    p[i + n] = params.epsilon + samples[i].target;
  }
  // Largest eigenvalue of Q by power iteration, padded for safety.
  std::vector<double> v(m, 1.0), w(m);
  double lambda = 1.0;
  for (int it = 0; it < 500; ++it) {
    double norm = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      w[s] = 0.0;
      for (std::size_t t = 0; t < m; ++t) w[s] += Q(s, t) * v[t];
      norm += w[s] * w[s];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    lambda = norm;
    for (std::size_t s = 0; s < m; ++s) v[s] = w[s] / norm;
  }
  const double step = 1.0 / (1.05 * lambda);

  auto project = [&](std::vector<double>& z) {
    auto clipped = [&](double mu, std::size_t s) { return std::clamp(z[s] - mu * sign(s), 0.0, params.C); };
    auto balance = [&](double mu) {
      double b = 0.0;
      for (std::size_t s = 0; s < m; ++s) b += sign(s) * clipped(mu, s);
      return b;
    };
    double lo = -1.0, hi = 1.0;
    while (balance(lo) < 0.0) lo *= 2.0;
    while (balance(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (balance(mid) > 0.0 ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    for (std::size_t s = 0; s < m; ++s) z[s] = clipped(mu, s);
  };
  auto objective = [&](const std::vector<double>& a) {
    double f = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      double qa = 0.0;
      for (std::size_t t = 0; t < m; ++t) qa += Q(s, t) * a[t];
      f += 0.5 * a[s] * qa + p[s] * a[s];
    }
    return f;
  };

  std::vector<double> a(m, 0.0), prev(m, 0.0), y(m, 0.0), g(m);
  double tk = 1.0, fa = objective(a);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t s = 0; s < m; ++s) {
      double qy = 0.0;
      for (std::size_t t = 0; t < m; ++t) qy += Q(s, t) * y[t];
      g[s] = y[s] - step * (qy + p[s]);
    }
    project(g);
    prev.swap(a);
    a = g;
    const double fnew = objective(a);
    if (fnew > fa) {
      // Adaptive restart keeps the iteration monotone.
      tk = 1.0;
      y = a;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      for (std::size_t s = 0; s < m; ++s) y[s] = a[s] + ((tk - 1.0) / tn) * (a[s] - prev[s]);
      tk = tn;
    }
    fa = fnew;
  }
  return -fa;
}

}  // namespace testsupport
