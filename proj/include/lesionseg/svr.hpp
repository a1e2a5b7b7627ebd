#pragma once

// epsilon-SVR with an RBF kernel, trained by pairwise coordinate ascent on
// the dual (maximal-violating-pair working set selection).
//
// The solver works on 2n variables a = (alpha, alpha*) with signs
// y = (+1.., -1..) and minimizes 1/2 a'Qa + p'a subject to y'a = 0 and
// 0 <= a <= C, where Q_st = y_s y_t K(x_s, x_t) and p = (eps - t, eps + t).
// The returned coefficients are beta = alpha - alpha*.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "lesionseg/features.hpp"
#include "lesionseg/forest.hpp"

namespace lesionseg {

struct SvrParams {
  double C = 100.0;
  double gamma = 0.5;
  double epsilon = 0.2;
  double tol = 1e-3;  // stop when the maximal KKT violation falls below this
  long long max_iter = 50'000'000;

  bool operator==(const SvrParams&) const = default;
};

struct SvrModel {
  std::vector<FeatureVector> support;
  std::vector<double> coef;  // beta_i for each support point
  double bias = 0.0;
  SvrParams params;

  bool operator==(const SvrModel&) const = default;
};

/// Full dual solution, including zero coefficients.
struct SvrSolution {
  std::vector<double> beta;
  double bias = 0.0;
  long long iterations = 0;
  double max_violation = 0.0;
};

inline double rbf_kernel(const FeatureVector& a, const FeatureVector& b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

/// Dual objective -1/2 b'Kb - eps sum|b| + sum t b (to be maximized).
inline double svr_dual_objective(std::span<const TrainingSample> samples, std::span<const double> beta,
                                 const SvrParams& params) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (beta[i] == 0.0) continue;
    for (std::size_t j = 0; j < samples.size(); ++j)
      if (beta[j] != 0.0) quad += beta[i] * beta[j] * rbf_kernel(samples[i].features, samples[j].features, params.gamma);
    lin += samples[i].target * beta[i] - params.epsilon * std::abs(beta[i]);
  }
  return -0.5 * quad + lin;
}

namespace detail {

class KernelRows {
 public:
  KernelRows(std::span<const TrainingSample> samples, double gamma) : samples_(samples), gamma_(gamma) {
    const std::size_t n = samples.size();
    if (n <= kDenseLimit) {
      dense_.resize(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
          dense_[i * n + j] = dense_[j * n + i] = rbf_kernel(samples[i].features, samples[j].features, gamma);
    } else {
      scratch_.resize(2 * n);
    }
  }

  // Row i of the kernel matrix; `slot` selects one of two scratch buffers.
  const double* row(std::size_t i, int slot) {
    const std::size_t n = samples_.size();
    if (!dense_.empty()) return dense_.data() + i * n;
    double* out = scratch_.data() + static_cast<std::size_t>(slot) * n;
    for (std::size_t j = 0; j < n; ++j) out[j] = rbf_kernel(samples_[i].features, samples_[j].features, gamma_);
    return out;
  }

 private:
  static constexpr std::size_t kDenseLimit = 2500;
  std::span<const TrainingSample> samples_;
  double gamma_;
  std::vector<double> dense_;
  std::vector<double> scratch_;
};

}  // namespace detail

inline SvrSolution solve_svr_dual(std::span<const TrainingSample> samples, const SvrParams& params) {
  if (samples.empty()) throw NoSamples("train_svr: no training samples");
  const std::size_t n = samples.size();
  const std::size_t m = 2 * n;
  const double C = params.C;
  constexpr double kTau = 1e-12;

  std::vector<double> a(m, 0.0);
  std::vector<double> grad(m);
  std::vector<int> y(m);
  for (std::size_t t = 0; t < n; ++t) {
    y[t] = 1;
    y[t + n] = -1;
    grad[t] = params.epsilon - samples[t].target;
    grad[t + n] = params.epsilon + samples[t].target;
  }
  auto in_up = [&](std::size_t t) { return y[t] > 0 ? a[t] < C : a[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? a[t] > 0.0 : a[t] < C; };

  detail::KernelRows kernel(samples, params.gamma);
  SvrSolution sol;
  for (;;) {
    std::size_t i = m, j = m;
    double vmax = -std::numeric_limits<double>::infinity();
    double vmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > vmax) {
        vmax = v;
        i = t;
      }
      if (in_low(t) && v < vmin) {
        vmin = v;
        j = t;
      }
    }
    sol.max_violation = (i < m && j < m) ? vmax - vmin : 0.0;
    if (i == m || j == m || sol.max_violation < params.tol || sol.iterations >= params.max_iter) break;
    ++sol.iterations;

    const std::size_t pi = i % n;
    const std::size_t pj = j % n;
    const double* ki = kernel.row(pi, 0);
    const double* kj = kernel.row(pj, 1);
    const double qij = y[i] * y[j] * ki[pj];
    const double qii = ki[pi];
    const double qjj = kj[pj];
    const double old_ai = a[i];
    const double old_aj = a[j];

    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = C - diff;
        }
      } else if (a[j] > C) {
        a[j] = C;
        a[i] = C + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = sum - C;
        }
      } else if (a[j] < 0.0) {
        a[j] = 0.0;
        a[i] = sum;
      }
      if (sum > C) {
        if (a[j] > C) {
          a[j] = C;
          a[i] = sum - C;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = sum;
      }
    }

    const double dai = a[i] - old_ai;
    const double daj = a[j] - old_aj;
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t pt = t % n;
      grad[t] += y[t] * (y[i] * ki[pt] * dai + y[j] * kj[pt] * daj);
    }
  }

  // Offset from free variables, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = y[t] * grad[t];
    if (a[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
  sol.bias = -rho;
  sol.beta.resize(n);
  for (std::size_t t = 0; t < n; ++t) sol.beta[t] = a[t] - a[t + n];
  return sol;
}

inline SvrModel train_svr(std::span<const TrainingSample> samples, const SvrParams& params = {}) {
  const SvrSolution sol = solve_svr_dual(samples, params);
  SvrModel model;
  model.params = params;
  model.bias = sol.bias;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (sol.beta[i] == 0.0) continue;
    model.support.push_back(samples[i].features);
    model.coef.push_back(sol.beta[i]);
  }
  return model;
}

inline double predict_svr(const SvrModel& model, const FeatureVector& x) {
  double f = model.bias;
  for (std::size_t i = 0; i < model.support.size(); ++i)
    f += model.coef[i] * rbf_kernel(model.support[i], x, model.params.gamma);
  return f;
}

}  // namespace lesionseg
