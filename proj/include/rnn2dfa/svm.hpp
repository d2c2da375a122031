#pragma once
// Soft-margin classifier with a Gaussian kernel, trained by coordinate-pair
// ascent on the dual: each step picks the most violating pair, moves it
// analytically along the equality constraint, and keeps the fit residuals
// incremental. Small problems only — the caller separates one reached
// network state from a few hundred others, so exactness beats throughput.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rnn2dfa {

struct SvmOptions {
  double C = 1e4;
  double gamma = 0.0;  // 0 picks 1/dimension
  double tol = 1e-5;   // stop once the optimality gap drops below this
  long long max_iterations = 200000;
};

struct FitReport {
  bool perfect = false;  // every training point on its own side
  int n_errors = 0;
  double dual_objective = 0.0;
  long long iterations = 0;
  double max_kkt_violation = 0.0;  // optimality gap at termination
};

struct RbfSvmModel {
  double gamma = 1.0;
  double bias = 0.0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coefs;  // multiplier times label, aligned with vectors

  double decision_value(const std::vector<double>& x) const {
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) {
      double d2 = 0;
      const auto& v = support_vectors[i];
      for (std::size_t k = 0; k < v.size(); ++k)
        d2 += (v[k] - x[k]) * (v[k] - x[k]);
      f += coefs[i] * std::exp(-gamma * d2);
    }
    return f;
  }
  // Ties go to the positive side.
  bool decide(const std::vector<double>& x) const {
    return decision_value(x) >= 0.0;
  }
};

struct SvmFit {
  RbfSvmModel model;
  FitReport report;
};

inline SvmFit svm_fit(const std::vector<std::vector<double>>& X,
                      const std::vector<int>& y, const SvmOptions& opts = {}) {
  const int n = static_cast<int>(X.size());
  if (n == 0) throw std::invalid_argument("svm_fit: no training data");
  if (y.size() != X.size())
    throw std::invalid_argument("svm_fit: label count does not match data");
  const std::size_t dim = X[0].size();
  if (dim == 0) throw std::invalid_argument("svm_fit: zero-dimensional data");
  for (const auto& x : X)
    if (x.size() != dim)
      throw std::invalid_argument("svm_fit: inconsistent dimensions");
  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1)
      has_pos = true;
    else if (label == -1)
      has_neg = true;
    else
      throw std::invalid_argument("svm_fit: labels must be +1 or -1");
  }
  if (opts.C <= 0 || opts.tol <= 0 || opts.gamma < 0 ||
      opts.max_iterations <= 0)
    throw std::invalid_argument("svm_fit: bad options");
  const double gamma =
      opts.gamma > 0 ? opts.gamma : 1.0 / static_cast<double>(dim);

  SvmFit fit;
  fit.model.gamma = gamma;
  if (!has_pos || !has_neg) {  // nothing to separate
    fit.model.bias = has_pos ? 1.0 : -1.0;
    fit.report.perfect = true;
    return fit;
  }

  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (double v : X[i]) s += v * v;
    sq[i] = s;
  }
  auto kernel = [&](int i, int j) {
    double dot = 0;
    for (std::size_t k = 0; k < dim; ++k) dot += X[i][k] * X[j][k];
    return std::exp(-gamma * (sq[i] + sq[j] - 2 * dot));
  };
  // Cache the full kernel matrix when it is cheap to hold.
  const bool cache = n <= 1500;
  std::vector<double> K;
  if (cache) {
    K.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        K[static_cast<std::size_t>(i) * n + j] =
            K[static_cast<std::size_t>(j) * n + i] = kernel(i, j);
  }
  std::vector<double> row_i(cache ? 0 : n), row_j(cache ? 0 : n);
  auto fetch_row = [&](int t, std::vector<double>& scratch) -> const double* {
    if (cache) return &K[static_cast<std::size_t>(t) * n];
    for (int s = 0; s < n; ++s) scratch[s] = kernel(t, s);
    return scratch.data();
  };

  const double C = opts.C;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> u(n, 0.0);  // bias-free decision value at each point
  auto in_up = [&](int t) {
    return y[t] > 0 ? alpha[t] < C : alpha[t] > 0;
  };
  auto in_low = [&](int t) {
    return y[t] > 0 ? alpha[t] > 0 : alpha[t] < C;
  };

  double gap = 0;
  long long it = 0;
  for (; it < opts.max_iterations; ++it) {
    int i = -1, j = -1;
    double m = 0, M = 0;
    for (int t = 0; t < n; ++t) {
      double g = y[t] - u[t];
      if (in_up(t) && (i < 0 || g > m)) {
        i = t;
        m = g;
      }
      if (in_low(t) && (j < 0 || g < M)) {
        j = t;
        M = g;
      }
    }
    gap = (i >= 0 && j >= 0) ? m - M : 0.0;
    if (gap <= opts.tol || i == j) break;
    const double* Ki = fetch_row(i, row_i);
    const double* Kj = fetch_row(j, row_j);
    double eta = Ki[i] + Kj[j] - 2 * Ki[j];
    double head_i = y[i] > 0 ? C - alpha[i] : alpha[i];
    double head_j = y[j] > 0 ? alpha[j] : C - alpha[j];
    double step = eta > 1e-12 ? gap / eta : head_i + head_j;
    step = std::min({step, head_i, head_j});
    alpha[i] += y[i] > 0 ? step : -step;
    alpha[j] += y[j] > 0 ? -step : step;
    for (int t : {i, j}) {  // keep the box exact against drift
      if (alpha[t] < 1e-12) alpha[t] = 0;
      if (alpha[t] > C - 1e-12 * C) alpha[t] = C;
    }
    for (int t = 0; t < n; ++t) u[t] += step * (Ki[t] - Kj[t]);
  }
  fit.report.iterations = it;
  fit.report.max_kkt_violation = gap;

  // Bias: exact on free support vectors, midpoint of the feasible band
  // otherwise.
  double free_sum = 0;
  int free_count = 0;
  for (int t = 0; t < n; ++t)
    if (alpha[t] > 1e-12 && alpha[t] < C * (1 - 1e-12)) {
      free_sum += y[t] - u[t];
      ++free_count;
    }
  if (free_count > 0) {
    fit.model.bias = free_sum / free_count;
  } else {
    bool got_m = false, got_M = false;
    double m = 0, M = 0;
    for (int t = 0; t < n; ++t) {
      double g = y[t] - u[t];
      if (in_up(t) && (!got_m || g > m)) {
        m = g;
        got_m = true;
      }
      if (in_low(t) && (!got_M || g < M)) {
        M = g;
        got_M = true;
      }
    }
    fit.model.bias = got_m && got_M ? (m + M) / 2 : (got_m ? m : M);
  }

  double quad = 0, lin = 0;
  for (int t = 0; t < n; ++t) {
    lin += alpha[t];
    quad += alpha[t] * y[t] * u[t];
  }
  fit.report.dual_objective = lin - 0.5 * quad;

  for (int t = 0; t < n; ++t)
    if (alpha[t] > 1e-10) {
      fit.model.support_vectors.push_back(X[t]);
      fit.model.coefs.push_back(alpha[t] * y[t]);
    }
  for (int t = 0; t < n; ++t)
    if (fit.model.decide(X[t]) != (y[t] > 0)) ++fit.report.n_errors;
  fit.report.perfect = fit.report.n_errors == 0;
  return fit;
}

}  // namespace rnn2dfa
