#include <catch2/catch_amalgamated.hpp>

#include <rnn2dfa/svm.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

using namespace rnn2dfa;

namespace {

using Points = std::vector<std::vector<double>>;

double rbf(const std::vector<double>& a, const std::vector<double>& b,
           double gamma) {
  double d2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d2);
}

// Exhaustive reference for the dual: every point is pinned at 0, pinned at
// C, or left free; free coordinates come from the equality-constrained
// stationarity system. The best feasible candidate is the optimum.
double qp_oracle(const Points& X, const std::vector<int>& y, double C,
                 double gamma) {
  const int n = static_cast<int>(X.size());
  Eigen::MatrixXd Q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      Q(i, j) = y[i] * y[j] * rbf(X[i], X[j], gamma);
  auto objective = [&](const Eigen::VectorXd& a) {
    return a.sum() - 0.5 * a.dot(Q * a);
  };
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  double best = -1e300;
  for (long mask = 0; mask < total; ++mask) {
    long m = mask;
    std::vector<int> kind(n);  // 0 at zero, 1 at C, 2 free
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i, m /= 3) {
      kind[i] = m % 3;
      if (kind[i] == 2) free_idx.push_back(i);
    }
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
      if (kind[i] == 1) a(i) = C;
    const int f = static_cast<int>(free_idx.size());
    if (f > 0) {
      Eigen::MatrixXd lhs(f + 1, f + 1);
      Eigen::VectorXd rhs(f + 1);
      for (int r = 0; r < f; ++r) {
        for (int c = 0; c < f; ++c) lhs(r, c) = Q(free_idx[r], free_idx[c]);
        lhs(r, f) = y[free_idx[r]];
        lhs(f, r) = y[free_idx[r]];
        double bound_term = 0;
        for (int i = 0; i < n; ++i)
          if (kind[i] == 1) bound_term += Q(free_idx[r], i) * C;
        rhs(r) = 1.0 - bound_term;
      }
      lhs(f, f) = 0;
      double bound_y = 0;
      for (int i = 0; i < n; ++i)
        if (kind[i] == 1) bound_y += y[i] * C;
      rhs(f) = -bound_y;
      Eigen::VectorXd sol = lhs.fullPivLu().solve(rhs);
      if ((lhs * sol - rhs).norm() > 1e-6 * (1.0 + rhs.norm())) continue;
      bool ok = true;
      for (int r = 0; r < f; ++r) {
        if (sol(r) < -1e-9 || sol(r) > C + 1e-9) ok = false;
        a(free_idx[r]) = std::clamp(sol(r), 0.0, C);
      }
      if (!ok) continue;
    }
    if (std::abs(a.dot(Eigen::Map<const Eigen::VectorXi>(y.data(), n)
                           .cast<double>())) > 1e-6 * (1.0 + C))
      continue;
    best = std::max(best, objective(a));
  }
  return best;
}

}  // namespace

TEST_CASE("four corners with alternating labels are fit exactly") {
  Points X = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  std::vector<int> y = {1, 1, -1, -1};
  SvmFit fit = svm_fit(X, y, {.C = 1e4, .gamma = 1.0});
  CHECK(fit.report.perfect);
  CHECK(fit.report.n_errors == 0);
  CHECK(fit.report.max_kkt_violation <= 1e-3);
  // By symmetry every multiplier equals 1/(1 + e^-8 - 2 e^-4), the bias
  // vanishes, and the dual objective is twice the multiplier.
  double a_expect = 1.0 / (1.0 + std::exp(-8.0) - 2.0 * std::exp(-4.0));
  REQUIRE(fit.model.support_vectors.size() == 4);
  for (std::size_t i = 0; i < fit.model.coefs.size(); ++i)
    CHECK_THAT(std::abs(fit.model.coefs[i]),
               Catch::Matchers::WithinAbs(a_expect, 1e-4));
  CHECK_THAT(fit.model.bias, Catch::Matchers::WithinAbs(0.0, 1e-5));
  CHECK_THAT(fit.report.dual_objective,
             Catch::Matchers::WithinAbs(2 * a_expect, 1e-5));
  for (std::size_t i = 0; i < X.size(); ++i) {
    CHECK(fit.model.decide(X[i]) == (y[i] > 0));
    CHECK_THAT(fit.model.decision_value(X[i]),
               Catch::Matchers::WithinAbs(y[i], 1e-3));
  }
  // The centre sits on the knife edge; only near-cancellation is required.
  CHECK(std::abs(fit.model.decision_value({0, 0})) < 1e-3);
}

TEST_CASE("one centre point against a ring of four") {
  Points X = {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::vector<int> y = {1, -1, -1, -1, -1};
  SvmFit fit = svm_fit(X, y, {.C = 1e4, .gamma = 0.5});
  CHECK(fit.report.perfect);
  CHECK(fit.report.max_kkt_violation <= 1e-3);
  // All five points end up as free support vectors; the symmetric
  // stationarity system has a closed form.
  double A = 4.0 * (1.0 - std::exp(-0.5));
  double B = 4.0 * std::exp(-0.5) -
             (1.0 + 2.0 * std::exp(-1.0) + std::exp(-2.0));
  double a_ring = 2.0 / (A - B);
  double a_centre = 4.0 * a_ring;
  double bias = 1.0 - A * a_ring;
  REQUIRE(fit.model.support_vectors.size() == 5);
  CHECK_THAT(fit.model.bias, Catch::Matchers::WithinAbs(bias, 1e-4));
  CHECK_THAT(fit.report.dual_objective,
             Catch::Matchers::WithinAbs(4.0 * a_ring, 1e-4));
  for (std::size_t i = 0; i < X.size(); ++i) {
    double expect = y[i] > 0 ? a_centre : -a_ring;
    CHECK_THAT(fit.model.coefs[i], Catch::Matchers::WithinAbs(expect, 1e-3));
    CHECK(fit.model.decide(X[i]) == (y[i] > 0));
  }
  // Probe point near the centre, against the hand-solved decision value.
  std::vector<double> probe = {0.05, 0.05};
  double expect_probe = a_centre * rbf(X[0], probe, 0.5) + bias;
  for (int i = 1; i <= 4; ++i)
    expect_probe -= a_ring * rbf(X[i], probe, 0.5);
  CHECK(expect_probe > 0.9);
  CHECK_THAT(fit.model.decision_value(probe),
             Catch::Matchers::WithinAbs(expect_probe, 1e-3));
  CHECK(fit.model.decide(probe));
}

TEST_CASE("dual objective matches an exhaustive reference on tiny data") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int n : {4, 5, 6, 7}) {
    for (double C : {1.0, 1e4}) {
      Points X;
      std::vector<int> y;
      for (int i = 0; i < n; ++i) {
        X.push_back({coord(rng), coord(rng)});
        y.push_back(i % 2 == 0 ? 1 : -1);
      }
      SvmFit fit = svm_fit(X, y, {.C = C, .gamma = 0.7});
      double ref = qp_oracle(X, y, C, 0.7);
      INFO("n=" << n << " C=" << C);
      CHECK(fit.report.max_kkt_violation <= 1e-3);
      CHECK_THAT(fit.report.dual_objective,
                 Catch::Matchers::WithinAbs(ref, 1e-3 * std::max(1.0, ref)));
    }
  }
}

TEST_CASE("a single state is separated from a cloud of others") {
  // The shape of every partition-refinement fit: one positive, many
  // negatives, dimension in the tens.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  const int dim = 20;
  Points X;
  std::vector<int> y;
  std::vector<double> target(dim);
  for (double& v : target) v = g(rng);
  X.push_back(target);
  y.push_back(1);
  for (int i = 0; i < 60; ++i) {
    std::vector<double> v(dim);
    for (double& c : v) c = g(rng);
    X.push_back(v);
    y.push_back(-1);
  }
  SvmFit fit = svm_fit(X, y, {});  // default C and data-dimension gamma
  CHECK(fit.model.gamma == 1.0 / dim);
  CHECK(fit.report.perfect);
  CHECK(fit.report.n_errors == 0);
  CHECK(fit.report.max_kkt_violation <= 1e-3);
  CHECK(fit.model.decide(target));
  for (std::size_t i = 1; i < X.size(); ++i) CHECK(!fit.model.decide(X[i]));
}

TEST_CASE("contradictory duplicates do not break the optimiser") {
  Points X = {{0.5, 0.5}, {0.5, 0.5}, {2, 2}};
  std::vector<int> y = {1, -1, 1};
  SvmFit fit = svm_fit(X, y, {.C = 10.0, .gamma = 1.0});
  CHECK(!fit.report.perfect);
  CHECK(fit.report.n_errors >= 1);
  CHECK(fit.report.max_kkt_violation <= 1e-3);
  double ref = qp_oracle(X, y, 10.0, 1.0);
  CHECK_THAT(fit.report.dual_objective,
             Catch::Matchers::WithinAbs(ref, 1e-3 * std::max(1.0, ref)));
}

TEST_CASE("single-class input yields a constant decision") {
  Points X = {{1, 2}, {3, 4}};
  SvmFit pos = svm_fit(X, {1, 1}, {});
  SvmFit neg = svm_fit(X, {-1, -1}, {});
  CHECK(pos.report.perfect);
  CHECK(neg.report.perfect);
  for (const auto& probe : Points{{0, 0}, {5, -3}, {1, 2}}) {
    CHECK(pos.model.decide(probe));
    CHECK(!neg.model.decide(probe));
  }
}

TEST_CASE("a zero decision value falls on the positive side") {
  RbfSvmModel model;
  model.gamma = 1.0;
  model.bias = 0.0;
  model.support_vectors = {{1, 0}, {-1, 0}};
  model.coefs = {2.5, -2.5};
  CHECK(model.decision_value({0, 0}) == 0.0);
  CHECK(model.decide({0, 0}));
  CHECK(model.decision_value({0, 7}) == 0.0);
  CHECK(model.decide({0, 7}));
}

TEST_CASE("malformed training input is rejected") {
  CHECK_THROWS_AS(svm_fit({}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(svm_fit({{1, 2}}, {1, -1}, {}), std::invalid_argument);
  CHECK_THROWS_AS(svm_fit({{1, 2}, {3}}, {1, -1}, {}), std::invalid_argument);
  CHECK_THROWS_AS(svm_fit({{1, 2}, {3, 4}}, {1, 0}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(svm_fit({{1, 2}, {3, 4}}, {1, -1}, {.C = -1.0}),
                  std::invalid_argument);
}

TEST_CASE("well-separated clouds generalise to held-out points") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> g(0.0, 0.5);
  const int dim = 5;
  auto draw = [&](double centre) {
    std::vector<double> v(dim);
    for (double& c : v) c = centre + g(rng);
    return v;
  };
  Points X;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    X.push_back(draw(2.0));
    y.push_back(1);
    X.push_back(draw(-2.0));
    y.push_back(-1);
  }
  SvmFit fit = svm_fit(X, y, {});
  CHECK(fit.report.perfect);
  CHECK(fit.report.iterations > 0);
  int correct = 0;
  const int holdout = 200;
  for (int i = 0; i < holdout; ++i) {
    bool positive = i % 2 == 0;
    correct += fit.model.decide(draw(positive ? 2.0 : -2.0)) == positive;
  }
  CHECK(correct >= 194);
}
