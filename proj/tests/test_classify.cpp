#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "daa/classify.hpp"
#include "daa/rng.hpp"
#include "daa/synth.hpp"
#include "daa/types.hpp"
#include "test_util.hpp"

using namespace daa;
using namespace testutil;

namespace {

// exhaustive grid search over (w, b), the brute-force counterpart of the
// library's proximal-gradient solver for one feature
double grid_objective(const Matrix& X, const std::vector<std::uint8_t>& y, double penalty, double w, double b) {
  const int n = static_cast<int>(y.size());
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = y[i] ? 1.0 : -1.0;
    const double t = -s * (w * X(i, 0) + b);
    loss += t > 30.0 ? t : std::log1p(std::exp(t));
  }
  return loss / n + penalty * std::abs(w);
}

}  // namespace

TEST_CASE("all-zero features reduce to the intercept-only model") {
  const int n = 30;
  Matrix X = Matrix::Zero(n, 2);
  std::vector<std::uint8_t> y(n, 0);
  for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i)] = 1;  // 20 cases, 10 controls
  const LogisticModel m = l1_logistic_fit(X, y, 0.1);
  CHECK(m.converged);
  CHECK(m.w[0] == 0.0);
  CHECK(m.w[1] == 0.0);
  CHECK(m.b == doctest::Approx(std::log(20.0 / 10.0)).epsilon(1e-4));
}

TEST_CASE("the solver matches a brute-force grid on one feature") {
  Rng rng(77, "grid");
  const int n = 40;
  Matrix X(n, 1);
  std::vector<std::uint8_t> y(n);
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = i < n / 2;
    X(i, 0) = rng.normal() + (y[static_cast<std::size_t>(i)] ? 0.8 : -0.8);
  }
  for (const double penalty : {0.01, 0.1, 0.5}) {
    const LogisticModel m = l1_logistic_fit(X, y, penalty, 40000, 1e-8);
    CHECK(m.converged);
    double best = std::numeric_limits<double>::infinity();
    for (double w = -4.0; w <= 4.0; w += 0.01)
      for (double b = -4.0; b <= 4.0; b += 0.01) best = std::min(best, grid_objective(X, y, penalty, w, b));
    const double got = grid_objective(X, y, penalty, m.w[0], m.b);
    CHECK(got <= best + 1e-4);
  }
}

TEST_CASE("a strong penalty zeroes the weights entirely") {
  Rng rng(78, "sparse");
  const int n = 60;
  Matrix X(n, 3);
  std::vector<std::uint8_t> y(n);
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = i % 2 == 0;
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal() + (y[static_cast<std::size_t>(i)] ? 0.4 : 0.0);
  }
  auto nnz = [](const Vector& w) {
    int c = 0;
    for (int j = 0; j < w.size(); ++j) c += w[j] != 0.0;
    return c;
  };
  int prev = 4;
  for (const double penalty : {0.001, 0.05, 0.3, 5.0}) {
    const LogisticModel m = l1_logistic_fit(X, y, penalty);
    const int k = nnz(m.w);
    CHECK(k <= prev);
    prev = k;
  }
  const LogisticModel hard = l1_logistic_fit(X, y, 5.0);
  CHECK(nnz(hard.w) == 0);
}

TEST_CASE("bad inputs are rejected") {
  Matrix X = Matrix::Zero(4, 1);
  std::vector<std::uint8_t> y = {1, 1, 0, 0};
  CHECK_THROWS_AS(l1_logistic_fit(Matrix::Zero(0, 1), {}, 0.1), Error);
  CHECK_THROWS_AS(l1_logistic_fit(X, {1, 0}, 0.1), Error);
  CHECK_THROWS_AS(l1_logistic_fit(X, {1, 1, 1, 1}, 0.1), Error);
  CHECK_THROWS_AS(l1_logistic_fit(X, y, -0.5), Error);
  Matrix bad = X;
  bad(2, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(l1_logistic_fit(bad, y, 0.1), Error);
}

TEST_CASE("a cleanly separating taxon cross-validates accurately") {
  Rng rng(79, "cv-sep");
  const int d = 5, n = 80;
  Matrix v(d, n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = rng.normal();
  for (int j = 0; j < n / 2; ++j) v(2, j) += 3.0;  // cases shifted on taxon 2
  const LogAbundanceMatrix l = make_log(v);
  const Labels labels = make_labels(l.samples, n / 2);

  const CVReport r = cross_validate(l, labels, {0, 1, 2, 3, 4}, 5, 4, 0.05, 11);
  CHECK(r.mean_accuracy >= 0.9);
  CHECK(r.fold_accuracies.size() == 20);
  CHECK(r.penalty == 0.05);
  for (double a : r.fold_accuracies) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
  // the informative taxon is selected; selection stays inside the subset
  CHECK(std::find(r.selected_features.begin(), r.selected_features.end(), 2) != r.selected_features.end());
  for (int f : r.selected_features) CHECK((f >= 0 && f < d));

  // restricting to a pure-noise subset destroys the signal
  const CVReport noise = cross_validate(l, labels, {0, 1}, 5, 4, 0.05, 11);
  CHECK(noise.mean_accuracy < r.mean_accuracy - 0.2);
}

TEST_CASE("subset indices map back to original taxa") {
  Rng rng(80, "cv-map");
  const int n = 60;
  Matrix v(4, n);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = rng.normal();
  for (int j = 0; j < n / 2; ++j) v(3, j) += 3.0;
  const LogAbundanceMatrix l = make_log(v);
  const Labels labels = make_labels(l.samples, n / 2);
  const CVReport r = cross_validate(l, labels, {1, 3}, 4, 2, 0.05, 13);
  for (int f : r.selected_features) CHECK((f == 1 || f == 3));
  CHECK(std::find(r.selected_features.begin(), r.selected_features.end(), 3) != r.selected_features.end());
  CHECK(r.feature_subset == std::vector<int>{1, 3});
}

TEST_CASE("label-free data cross-validates near chance") {
  Rng rng(81, "cv-null");
  const int n = 80;
  Matrix v(6, n);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = rng.normal();
  const LogAbundanceMatrix l = make_log(v);
  const Labels labels = make_labels(l.samples, n / 2);
  const CVReport r = cross_validate(l, labels, {0, 1, 2, 3, 4, 5}, 5, 6, 0.1, 17);
  CHECK(r.mean_accuracy > 0.2);
  CHECK(r.mean_accuracy < 0.8);
}

TEST_CASE("cross-validation argument checks") {
  Rng rng(82, "cv-args");
  const int n = 20;
  Matrix v(3, n);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = rng.normal();
  const LogAbundanceMatrix l = make_log(v);
  const Labels labels = make_labels(l.samples, 6);  // 6 cases, 14 controls
  CHECK_THROWS_AS(cross_validate(l, labels, {}, 5, 2, 0.1, 1), Error);
  CHECK_THROWS_AS(cross_validate(l, labels, {0, 9}, 5, 2, 0.1, 1), Error);
  CHECK_THROWS_AS(cross_validate(l, labels, {0}, 1, 2, 0.1, 1), Error);
  CHECK_THROWS_AS(cross_validate(l, labels, {0}, 7, 2, 0.1, 1), Error);  // folds > minority class
  CHECK_THROWS_AS(cross_validate(l, labels, {0}, 5, 0, 0.1, 1), Error);
  CHECK_NOTHROW(cross_validate(l, labels, {0}, 6, 1, 0.1, 1));
}

TEST_CASE("cross-validation is deterministic in the seed") {
  Rng rng(83, "cv-det");
  const int n = 50;
  Matrix v(4, n);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = rng.normal() + (j < 25 && i == 1 ? 1.0 : 0.0);
  const LogAbundanceMatrix l = make_log(v);
  const Labels labels = make_labels(l.samples, 25);
  const CVReport a = cross_validate(l, labels, {0, 1, 2, 3}, 5, 3, 0.05, 21);
  const CVReport b = cross_validate(l, labels, {0, 1, 2, 3}, 5, 3, 0.05, 21);
  CHECK(a.fold_accuracies == b.fold_accuracies);
  CHECK(a.mean_accuracy == b.mean_accuracy);
  const CVReport c = cross_validate(l, labels, {0, 1, 2, 3}, 5, 3, 0.05, 22);
  CHECK(a.fold_accuracies != c.fold_accuracies);
}

TEST_CASE("an automatic penalty is chosen from the ladder") {
  Rng rng(84, "cv-auto");
  const int n = 70;
  Matrix v(5, n);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = rng.normal();
  for (int j = 0; j < 35; ++j) v(0, j) += 3.0;
  const LogAbundanceMatrix l = make_log(v);
  const Labels labels = make_labels(l.samples, 35);
  const CVReport r = cross_validate(l, labels, {0, 1, 2, 3, 4}, 5, 3, 0.0, 23);
  CHECK(r.penalty > 0.0);
  CHECK(r.mean_accuracy >= 0.8);

  const std::string j = cv_report_json("demo", r);
  CHECK(j.find("\"name\": \"demo\"") != std::string::npos);
  CHECK(j.find("\"mean_accuracy\"") != std::string::npos);
  const std::string csv = cv_table_csv({{"demo", r}});
  CHECK(csv.find("subset_name,n_features,mean_accuracy,sd_accuracy,penalty,n_selected") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}
