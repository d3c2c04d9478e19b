#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "daa/assoc.hpp"
#include "daa/kernels.hpp"
#include "daa/maxent.hpp"
#include "daa/rng.hpp"
#include "daa/synth.hpp"
#include "daa/types.hpp"
#include "test_util.hpp"

using namespace daa;
using namespace testutil;

namespace {

LogAbundanceMatrix gaussian_cohort(int d, int n, std::uint64_t seed) {
  const Matrix C = random_spd(d, seed, 0.3);
  Vector m(d);
  Rng rng(seed, "means");
  for (int i = 0; i < d; ++i) m[i] = rng.uniform(-2.0, 2.0);
  return make_log(sample(m, C, n, derive_seed(seed, "draw")));
}

}  // namespace

TEST_CASE("bh matches the worked example") {
  const auto [q, sig] = bh_fdr({0.01, 0.02, 0.03, 0.5}, 0.05);
  CHECK(q[0] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(q[2] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(q[3] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sig[0]);
  CHECK(sig[1]);
  CHECK(sig[2]);
  CHECK(!sig[3]);
}

TEST_CASE("bh on a single p-value") {
  const auto [q, sig] = bh_fdr({0.04}, 0.05);
  CHECK(q[0] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(sig[0]);
}

TEST_CASE("bh agrees with the quadratic-time oracle exactly") {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + static_cast<int>(rng.bounded(100));
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& v : p) {
      v = rng.uniform();
      if (v == 0.0) v = 0.5;
      if (rng.uniform() < 0.1) v = 1.0;           // exercise the p = 1 edge
      if (m > 1 && rng.uniform() < 0.2) v = p[0]; // exercise ties
    }
    const auto [q, sig] = bh_fdr(p, 0.05);
    (void)sig;
    const auto oracle = bh_oracle(p);
    for (int i = 0; i < m; ++i) CHECK(q[static_cast<std::size_t>(i)] == oracle[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("bh rejects out-of-range p-values") {
  CHECK_THROWS_AS(bh_fdr({0.5, 0.0}, 0.05), Error);
  CHECK_THROWS_AS(bh_fdr({1.5}, 0.05), Error);
  CHECK_THROWS_AS(bh_fdr({-0.1}, 0.05), Error);
  const auto [q, sig] = bh_fdr({}, 0.05);
  CHECK(q.empty());
  CHECK(sig.empty());
}

TEST_CASE("the exhaustive two-vs-two example arithmetic") {
  // 4 samples split 2/2 admits 6 relabelings; with per-taxon values
  // (3, 1, 0, 0) exactly 2 of them reach |observed|, so the smoothed
  // permutation p over an exhaustive scan is (1+2)/(6+1) = 3/7 and the
  // raw fraction is 2/6 = 1/3.
  const double p_smoothed = (1.0 + 2.0) / (6.0 + 1.0);
  CHECK(p_smoothed == doctest::Approx(3.0 / 7.0).epsilon(1e-15));

  Matrix L(1, 4);
  L << 3.0, 1.0, 0.0, 0.0;
  LogAbundanceMatrix l = make_log(L);
  const Labels lab = make_labels(l.samples, 2);
  const int np = 9999;
  const AssociationTable t = naive_mwas(l, lab, np, 5);
  // sampled permutations hit the tie set with probability 1/3
  CHECK(std::abs(t.rows[0].p - 1.0 / 3.0) < 0.02);
}

TEST_CASE("p-values stay in [1/(n_perm+1), 1]") {
  const auto l = gaussian_cohort(6, 50, 7);
  const Labels lab = make_labels(l.samples, 20);
  const AssociationTable t = naive_mwas(l, lab, 200, 3);
  for (const auto& r : t.rows) {
    CHECK(r.p >= 1.0 / 201.0 - 1e-15);
    CHECK(r.p <= 1.0);
  }
}

TEST_CASE("unsmoothed p-values stay positive") {
  // plant a huge effect so no permutation exceeds it
  auto l = gaussian_cohort(3, 40, 9);
  for (int j = 0; j < 15; ++j) l.values(0, j) += 50.0;
  const Labels lab = make_labels(l.samples, 15);
  const AssociationTable t = naive_mwas(l, lab, 100, 1, 0.05, /*smoothed=*/false);
  CHECK(t.rows[0].p == doctest::Approx(1.0 / 100.0).epsilon(1e-15));
  CHECK(t.rows[0].p > 0.0);
}

TEST_CASE("naive p equals the kernel count arithmetic") {
  const auto l = gaussian_cohort(4, 30, 11);
  const Labels lab = make_labels(l.samples, 12);
  const int np = 250;
  const AssociationTable t = naive_mwas(l, lab, np, 17);
  const auto mask = case_mask(lab, l.samples);
  const Vector obs = mean_diff(l.values, mask);
  const auto cnt = perm_exceedances(l.values, 12, nullptr, obs, np, 17);
  for (int i = 0; i < 4; ++i) {
    CHECK(t.rows[static_cast<std::size_t>(i)].statistic == obs[i]);
    CHECK(t.rows[static_cast<std::size_t>(i)].p ==
          doctest::Approx((1.0 + cnt[static_cast<std::size_t>(i)]) / (np + 1.0)).epsilon(1e-15));
  }
}

TEST_CASE("label swap negates statistics and preserves p and q exactly") {
  const auto l = gaussian_cohort(5, 44, 13);
  const Labels lab = make_labels(l.samples, 17);
  Labels swapped;
  for (const auto& [s, g] : lab.assignment)
    swapped.assignment[s] = g == Group::CASE ? Group::CONTROL : Group::CASE;
  for (Method method : {Method::NAIVE, Method::DAA}) {
    AssocOptions opt;
    opt.n_perm = 300;
    opt.seed = 23;
    const AssociationTable a = run_method(l, lab, method, opt);
    const AssociationTable b = run_method(l, swapped, method, opt);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].statistic == -b.rows[i].statistic);
      CHECK(a.rows[i].p == b.rows[i].p);
      CHECK(a.rows[i].q == b.rows[i].q);
      CHECK(a.rows[i].group_mean_case == b.rows[i].group_mean_ctrl);
    }
  }
}

TEST_CASE("daa with a one-taxon cohort reproduces naive p-values exactly") {
  // with a single taxon the interaction map is a positive scale, and the
  // shared permutation streams make the tie sets identical
  const auto l = gaussian_cohort(1, 60, 15);
  const Labels lab = make_labels(l.samples, 25);
  const AssociationTable nv = naive_mwas(l, lab, 400, 31);
  const AssociationTable da = daa::daa(l, lab, 1e-9, 400, 31);
  CHECK(nv.rows[0].p == da.rows[0].p);
}

TEST_CASE("daa statistic is the field difference under the pooled model") {
  const auto l = gaussian_cohort(6, 80, 19);
  const Labels lab = make_labels(l.samples, 35);
  const AssociationTable t = daa::daa(l, lab, 0.01, 100, 3);
  const MaxEntModel model = fit_model(l, 0.01);
  const auto mask = case_mask(lab, l.samples);
  const Vector dm = mean_diff(l.values, mask);
  const Vector expect = model.J * dm;
  for (int i = 0; i < 6; ++i) {
    CHECK(t.rows[static_cast<std::size_t>(i)].statistic == expect[i]);
    CHECK(t.rows[static_cast<std::size_t>(i)].group_field_case - t.rows[static_cast<std::size_t>(i)].group_field_ctrl ==
          doctest::Approx(expect[i]).epsilon(1e-10));
  }
}

TEST_CASE("daa errors when the whole spectrum is dropped") {
  const auto l = gaussian_cohort(3, 30, 21);
  const Labels lab = make_labels(l.samples, 12);
  CHECK_THROWS_AS(daa::daa(l, lab, 1e12, 50, 1), Error);
}

TEST_CASE("taxon permutation maps results consistently") {
  const auto l = gaussian_cohort(5, 40, 25);
  const Labels lab = make_labels(l.samples, 16);
  // reversed taxon order
  LogAbundanceMatrix r = l;
  for (int i = 0; i < 5; ++i) {
    r.values.row(i) = l.values.row(4 - i);
    r.taxa[static_cast<std::size_t>(i)] = l.taxa[static_cast<std::size_t>(4 - i)];
  }
  const AssociationTable a = naive_mwas(l, lab, 300, 7);
  const AssociationTable b = naive_mwas(r, lab, 300, 7);
  for (int i = 0; i < 5; ++i) {
    CHECK(a.rows[static_cast<std::size_t>(i)].statistic == b.rows[static_cast<std::size_t>(4 - i)].statistic);
    CHECK(a.rows[static_cast<std::size_t>(i)].p == b.rows[static_cast<std::size_t>(4 - i)].p);
  }
}

TEST_CASE("effect sizes are exponentiated absolute mean differences") {
  const auto l = gaussian_cohort(3, 26, 27);
  const Labels lab = make_labels(l.samples, 11);
  const auto mask = case_mask(lab, l.samples);
  const Vector dm = mean_diff(l.values, mask);
  const auto fc = effect_sizes(l, lab);
  for (int i = 0; i < 3; ++i) {
    CHECK(fc[static_cast<std::size_t>(i)] == doctest::Approx(std::exp(std::abs(dm[i]))).epsilon(1e-14));
    CHECK(fc[static_cast<std::size_t>(i)] >= 1.0);
  }
}

TEST_CASE("detection curve at full size reproduces a direct run exactly") {
  const auto l = gaussian_cohort(4, 36, 29);
  const Labels lab = make_labels(l.samples, 15);
  AssocOptions opt;
  opt.n_perm = 200;
  opt.seed = 41;
  const auto curve = detection_curve(l, lab, {36}, 3, Method::NAIVE, opt);
  REQUIRE(curve.size() == 1);
  const AssociationTable direct = naive_mwas(l, lab, 200, 41);
  int expected = 0;
  for (const auto& r : direct.rows) expected += r.significant ? 1 : 0;
  CHECK(curve[0].mean == doctest::Approx(double(expected)).epsilon(1e-15));
  CHECK(curve[0].sd == 0.0);
  for (int c : curve[0].counts) CHECK(c == expected);
}

TEST_CASE("detection curve subsamples are reproducible and size-checked") {
  const auto l = gaussian_cohort(4, 40, 31);
  const Labels lab = make_labels(l.samples, 18);
  AssocOptions opt;
  opt.n_perm = 150;
  opt.seed = 5;
  const auto a = detection_curve(l, lab, {20, 30}, 2, Method::NAIVE, opt);
  const auto b = detection_curve(l, lab, {20, 30}, 2, Method::NAIVE, opt);
  REQUIRE(a.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(a[s].size == b[s].size);
    CHECK(a[s].counts == b[s].counts);
  }
  CHECK_THROWS_AS(detection_curve(l, lab, {41}, 2, Method::NAIVE, opt), Error);
  CHECK_THROWS_AS(detection_curve(l, lab, {1}, 2, Method::NAIVE, opt), Error);
}

TEST_CASE("pvalue_calibration pools d*repeats p-values and reports KS") {
  const auto l = gaussian_cohort(8, 60, 33);
  const Labels lab = make_labels(l.samples, 24);
  AssocOptions opt;
  opt.n_perm = 150;
  opt.seed = 9;
  const CalibrationReport rep = pvalue_calibration(l, lab, Method::NAIVE, 12, opt);
  CHECK(rep.sorted_p.size() == 8u * 12u);
  CHECK(std::is_sorted(rep.sorted_p.begin(), rep.sorted_p.end()));
  CHECK(rep.ks_distance > 0.0);
  CHECK(rep.ks_distance < 0.25);  // uniform within sampling noise on a null cohort
  const CalibrationReport empty = pvalue_calibration(l, lab, Method::NAIVE, 0, opt);
  CHECK(empty.sorted_p.empty());
  CHECK(empty.ks_distance == 0.0);
}

TEST_CASE("association tsv lists every taxon with the right columns") {
  const auto l = gaussian_cohort(3, 24, 35);
  const Labels lab = make_labels(l.samples, 10);
  AssocOptions opt;
  opt.n_perm = 100;
  opt.seed = 2;
  const std::string daa_out = association_tsv(run_method(l, lab, Method::DAA, opt));
  CHECK(daa_out.find("taxon\th_case\th_ctrl\tdelta_h\trel_effect\tp\tq\tsignificant") == 0);
  CHECK(std::count(daa_out.begin(), daa_out.end(), '\n') == 4);  // header + 3 taxa
  const std::string nv_out = association_tsv(run_method(l, lab, Method::NAIVE, opt));
  CHECK(nv_out.find("taxon\tmean_case\tmean_ctrl\tdelta_mean\tfold_change\tp\tq\tsignificant") == 0);
  CHECK(nv_out.find("t1\t") != std::string::npos);
}

TEST_CASE("significant_indices mirrors the significance flags") {
  const auto l = gaussian_cohort(4, 30, 37);
  const Labels lab = make_labels(l.samples, 12);
  AssociationTable t = naive_mwas(l, lab, 100, 3);
  t.rows[2].significant = true;
  t.rows[0].significant = false;
  const auto idx = t.significant_indices();
  for (int i : idx) CHECK(t.rows[static_cast<std::size_t>(i)].significant);
}
