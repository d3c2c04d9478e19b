#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "daa/assoc.hpp"
#include "daa/ingest.hpp"
#include "daa/maxent.hpp"
#include "daa/robustness.hpp"
#include "daa/rng.hpp"
#include "daa/synth.hpp"
#include "daa/transform.hpp"
#include "daa/types.hpp"
#include "test_util.hpp"

using namespace daa;
using namespace testutil;

namespace {

struct Fixture {
  LogAbundanceMatrix l;
  Labels labels;
};

Fixture planted_fixture(int dim, int n1, int n2, std::uint64_t seed) {
  const GroundTruthModel gt = make_ground_truth(dim, 0.3, seed);
  SyntheticSpec s;
  s.planted = {{1, 0.9}};
  s.n_cases = n1;
  s.n_controls = n2;
  s.seed = seed + 100;
  const Cohort co = generate_cohort(gt, s);
  return {co.log_abundance, co.labels};
}

}  // namespace

TEST_CASE("subsampling the full cohort has zero spread") {
  const Fixture fx = planted_fixture(8, 40, 30, 41);
  const StabilityReport r = subsample_stability(fx.l, fx.labels, 1.0, 3, 0.01, 7);
  CHECK(r.rows.size() == 4u * 8u);
  for (const auto& row : r.rows) {
    CHECK(row.sd == 0.0);
    CHECK(row.null_sd >= 0.0);
  }
  // eigenvalue rows come out in descending rank order
  double prev = 1e300;
  for (const auto& row : r.rows) {
    if (row.quantity != "eigenvalue") continue;
    CHECK(row.mean <= prev + 1e-15);
    prev = row.mean;
  }
  const std::string csv = stability_csv(r);
  CHECK(csv.find("quantity,index,mean,sd,null_mean,null_sd") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 8);
}

TEST_CASE("stability estimates are deterministic and fraction-sensitive") {
  const Fixture fx = planted_fixture(6, 50, 40, 43);
  const StabilityReport a = subsample_stability(fx.l, fx.labels, 0.8, 10, 0.01, 9);
  const StabilityReport b = subsample_stability(fx.l, fx.labels, 0.8, 10, 0.01, 9);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].mean == b.rows[i].mean);
    CHECK(a.rows[i].sd == b.rows[i].sd);
    CHECK(a.rows[i].null_mean == b.rows[i].null_mean);
  }
  bool spread = false;
  for (const auto& row : a.rows) spread = spread || row.sd > 0.0;
  CHECK(spread);
  CHECK_THROWS_AS(subsample_stability(fx.l, fx.labels, 0.0, 5, 0.01, 1), Error);
  CHECK_THROWS_AS(subsample_stability(fx.l, fx.labels, 1.5, 5, 0.01, 1), Error);
  CHECK_THROWS_AS(subsample_stability(fx.l, fx.labels, 0.5, 0, 0.01, 1), Error);
}

TEST_CASE("identical groups compare with unit slope and perfect correlation") {
  Rng rng(45, "cov-dup");
  const int d = 5, half = 24;
  Matrix block(d, half);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < half; ++j) block(i, j) = rng.normal();
  Matrix v(d, 2 * half);
  v.leftCols(half) = block;
  v.rightCols(half) = block;  // controls are a byte-for-byte copy of cases
  const LogAbundanceMatrix l = make_log(v);
  const Labels labels = make_labels(l.samples, half);
  const CovCompareReport r = compare_group_covariances(l, labels, 5, 3);
  CHECK(r.slope == 1.0);
  CHECK(r.r == 1.0);
  CHECK(r.n_pairs == d * (d - 1) / 2);
  const std::string csv = covcompare_csv(r);
  CHECK(csv.find("slope,r,baseline_r_mean,baseline_r_sd,n_pairs") == 0);
}

TEST_CASE("swapping the group roles inverts the slope and keeps r") {
  // no planted shift: both groups draw from one generator, so their
  // covariance estimates agree up to sampling noise and r comes out high
  const GroundTruthModel gt = make_ground_truth(12, 0.3, 47);
  SyntheticSpec s;
  s.n_cases = 220;
  s.n_controls = 180;
  s.seed = 147;
  const Cohort co = generate_cohort(gt, s);
  const Fixture fx{co.log_abundance, co.labels};
  Labels flipped = fx.labels;
  for (auto& [name, grp] : flipped.assignment) grp = grp == Group::CASE ? Group::CONTROL : Group::CASE;
  const CovCompareReport a = compare_group_covariances(fx.l, fx.labels, 4, 5);
  const CovCompareReport b = compare_group_covariances(fx.l, flipped, 4, 5);
  CHECK(a.r == doctest::Approx(b.r).epsilon(1e-14));
  CHECK(a.slope * b.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.n_pairs == b.n_pairs);
  // similar groups from one generator: strong off-diagonal agreement
  CHECK(a.r > 0.5);
  CHECK(std::abs(a.baseline_r_mean) <= 1.0);
}

TEST_CASE("covariance comparison argument checks") {
  Rng rng(48, "cov-args");
  Matrix v(1, 10);
  for (int j = 0; j < 10; ++j) v(0, j) = rng.normal();
  const LogAbundanceMatrix one = make_log(v);
  CHECK_THROWS_AS(compare_group_covariances(one, make_labels(one.samples, 5), 3, 1), Error);
  Matrix v2(3, 3);
  v2.setRandom();
  const LogAbundanceMatrix tiny = make_log(v2);
  CHECK_THROWS_AS(compare_group_covariances(tiny, make_labels(tiny.samples, 1), 3, 1), Error);
}

TEST_CASE("the spectrum sweep brackets the default analysis") {
  const Fixture fx = planted_fixture(10, 60, 45, 49);
  const int n_perm = 300;
  const std::uint64_t seed = 11;
  const SweepReport sweep = lambda_sweep(fx.l, fx.labels, {1, 4, 10}, n_perm, seed);
  REQUIRE(sweep.rows.size() == 3);
  REQUIRE(static_cast<int>(sweep.spectrum.size()) == 10);
  for (std::size_t i = 1; i < sweep.spectrum.size(); ++i) CHECK(sweep.spectrum[i] <= sweep.spectrum[i - 1]);
  for (const auto& row : sweep.rows) CHECK(row.retained == row.requested);

  // the full-rank row reproduces a direct run with the matching cutoff
  const AssociationTable direct =
      daa::daa(fx.l, fx.labels, sweep.rows.back().lambda_min, n_perm, seed);
  int nsig = 0;
  for (const auto& r : direct.rows) nsig += r.significant ? 1 : 0;
  CHECK(sweep.rows.back().n_significant == nsig);

  CHECK(lambda_sweep(fx.l, fx.labels, {}, n_perm, seed).rows.empty());
  CHECK_THROWS_AS(lambda_sweep(fx.l, fx.labels, {0}, n_perm, seed), Error);
  CHECK_THROWS_AS(lambda_sweep(fx.l, fx.labels, {11}, n_perm, seed), Error);

  const std::string csv = sweep_csv(sweep);
  CHECK(csv.find("requested,lambda_min,retained,n_significant") == 0);
  CHECK(csv.find("rank,eigenvalue") != std::string::npos);
}

TEST_CASE("a sweep row at the default cutoff matches the default run exactly") {
  const Fixture fx = planted_fixture(9, 50, 40, 51);
  const int n_perm = 300;
  const std::uint64_t seed = 13;
  const MaxEntModel fitted = fit_model(fx.l, 0.01);
  const SweepReport sweep = lambda_sweep(fx.l, fx.labels, {fitted.retained}, n_perm, seed);
  REQUIRE(sweep.rows.size() == 1);
  const AssociationTable direct = daa::daa(fx.l, fx.labels, 0.01, n_perm, seed);
  int nsig = 0;
  for (const auto& r : direct.rows) nsig += r.significant ? 1 : 0;
  CHECK(sweep.rows[0].retained == fitted.retained);
  CHECK(sweep.rows[0].n_significant == nsig);
}

TEST_CASE("normalization comparison is scheme-faithful") {
  const GroundTruthModel gt = make_ground_truth(8, 0.3, 53);
  SyntheticSpec s;
  s.planted = {{2, 1.2}};
  s.n_cases = 60;
  s.n_controls = 50;
  s.seed = 77;
  const Cohort co = generate_cohort(gt, s);
  const CountMatrix counts = counts_from_log(co.log_abundance, 30000.0);

  const std::vector<Scheme> schemes = {Scheme::TSS, Scheme::CLR};
  const std::vector<int> sizes = {60, 110};
  const int n_perm = 200, repeats = 3;
  const std::uint64_t seed = 15;
  const NormalizationReport r = normalization_comparison(counts, co.labels, schemes, sizes, n_perm, seed, repeats);

  REQUIRE(r.curves.size() == schemes.size() * sizes.size());
  REQUIRE(r.deltas.size() == schemes.size() * 8);

  // TSS rows replicate a hand-run detection curve under the same seed
  const LogAbundanceMatrix tss = log_transform(counts, Scheme::TSS);
  AssocOptions opt;
  opt.n_perm = n_perm;
  opt.seed = seed;
  const auto curve = detection_curve(tss, co.labels, sizes, repeats, Method::DAA, opt);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto& row = r.curves[k];  // TSS block comes first
    CHECK(row.scheme == Scheme::TSS);
    CHECK(row.size == curve[k].size);
    CHECK(row.mean == curve[k].mean);
    CHECK(row.sd == curve[k].sd);
  }
  // full-cohort statistics replicate a direct run per scheme
  const AssociationTable direct = daa::daa(tss, co.labels, 0.01, n_perm, seed);
  for (int i = 0; i < 8; ++i) {
    CHECK(r.deltas[static_cast<std::size_t>(i)].scheme == Scheme::TSS);
    CHECK(r.deltas[static_cast<std::size_t>(i)].taxon == i);
    CHECK(r.deltas[static_cast<std::size_t>(i)].delta_h == direct.rows[static_cast<std::size_t>(i)].statistic);
  }

  const std::string csv = normalization_csv(r);
  CHECK(csv.find("scheme,size,mean,sd") == 0);
  CHECK(csv.find("scheme,taxon,delta_h") != std::string::npos);

  CHECK_THROWS_AS(normalization_comparison(counts, co.labels, {}, sizes, n_perm, seed, repeats), Error);
  CHECK_THROWS_AS(normalization_comparison(counts, co.labels, schemes, sizes, n_perm, seed, 0), Error);
}
