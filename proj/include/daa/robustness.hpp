#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daa/assoc.hpp"
#include "daa/types.hpp"

namespace daa {

struct StabilityRow {
  std::string quantity;  // "eigenvalue", "h_case", "h_ctrl", "delta_h"
  int index = 0;         // eigenvalue rank (descending) or taxon index
  double mean = 0.0, sd = 0.0;
  double null_mean = 0.0, null_sd = 0.0;
};

struct StabilityReport {
  double fraction = 1.0;
  int repeats = 1;
  std::vector<StabilityRow> rows;
};

// Stratified subsampling (without replacement) of the cohort: refit the
// pooled model per repeat and track the covariance spectrum and per-group
// inferred fields. The null band repeats the same measurement on label-blind
// bootstrap cohorts (resampled with replacement, groups split at random
// with the same sizes).
StabilityReport subsample_stability(const LogAbundanceMatrix& l, const Labels& labels, double fraction,
                                    int repeats, double lambda_min, std::uint64_t seed);

struct CovCompareReport {
  double slope = 0.0;  // reduced major axis: sign(r) * sd_case / sd_ctrl
  double r = 0.0;      // Pearson correlation of off-diagonal covariances
  double baseline_r_mean = 0.0;  // same statistic on random label-blind splits
  double baseline_r_sd = 0.0;
  int n_pairs = 0;
};

CovCompareReport compare_group_covariances(const LogAbundanceMatrix& l, const Labels& labels, int repeats,
                                           std::uint64_t seed);

struct SweepRow {
  int requested = 0;       // retained-component target
  double lambda_min = 0.0; // cutoff that realizes it
  int retained = 0;        // actually retained
  int n_significant = 0;
};

struct SweepReport {
  std::vector<double> spectrum;  // pooled covariance eigenvalues, descending
  std::vector<SweepRow> rows;
};

// Rerun the association test while truncating the covariance spectrum to
// each requested number of retained components. All rows share the caller's
// seed, so row-to-row differences reflect the cutoff alone.
SweepReport lambda_sweep(const LogAbundanceMatrix& l, const Labels& labels,
                         const std::vector<int>& retained_counts, int n_perm, std::uint64_t seed);

struct NormCurveRow {
  Scheme scheme = Scheme::TSS;
  int size = 0;
  double mean = 0.0, sd = 0.0;
};

struct NormDeltaRow {
  Scheme scheme = Scheme::TSS;
  int taxon = 0;
  double delta_h = 0.0;
};

struct NormalizationReport {
  std::vector<NormCurveRow> curves;
  std::vector<NormDeltaRow> deltas;  // full-cohort statistic per taxon and scheme
};

// Run the detection curve under each normalization scheme (same seed, so
// differences are attributable to the scheme), plus the full-cohort
// per-taxon statistics for a direct scheme-to-scheme comparison.
NormalizationReport normalization_comparison(const CountMatrix& counts, const Labels& labels,
                                             const std::vector<Scheme>& schemes, const std::vector<int>& sizes,
                                             int n_perm, std::uint64_t seed, int repeats);

std::string stability_csv(const StabilityReport& report);
std::string covcompare_csv(const CovCompareReport& report);
std::string sweep_csv(const SweepReport& report);
std::string normalization_csv(const NormalizationReport& report);

}  // namespace daa
