#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "daa/types.hpp"

namespace daa {

struct AssociationRow {
  std::string taxon;
  double statistic = 0.0;  // mean-log difference (NAIVE) or delta h (DAA)
  double p = 1.0;
  double q = 1.0;
  bool significant = false;
  double group_mean_case = 0.0, group_mean_ctrl = 0.0;
  double group_field_case = 0.0, group_field_ctrl = 0.0;  // DAA only
};

struct AssociationTable {
  Method method = Method::NAIVE;
  double alpha = 0.05;
  std::vector<AssociationRow> rows;

  std::vector<int> significant_indices() const;
};

struct AssocOptions {
  int n_perm = 10000;
  double alpha = 0.05;
  double lambda_min = 0.01;  // DAA only
  bool smoothed = true;      // add-one smoothing; false reproduces raw p = #/n_perm
  std::uint64_t seed = 0;
};

AssociationTable naive_mwas(const LogAbundanceMatrix& l, const Labels& labels, int n_perm, std::uint64_t seed,
                            double alpha = 0.05, bool smoothed = true);
AssociationTable daa(const LogAbundanceMatrix& l, const Labels& labels, double lambda_min, int n_perm,
                     std::uint64_t seed, double alpha = 0.05, bool smoothed = true);
AssociationTable run_method(const LogAbundanceMatrix& l, const Labels& labels, Method method, const AssocOptions& opt);

// step-up q-values: q_i = min over j with p_(j) >= p_(i) of p_(j)*m/j, clipped to 1
std::pair<std::vector<double>, std::vector<bool>> bh_fdr(const std::vector<double>& p, double alpha);

// exp(|mean_case - mean_ctrl|) per taxon, always >= 1
std::vector<double> effect_sizes(const LogAbundanceMatrix& l, const Labels& labels);

struct CurvePoint {
  int size = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<int> counts;  // per repeat
};

// stratified subsample at each size, run the method, count significant taxa;
// at the full sample size the caller's seed is passed through unchanged so a
// single repeat reproduces a direct call exactly
std::vector<CurvePoint> detection_curve(const LogAbundanceMatrix& l, const Labels& labels,
                                        const std::vector<int>& sizes, int repeats, Method method,
                                        const AssocOptions& opt);

struct CalibrationReport {
  std::vector<double> sorted_p;
  double ks_distance = 0.0;
};

// global label permutations build a true null; pools per-taxon p-values
CalibrationReport pvalue_calibration(const LogAbundanceMatrix& l, const Labels& labels, Method method,
                                     int n_null_repeats, const AssocOptions& opt);

std::string association_tsv(const AssociationTable& t);

}  // namespace daa
