#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daa/types.hpp"

namespace daa {

struct LogisticModel {
  Vector w;
  double b = 0.0;
  int iterations = 0;
  bool converged = false;
};

// L1-regularized logistic regression, minimizing
//   (1/n) sum log(1 + exp(-y_i (w x_i + b))) + penalty * ||w||_1
// by accelerated proximal gradient. X is n x p (row = sample); the intercept
// is unpenalized. Converged when the prox-gradient residual's max-norm is
// at most tol. Errors on a single-class y or non-finite entries.
LogisticModel l1_logistic_fit(const Matrix& X, const std::vector<std::uint8_t>& y, double penalty,
                              int max_iter = 20000, double tol = 1e-6);

struct CVReport {
  std::vector<int> feature_subset;      // taxon indices used
  std::vector<double> fold_accuracies;  // repeats * folds values, repeat-major
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
  double penalty = 0.0;                 // the penalty actually used
  std::vector<int> selected_features;   // nonzero-weight taxa of a full-data fit
};

// Repeated stratified k-fold cross-validation of the L1-logistic classifier
// on the given taxa. Folds are dealt round-robin within each class after a
// seeded shuffle; features are standardized on each training split. Pass
// penalty <= 0 to pick it from an internal ladder: the largest penalty whose
// mean accuracy is within 0.005 of the ladder's best (the sparse end of the
// accuracy plateau).
CVReport cross_validate(const LogAbundanceMatrix& l, const Labels& labels, const std::vector<int>& subset,
                        int folds, int repeats, double penalty, std::uint64_t seed);

std::string cv_report_json(const std::string& name, const CVReport& report);
std::string cv_table_csv(const std::vector<std::pair<std::string, CVReport>>& reports);

}  // namespace daa
