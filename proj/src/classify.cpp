#include "daa/classify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "daa/io_util.hpp"
#include "daa/numeric.hpp"
#include "daa/rng.hpp"

namespace daa {

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// mean logistic loss gradient at (w, b); returns loss, fills grad_w/grad_b
double logistic_grad(const Matrix& X, const Vector& ypm, const Vector& w, double b, Vector& grad_w,
                     double& grad_b) {
  const int n = static_cast<int>(X.rows());
  const Vector score = X * w + Vector::Constant(n, b);
  double loss = 0.0;
  Vector r(n);
  for (int i = 0; i < n; ++i) {
    const double z = ypm[i] * score[i];
    // stable log(1+exp(-z)) and sigma(-z)
    if (z > 0) {
      const double e = std::exp(-z);
      loss += std::log1p(e);
      r[i] = -ypm[i] * e / (1.0 + e);
    } else {
      const double e = std::exp(z);
      loss += -z + std::log1p(e);
      r[i] = -ypm[i] / (1.0 + e);
    }
  }
  grad_w = X.transpose() * r / static_cast<double>(n);
  grad_b = r.sum() / static_cast<double>(n);
  return loss / static_cast<double>(n);
}

}  // namespace

LogisticModel l1_logistic_fit(const Matrix& X, const std::vector<std::uint8_t>& y, double penalty, int max_iter,
                              double tol) {
  const int n = static_cast<int>(X.rows()), p = static_cast<int>(X.cols());
  if (n < 1 || p < 1) throw Error("l1_logistic_fit: empty design matrix");
  if (static_cast<int>(y.size()) != n) throw Error("l1_logistic_fit: label count mismatch");
  if (!X.allFinite()) throw Error("l1_logistic_fit: non-finite feature value");
  if (penalty < 0.0) throw Error("l1_logistic_fit: penalty must be non-negative");
  int n1 = 0;
  for (auto v : y) n1 += v ? 1 : 0;
  if (n1 == 0 || n1 == n) throw Error("l1_logistic_fit: labels contain a single class");

  Vector ypm(n);
  for (int i = 0; i < n; ++i) ypm[i] = y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;

  // Lipschitz constant of the mean-loss gradient over (w, b) jointly: treat
  // the intercept as a constant feature of 1.
  Matrix Xa(n, p + 1);
  Xa.leftCols(p) = X;
  Xa.col(p).setOnes();
  Eigen::SelfAdjointEigenSolver<Matrix> es(Xa.transpose() * Xa);
  if (es.info() != Eigen::Success) throw Error("l1_logistic_fit: eigensolver failed");
  const double L = std::max(0.25 * es.eigenvalues().maxCoeff() / static_cast<double>(n), 1e-12);

  LogisticModel model;
  model.w = Vector::Zero(p);
  Vector w = Vector::Zero(p);
  double b = 0.0, t_acc = 1.0;
  Vector vw = w;
  double vb = b;
  Vector grad_w(p);
  double grad_b = 0.0;

  for (int it = 0; it < max_iter; ++it) {
    logistic_grad(X, ypm, vw, vb, grad_w, grad_b);
    Vector w_new(p);
    for (int j = 0; j < p; ++j) w_new[j] = soft_threshold(vw[j] - grad_w[j] / L, penalty / L);
    const double b_new = vb - grad_b / L;

    // prox-gradient residual at the new point
    logistic_grad(X, ypm, w_new, b_new, grad_w, grad_b);
    double res = std::abs(grad_b);
    for (int j = 0; j < p; ++j) {
      const double stepped = soft_threshold(w_new[j] - grad_w[j] / L, penalty / L);
      res = std::max(res, L * std::abs(w_new[j] - stepped));
    }

    // extrapolate off the step just taken (w still holds the previous iterate)
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc)) / 2.0;
    const double mom = (t_acc - 1.0) / t_next;
    vw = w_new + mom * (w_new - w);
    vb = b_new + mom * (b_new - b);
    w = w_new;
    b = b_new;
    t_acc = t_next;
    model.iterations = it + 1;
    if (res <= tol) {
      model.converged = true;
      break;
    }
  }
  model.w = w;
  model.b = b;
  return model;
}

namespace {

struct CvDesign {
  Matrix X;                       // n x p, rows in sample order
  std::vector<std::uint8_t> y;    // 1 = case
  std::vector<int> case_idx, ctrl_idx;
};

CvDesign build_design(const LogAbundanceMatrix& l, const Labels& labels, const std::vector<int>& subset) {
  if (subset.empty()) throw Error("cross_validate: empty feature subset");
  const int d = static_cast<int>(l.values.rows()), n = static_cast<int>(l.values.cols());
  for (int f : subset)
    if (f < 0 || f >= d) throw Error("cross_validate: feature index out of range");
  CvDesign dz;
  dz.y = case_mask(labels, l.samples);
  dz.X.resize(n, static_cast<int>(subset.size()));
  for (std::size_t c = 0; c < subset.size(); ++c) dz.X.col(static_cast<int>(c)) = l.values.row(subset[c]).transpose();
  for (int i = 0; i < n; ++i) (dz.y[static_cast<std::size_t>(i)] ? dz.case_idx : dz.ctrl_idx).push_back(i);
  return dz;
}

// standardize columns of train in place, apply the same transform to test
void standardize(Matrix& train, Matrix& test) {
  for (int j = 0; j < train.cols(); ++j) {
    const double mu = train.col(j).mean();
    const int n = static_cast<int>(train.rows());
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (train(i, j) - mu) * (train(i, j) - mu);
    double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    if (sd < 1e-12) sd = 1.0;
    train.col(j) = (train.col(j).array() - mu) / sd;
    test.col(j) = (test.col(j).array() - mu) / sd;
  }
}

double run_folds(const CvDesign& dz, int folds, int repeats, double penalty, std::uint64_t seed,
                 std::vector<double>* out_acc) {
  const int n = static_cast<int>(dz.X.rows());
  std::vector<double> acc(static_cast<std::size_t>(repeats * folds), 0.0);
#pragma omp parallel for schedule(dynamic) collapse(2) if (repeats * folds > 1)
  for (int rep = 0; rep < repeats; ++rep) {
    for (int f = 0; f < folds; ++f) {
      // fold assignment: seeded shuffle within each class, dealt round-robin
      Rng rng(seed, "cv", static_cast<std::uint64_t>(rep));
      const std::vector<int> pc = rng.permutation(static_cast<int>(dz.case_idx.size()));
      const std::vector<int> pt = rng.permutation(static_cast<int>(dz.ctrl_idx.size()));
      std::vector<int> fold_of(static_cast<std::size_t>(n), 0);
      for (std::size_t t = 0; t < pc.size(); ++t)
        fold_of[static_cast<std::size_t>(dz.case_idx[static_cast<std::size_t>(pc[t])])] =
            static_cast<int>(t) % folds;
      for (std::size_t t = 0; t < pt.size(); ++t)
        fold_of[static_cast<std::size_t>(dz.ctrl_idx[static_cast<std::size_t>(pt[t])])] =
            static_cast<int>(t) % folds;

      std::vector<int> train_rows, test_rows;
      for (int i = 0; i < n; ++i) (fold_of[static_cast<std::size_t>(i)] == f ? test_rows : train_rows).push_back(i);
      Matrix Xtr(static_cast<int>(train_rows.size()), dz.X.cols());
      Matrix Xte(static_cast<int>(test_rows.size()), dz.X.cols());
      std::vector<std::uint8_t> ytr;
      for (std::size_t t = 0; t < train_rows.size(); ++t) {
        Xtr.row(static_cast<int>(t)) = dz.X.row(train_rows[t]);
        ytr.push_back(dz.y[static_cast<std::size_t>(train_rows[t])]);
      }
      for (std::size_t t = 0; t < test_rows.size(); ++t) Xte.row(static_cast<int>(t)) = dz.X.row(test_rows[t]);
      standardize(Xtr, Xte);
      const LogisticModel mod = l1_logistic_fit(Xtr, ytr, penalty);
      int correct = 0;
      for (std::size_t t = 0; t < test_rows.size(); ++t) {
        const double score = Xte.row(static_cast<int>(t)).dot(mod.w) + mod.b;
        const bool pred_case = score > 0.0;
        if (pred_case == (dz.y[static_cast<std::size_t>(test_rows[t])] != 0)) ++correct;
      }
      acc[static_cast<std::size_t>(rep * folds + f)] =
          test_rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_rows.size());
    }
  }
  if (out_acc) *out_acc = acc;
  return mean_sd(acc).first;
}

}  // namespace

CVReport cross_validate(const LogAbundanceMatrix& l, const Labels& labels, const std::vector<int>& subset,
                        int folds, int repeats, double penalty, std::uint64_t seed) {
  CvDesign dz = build_design(l, labels, subset);
  if (folds < 2) throw Error("cross_validate: need at least 2 folds");
  if (repeats < 1) throw Error("cross_validate: repeats must be positive");
  const int minority = static_cast<int>(std::min(dz.case_idx.size(), dz.ctrl_idx.size()));
  if (folds > minority) throw Error("cross_validate: more folds than minority-class samples");

  CVReport rep;
  rep.feature_subset = subset;

  double chosen = penalty;
  if (!(penalty > 0.0)) {
    // ladder anchored at the smallest penalty that zeroes all weights
    Vector ypm(dz.X.rows());
    for (int i = 0; i < dz.X.rows(); ++i) ypm[i] = dz.y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    const double ybar = (ypm.array() > 0).cast<double>().mean();
    const Vector r0 = (Vector::Constant(dz.X.rows(), ybar) -
                       (ypm.array() > 0).cast<double>().matrix());
    Matrix Xs = dz.X, dummy = dz.X;
    standardize(Xs, dummy);
    const double lam_max =
        (Xs.transpose() * r0).cwiseAbs().maxCoeff() / static_cast<double>(dz.X.rows());
    std::vector<double> ladder;
    for (int k = 1; k <= 8; ++k) ladder.push_back(std::max(lam_max, 1e-6) / std::pow(2.0, k));
    std::vector<double> means;
    for (double lam : ladder) means.push_back(run_folds(dz, folds, repeats, lam, seed, nullptr));
    const double best = *std::max_element(means.begin(), means.end());
    chosen = ladder.front();
    for (std::size_t k = 0; k < ladder.size(); ++k)
      if (means[k] >= best - 0.005) {
        chosen = ladder[k];  // ladder is sorted largest-first
        break;
      }
  }
  rep.penalty = chosen;
  run_folds(dz, folds, repeats, chosen, seed, &rep.fold_accuracies);
  const auto [mu, sd] = mean_sd(rep.fold_accuracies);
  rep.mean_accuracy = mu;
  rep.sd_accuracy = sd;

  // selected features: nonzero weights of a full-data fit
  Matrix Xs = dz.X, dummy = dz.X;
  standardize(Xs, dummy);
  const LogisticModel full = l1_logistic_fit(Xs, dz.y, chosen);
  for (std::size_t c = 0; c < subset.size(); ++c)
    if (full.w[static_cast<int>(c)] != 0.0) rep.selected_features.push_back(subset[c]);
  return rep;
}

std::string cv_report_json(const std::string& name, const CVReport& report) {
  std::ostringstream os;
  os << "{\n  \"name\": \"" << name << "\",\n  \"feature_subset\": [";
  for (std::size_t k = 0; k < report.feature_subset.size(); ++k)
    os << (k ? ", " : "") << report.feature_subset[k];
  os << "],\n  \"penalty\": " << fmt_g17(report.penalty) << ",\n  \"mean_accuracy\": "
     << fmt_g17(report.mean_accuracy) << ",\n  \"sd_accuracy\": " << fmt_g17(report.sd_accuracy)
     << ",\n  \"fold_accuracies\": [";
  for (std::size_t k = 0; k < report.fold_accuracies.size(); ++k)
    os << (k ? ", " : "") << fmt_g17(report.fold_accuracies[k]);
  os << "],\n  \"selected_features\": [";
  for (std::size_t k = 0; k < report.selected_features.size(); ++k)
    os << (k ? ", " : "") << report.selected_features[k];
  os << "]\n}\n";
  return os.str();
}

std::string cv_table_csv(const std::vector<std::pair<std::string, CVReport>>& reports) {
  std::ostringstream os;
  os << "subset_name,n_features,mean_accuracy,sd_accuracy,penalty,n_selected\n";
  for (const auto& [name, r] : reports) {
    os << name << ',' << r.feature_subset.size() << ',' << fmt_g(r.mean_accuracy) << ',' << fmt_g(r.sd_accuracy)
       << ',' << fmt_g(r.penalty) << ',' << r.selected_features.size() << '\n';
  }
  return os.str();
}

}  // namespace daa
