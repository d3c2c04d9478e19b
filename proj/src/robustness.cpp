#include "daa/robustness.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "daa/io_util.hpp"
#include "daa/kernels.hpp"
#include "daa/maxent.hpp"
#include "daa/numeric.hpp"
#include "daa/rng.hpp"
#include "daa/transform.hpp"

namespace daa {

namespace {

struct GroupIdx {
  std::vector<std::uint8_t> mask;
  std::vector<int> cases, ctrls;
};

GroupIdx split_groups(const LogAbundanceMatrix& l, const Labels& labels) {
  GroupIdx g;
  g.mask = case_mask(labels, l.samples);
  for (int j = 0; j < static_cast<int>(g.mask.size()); ++j)
    (g.mask[static_cast<std::size_t>(j)] ? g.cases : g.ctrls).push_back(j);
  return g;
}

LogAbundanceMatrix take_columns(const LogAbundanceMatrix& l, const std::vector<int>& cols) {
  LogAbundanceMatrix sub = l;
  sub.values.resize(l.values.rows(), static_cast<int>(cols.size()));
  sub.samples.clear();
  for (std::size_t t = 0; t < cols.size(); ++t) {
    sub.values.col(static_cast<int>(t)) = l.values.col(cols[t]);
    sub.samples.push_back(l.samples[static_cast<std::size_t>(cols[t])]);
  }
  return sub;
}

// spectrum (descending), h_case, h_ctrl, delta_h of one (sub)cohort
struct FitQuantities {
  Vector spectrum, h_case, h_ctrl, delta_h;
};

FitQuantities fit_quantities(const Matrix& X, const std::vector<std::uint8_t>& mask, double lambda_min) {
  const int d = static_cast<int>(X.rows()), n = static_cast<int>(X.cols());
  FitQuantities out;
  const Vector mu = X.rowwise().mean();
  const Matrix centered = X.colwise() - mu;
  Matrix C = centered * centered.transpose() / static_cast<double>(n - 1);
  C = ((C + C.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  if (es.info() != Eigen::Success) throw Error("subsample_stability: eigensolver failed");
  out.spectrum = es.eigenvalues().reverse();
  const auto [J, retained] = pseudo_inverse(C, lambda_min);
  (void)retained;
  Vector sc = Vector::Zero(d), st = Vector::Zero(d);
  int n1 = 0;
  for (int j = 0; j < n; ++j) {
    if (mask[static_cast<std::size_t>(j)]) {
      sc += X.col(j);
      ++n1;
    } else {
      st += X.col(j);
    }
  }
  const int n2 = n - n1;
  if (n1 == 0 || n2 == 0) throw Error("subsample_stability: a group is empty");
  out.h_case = J * (sc / static_cast<double>(n1));
  out.h_ctrl = J * (st / static_cast<double>(n2));
  out.delta_h = J * (sc / static_cast<double>(n1) - st / static_cast<double>(n2));
  return out;
}

void summarize(const std::vector<FitQuantities>& reps, const std::vector<FitQuantities>& nulls,
               StabilityReport& report) {
  const int d = static_cast<int>(reps.front().spectrum.size());
  auto emit = [&](const std::string& quantity, auto getter) {
    for (int i = 0; i < d; ++i) {
      std::vector<double> v, nv;
      for (const auto& r : reps) v.push_back(getter(r)[i]);
      for (const auto& r : nulls) nv.push_back(getter(r)[i]);
      const auto [mu, sd] = mean_sd(v);
      const auto [nmu, nsd] = mean_sd(nv);
      report.rows.push_back({quantity, i, mu, sd, nmu, nsd});
    }
  };
  emit("eigenvalue", [](const FitQuantities& r) -> const Vector& { return r.spectrum; });
  emit("h_case", [](const FitQuantities& r) -> const Vector& { return r.h_case; });
  emit("h_ctrl", [](const FitQuantities& r) -> const Vector& { return r.h_ctrl; });
  emit("delta_h", [](const FitQuantities& r) -> const Vector& { return r.delta_h; });
}

}  // namespace

StabilityReport subsample_stability(const LogAbundanceMatrix& l, const Labels& labels, double fraction,
                                    int repeats, double lambda_min, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) throw Error("subsample_stability: fraction must be in (0, 1]");
  if (repeats < 1) throw Error("subsample_stability: repeats must be positive");
  const GroupIdx g = split_groups(l, labels);
  const int n = static_cast<int>(g.mask.size());
  const int n1 = static_cast<int>(g.cases.size()), n2 = static_cast<int>(g.ctrls.size());
  int n1_s = std::clamp(static_cast<int>(std::llround(fraction * n1)), 1, n1);
  int n2_s = std::clamp(static_cast<int>(std::llround(fraction * n2)), 1, n2);
  if (n1_s + n2_s < 3) throw Error("subsample_stability: subsample too small");

  std::vector<FitQuantities> reps, nulls;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(seed, "stab", static_cast<std::uint64_t>(r));
    std::vector<int> pc = rng.partial_shuffle(n1, n1_s);
    std::vector<int> pt = rng.partial_shuffle(n2, n2_s);
    // canonical column order: the estimate depends on the set, not the draw
    // order, and a full-fraction subsample reproduces the cohort bit-exactly
    std::sort(pc.begin(), pc.end());
    std::sort(pt.begin(), pt.end());
    std::vector<int> cols;
    std::vector<std::uint8_t> mask;
    for (int t = 0; t < n1_s; ++t) cols.push_back(g.cases[static_cast<std::size_t>(pc[static_cast<std::size_t>(t)])]);
    for (int t = 0; t < n2_s; ++t) cols.push_back(g.ctrls[static_cast<std::size_t>(pt[static_cast<std::size_t>(t)])]);
    Matrix X(l.values.rows(), n1_s + n2_s);
    for (std::size_t t = 0; t < cols.size(); ++t) {
      X.col(static_cast<int>(t)) = l.values.col(cols[t]);
      mask.push_back(static_cast<std::size_t>(t) < static_cast<std::size_t>(n1_s) ? 1 : 0);
    }
    reps.push_back(fit_quantities(X, mask, lambda_min));

    // label-blind bootstrap with the same group sizes
    Rng nrng(seed, "stab-null", static_cast<std::uint64_t>(r));
    Matrix Xn(l.values.rows(), n1_s + n2_s);
    for (int t = 0; t < n1_s + n2_s; ++t)
      Xn.col(t) = l.values.col(static_cast<int>(nrng.bounded(static_cast<std::uint64_t>(n))));
    nulls.push_back(fit_quantities(Xn, mask, lambda_min));
  }

  StabilityReport report;
  report.fraction = fraction;
  report.repeats = repeats;
  summarize(reps, nulls, report);
  return report;
}

CovCompareReport compare_group_covariances(const LogAbundanceMatrix& l, const Labels& labels, int repeats,
                                           std::uint64_t seed) {
  const GroupIdx g = split_groups(l, labels);
  const int d = static_cast<int>(l.values.rows());
  if (g.cases.size() < 2 || g.ctrls.size() < 2)
    throw Error("compare_group_covariances: each group needs at least 2 samples");
  if (d < 2) throw Error("compare_group_covariances: need at least 2 taxa");

  auto offdiag = [&](const std::vector<int>& cols) {
    const LogAbundanceMatrix sub = take_columns(l, cols);
    const auto [mu, C] = estimate_moments(sub);
    (void)mu;
    std::vector<double> v;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) v.push_back(C(i, j));
    return v;
  };

  const std::vector<double> vc = offdiag(g.cases);
  const std::vector<double> vt = offdiag(g.ctrls);

  CovCompareReport rep;
  rep.n_pairs = static_cast<int>(vc.size());
  rep.r = pearson(vc, vt);
  const double sdc = mean_sd(vc).second, sdt = mean_sd(vt).second;
  if (sdt == 0.0) throw Error("compare_group_covariances: control covariances are degenerate");
  rep.slope = (rep.r < 0.0 ? -1.0 : 1.0) * sdc / sdt;

  const int n = static_cast<int>(g.mask.size());
  const int n1 = static_cast<int>(g.cases.size());
  std::vector<double> base;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(seed, "covsplit", static_cast<std::uint64_t>(r));
    const std::vector<int> perm = rng.permutation(n);
    std::vector<int> a(perm.begin(), perm.begin() + n1), b(perm.begin() + n1, perm.end());
    base.push_back(pearson(offdiag(a), offdiag(b)));
  }
  const auto [bm, bs] = mean_sd(base);
  rep.baseline_r_mean = bm;
  rep.baseline_r_sd = bs;
  return rep;
}

SweepReport lambda_sweep(const LogAbundanceMatrix& l, const Labels& labels, const std::vector<int>& retained_counts,
                         int n_perm, std::uint64_t seed) {
  SweepReport report;
  const auto [mu, C] = estimate_moments(l);
  (void)mu;
  Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  if (es.info() != Eigen::Success) throw Error("lambda_sweep: eigensolver failed");
  const Vector evals = es.eigenvalues();  // ascending
  const int d = static_cast<int>(evals.size());
  report.spectrum.assign(d, 0.0);
  for (int i = 0; i < d; ++i) report.spectrum[static_cast<std::size_t>(i)] = evals[d - 1 - i];

  for (int k : retained_counts) {
    if (k < 1 || k > d) throw Error("lambda_sweep: retained count out of range");
    // smallest retained eigenvalue is evals[d-k]; cut below it
    double lam;
    if (k == d) {
      lam = evals[0] - std::abs(evals[0]) * 1e-9 - 1e-300;
    } else {
      lam = (evals[d - k] + evals[d - k - 1]) / 2.0;
    }
    const AssociationTable t = daa(l, labels, lam, n_perm, seed);
    const auto [J, retained] = pseudo_inverse(C, lam);
    (void)J;
    int n_sig = 0;
    for (const auto& row : t.rows) n_sig += row.significant ? 1 : 0;
    report.rows.push_back({k, lam, retained, n_sig});
  }
  return report;
}

NormalizationReport normalization_comparison(const CountMatrix& counts, const Labels& labels,
                                             const std::vector<Scheme>& schemes, const std::vector<int>& sizes,
                                             int n_perm, std::uint64_t seed, int repeats) {
  if (schemes.empty()) throw Error("normalization_comparison: scheme list is empty");
  if (sizes.empty()) throw Error("normalization_comparison: size list is empty");
  if (repeats < 1) throw Error("normalization_comparison: repeats must be positive");
  if (n_perm < 1) throw Error("normalization_comparison: n_perm must be positive");
  NormalizationReport report;
  AssocOptions opt;
  opt.n_perm = n_perm;
  opt.seed = seed;
  for (Scheme s : schemes) {
    const LogAbundanceMatrix l = log_transform(counts, s);
    const auto curve = detection_curve(l, labels, sizes, repeats, Method::DAA, opt);
    for (const auto& pt : curve) report.curves.push_back({s, pt.size, pt.mean, pt.sd});
    const AssociationTable full = daa(l, labels, opt.lambda_min, n_perm, seed);
    for (int i = 0; i < static_cast<int>(full.rows.size()); ++i)
      report.deltas.push_back({s, i, full.rows[static_cast<std::size_t>(i)].statistic});
  }
  return report;
}

std::string stability_csv(const StabilityReport& report) {
  std::ostringstream os;
  os << "quantity,index,mean,sd,null_mean,null_sd\n";
  for (const auto& r : report.rows)
    os << r.quantity << ',' << r.index << ',' << fmt_g(r.mean) << ',' << fmt_g(r.sd) << ',' << fmt_g(r.null_mean)
       << ',' << fmt_g(r.null_sd) << '\n';
  return os.str();
}

std::string covcompare_csv(const CovCompareReport& report) {
  std::ostringstream os;
  os << "slope,r,baseline_r_mean,baseline_r_sd,n_pairs\n";
  os << fmt_g(report.slope) << ',' << fmt_g(report.r) << ',' << fmt_g(report.baseline_r_mean) << ','
     << fmt_g(report.baseline_r_sd) << ',' << report.n_pairs << '\n';
  return os.str();
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "requested,lambda_min,retained,n_significant\n";
  for (const auto& r : report.rows)
    os << r.requested << ',' << fmt_g(r.lambda_min) << ',' << r.retained << ',' << r.n_significant << '\n';
  os << "\nrank,eigenvalue\n";
  for (std::size_t i = 0; i < report.spectrum.size(); ++i) os << i << ',' << fmt_g(report.spectrum[i]) << '\n';
  return os.str();
}

std::string normalization_csv(const NormalizationReport& report) {
  std::ostringstream os;
  os << "scheme,size,mean,sd\n";
  for (const auto& r : report.curves)
    os << to_string(r.scheme) << ',' << r.size << ',' << fmt_g(r.mean) << ',' << fmt_g(r.sd) << '\n';
  os << "\nscheme,taxon,delta_h\n";
  for (const auto& r : report.deltas)
    os << to_string(r.scheme) << ',' << r.taxon << ',' << fmt_g(r.delta_h) << '\n';
  return os.str();
}

}  // namespace daa
