#include "daa/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "daa/io_util.hpp"
#include "daa/kernels.hpp"
#include "daa/maxent.hpp"
#include "daa/numeric.hpp"
#include "daa/rng.hpp"

namespace daa {

std::vector<int> AssociationTable::significant_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(rows.size()); ++i)
    if (rows[static_cast<std::size_t>(i)].significant) out.push_back(i);
  return out;
}

std::pair<std::vector<double>, std::vector<bool>> bh_fdr(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  std::vector<double> q(m, 0.0);
  std::vector<bool> sig(m, false);
  if (m == 0) return {q, sig};
  for (double v : p)
    if (!(v > 0.0) || !(v <= 1.0)) throw Error("bh_fdr: p-values must lie in (0, 1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  // Step-up: running minimum of p_(j) * m / j from the largest rank down.
  double running = 1.0;
  std::vector<double> q_sorted(m);
  for (std::size_t r = m; r-- > 0;) {
    const double adj = p[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
    running = std::min(running, adj);
    q_sorted[r] = running;
  }
  for (std::size_t r = 0; r < m; ++r) {
    q[order[r]] = q_sorted[r];
    sig[order[r]] = q_sorted[r] < alpha;
  }
  return {q, sig};
}

namespace {

struct GroupStats {
  std::vector<std::uint8_t> mask;
  int n1 = 0, n2 = 0;
  Vector mean_case, mean_ctrl;
};

GroupStats group_stats(const LogAbundanceMatrix& l, const Labels& labels) {
  GroupStats g;
  g.mask = case_mask(labels, l.samples);
  const int d = static_cast<int>(l.values.rows()), n = static_cast<int>(l.values.cols());
  Vector sc = Vector::Zero(d), st = Vector::Zero(d);
  for (int j = 0; j < n; ++j) {
    if (g.mask[static_cast<std::size_t>(j)]) {
      sc += l.values.col(j);
      ++g.n1;
    } else {
      st += l.values.col(j);
      ++g.n2;
    }
  }
  g.mean_case = sc / static_cast<double>(g.n1);
  g.mean_ctrl = st / static_cast<double>(g.n2);
  return g;
}

std::vector<double> pvals_from_counts(const std::vector<std::int64_t>& cnt, int n_perm, bool smoothed) {
  std::vector<double> p(cnt.size());
  for (std::size_t i = 0; i < cnt.size(); ++i) {
    if (smoothed) {
      p[i] = (1.0 + static_cast<double>(cnt[i])) / (static_cast<double>(n_perm) + 1.0);
    } else {
      // The unsmoothed estimate can be 0; keep it strictly positive so the
      // table invariant p in (0, 1] holds even in that degenerate case.
      const std::int64_t c = std::max<std::int64_t>(cnt[i], 1);
      p[i] = static_cast<double>(c) / static_cast<double>(n_perm);
    }
  }
  return p;
}

AssociationTable build_table(const LogAbundanceMatrix& l, const GroupStats& g, Method method, const Vector& stat,
                             const std::vector<double>& p, double alpha, const Vector* h_case, const Vector* h_ctrl) {
  AssociationTable t;
  t.method = method;
  t.alpha = alpha;
  auto [q, sig] = bh_fdr(p, alpha);
  const int d = static_cast<int>(stat.size());
  t.rows.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    AssociationRow& r = t.rows[static_cast<std::size_t>(i)];
    r.taxon = l.taxa[static_cast<std::size_t>(i)];
    r.statistic = stat[i];
    r.p = p[static_cast<std::size_t>(i)];
    r.q = q[static_cast<std::size_t>(i)];
    r.significant = sig[static_cast<std::size_t>(i)];
    r.group_mean_case = g.mean_case[i];
    r.group_mean_ctrl = g.mean_ctrl[i];
    r.group_field_case = h_case ? (*h_case)[i] : 0.0;
    r.group_field_ctrl = h_ctrl ? (*h_ctrl)[i] : 0.0;
  }
  return t;
}

}  // namespace

AssociationTable naive_mwas(const LogAbundanceMatrix& l, const Labels& labels, int n_perm, std::uint64_t seed,
                            double alpha, bool smoothed) {
  if (n_perm < 1) throw Error("naive_mwas: n_perm must be positive");
  const GroupStats g = group_stats(l, labels);
  const Vector stat = mean_diff(l.values, g.mask);
  const auto cnt = perm_exceedances(l.values, g.n1, nullptr, stat, n_perm, seed);
  const auto p = pvals_from_counts(cnt, n_perm, smoothed);
  return build_table(l, g, Method::NAIVE, stat, p, alpha, nullptr, nullptr);
}

AssociationTable daa(const LogAbundanceMatrix& l, const Labels& labels, double lambda_min, int n_perm,
                     std::uint64_t seed, double alpha, bool smoothed) {
  if (n_perm < 1) throw Error("daa: n_perm must be positive");
  const GroupStats g = group_stats(l, labels);
  // The interaction matrix is inferred once from the pooled cohort,
  // label-blind, and held fixed across all permutations.
  const MaxEntModel model = fit_model(l, lambda_min);
  if (model.retained == 0) throw Error("daa: covariance spectrum is degenerate (no retained components)");
  const Vector dm = mean_diff(l.values, g.mask);
  const Vector stat = model.J * dm;
  const Vector h_case = model.J * g.mean_case;
  const Vector h_ctrl = model.J * g.mean_ctrl;
  const auto cnt = perm_exceedances(l.values, g.n1, &model.J, stat, n_perm, seed);
  const auto p = pvals_from_counts(cnt, n_perm, smoothed);
  return build_table(l, g, Method::DAA, stat, p, alpha, &h_case, &h_ctrl);
}

AssociationTable run_method(const LogAbundanceMatrix& l, const Labels& labels, Method method,
                            const AssocOptions& opt) {
  if (method == Method::DAA)
    return daa(l, labels, opt.lambda_min, opt.n_perm, opt.seed, opt.alpha, opt.smoothed);
  return naive_mwas(l, labels, opt.n_perm, opt.seed, opt.alpha, opt.smoothed);
}

std::vector<double> effect_sizes(const LogAbundanceMatrix& l, const Labels& labels) {
  const GroupStats g = group_stats(l, labels);
  const Vector dm = mean_diff(l.values, g.mask);
  std::vector<double> out(static_cast<std::size_t>(dm.size()));
  for (int i = 0; i < dm.size(); ++i) out[static_cast<std::size_t>(i)] = std::exp(std::abs(dm[i]));
  return out;
}

std::vector<CurvePoint> detection_curve(const LogAbundanceMatrix& l, const Labels& labels,
                                        const std::vector<int>& sizes, int repeats, Method method,
                                        const AssocOptions& opt) {
  if (repeats < 1) throw Error("detection_curve: repeats must be positive");
  const GroupStats g = group_stats(l, labels);
  const int n = static_cast<int>(l.values.cols());
  std::vector<int> case_idx, ctrl_idx;
  for (int j = 0; j < n; ++j) (g.mask[static_cast<std::size_t>(j)] ? case_idx : ctrl_idx).push_back(j);

  std::vector<CurvePoint> out;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int size = sizes[si];
    if (size < 2 || size > n) throw Error("detection_curve: subsample size out of range");
    CurvePoint pt;
    pt.size = size;
    for (int rep = 0; rep < repeats; ++rep) {
      LogAbundanceMatrix sub = l;
      Labels sub_labels = labels;
      AssocOptions run_opt = opt;
      if (size == n) {
        // Full-size points reuse the cohort and the caller's seed verbatim,
        // so they reproduce a direct run of the method exactly.
      } else {
        int n1_s = static_cast<int>(std::llround(static_cast<double>(size) * g.n1 / static_cast<double>(n)));
        n1_s = std::max(1, std::min({n1_s, g.n1, size - 1}));
        int n2_s = size - n1_s;
        if (n2_s > g.n2) {
          n1_s += n2_s - g.n2;
          n2_s = g.n2;
        }
        Rng rng(opt.seed, "curve-sub", static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(rep));
        const std::vector<int> pick_c = rng.partial_shuffle(g.n1, n1_s);
        const std::vector<int> pick_t = rng.partial_shuffle(g.n2, n2_s);
        std::vector<int> cols;
        cols.reserve(static_cast<std::size_t>(size));
        for (int t = 0; t < n1_s; ++t) cols.push_back(case_idx[static_cast<std::size_t>(pick_c[static_cast<std::size_t>(t)])]);
        for (int t = 0; t < n2_s; ++t) cols.push_back(ctrl_idx[static_cast<std::size_t>(pick_t[static_cast<std::size_t>(t)])]);
        std::sort(cols.begin(), cols.end());
        sub.values.resize(l.values.rows(), size);
        sub.samples.clear();
        for (int t = 0; t < size; ++t) {
          sub.values.col(t) = l.values.col(cols[static_cast<std::size_t>(t)]);
          sub.samples.push_back(l.samples[static_cast<std::size_t>(cols[static_cast<std::size_t>(t)])]);
        }
        run_opt.seed = derive_seed(opt.seed, "curve-run", static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(rep));
      }
      const AssociationTable t = run_method(sub, sub_labels, method, run_opt);
      int cnt = 0;
      for (const auto& r : t.rows) cnt += r.significant ? 1 : 0;
      pt.counts.push_back(cnt);
    }
    std::vector<double> as_double(pt.counts.begin(), pt.counts.end());
    const auto [mu, sd] = mean_sd(as_double);
    pt.mean = mu;
    pt.sd = sd;
    out.push_back(std::move(pt));
  }
  return out;
}

CalibrationReport pvalue_calibration(const LogAbundanceMatrix& l, const Labels& labels, Method method,
                                     int n_null_repeats, const AssocOptions& opt) {
  CalibrationReport rep;
  rep.ks_distance = 0.0;
  if (n_null_repeats <= 0) return rep;
  const std::vector<std::uint8_t> mask = case_mask(labels, l.samples);
  const int n = static_cast<int>(mask.size());
  for (int r = 0; r < n_null_repeats; ++r) {
    Rng rng(opt.seed, "null-labels", static_cast<std::uint64_t>(r));
    const std::vector<int> perm = rng.permutation(n);
    Labels shuffled;
    for (int j = 0; j < n; ++j) {
      shuffled.assignment[l.samples[static_cast<std::size_t>(j)]] =
          mask[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] ? Group::CASE : Group::CONTROL;
    }
    AssocOptions run_opt = opt;
    run_opt.seed = derive_seed(opt.seed, "null-run", static_cast<std::uint64_t>(r));
    const AssociationTable t = run_method(l, shuffled, method, run_opt);
    for (const auto& row : t.rows) rep.sorted_p.push_back(row.p);
  }
  std::sort(rep.sorted_p.begin(), rep.sorted_p.end());
  const double N = static_cast<double>(rep.sorted_p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < rep.sorted_p.size(); ++i) {
    const double x = rep.sorted_p[i];
    d = std::max(d, std::max(static_cast<double>(i + 1) / N - x, x - static_cast<double>(i) / N));
  }
  rep.ks_distance = d;
  return rep;
}

std::string association_tsv(const AssociationTable& t) {
  std::ostringstream os;
  if (t.method == Method::DAA) {
    os << "taxon\th_case\th_ctrl\tdelta_h\trel_effect\tp\tq\tsignificant\n";
    for (const auto& r : t.rows) {
      os << r.taxon << '\t' << fmt_g(r.group_field_case) << '\t' << fmt_g(r.group_field_ctrl) << '\t'
         << fmt_g(r.statistic) << '\t';
      if (r.group_field_ctrl != 0.0)
        os << fmt_g(r.statistic / std::abs(r.group_field_ctrl));
      os << '\t' << fmt_g(r.p) << '\t' << fmt_g(r.q) << '\t' << (r.significant ? 1 : 0) << '\n';
    }
  } else {
    os << "taxon\tmean_case\tmean_ctrl\tdelta_mean\tfold_change\tp\tq\tsignificant\n";
    for (const auto& r : t.rows) {
      os << r.taxon << '\t' << fmt_g(r.group_mean_case) << '\t' << fmt_g(r.group_mean_ctrl) << '\t'
         << fmt_g(r.statistic) << '\t' << fmt_g(std::exp(std::abs(r.statistic))) << '\t' << fmt_g(r.p) << '\t'
         << fmt_g(r.q) << '\t' << (r.significant ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

}  // namespace daa
