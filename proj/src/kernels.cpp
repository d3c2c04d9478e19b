#include "daa/kernels.hpp"

#include <cmath>

#include "daa/rng.hpp"

namespace daa {

static inline double tie_threshold(double obs) { return std::abs(obs) * (1.0 - 1e-12) - 1e-300; }

// Group sums are accumulated independently (never as total-minus-other) so
// that exchanging the CASE/CONTROL roles negates the statistic bit-exactly.
Vector mean_diff(const Matrix& L, const std::vector<std::uint8_t>& is_case) {
  const int d = static_cast<int>(L.rows()), n = static_cast<int>(L.cols());
  Vector sc = Vector::Zero(d), st = Vector::Zero(d);
  int n1 = 0;
  for (int j = 0; j < n; ++j) {
    if (is_case[j]) {
      sc += L.col(j);
      ++n1;
    } else {
      st += L.col(j);
    }
  }
  const int n2 = n - n1;
  if (n1 == 0 || n2 == 0) throw Error("mean_diff: a group is empty");
  return sc / static_cast<double>(n1) - st / static_cast<double>(n2);
}

// Each permutation draws the smaller group's index set, so the permutation
// null of |stat| is identical whichever group is called CASE and label
// swaps leave every p-value unchanged.
static void one_perm_tally(const Matrix& L, const Vector& total, int n1, const Matrix* J, const Vector& thr,
                           std::uint64_t seed, int k, std::vector<std::int64_t>& cnt) {
  const int d = static_cast<int>(L.rows()), n = static_cast<int>(L.cols());
  const int m = (n1 < n - n1) ? n1 : n - n1;
  Rng rng(seed, "perm", static_cast<std::uint64_t>(k));
  const std::vector<int> sel = rng.partial_shuffle(n, m);
  Vector s = Vector::Zero(d);
  for (int t = 0; t < m; ++t) s += L.col(sel[t]);
  Vector stat = s / static_cast<double>(m) - (total - s) / static_cast<double>(n - m);
  if (J) stat = (*J) * stat;
  for (int i = 0; i < d; ++i)
    if (std::abs(stat[i]) >= thr[i]) ++cnt[static_cast<std::size_t>(i)];
}

std::vector<std::int64_t> perm_exceedances_serial(const Matrix& L, int n1, const Matrix* J, const Vector& obs,
                                                  int n_perm, std::uint64_t seed) {
  const int d = static_cast<int>(L.rows()), n = static_cast<int>(L.cols());
  if (n1 <= 0 || n1 >= n) throw Error("perm_exceedances: both groups must be non-empty");
  const Vector total = L.rowwise().sum();
  Vector thr(d);
  for (int i = 0; i < d; ++i) thr[i] = tie_threshold(obs[i]);
  std::vector<std::int64_t> cnt(static_cast<std::size_t>(d), 0);
  for (int k = 0; k < n_perm; ++k) one_perm_tally(L, total, n1, J, thr, seed, k, cnt);
  return cnt;
}

std::vector<std::int64_t> perm_exceedances(const Matrix& L, int n1, const Matrix* J, const Vector& obs,
                                           int n_perm, std::uint64_t seed) {
  const int d = static_cast<int>(L.rows()), n = static_cast<int>(L.cols());
  if (n1 <= 0 || n1 >= n) throw Error("perm_exceedances: both groups must be non-empty");
  const Vector total = L.rowwise().sum();
  Vector thr(d);
  for (int i = 0; i < d; ++i) thr[i] = tie_threshold(obs[i]);
  std::vector<std::int64_t> cnt(static_cast<std::size_t>(d), 0);
#ifdef _OPENMP
#pragma omp parallel
  {
    std::vector<std::int64_t> local(static_cast<std::size_t>(d), 0);
#pragma omp for schedule(static) nowait
    for (int k = 0; k < n_perm; ++k) one_perm_tally(L, total, n1, J, thr, seed, k, local);
#pragma omp critical
    for (int i = 0; i < d; ++i) cnt[static_cast<std::size_t>(i)] += local[static_cast<std::size_t>(i)];
  }
#else
  for (int k = 0; k < n_perm; ++k) one_perm_tally(L, total, n1, J, thr, seed, k, cnt);
#endif
  return cnt;
}

// flattened offset helpers for ordered tuples
static std::vector<std::size_t> triple_base(int d) {
  std::vector<std::size_t> base(static_cast<std::size_t>(d) + 1, 0);
  std::size_t acc = 0;
  for (int i = 0; i < d; ++i) {
    base[static_cast<std::size_t>(i)] = acc;
    const std::size_t r = static_cast<std::size_t>(d - i);
    acc += r * (r + 1) / 2;  // pairs j<=k in [i, d)
  }
  base[static_cast<std::size_t>(d)] = acc;
  return base;
}

static std::vector<std::size_t> quad_base(int d) {
  std::vector<std::size_t> base(static_cast<std::size_t>(d) + 1, 0);
  std::size_t acc = 0;
  for (int i = 0; i < d; ++i) {
    base[static_cast<std::size_t>(i)] = acc;
    const std::size_t r = static_cast<std::size_t>(d - i);
    acc += r * (r + 1) * (r + 2) / 6;  // triples j<=k<=q in [i, d)
  }
  base[static_cast<std::size_t>(d)] = acc;
  return base;
}

template <bool Parallel>
static std::vector<double> third_noncentral_impl(const Matrix& L) {
  const int d = static_cast<int>(L.rows()), n = static_cast<int>(L.cols());
  const auto base = triple_base(d);
  std::vector<double> out(base[static_cast<std::size_t>(d)]);
  const double inv_n = 1.0 / static_cast<double>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (Parallel)
#endif
  for (int i = 0; i < d; ++i) {
    Eigen::Array<double, 1, Eigen::Dynamic> w(n);
    std::size_t idx = base[static_cast<std::size_t>(i)];
    for (int j = i; j < d; ++j) {
      w = L.row(i).array() * L.row(j).array();
      for (int k = j; k < d; ++k) out[idx++] = (w * L.row(k).array()).sum() * inv_n;
    }
  }
  return out;
}

template <bool Parallel>
static std::vector<double> fourth_central_impl(const Matrix& L) {
  const int d = static_cast<int>(L.rows()), n = static_cast<int>(L.cols());
  const Vector m = L.rowwise().mean();
  const Matrix Y = L.colwise() - m;
  const auto base = quad_base(d);
  std::vector<double> out(base[static_cast<std::size_t>(d)]);
  const double inv_n = 1.0 / static_cast<double>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (Parallel)
#endif
  for (int i = 0; i < d; ++i) {
    Eigen::Array<double, 1, Eigen::Dynamic> w(n), v(n);
    std::size_t idx = base[static_cast<std::size_t>(i)];
    for (int j = i; j < d; ++j) {
      w = Y.row(i).array() * Y.row(j).array();
      for (int k = j; k < d; ++k) {
        v = w * Y.row(k).array();
        for (int q = k; q < d; ++q) out[idx++] = (v * Y.row(q).array()).sum() * inv_n;
      }
    }
  }
  return out;
}

std::vector<double> observed_third_noncentral(const Matrix& L) { return third_noncentral_impl<true>(L); }
std::vector<double> observed_third_noncentral_serial(const Matrix& L) { return third_noncentral_impl<false>(L); }
std::vector<double> observed_fourth_central(const Matrix& L) { return fourth_central_impl<true>(L); }
std::vector<double> observed_fourth_central_serial(const Matrix& L) { return fourth_central_impl<false>(L); }

}  // namespace daa
