#pragma once

// Shared helpers for the test suite: independent reference implementations
// (a hand-rolled Jacobi eigensolver, a quadratic-time BH oracle, an extended
// precision mat-vec) plus small fixture builders. The oracles deliberately
// avoid Eigen and the library's own code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "daa/rng.hpp"
#include "daa/types.hpp"

namespace testutil {

// ---- cyclic Jacobi eigensolver (symmetric), eigenvalues ascending ----
struct JacobiResult {
  std::vector<double> evals;                // ascending
  std::vector<std::vector<double>> evecs;   // evecs[k] is the k-th eigenvector
};

inline JacobiResult jacobi_eigen(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] < a[y][y]; });
  JacobiResult r;
  for (int k = 0; k < n; ++k) {
    r.evals.push_back(a[order[k]][order[k]]);
    std::vector<double> col(n);
    for (int i = 0; i < n; ++i) col[i] = v[i][order[k]];
    r.evecs.push_back(col);
  }
  return r;
}

// spectral pseudo-inverse built from the Jacobi decomposition
inline std::vector<std::vector<double>> jacobi_pseudo_inverse(const std::vector<std::vector<double>>& a,
                                                              double lambda_min) {
  const JacobiResult r = jacobi_eigen(a);
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
  for (int k = 0; k < n; ++k) {
    if (r.evals[k] < lambda_min) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) J[i][j] += r.evecs[k][i] * r.evecs[k][j] / r.evals[k];
  }
  return J;
}

inline std::vector<std::vector<double>> to_rows(const daa::Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()),
                                       std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

// ---- literal quadratic-time BH step-up ----
inline std::vector<double> bh_oracle(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> q(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    double best = 1.0;
    // min over all sorted ranks at or after this element's own rank
    std::size_t rank_i = 0;
    for (std::size_t r = 0; r < m; ++r)
      if (order[r] == i) rank_i = r;
    for (std::size_t r = rank_i; r < m; ++r) {
      const double adj = p[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
      best = std::min(best, adj);
    }
    q[i] = best;
  }
  return q;
}

// ---- extended-precision mat-vec ----
inline std::vector<double> matvec_ld(const daa::Matrix& A, const daa::Vector& x) {
  std::vector<double> out(static_cast<std::size_t>(A.rows()), 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    long double acc = 0.0L;
    for (int j = 0; j < A.cols(); ++j) acc += static_cast<long double>(A(i, j)) * static_cast<long double>(x[j]);
    out[static_cast<std::size_t>(i)] = static_cast<double>(acc);
  }
  return out;
}

// ---- fixtures ----
inline daa::LogAbundanceMatrix make_log(const daa::Matrix& values) {
  daa::LogAbundanceMatrix l;
  l.values = values;
  l.scheme = daa::Scheme::NONE;
  l.pseudocount = 0.0;
  for (int i = 0; i < values.rows(); ++i) l.taxa.push_back("t" + std::to_string(i + 1));
  for (int j = 0; j < values.cols(); ++j) l.samples.push_back("s" + std::to_string(j + 1));
  return l;
}

inline daa::Labels make_labels(const std::vector<std::string>& samples, int n_cases) {
  daa::Labels lab;
  for (std::size_t j = 0; j < samples.size(); ++j)
    lab.assignment[samples[j]] = static_cast<int>(j) < n_cases ? daa::Group::CASE : daa::Group::CONTROL;
  return lab;
}

// random symmetric positive-definite matrix: A A^T / d + eps I
inline daa::Matrix random_spd(int d, std::uint64_t seed, double eps = 1e-3) {
  daa::Rng rng(seed, "test-spd");
  daa::Matrix A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  daa::Matrix S = A * A.transpose() / static_cast<double>(d);
  for (int i = 0; i < d; ++i) S(i, i) += eps;
  return ((S + S.transpose()) / 2.0).eval();
}

inline daa::Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  daa::Rng rng(seed, "test-mat");
  daa::Matrix A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = rng.normal();
  return A;
}

}  // namespace testutil
