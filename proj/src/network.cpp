#include "daa/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "daa/assoc.hpp"
#include "daa/io_util.hpp"
#include "daa/maxent.hpp"
#include "daa/rng.hpp"

namespace daa {

std::string to_string(EdgeKind k) { return k == EdgeKind::CORRELATION ? "correlation" : "interaction"; }

EdgeKind edge_kind_from_string(const std::string& s) {
  if (s == "correlation") return EdgeKind::CORRELATION;
  if (s == "interaction") return EdgeKind::INTERACTION;
  throw Error("unknown edge kind: " + s + " (expected correlation or interaction)");
}

namespace {

Matrix covariance_of_rows(const Matrix& X) {
  const int n = static_cast<int>(X.cols());
  const Matrix centered = X.colwise() - X.rowwise().mean();
  Matrix C = centered * centered.transpose() / static_cast<double>(n - 1);
  return ((C + C.transpose()) / 2.0).eval();
}

Matrix weight_matrix(const Matrix& X, EdgeKind kind, double lambda_min) {
  const Matrix C = covariance_of_rows(X);
  if (kind == EdgeKind::INTERACTION) {
    // pseudo_inverse is declared in maxent.hpp
    return pseudo_inverse(C, lambda_min).first;
  }
  const int d = static_cast<int>(C.rows());
  Vector s(d);
  for (int i = 0; i < d; ++i) s[i] = std::sqrt(C(i, i));
  Matrix R = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) R(i, j) = (s[i] > 0.0 && s[j] > 0.0) ? C(i, j) / (s[i] * s[j]) : 0.0;
  return R;
}

// scramble every taxon row independently, all draws from one shared stream
Matrix scrambled(const Matrix& X, Rng& rng) {
  const int d = static_cast<int>(X.rows()), n = static_cast<int>(X.cols());
  Matrix Y(d, n);
  for (int i = 0; i < d; ++i) {
    const std::vector<int> p = rng.permutation(n);
    for (int j = 0; j < n; ++j) Y(i, j) = X(i, p[static_cast<std::size_t>(j)]);
  }
  return Y;
}

}  // namespace

EdgeSignificance edge_significance(const LogAbundanceMatrix& l, EdgeKind kind, int n_perm, std::uint64_t seed,
                                   double lambda_min) {
  const int d = static_cast<int>(l.values.rows()), n = static_cast<int>(l.values.cols());
  if (n < 3) throw Error("edge_significance: need at least 3 samples");
  if (n_perm < 1) throw Error("edge_significance: n_perm must be positive");

  EdgeSignificance out;
  out.kind = kind;
  out.weights = weight_matrix(l.values, kind, lambda_min);

  const int n_pairs = d * (d - 1) / 2;
  std::vector<double> thr(static_cast<std::size_t>(n_pairs));
  {
    int t = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        thr[static_cast<std::size_t>(t++)] = std::abs(out.weights(i, j)) * (1.0 - 1e-12) - 1e-300;
  }

  std::vector<std::int64_t> cnt(static_cast<std::size_t>(n_pairs), 0);
  auto tally_rep = [&](int k, std::vector<std::int64_t>& local) {
    Rng rng(seed, "netperm", static_cast<std::uint64_t>(k));
    const Matrix W = weight_matrix(scrambled(l.values, rng), kind, lambda_min);
    int t = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        if (std::abs(W(i, j)) >= thr[static_cast<std::size_t>(t)]) ++local[static_cast<std::size_t>(t)];
        ++t;
      }
  };
#ifdef _OPENMP
#pragma omp parallel
  {
    std::vector<std::int64_t> local(static_cast<std::size_t>(n_pairs), 0);
#pragma omp for schedule(dynamic)
    for (int k = 0; k < n_perm; ++k) tally_rep(k, local);
#pragma omp critical
    for (int t = 0; t < n_pairs; ++t) cnt[static_cast<std::size_t>(t)] += local[static_cast<std::size_t>(t)];
  }
#else
  for (int k = 0; k < n_perm; ++k) tally_rep(k, cnt);
#endif

  std::vector<double> p(static_cast<std::size_t>(n_pairs));
  for (int t = 0; t < n_pairs; ++t)
    p[static_cast<std::size_t>(t)] =
        (1.0 + static_cast<double>(cnt[static_cast<std::size_t>(t)])) / (static_cast<double>(n_perm) + 1.0);
  const auto [q, sig_flags] = bh_fdr(p, 0.05);
  (void)sig_flags;

  out.q = Matrix::Constant(d, d, 1.0);
  int t = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      out.q(i, j) = out.q(j, i) = q[static_cast<std::size_t>(t)];
      ++t;
    }
  return out;
}

EdgeList extract_edges(const EdgeSignificance& sig, double pos_cutoff, double neg_cutoff, double alpha) {
  if (!(neg_cutoff <= pos_cutoff)) throw Error("extract_edges: neg_cutoff must not exceed pos_cutoff");
  EdgeList list;
  list.kind = sig.kind;
  list.pos_cutoff = pos_cutoff;
  list.neg_cutoff = neg_cutoff;
  list.alpha = alpha;
  const int d = static_cast<int>(sig.weights.rows());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double w = sig.weights(i, j);
      if ((w > pos_cutoff || w < neg_cutoff) && sig.q(i, j) < alpha) list.edges.push_back({i, j, w, sig.q(i, j)});
    }
  std::sort(list.edges.begin(), list.edges.end(), [](const Edge& x, const Edge& y) {
    if (std::abs(x.weight) != std::abs(y.weight)) return std::abs(x.weight) > std::abs(y.weight);
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return list;
}

std::string edges_tsv(const EdgeList& list, const std::vector<std::string>& taxa) {
  std::ostringstream os;
  os << "taxon_a\ttaxon_b\tkind\tweight\tq\n";
  for (const auto& e : list.edges) {
    os << taxa.at(static_cast<std::size_t>(e.a)) << '\t' << taxa.at(static_cast<std::size_t>(e.b)) << '\t'
       << to_string(list.kind) << '\t' << fmt_g(e.weight) << '\t' << fmt_g(e.q) << '\n';
  }
  return os.str();
}

}  // namespace daa
