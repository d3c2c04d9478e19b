#include "daa/transform.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace daa {

static double css_scale(const CountsMat& counts, int j, double q) {
  std::vector<std::int64_t> pos;
  pos.reserve(static_cast<std::size_t>(counts.rows()));
  for (Eigen::Index i = 0; i < counts.rows(); ++i)
    if (counts(i, j) > 0) pos.push_back(counts(i, j));
  if (pos.empty()) return 0.0;
  std::sort(pos.begin(), pos.end());
  const std::size_t k = std::min(pos.size() - 1, static_cast<std::size_t>(std::ceil(q * static_cast<double>(pos.size()))) - (q > 0.0 ? 1 : 0));
  const std::int64_t cutoff = pos[k];
  std::int64_t s = 0;
  for (Eigen::Index i = 0; i < counts.rows(); ++i)
    if (counts(i, j) <= cutoff) s += counts(i, j);
  return static_cast<double>(s);
}

LogAbundanceMatrix log_transform(const CountMatrix& m, Scheme scheme, double pseudocount, double css_quantile) {
  if (!(pseudocount > 0.0)) throw Error("pseudocount must be positive");
  if (!(css_quantile > 0.0 && css_quantile <= 1.0)) throw Error("css quantile must lie in (0,1]");
  const int d = m.n_taxa(), n = m.n_samples();
  if (d == 0 || n == 0) throw Error("empty count matrix");

  LogAbundanceMatrix out;
  out.taxa = m.taxa;
  out.samples = m.samples;
  out.scheme = scheme;
  out.pseudocount = pseudocount;
  out.values.resize(d, n);

  std::vector<double> denom(static_cast<std::size_t>(n), 1.0);
  if (scheme == Scheme::TSS) {
    for (int j = 0; j < n; ++j) {
      std::int64_t N = 0;
      for (int i = 0; i < d; ++i) N += m.counts(i, j);
      if (N <= 0) throw Error("sample '" + m.samples[j] + "' has zero total reads (TSS undefined)");
      denom[j] = static_cast<double>(N);
    }
  } else if (scheme == Scheme::CSS) {
    for (int j = 0; j < n; ++j) {
      denom[j] = css_scale(m.counts, j, css_quantile);
      if (denom[j] <= 0.0) throw Error("sample '" + m.samples[j] + "' has zero reads (CSS undefined)");
    }
  }

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i)
      out.values(i, j) = std::log((static_cast<double>(m.counts(i, j)) + pseudocount) / denom[j]);

  if (scheme == Scheme::CLR) {
    for (int i = 0; i < d; ++i) {
      const double mean = out.values.row(i).mean();
      out.values.row(i).array() -= mean;
    }
  }
  return out;
}

CountMatrix counts_from_log(const LogAbundanceMatrix& l, double depth_target) {
  if (!(depth_target > 0.0)) throw Error("depth target must be positive");
  const int d = l.n_taxa(), n = l.n_samples();
  std::vector<double> ex(static_cast<std::size_t>(d) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) ex[static_cast<std::size_t>(j) * d + i] = std::exp(l.values(i, j));
  std::vector<double> sorted = ex;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double med = sorted[sorted.size() / 2];
  if (!(med > 0.0) || !std::isfinite(med)) throw Error("log-abundances give non-finite median scale");
  const double K = depth_target / med;

  CountMatrix out;
  out.taxa = l.taxa;
  out.samples = l.samples;
  out.counts.resize(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) {
      const double c = std::round(K * ex[static_cast<std::size_t>(j) * d + i]);
      out.counts(i, j) = static_cast<std::int64_t>(std::max(0.0, c));
    }
  return out;
}

}  // namespace daa
