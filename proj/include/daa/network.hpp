#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daa/types.hpp"

namespace daa {

enum class EdgeKind { CORRELATION, INTERACTION };
std::string to_string(EdgeKind k);
EdgeKind edge_kind_from_string(const std::string& s);

// Pairwise weights with permutation-null significance. `weights` is the
// observed symmetric weight matrix (Pearson correlations, or the inferred
// interaction matrix); `q` holds BH-adjusted two-sided p-values per pair,
// symmetric, with 1 on the diagonal.
struct EdgeSignificance {
  EdgeKind kind = EdgeKind::CORRELATION;
  Matrix weights;
  Matrix q;
};

// Null model: each permutation scrambles every taxon row independently
// (destroying inter-taxon dependence, preserving marginals) and recomputes
// the weight matrix. Needs at least 3 samples.
EdgeSignificance edge_significance(const LogAbundanceMatrix& l, EdgeKind kind, int n_perm, std::uint64_t seed,
                                   double lambda_min = 0.01);

struct Edge {
  int a = 0, b = 0;  // taxon indices, a < b
  double weight = 0.0;
  double q = 1.0;
};

struct EdgeList {
  EdgeKind kind = EdgeKind::CORRELATION;
  double pos_cutoff = 0.27, neg_cutoff = -0.15, alpha = 0.05;
  std::vector<Edge> edges;  // by |weight| descending, ties by (a, b)
};

// Keeps pairs with (weight > pos_cutoff or weight < neg_cutoff) and q < alpha.
EdgeList extract_edges(const EdgeSignificance& sig, double pos_cutoff = 0.27, double neg_cutoff = -0.15,
                       double alpha = 0.05);

std::string edges_tsv(const EdgeList& list, const std::vector<std::string>& taxa);

}  // namespace daa
