#pragma once
#include "daa/types.hpp"

namespace daa {

// natural-log abundances under the chosen normalization:
//   TSS  — ln((c+pseudocount)/N_j), N_j = raw total reads of sample j
//   NONE — ln(c+pseudocount)
//   CLR  — ln(c+pseudocount) centered per taxon across samples
//   CSS  — ln((c+pseudocount)/s_j), s_j = sum of sample j's counts that are
//          <= its css_quantile-th positive-count quantile (nearest rank);
//          css_quantile = 1 makes CSS coincide with TSS
LogAbundanceMatrix log_transform(const CountMatrix& m, Scheme scheme, double pseudocount = 1.0,
                                 double css_quantile = 0.5);

// inverse direction for synthetic cohorts: counts = round(K * exp(l)) with a
// single cohort-level K chosen so the median synthesized count ~= depth_target
CountMatrix counts_from_log(const LogAbundanceMatrix& l, double depth_target = 3.0e4);

}  // namespace daa
