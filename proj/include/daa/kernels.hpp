#pragma once
#include <cstdint>
#include <vector>

#include "daa/types.hpp"

namespace daa {

// Hot loops, OpenMP-parallel with serial reference twins. Parallel and serial
// variants are bit-identical: every output slot is produced by exactly one
// work unit with a private RNG stream, and exceedance tallies are integers.

// For permutation k (stream derived from (seed, "perm", k)) relabel the n
// samples, recompute the group-mean difference (optionally mapped through J),
// and count per taxon how often |permuted stat| >= |obs| (within a relative
// tie tolerance). L is taxa x samples; n1 = case count.
std::vector<std::int64_t> perm_exceedances(const Matrix& L, int n1, const Matrix* J, const Vector& obs,
                                           int n_perm, std::uint64_t seed);
std::vector<std::int64_t> perm_exceedances_serial(const Matrix& L, int n1, const Matrix* J, const Vector& obs,
                                                  int n_perm, std::uint64_t seed);

// group-mean difference for an explicit case mask, same arithmetic as the
// permutation kernel uses (so exact ties are counted as ties)
Vector mean_diff(const Matrix& L, const std::vector<std::uint8_t>& is_case);

// flat sample moments over ordered index tuples (i<=j<=k, resp. i<=j<=k<=q)
std::vector<double> observed_third_noncentral(const Matrix& L);
std::vector<double> observed_third_noncentral_serial(const Matrix& L);
std::vector<double> observed_fourth_central(const Matrix& L);
std::vector<double> observed_fourth_central_serial(const Matrix& L);

}  // namespace daa
