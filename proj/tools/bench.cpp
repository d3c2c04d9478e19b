// Timing comparison of the OpenMP kernels against their serial reference
// implementations, and a cross-check that both produce identical results.
#include <chrono>
#include <cstdio>
#include <vector>

#include "daa/kernels.hpp"
#include "daa/maxent.hpp"
#include "daa/rng.hpp"
#include "daa/synth.hpp"

using namespace daa;

namespace {

template <typename F>
double time_ms(F&& f, int reps = 3) {
  double best = 1e100;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main() {
  const GroundTruthModel gt = make_ground_truth(47, 0.3, 1);
  SyntheticSpec spec;
  spec.planted = preset_effects("table-s2-main");
  spec.n_cases = 275;
  spec.n_controls = 189;
  spec.seed = 42;
  const Cohort co = generate_cohort(gt, spec);
  const Matrix& L = co.log_abundance.values;
  const int n1 = spec.n_cases;

  const MaxEntModel model = fit_model(co.log_abundance, 0.01);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(L.cols()), 0);
  for (int j = 0; j < n1; ++j) mask[static_cast<std::size_t>(j)] = 1;
  const Vector obs = model.J * mean_diff(L, mask);

  const int n_perm = 4000;
  std::vector<std::int64_t> par, ser;
  const double t_par = time_ms([&] { par = perm_exceedances(L, n1, &model.J, obs, n_perm, 7); });
  const double t_ser = time_ms([&] { ser = perm_exceedances_serial(L, n1, &model.J, obs, n_perm, 7); });
  std::printf("perm_exceedances   %d perms   parallel %8.1f ms   serial %8.1f ms   speedup %.2fx   %s\n", n_perm,
              t_par, t_ser, t_ser / t_par, par == ser ? "identical" : "MISMATCH");

  std::vector<double> m3p, m3s, m4p, m4s;
  const double t3p = time_ms([&] { m3p = observed_third_noncentral(L); });
  const double t3s = time_ms([&] { m3s = observed_third_noncentral_serial(L); });
  std::printf("third moments      d=%d        parallel %8.1f ms   serial %8.1f ms   speedup %.2fx   %s\n",
              static_cast<int>(L.rows()), t3p, t3s, t3s / t3p, m3p == m3s ? "identical" : "MISMATCH");

  const double t4p = time_ms([&] { m4p = observed_fourth_central(L); });
  const double t4s = time_ms([&] { m4s = observed_fourth_central_serial(L); });
  std::printf("fourth moments     d=%d        parallel %8.1f ms   serial %8.1f ms   speedup %.2fx   %s\n",
              static_cast<int>(L.rows()), t4p, t4s, t4s / t4p, m4p == m4s ? "identical" : "MISMATCH");

  return (par == ser && m3p == m3s && m4p == m4s) ? 0 : 1;
}
