#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "daa/maxent.hpp"
#include "daa/types.hpp"

namespace daa {

// One perturbed taxon: the case-group field of taxon `index` is scaled by
// (1 + delta), i.e. delta is the relative change of the direct effect.
struct PlantedEffect {
  int index = 0;
  double delta = 0.0;
};

struct SyntheticSpec {
  std::vector<PlantedEffect> planted;
  int n_cases = 0;
  int n_controls = 0;
  std::uint64_t seed = 0;
};

// Throws Error unless indices are distinct, within [0, dim), and every
// 1 + delta is nonzero, and both group sizes are positive.
void validate_spec(const SyntheticSpec& spec, int dim);

std::string spec_to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(const std::string& json_text);

// Built-in effect sets ("table-s2-main", "table-s2-small", "table-s2-large"),
// all on taxa {0, 10, 18, 26, 32, 44} of the default 47-taxon model.
std::vector<PlantedEffect> preset_effects(const std::string& name);
std::vector<std::string> preset_names();

// A fully specified generative model: exact m, C, J = C^-1, h = J m.
struct GroundTruthModel {
  MaxEntModel model;
  std::string provenance;
};

// Procedurally generated interaction network: taxa grouped into coupled
// blocks with negative within-block couplings plus a sparse mix of strong
// "bridge" and weak background couplings between blocks, scaled so the
// model is positive definite with unit-order marginal variances and
// log-abundance means spanning a wide dynamic range. `density` is the
// fraction of taxon pairs with a nonzero coupling and must be positive;
// pass near_diagonal = true (density ignored) for an uncoupled model.
GroundTruthModel make_ground_truth(int dim, double density, std::uint64_t seed, bool near_diagonal = false);

// Applies the planted effects: returns (h_case, m_case) where
// h_case[i] = h[i] * (1 + delta_i) on planted taxa and the case mean
// responds through the full covariance, m_case = m + C (h_case - h).
// An empty effect list returns (h, m) unchanged.
std::pair<Vector, Vector> plant_effects(const GroundTruthModel& gt, const std::vector<PlantedEffect>& planted);

struct Cohort {
  LogAbundanceMatrix log_abundance;  // cases first, then controls
  Labels labels;
  Vector h_case, m_case;
  std::vector<int> planted_indices;  // ascending
};

// Draws n_cases samples from N(m_case, C) and n_controls from N(m, C),
// deterministically from spec.seed. Sample ids are case_k / ctrl_k.
Cohort generate_cohort(const GroundTruthModel& gt, const SyntheticSpec& spec);

// Machine-readable record of what was planted, for downstream scoring.
std::string truth_to_json(const GroundTruthModel& gt, const SyntheticSpec& spec, const Cohort& cohort);

}  // namespace daa
