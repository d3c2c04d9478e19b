#include "daa/synth.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "daa/io_util.hpp"
#include "daa/rng.hpp"

namespace daa {

namespace {

// Generator knobs, frozen together with the acceptance expectations.
constexpr int kBlock = 8;
constexpr double kMagInLo = 0.19, kMagInHi = 0.31;
constexpr double kMagBridgeLo = 0.30, kMagBridgeHi = 0.44;
constexpr double kMagOutLo = 0.05, kMagOutHi = 0.12;
constexpr double kBridgeFrac = 0.20;
constexpr double kNegBridge = 0.80, kNegOut = 0.70;
constexpr double kDiagDominance = 1.05, kDiagBase = 0.25;
constexpr double kSigmaLo = 0.9, kSigmaHi = 1.6;
constexpr double kEtaLo = 3.55, kEtaHi = 4.05;

std::string taxon_name(int i, int dim) {
  int width = 1;
  for (int v = dim; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(i + 1);
  return "taxon_" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

}  // namespace

void validate_spec(const SyntheticSpec& spec, int dim) {
  if (spec.n_cases < 1 || spec.n_controls < 1) throw Error("synthetic spec: both group sizes must be positive");
  std::set<int> seen;
  for (const auto& e : spec.planted) {
    if (e.index < 0 || e.index >= dim)
      throw Error("synthetic spec: planted index " + std::to_string(e.index) + " outside [0, " + std::to_string(dim) + ")");
    if (!seen.insert(e.index).second)
      throw Error("synthetic spec: planted index " + std::to_string(e.index) + " listed twice");
    if (1.0 + e.delta == 0.0) throw Error("synthetic spec: delta of -1 erases the field entirely");
  }
}

std::string spec_to_json(const SyntheticSpec& spec) {
  std::ostringstream os;
  os << "{\n  \"planted\": [";
  for (std::size_t k = 0; k < spec.planted.size(); ++k) {
    if (k) os << ", ";
    os << "{\"index\": " << spec.planted[k].index << ", \"delta\": " << fmt_g17(spec.planted[k].delta) << "}";
  }
  os << "],\n";
  os << "  \"n_cases\": " << spec.n_cases << ",\n";
  os << "  \"n_controls\": " << spec.n_controls << ",\n";
  os << "  \"seed\": " << spec.seed << "\n}\n";
  return os.str();
}

SyntheticSpec spec_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(std::string("synthetic spec: invalid JSON: ") + e.what());
  }
  SyntheticSpec spec;
  try {
    for (const auto& e : j.at("planted")) {
      PlantedEffect pe;
      pe.index = e.at("index").get<int>();
      pe.delta = e.at("delta").get<double>();
      spec.planted.push_back(pe);
    }
    spec.n_cases = j.at("n_cases").get<int>();
    spec.n_controls = j.at("n_controls").get<int>();
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const std::exception& e) {
    throw Error(std::string("synthetic spec: missing or malformed field: ") + e.what());
  }
  return spec;
}

std::vector<PlantedEffect> preset_effects(const std::string& name) {
  static const int idx[6] = {0, 10, 18, 26, 32, 44};
  const double* d = nullptr;
  static const double main_d[6] = {-0.18, 0.24, -0.36, 0.17, -0.13, 0.18};
  static const double small_d[6] = {-0.17, 0.14, -0.12, 0.16, -0.14, 0.13};
  static const double large_d[6] = {-0.44, 1.29, -0.72, 0.67, -0.28, 1.12};
  if (name == "table-s2-main")
    d = main_d;
  else if (name == "table-s2-small")
    d = small_d;
  else if (name == "table-s2-large")
    d = large_d;
  else
    throw Error("unknown effect preset: " + name);
  std::vector<PlantedEffect> out;
  for (int k = 0; k < 6; ++k) out.push_back({idx[k], d[k]});
  return out;
}

std::vector<std::string> preset_names() { return {"table-s2-main", "table-s2-small", "table-s2-large"}; }

GroundTruthModel make_ground_truth(int dim, double density, std::uint64_t seed, bool near_diagonal) {
  if (dim < 1) throw Error("make_ground_truth: dim must be positive");
  if (!near_diagonal) {
    if (!(density > 0.0))
      throw Error("make_ground_truth: density must be positive (use near_diagonal for an uncoupled model)");
    if (density > 1.0) throw Error("make_ground_truth: density cannot exceed 1");
  }

  Matrix J = Matrix::Zero(dim, dim);
  Rng structure(seed, "gt-structure");
  if (!near_diagonal && dim > 1) {
    std::vector<std::pair<int, int>> in_pairs, out_pairs;
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j)
        ((i / kBlock == j / kBlock) ? in_pairs : out_pairs).push_back({i, j});
    const auto n_links = static_cast<std::size_t>(std::llround(density * dim * (dim - 1) / 2.0));
    const std::size_t n_out =
        std::min(out_pairs.size(), n_links > in_pairs.size() ? n_links - in_pairs.size() : std::size_t{0});
    const auto n_bridge = static_cast<std::size_t>(std::llround(kBridgeFrac * static_cast<double>(n_out)));
    const std::vector<int> sel = structure.partial_shuffle(static_cast<int>(out_pairs.size()), static_cast<int>(n_out));
    for (const auto& [i, j] : in_pairs) J(i, j) = J(j, i) = -structure.uniform(kMagInLo, kMagInHi);
    for (std::size_t k = 0; k < n_out; ++k) {
      const auto [i, j] = out_pairs[static_cast<std::size_t>(sel[k])];
      double v;
      if (k < n_bridge) {
        v = structure.uniform(kMagBridgeLo, kMagBridgeHi);
        if (structure.uniform() < kNegBridge) v = -v;
      } else {
        v = structure.uniform(kMagOutLo, kMagOutHi);
        if (structure.uniform() < kNegOut) v = -v;
      }
      J(i, j) = J(j, i) = v;
    }
  }
  for (int i = 0; i < dim; ++i) J(i, i) = kDiagDominance * J.row(i).cwiseAbs().sum() + kDiagBase;

  // Strict diagonal dominance with positive diagonal makes J positive
  // definite, so the covariance is its plain inverse.
  Matrix C = J.llt().solve(Matrix::Identity(dim, dim));
  C = ((C + C.transpose()) / 2.0).eval();

  Rng sigma_rng(seed, "gt-sigma");
  Vector scale(dim);
  for (int i = 0; i < dim; ++i) {
    const double s = sigma_rng.uniform(kSigmaLo, kSigmaHi);
    scale[i] = std::sqrt(s * s / C(i, i));
  }
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      C(i, j) *= scale[i] * scale[j];
      J(i, j) /= scale[i] * scale[j];
    }

  Rng field_rng(seed, "gt-fields");
  Vector h_draw(dim);
  for (int i = 0; i < dim; ++i) {
    const double sign = field_rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double eta = field_rng.uniform(kEtaLo, kEtaHi);
    h_draw[i] = sign * eta * std::sqrt(J(i, i));
  }

  GroundTruthModel gt;
  gt.model.m = C * h_draw;
  gt.model.C = C;
  gt.model.J = J;
  gt.model.h = J * gt.model.m;  // exact self-consistency: h is J m as stored
  gt.model.lambda_min = 0.0;
  gt.model.retained = dim;
  gt.model.taxa.reserve(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) gt.model.taxa.push_back(taxon_name(i, dim));

  if (Eigen::LLT<Matrix>(gt.model.C).info() != Eigen::Success)
    throw Error("make_ground_truth: generated covariance is not positive definite");

  std::ostringstream prov;
  prov << "block-coupled generator dim=" << dim << " density=" << fmt_g(density, 6) << " seed=" << seed
       << (near_diagonal ? " near_diagonal" : "");
  gt.provenance = prov.str();
  return gt;
}

std::pair<Vector, Vector> plant_effects(const GroundTruthModel& gt, const std::vector<PlantedEffect>& planted) {
  const int dim = gt.model.dim();
  Vector h_case = gt.model.h;
  for (const auto& e : planted) {
    if (e.index < 0 || e.index >= dim) throw Error("plant_effects: index out of range");
    h_case[e.index] = gt.model.h[e.index] * (1.0 + e.delta);
  }
  // Written as a response to the field change so an empty effect list
  // reproduces (h, m) bit-exactly.
  const Vector m_case = gt.model.m + gt.model.C * (h_case - gt.model.h);
  return {h_case, m_case};
}

Cohort generate_cohort(const GroundTruthModel& gt, const SyntheticSpec& spec) {
  const int dim = gt.model.dim();
  validate_spec(spec, dim);
  auto [h_case, m_case] = plant_effects(gt, spec.planted);

  const Matrix cases = sample(m_case, gt.model.C, spec.n_cases, derive_seed(spec.seed, "cohort-case"));
  const Matrix ctrls = sample(gt.model.m, gt.model.C, spec.n_controls, derive_seed(spec.seed, "cohort-ctrl"));

  Cohort co;
  co.h_case = std::move(h_case);
  co.m_case = std::move(m_case);
  co.log_abundance.taxa = gt.model.taxa;
  co.log_abundance.scheme = Scheme::NONE;
  co.log_abundance.pseudocount = 0.0;
  co.log_abundance.values.resize(dim, spec.n_cases + spec.n_controls);
  co.log_abundance.values.leftCols(spec.n_cases) = cases;
  co.log_abundance.values.rightCols(spec.n_controls) = ctrls;
  for (int j = 0; j < spec.n_cases; ++j) {
    const std::string id = "case_" + std::to_string(j + 1);
    co.log_abundance.samples.push_back(id);
    co.labels.assignment[id] = Group::CASE;
  }
  for (int j = 0; j < spec.n_controls; ++j) {
    const std::string id = "ctrl_" + std::to_string(j + 1);
    co.log_abundance.samples.push_back(id);
    co.labels.assignment[id] = Group::CONTROL;
  }
  for (const auto& e : spec.planted) co.planted_indices.push_back(e.index);
  std::sort(co.planted_indices.begin(), co.planted_indices.end());
  return co;
}

std::string truth_to_json(const GroundTruthModel& gt, const SyntheticSpec& spec, const Cohort& cohort) {
  const int dim = gt.model.dim();
  std::ostringstream os;
  os << "{\n";
  os << "  \"provenance\": \"" << gt.provenance << "\",\n";
  os << "  \"dim\": " << dim << ",\n";
  os << "  \"seed\": " << spec.seed << ",\n";
  os << "  \"n_cases\": " << spec.n_cases << ",\n";
  os << "  \"n_controls\": " << spec.n_controls << ",\n";
  os << "  \"planted\": [";
  for (std::size_t k = 0; k < spec.planted.size(); ++k) {
    if (k) os << ", ";
    const auto& e = spec.planted[k];
    os << "{\"index\": " << e.index << ", \"taxon\": \"" << gt.model.taxa[static_cast<std::size_t>(e.index)]
       << "\", \"delta\": " << fmt_g17(e.delta) << "}";
  }
  os << "],\n";
  auto vec = [&os](const char* name, const Vector& v, bool last = false) {
    os << "  \"" << name << "\": [";
    for (int i = 0; i < v.size(); ++i) {
      if (i) os << ", ";
      os << fmt_g17(v[i]);
    }
    os << "]" << (last ? "\n" : ",\n");
  };
  vec("h", gt.model.h);
  vec("h_case", cohort.h_case);
  vec("m", gt.model.m);
  vec("m_case", cohort.m_case, true);
  os << "}\n";
  return os.str();
}

}  // namespace daa
