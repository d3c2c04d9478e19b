#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "daa/types.hpp"

namespace daa {

// fitted pairwise model: means m, covariance C, thresholded pseudoinverse J,
// host fields h = J*m, eigenvalue cutoff metadata
struct MaxEntModel {
  std::vector<std::string> taxa;
  Vector m;
  Matrix C;
  Matrix J;
  Vector h;
  double lambda_min = 0.01;
  int retained = 0;

  int dim() const { return static_cast<int>(m.size()); }
};

std::pair<Vector, Matrix> estimate_moments(const LogAbundanceMatrix& l);

// eigendecompose C, invert eigenvalues >= lambda_min, zero the rest
std::pair<Matrix, int> pseudo_inverse(const Matrix& C, double lambda_min);

Vector infer_fields(const Matrix& J, const Vector& m);

MaxEntModel fit_model(const LogAbundanceMatrix& l, double lambda_min);

// n independent draws from N(m, C); column j is sample j; deterministic in
// seed regardless of thread count
Matrix sample(const Vector& m, const Matrix& C, int n, std::uint64_t seed);

struct MomentReport {
  std::vector<double> third_noncentral_pred, third_noncentral_obs;
  std::vector<double> fourth_central_pred, fourth_central_obs;
  double r_third = 0.0;
  double r_fourth = 0.0;
  double baseline_r_third = 0.0;   // same-n resample from the fitted model
  double baseline_r_fourth = 0.0;  // (sampling-noise ceiling)
};

// third noncentral: <l_i l_j l_k> = m_i m_j m_k + m_i C_jk + m_j C_ik + m_k C_ij
// fourth central:   C_ij C_kq + C_iq C_jk + C_ik C_jq  (indices i<=j<=k<=q)
std::pair<std::vector<double>, std::vector<double>> predict_higher_moments(const Vector& m, const Matrix& C);

MomentReport validate_moments(const LogAbundanceMatrix& l, std::uint64_t seed = 1);

std::string model_to_json(const MaxEntModel& model);
MaxEntModel model_from_json(const std::string& json_text);
void write_model(const MaxEntModel& model, const std::string& path);
MaxEntModel read_model(const std::string& path);

}  // namespace daa
