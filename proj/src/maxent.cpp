#include "daa/maxent.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "daa/io_util.hpp"
#include "daa/kernels.hpp"
#include "daa/numeric.hpp"
#include "daa/rng.hpp"

namespace daa {

std::pair<Vector, Matrix> estimate_moments(const LogAbundanceMatrix& l) {
  const int d = l.n_taxa(), n = l.n_samples();
  if (n < 2) throw Error("estimate_moments needs at least 2 samples");
  Vector m = l.values.rowwise().mean();
  Matrix X = l.values.colwise() - m;
  Matrix C = (X * X.transpose()) / static_cast<double>(n - 1);
  C = ((C + C.transpose()) * 0.5).eval();  // exact symmetry
  (void)d;
  return {std::move(m), std::move(C)};
}

std::pair<Matrix, int> pseudo_inverse(const Matrix& C, double lambda_min) {
  if (C.rows() != C.cols()) throw Error("pseudo_inverse: matrix not square");
  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) throw Error("pseudo_inverse: input not symmetric within tolerance");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(((C + C.transpose()) * 0.5).eval());
  if (eig.info() != Eigen::Success) throw Error("pseudo_inverse: eigendecomposition failed");
  const Vector& lam = eig.eigenvalues();
  const Matrix& U = eig.eigenvectors();

  Vector inv = Vector::Zero(lam.size());
  int retained = 0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam[k] >= lambda_min) {
      inv[k] = 1.0 / lam[k];
      ++retained;
    }
  }
  Matrix J = U * inv.asDiagonal() * U.transpose();
  J = ((J + J.transpose()) * 0.5).eval();
  return {std::move(J), retained};
}

Vector infer_fields(const Matrix& J, const Vector& m) {
  if (J.cols() != m.size()) throw Error("infer_fields: dimension mismatch");
  return J * m;
}

MaxEntModel fit_model(const LogAbundanceMatrix& l, double lambda_min) {
  MaxEntModel model;
  model.taxa = l.taxa;
  auto [m, C] = estimate_moments(l);
  model.m = std::move(m);
  model.C = std::move(C);
  auto [J, retained] = pseudo_inverse(model.C, lambda_min);
  model.J = std::move(J);
  model.retained = retained;
  model.lambda_min = lambda_min;
  model.h = infer_fields(model.J, model.m);
  return model;
}

Matrix sample(const Vector& m, const Matrix& C, int n, std::uint64_t seed) {
  const int d = static_cast<int>(m.size());
  if (C.rows() != d || C.cols() != d) throw Error("sample: dimension mismatch");
  if (n < 0) throw Error("sample: negative count");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(((C + C.transpose()) * 0.5).eval());
  if (eig.info() != Eigen::Success) throw Error("sample: eigendecomposition failed");
  Vector lam = eig.eigenvalues();
  const double lam_max = (lam.size() && lam.maxCoeff() > 0.0) ? lam.maxCoeff() : 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam[k] < -1e-8 * std::max(lam_max, 1e-300)) throw Error("sample: covariance is strongly indefinite");
    if (lam[k] < 0.0) lam[k] = 0.0;
  }
  const Matrix A = eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();

  Matrix out(d, n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int j = 0; j < n; ++j) {
    Rng rng(seed, "mvn", static_cast<std::uint64_t>(j));
    Vector z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    out.col(j) = m + A * z;
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> predict_higher_moments(const Vector& m, const Matrix& C) {
  const int d = static_cast<int>(m.size());
  if (C.rows() != d || C.cols() != d) throw Error("predict_higher_moments: dimension mismatch");
  std::vector<double> third, fourth;
  third.reserve(static_cast<std::size_t>(d) * (d + 1) * (d + 2) / 6);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      for (int k = j; k < d; ++k)
        third.push_back(m[i] * m[j] * m[k] + m[i] * C(j, k) + m[j] * C(i, k) + m[k] * C(i, j));
  fourth.reserve(third.size() * static_cast<std::size_t>(d) / 4 + 1);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      for (int k = j; k < d; ++k)
        for (int q = k; q < d; ++q)
          fourth.push_back(C(i, j) * C(k, q) + C(i, q) * C(j, k) + C(i, k) * C(j, q));
  return {std::move(third), std::move(fourth)};
}

MomentReport validate_moments(const LogAbundanceMatrix& l, std::uint64_t seed) {
  auto [m, C] = estimate_moments(l);
  MomentReport rep;
  auto [p3, p4] = predict_higher_moments(m, C);
  rep.third_noncentral_pred = std::move(p3);
  rep.fourth_central_pred = std::move(p4);
  rep.third_noncentral_obs = observed_third_noncentral(l.values);
  rep.fourth_central_obs = observed_fourth_central(l.values);
  rep.r_third = pearson(rep.third_noncentral_pred, rep.third_noncentral_obs);
  rep.r_fourth = pearson(rep.fourth_central_pred, rep.fourth_central_obs);

  // noise ceiling: a same-size sample drawn from the fitted model itself
  LogAbundanceMatrix resampled;
  resampled.taxa = l.taxa;
  resampled.samples = l.samples;
  resampled.values = sample(m, C, l.n_samples(), derive_seed(seed, "moment-baseline"));
  auto [bm, bC] = estimate_moments(resampled);
  auto [b3, b4] = predict_higher_moments(bm, bC);
  rep.baseline_r_third = pearson(b3, observed_third_noncentral(resampled.values));
  rep.baseline_r_fourth = pearson(b4, observed_fourth_central(resampled.values));
  return rep;
}

static void append_array(std::ostringstream& os, const char* key, const double* v, Eigen::Index n) {
  os << "  \"" << key << "\": [";
  for (Eigen::Index i = 0; i < n; ++i) os << (i ? ", " : "") << fmt_g17(v[i]);
  os << "]";
}

std::string model_to_json(const MaxEntModel& model) {
  const int d = model.dim();
  std::ostringstream os;
  os << "{\n  \"taxa\": [";
  for (int i = 0; i < d; ++i) {
    std::string esc;
    for (char c : model.taxa[i]) {
      if (c == '"' || c == '\\') esc += '\\';
      esc += c;
    }
    os << (i ? ", " : "") << "\"" << esc << "\"";
  }
  os << "],\n";
  append_array(os, "m", model.m.data(), d);
  os << ",\n";
  // row-major C and J
  os << "  \"C\": [";
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) os << ((i || j) ? ", " : "") << fmt_g17(model.C(i, j));
  os << "],\n  \"J\": [";
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) os << ((i || j) ? ", " : "") << fmt_g17(model.J(i, j));
  os << "],\n";
  append_array(os, "h", model.h.data(), d);
  os << ",\n  \"lambda_min\": " << fmt_g17(model.lambda_min) << ",\n  \"retained\": " << model.retained << "\n}\n";
  return os.str();
}

MaxEntModel model_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(std::string("model JSON parse error: ") + e.what());
  }
  MaxEntModel model;
  try {
    model.taxa = j.at("taxa").get<std::vector<std::string>>();
    const auto m = j.at("m").get<std::vector<double>>();
    const auto C = j.at("C").get<std::vector<double>>();
    const auto J = j.at("J").get<std::vector<double>>();
    const auto h = j.at("h").get<std::vector<double>>();
    model.lambda_min = j.at("lambda_min").get<double>();
    model.retained = j.at("retained").get<int>();
    const std::size_t d = model.taxa.size();
    if (m.size() != d || h.size() != d || C.size() != d * d || J.size() != d * d)
      throw Error("model JSON: inconsistent dimensions");
    model.m = Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(d));
    model.h = Eigen::Map<const Vector>(h.data(), static_cast<Eigen::Index>(d));
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    model.C = Eigen::Map<const RowMat>(C.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    model.J = Eigen::Map<const RowMat>(J.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string("model JSON field error: ") + e.what());
  }
  return model;
}

void write_model(const MaxEntModel& model, const std::string& path) { write_file(path, model_to_json(model)); }

MaxEntModel read_model(const std::string& path) { return model_from_json(read_file(path)); }

}  // namespace daa
