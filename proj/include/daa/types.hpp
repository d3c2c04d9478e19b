#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace daa {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountsMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class Group : std::uint8_t { CONTROL = 0, CASE = 1 };
enum class Scheme { TSS, CLR, CSS, NONE };
enum class Method { NAIVE, DAA };

std::string to_string(Scheme s);
std::string to_string(Method m);
Scheme scheme_from_string(const std::string& s);
Method method_from_string(const std::string& s);

// taxa x samples nonnegative integer reads
struct CountMatrix {
  std::vector<std::string> taxa;
  std::vector<std::string> samples;
  CountsMat counts;  // rows follow taxa, cols follow samples

  int n_taxa() const { return static_cast<int>(taxa.size()); }
  int n_samples() const { return static_cast<int>(samples.size()); }
};

struct Labels {
  std::unordered_map<std::string, Group> assignment;
};

// case flag per column of a companion matrix; validates coverage
std::vector<std::uint8_t> case_mask(const Labels& labels, const std::vector<std::string>& samples);

// taxa x samples real log-abundances with normalization provenance
struct LogAbundanceMatrix {
  std::vector<std::string> taxa;
  std::vector<std::string> samples;
  Matrix values;  // taxa x samples
  Scheme scheme = Scheme::NONE;
  double pseudocount = 1.0;

  int n_taxa() const { return static_cast<int>(taxa.size()); }
  int n_samples() const { return static_cast<int>(samples.size()); }
};

}  // namespace daa
