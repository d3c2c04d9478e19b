#include "daa/types.hpp"

#include <algorithm>
#include <cctype>

namespace daa {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::TSS: return "tss";
    case Scheme::CLR: return "clr";
    case Scheme::CSS: return "css";
    case Scheme::NONE: return "none";
  }
  return "none";
}

std::string to_string(Method m) { return m == Method::NAIVE ? "naive" : "daa"; }

static std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Scheme scheme_from_string(const std::string& s) {
  const std::string t = lower(s);
  if (t == "tss") return Scheme::TSS;
  if (t == "clr") return Scheme::CLR;
  if (t == "css") return Scheme::CSS;
  if (t == "none") return Scheme::NONE;
  throw Error("unknown normalization scheme '" + s + "' (expected tss|clr|css|none)");
}

Method method_from_string(const std::string& s) {
  const std::string t = lower(s);
  if (t == "naive") return Method::NAIVE;
  if (t == "daa") return Method::DAA;
  throw Error("unknown method '" + s + "' (expected naive|daa)");
}

std::vector<std::uint8_t> case_mask(const Labels& labels, const std::vector<std::string>& samples) {
  std::vector<std::uint8_t> mask(samples.size(), 0);
  int n_case = 0, n_ctrl = 0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    auto it = labels.assignment.find(samples[j]);
    if (it == labels.assignment.end()) throw Error("sample '" + samples[j] + "' has no label");
    mask[j] = (it->second == Group::CASE) ? 1 : 0;
    (mask[j] ? n_case : n_ctrl)++;
  }
  if (n_case == 0 || n_ctrl == 0) throw Error("both groups must be non-empty");
  return mask;
}

}  // namespace daa
