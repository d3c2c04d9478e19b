#pragma once
#include <vector>

namespace daa {

double pearson(const std::vector<double>& a, const std::vector<double>& b);
double median(std::vector<double> v);  // by value: needs a partial sort
// mean and sample sd (n-1 divisor; sd = 0 for fewer than 2 values)
std::pair<double, double> mean_sd(const std::vector<double>& v);

}  // namespace daa
