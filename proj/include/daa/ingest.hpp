#pragma once
#include <string>

#include "daa/types.hpp"

namespace daa {

// TSV, header row = sample ids (corner cell ignored), first column = taxon names
CountMatrix parse_count_table(const std::string& path);
std::string format_count_table(const CountMatrix& m);
void write_count_table(const CountMatrix& m, const std::string& path);

// two-column TSV: sample id, group ("case"/"control", case-insensitive)
Labels parse_labels(const std::string& path);
std::string format_labels(const Labels& labels, const std::vector<std::string>& sample_order);
void write_labels(const Labels& labels, const std::vector<std::string>& sample_order, const std::string& path);

// keep taxa whose nonzero-count prevalence strictly exceeds `threshold`
// in the CASE group or in the CONTROL group
CountMatrix filter_prevalence(const CountMatrix& m, const Labels& labels, double threshold);

}  // namespace daa
