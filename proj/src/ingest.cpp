#include "daa/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <unordered_set>

#include "daa/io_util.hpp"

namespace daa {

static std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

static std::vector<std::string> read_lines(const std::string& path) {
  const std::string data = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t end = data.find('\n', start);
    if (end == std::string::npos) end = data.size();
    std::string line = data.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

CountMatrix parse_count_table(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw Error(path + ": count table needs a header row and at least one taxon row");
  const auto header = split_tsv(lines[0]);
  if (header.size() < 2) throw Error(path + ": header row must list at least one sample id");

  CountMatrix m;
  m.samples.assign(header.begin() + 1, header.end());
  {
    std::unordered_set<std::string> seen;
    for (std::size_t j = 0; j < m.samples.size(); ++j) {
      if (m.samples[j].empty()) throw Error(path + ": empty sample id in header column " + std::to_string(j + 2));
      if (!seen.insert(m.samples[j]).second)
        throw Error(path + ": duplicate sample id '" + m.samples[j] + "' in header column " + std::to_string(j + 2));
    }
  }

  const std::size_t n_taxa = lines.size() - 1;
  const std::size_t n_samples = m.samples.size();
  m.counts.resize(static_cast<Eigen::Index>(n_taxa), static_cast<Eigen::Index>(n_samples));
  m.taxa.reserve(n_taxa);
  std::unordered_set<std::string> seen_taxa;
  for (std::size_t r = 0; r < n_taxa; ++r) {
    const auto cells = split_tsv(lines[r + 1]);
    const std::string loc = path + ": row " + std::to_string(r + 2);
    if (cells.size() != n_samples + 1)
      throw Error(loc + " has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(n_samples + 1));
    if (cells[0].empty()) throw Error(loc + ": empty taxon name");
    if (!seen_taxa.insert(cells[0]).second) throw Error(loc + ": duplicate taxon name '" + cells[0] + "'");
    m.taxa.push_back(cells[0]);
    for (std::size_t c = 0; c < n_samples; ++c) {
      const std::string& cell = cells[c + 1];
      std::int64_t v = 0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw Error(loc + " col " + std::to_string(c + 2) + ": cell '" + cell + "' is not an integer");
      if (v < 0) throw Error(loc + " col " + std::to_string(c + 2) + ": negative count " + cell);
      m.counts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

std::string format_count_table(const CountMatrix& m) {
  std::ostringstream os;
  os << "taxon";
  for (const auto& s : m.samples) os << '\t' << s;
  os << '\n';
  for (int i = 0; i < m.n_taxa(); ++i) {
    os << m.taxa[i];
    for (int j = 0; j < m.n_samples(); ++j) os << '\t' << m.counts(i, j);
    os << '\n';
  }
  return os.str();
}

void write_count_table(const CountMatrix& m, const std::string& path) { write_file(path, format_count_table(m)); }

Labels parse_labels(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error(path + ": empty labels file");
  Labels labels;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto cells = split_tsv(lines[r]);
    const std::string loc = path + ": row " + std::to_string(r + 1);
    if (cells.size() != 2) throw Error(loc + ": expected 2 columns (sample id, group)");
    std::string g = cells[1];
    std::transform(g.begin(), g.end(), g.begin(), [](unsigned char c) { return std::tolower(c); });
    if (r == 0 && (g == "group" || g == "label")) continue;  // optional header row
    Group grp;
    if (g == "case") grp = Group::CASE;
    else if (g == "control") grp = Group::CONTROL;
    else throw Error(loc + ": group '" + cells[1] + "' is neither 'case' nor 'control'");
    if (!labels.assignment.emplace(cells[0], grp).second)
      throw Error(loc + ": duplicate label for sample '" + cells[0] + "'");
  }
  if (labels.assignment.empty()) throw Error(path + ": no labels parsed");
  return labels;
}

std::string format_labels(const Labels& labels, const std::vector<std::string>& sample_order) {
  std::ostringstream os;
  for (const auto& s : sample_order) {
    auto it = labels.assignment.find(s);
    if (it == labels.assignment.end()) throw Error("sample '" + s + "' has no label");
    os << s << '\t' << (it->second == Group::CASE ? "case" : "control") << '\n';
  }
  return os.str();
}

void write_labels(const Labels& labels, const std::vector<std::string>& sample_order, const std::string& path) {
  write_file(path, format_labels(labels, sample_order));
}

CountMatrix filter_prevalence(const CountMatrix& m, const Labels& labels, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error("prevalence threshold must lie in (0,1)");
  const auto mask = case_mask(labels, m.samples);
  int n_case = 0;
  for (auto v : mask) n_case += v;
  const int n_ctrl = m.n_samples() - n_case;

  std::vector<int> keep;
  for (int i = 0; i < m.n_taxa(); ++i) {
    int pres_case = 0, pres_ctrl = 0;
    for (int j = 0; j < m.n_samples(); ++j) {
      if (m.counts(i, j) > 0) (mask[j] ? pres_case : pres_ctrl)++;
    }
    const double f_case = static_cast<double>(pres_case) / n_case;
    const double f_ctrl = static_cast<double>(pres_ctrl) / n_ctrl;
    if (f_case > threshold || f_ctrl > threshold) keep.push_back(i);
  }
  if (keep.empty()) throw Error("prevalence filter removed every taxon; threshold too strict");

  CountMatrix out;
  out.samples = m.samples;
  out.counts.resize(static_cast<Eigen::Index>(keep.size()), m.counts.cols());
  out.taxa.reserve(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.taxa.push_back(m.taxa[keep[r]]);
    out.counts.row(static_cast<Eigen::Index>(r)) = m.counts.row(keep[r]);
  }
  return out;
}

}  // namespace daa
