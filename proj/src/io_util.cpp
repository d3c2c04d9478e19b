#include "daa/io_util.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "daa/rng.hpp"

namespace daa {

std::string fmt_g(double v, int sig) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
  return buf;
}

std::string fmt_g17(double v) { return fmt_g(v, 17); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

std::uint64_t hash_file(const std::string& path) {
  const std::string data = read_file(path);
  return fnv1a64(data.data(), data.size());
}

void Manifest::add_input(const std::string& path) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_file(path)));
  inputs.emplace_back(path, buf);
}

static std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Manifest::to_json() const {
  std::ostringstream os;
  os << "{\n";
  os << "  \"subcommand\": \"" << json_escape(subcommand) << "\",\n";
  os << "  \"version\": \"" << json_escape(version) << "\",\n";
  os << "  \"seed\": " << seed << ",\n";
  os << "  \"config\": {";
  for (std::size_t i = 0; i < config.size(); ++i)
    os << (i ? ", " : "") << "\"" << json_escape(config[i].first) << "\": \"" << json_escape(config[i].second) << "\"";
  os << "},\n";
  os << "  \"inputs\": {";
  for (std::size_t i = 0; i < inputs.size(); ++i)
    os << (i ? ", " : "") << "\"" << json_escape(inputs[i].first) << "\": \"" << inputs[i].second << "\"";
  os << "},\n";
  os << "  \"outputs\": [";
  for (std::size_t i = 0; i < outputs.size(); ++i)
    os << (i ? ", " : "") << "\"" << json_escape(outputs[i]) << "\"";
  os << "]\n}\n";
  return os.str();
}

}  // namespace daa
