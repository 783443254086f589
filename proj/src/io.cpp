#include "curvflow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace curvflow {

namespace fs = std::filesystem;

void atomic_write(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  fs::create_directories(dir);
  const fs::path tmp = dir / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw NumericError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<std::vector<double>, std::vector<double>> read_field_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read field CSV " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("theta,u", 0) != 0)
    throw std::invalid_argument("field CSV must start with header 'theta,u'");
  std::vector<double> theta, u;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("malformed field CSV row: " + line);
    theta.push_back(std::stod(line.substr(0, comma)));
    u.push_back(std::stod(line.substr(comma + 1)));
  }
  return {std::move(theta), std::move(u)};
}

std::string field_csv(const std::vector<double>& theta, const std::vector<double>& u) {
  std::string s = "theta,u\n";
  char buf[80];
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", theta[i], u[i]);
    s += buf;
  }
  return s;
}

}  // namespace curvflow
