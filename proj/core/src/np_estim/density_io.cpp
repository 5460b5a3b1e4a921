#include "inslab/np_estim/density_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"

namespace inslab {

void write_density_csv(const LegendreDensity& f, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  std::string coeffs;
  for (std::size_t i = 0; i < f.coeffs().size(); ++i) {
    if (i) coeffs += ";";
    coeffs += format_exact(f.coeffs()[i]);
  }
  std::fprintf(out, "# support=%s,%s coeffs=%s\n", format_exact(f.lo()).c_str(),
               format_exact(f.hi()).c_str(), coeffs.c_str());
  std::fputs("grid_point,value\n", out);
  for (double t : f.grid()) {
    std::fprintf(out, "%s,%s\n", format_value(t).c_str(), format_value(f(t)).c_str());
  }
  std::fclose(out);
}

LegendreDensity read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  std::getline(in, line);
  const auto s = line.find("support=");
  const auto c = line.find(" coeffs=");
  if (line.rfind("# ", 0) != 0 || s == std::string::npos || c == std::string::npos) {
    throw ParseError(path, 1, "expected '# support=lo,hi coeffs=...'");
  }
  const std::string support = line.substr(s + 8, c - s - 8);
  const auto comma = support.find(',');
  if (comma == std::string::npos) throw ParseError(path, 1, "bad support");
  const double lo = std::strtod(support.substr(0, comma).c_str(), nullptr);
  const double hi = std::strtod(support.substr(comma + 1).c_str(), nullptr);
  std::vector<double> coeffs;
  std::stringstream ss(line.substr(c + 8));
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (!item.empty()) coeffs.push_back(std::strtod(item.c_str(), nullptr));
  }
  long rows = -1;  // header row
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  return LegendreDensity(lo, hi, coeffs, rows > 1 ? static_cast<int>(rows) : 201);
}

}  // namespace inslab
