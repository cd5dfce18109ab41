#include "leape/scheme.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace leape {

GradientScheme GradientScheme::subset(const std::vector<int>& indices) const {
  GradientScheme out;
  out.entries.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || i >= size())
      throw std::out_of_range("GradientScheme::subset: index out of range");
    out.entries.push_back(entries[static_cast<size_t>(i)]);
  }
  return out;
}

std::vector<int> GradientScheme::dw_indices() const {
  std::vector<int> out;
  for (int k = 0; k < size(); ++k)
    if (entries[static_cast<size_t>(k)].b > 0.0) out.push_back(k);
  return out;
}

GradientScheme load_scheme(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scheme: cannot open " + path);
  GradientScheme scheme;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    SchemeEntry e;
    if (!(ss >> e.dir.x() >> e.dir.y() >> e.dir.z() >> e.b))
      throw std::runtime_error("load_scheme: malformed line " +
                               std::to_string(lineno) + " in " + path);
    if (e.b < 0.0)
      throw std::runtime_error("load_scheme: negative b-value at line " +
                               std::to_string(lineno) + " in " + path);
    if (e.b > 0.0) {
      // Validate but do not renormalize: the stored text is the canonical
      // value, and rescaling would break the bit-exact save/load round trip
      // that downstream determinism relies on.
      if (std::abs(e.dir.norm() - 1.0) > 1e-6)
        throw std::runtime_error("load_scheme: non-unit direction at line " +
                                 std::to_string(lineno) + " in " + path);
    } else {
      e.dir.setZero();
    }
    scheme.entries.push_back(e);
  }
  if (scheme.entries.empty())
    throw std::runtime_error("load_scheme: empty scheme file " + path);
  return scheme;
}

void save_scheme(const GradientScheme& scheme, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_scheme: cannot open " + path);
  char buf[160];
  for (const SchemeEntry& e : scheme.entries) {
    // %.17g round-trips doubles exactly.
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", e.dir.x(),
                  e.dir.y(), e.dir.z(), e.b);
    out << buf;
  }
  if (!out) throw std::runtime_error("save_scheme: write failed for " + path);
}

}  // namespace leape
