#pragma once

#include "symqkd/protocol.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace qkdrate {

/// Reads {"d": int, "bases": [[[ [re, im], ... ], ...], ...], "probs": [...], "sifting": "basis"}.
/// Each basis is a list of d vectors; each vector a list of d [re, im] pairs.
inline symqkd::ProtocolSpec load_protocol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open protocol file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("protocol file '" + path + "': " + e.what());
  }
  try {
    symqkd::ProtocolSpec p;
    p.d = j.at("d").get<int>();
    p.name = std::filesystem::path(path).stem().string();
    if (j.contains("sifting") && j["sifting"].get<std::string>() != "basis")
      throw std::invalid_argument("only \"basis\" sifting is supported");
    for (const auto& basis : j.at("bases")) {
      symqkd::OrthonormalBasis b;
      for (const auto& vec : basis) {
        symqkd::Vector v(static_cast<Eigen::Index>(vec.size()));
        for (std::size_t k = 0; k < vec.size(); ++k)
          v(static_cast<Eigen::Index>(k)) = symqkd::cplx(vec[k].at(0).get<double>(), vec[k].at(1).get<double>());
        b.push_back(v);
      }
      p.labels.push_back("basis" + std::to_string(p.bases.size()));
      p.bases.push_back(std::move(b));
    }
    if (j.contains("probs")) {
      const auto probs = j["probs"].get<std::vector<double>>();
      const std::size_t n = p.bases.size() * static_cast<std::size_t>(p.d);
      if (probs.size() != n) throw std::invalid_argument("probs must list one weight per signal state");
      for (double x : probs)
        if (std::abs(x - 1.0 / static_cast<double>(n)) > 1e-12)
          throw std::invalid_argument("only uniform signal probabilities are supported");
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("protocol file '" + path + "': " + e.what());
  }
}

/// Parses d*d Bell weights, row-major in (r, s), separated by commas or spaces.
inline symqkd::BellDiagonalState parse_bell_table(const std::string& text, int d) {
  std::string s = text;
  for (char& c : s)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream in(s);
  std::vector<double> vals;
  for (double x; in >> x;) vals.push_back(x);
  if (!in.eof()) throw std::invalid_argument("--u: not a list of numbers");
  if (vals.size() != static_cast<std::size_t>(d * d))
    throw std::invalid_argument("--u needs d*d = " + std::to_string(d * d) + " weights");
  symqkd::BellDiagonalState u{d, symqkd::RealMatrix(d, d)};
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) u.u(r, c) = vals[static_cast<std::size_t>(r * d + c)];
  u.validate();
  return u;
}

}  // namespace qkdrate
