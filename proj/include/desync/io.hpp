#pragma once

// File formats: topology JSON in; matrix / stability report / run result out.
// Output is byte-stable: object keys sorted, every double printed with 17
// significant digits.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "desync/core.hpp"
#include "desync/jacobian.hpp"
#include "desync/sim.hpp"
#include "desync/spectral.hpp"

namespace desync {

enum class Format { csv, json };

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

namespace detail {

inline void escape_string(std::ostringstream& os, const std::string& s) {
  os << '"';
  for (char ch : s) {
    switch (ch) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char b[8];
          std::snprintf(b, sizeof b, "\\u%04x", ch);
          os << b;
        } else {
          os << ch;
        }
    }
  }
  os << '"';
}

inline void write_json(std::ostringstream& os, const nlohmann::json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) { os << "{}"; return; }
      os << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {  // std::map backed, already sorted
        if (!first) os << ",\n";
        first = false;
        os << pad;
        escape_string(os, key);
        os << ": ";
        write_json(os, value, depth + 1);
      }
      os << '\n' << close_pad << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) { os << "[]"; return; }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const auto& e) { return e.is_structured(); });
      if (flat) {
        os << '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) os << ", ";
          write_json(os, j[k], depth + 1);
        }
        os << ']';
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) os << ",\n";
        os << pad;
        write_json(os, j[k], depth + 1);
      }
      os << '\n' << close_pad << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: os << format_double(j.get<double>()); return;
    case nlohmann::json::value_t::string: escape_string(os, j.get<std::string>()); return;
    default: os << j.dump(); return;
  }
}

}  // namespace detail

inline std::string to_stable_json(const nlohmann::json& j) {
  std::ostringstream os;
  detail::write_json(os, j, 0);
  os << '\n';
  return os.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path);
  out << contents;
  out.flush();
  if (!out) throw IoError("write failed", path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// {"n": int, "edges": [[i, j], ...]}, 0-based, no duplicate or self edges.
inline Topology parse_topology(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("topology: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer() || !j.contains("edges") ||
      !j["edges"].is_array())
    throw ConfigError("topology: expected {\"n\": int, \"edges\": [[i, j], ...]}");
  const int n = j["n"].get<int>();
  std::vector<Topology::Edge> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw ConfigError("topology: each edge must be a pair of integers");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return Topology::from_edges(n, edges);
}

inline Topology load_topology(const std::string& path) { return parse_topology(read_file(path)); }

inline nlohmann::json topology_json(const Topology& t) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : t.edges()) edges.push_back({a, b});
  return {{"n", t.size()}, {"edges", edges}};
}

// --- matrices ---

inline nlohmann::json matrix_json(const JacobianMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (int r = 0; r < m.size(); ++r)
    for (int c = 0; c < m.size(); ++c) entries.push_back(m(r, c));
  return {{"n", m.size()}, {"provenance", to_string(m.provenance)}, {"entries", entries}};
}

inline std::string matrix_csv(const JacobianMatrix& m) {
  std::string out;
  for (int r = 0; r < m.size(); ++r) {
    for (int c = 0; c < m.size(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

inline JacobianMatrix parse_matrix_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int n = j.at("n").get<int>();
  const auto& e = j.at("entries");
  if (static_cast<int>(e.size()) != n * n) throw ConfigError("matrix: entries must hold n*n values");
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = e[static_cast<std::size_t>(r) * n + c].get<double>();
  const std::string p = j.at("provenance").get<std::string>();
  Provenance prov = Provenance::finite_difference;
  for (Provenance cand : {Provenance::analytic_single_hop, Provenance::analytic_multihop,
                          Provenance::analytic_star, Provenance::finite_difference})
    if (p == to_string(cand)) prov = cand;
  return {std::move(m), prov};
}

// --- stability reports ---

inline nlohmann::json thresholds_json(const Thresholds& t) {
  return {{"single_hop_eigen", t.single_hop_eigen},
          {"single_hop_hirst_macey", t.single_hop_hirst_macey},
          {"star_gershgorin", t.star_gershgorin}};
}

inline nlohmann::json report_json(const StabilityReport& r) {
  nlohmann::json eig = nlohmann::json::array();
  for (const auto& z : r.eigenvalues) eig.push_back({z.real(), z.imag()});
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : r.certificates)
    certs.push_back({{"name", c.name}, {"bound", c.bound}, {"satisfied", c.satisfied}});
  nlohmann::json j = {{"n", r.n},
                      {"mode", to_string(r.mode)},
                      {"eigenvalues", eig},
                      {"spectral_radius", r.spectral_radius},
                      {"margin", r.margin},
                      {"zero_eigenvalue", r.zero_eigenvalue},
                      {"certificates", certs},
                      {"thresholds", thresholds_json(r.thresholds)},
                      {"verdict", to_string(r.verdict)}};
  if (r.perception_mode) j["perception"] = to_string(*r.perception_mode);
  if (r.star_form) j["star_form"] = to_string(*r.star_form);
  return j;
}

inline std::string report_csv(const StabilityReport& r) {
  std::string out = "index,re,im,modulus\n";
  for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
    const auto& z = r.eigenvalues[k];
    out += std::to_string(k) + ',' + format_double(z.real()) + ',' + format_double(z.imag()) + ',' +
           format_double(std::abs(z)) + '\n';
  }
  return out;
}

// --- simulation runs ---

inline nlohmann::json run_json(const RunResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"round", t.round},
                     {"gaps", t.gaps},
                     {"desync_error", t.desync_error},
                     {"max_force", t.max_force}});
  nlohmann::json j = {{"metric", "desync_error = max_i |gap_i - T/n|"},
                      {"converged", r.converged},
                      {"initial_error", r.initial_error},
                      {"final_error", r.final_error},
                      {"rounds_executed", r.rounds_executed},
                      {"rejected_initial_states", r.rejected_initial_states},
                      {"topology_connected", r.topology_connected},
                      {"trace", trace}};
  if (r.failure)
    j["failure"] = {{"round", r.failure->round},
                    {"gap_index", r.failure->gap_index},
                    {"value", r.failure->value},
                    {"message", r.failure->message}};
  else
    j["failure"] = nullptr;
  return j;
}

inline std::string run_csv(const RunResult& r) {
  std::string out = "round,node,gap,desync_error\n";
  for (const auto& t : r.trace)
    for (std::size_t k = 0; k < t.gaps.size(); ++k)
      out += std::to_string(t.round) + ',' + std::to_string(k) + ',' + format_double(t.gaps[k]) + ',' +
             format_double(t.desync_error) + '\n';
  return out;
}

inline void export_matrix(const JacobianMatrix& m, const std::string& path, Format f) {
  write_file(path, f == Format::json ? to_stable_json(matrix_json(m)) : matrix_csv(m));
}

inline void export_report(const StabilityReport& r, const std::string& path, Format f) {
  write_file(path, f == Format::json ? to_stable_json(report_json(r)) : report_csv(r));
}

inline void export_run(const RunResult& r, const std::string& path, Format f) {
  write_file(path, f == Format::json ? to_stable_json(run_json(r)) : run_csv(r));
}

}  // namespace desync
