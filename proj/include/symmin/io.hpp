#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "symmin/compacton.hpp"
#include "symmin/field.hpp"
#include "symmin/problems.hpp"
#include "symmin/symmetry.hpp"

namespace symmin {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON descriptors

inline json domain_to_json(const Domain& d) {
  json j;
  j["dim"] = d.dim;
  switch (d.kind) {
    case DomainKind::ball:
      j["kind"] = "ball";
      j["radius"] = d.outer_radius;
      break;
    case DomainKind::annulus:
      j["kind"] = "annulus";
      j["inner_radius"] = d.inner_radius;
      j["outer_radius"] = d.outer_radius;
      break;
    case DomainKind::box:
      j["kind"] = "box";
      j["half_extent"] = d.half_extent;
      break;
  }
  return j;
}

inline Domain domain_from_json(const json& j) {
  int N = j.at("dim").get<int>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "ball") return Domain::ball(N, j.at("radius").get<double>());
  if (kind == "annulus")
    return Domain::annulus(N, j.at("inner_radius").get<double>(),
                           j.at("outer_radius").get<double>());
  if (kind == "box") return Domain::box(N, j.at("half_extent").get<Vec>());
  throw ConfigError("unknown domain kind: " + kind);
}

inline json grid_to_json(const Grid& g) {
  json j;
  j["domain"] = domain_to_json(g.domain);
  j["npts"] = g.npts;
  return j;
}

inline Grid grid_from_json(const json& j) {
  return Grid(domain_from_json(j.at("domain")), j.at("npts").get<std::vector<int>>());
}

// ---------------------------------------------------------------------------
// Field container: ASCII magic + JSON header + little-endian float64 payload

namespace detail {

inline bool host_is_little_endian() {
  const uint16_t probe = 1;
  uint8_t first;
  std::memcpy(&first, &probe, 1);
  return first == 1;
}

inline void byteswap_doubles(std::vector<double>& v) {
  for (double& d : v) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    bits = __builtin_bswap64(bits);
    std::memcpy(&d, &bits, 8);
  }
}

}  // namespace detail

inline void write_field(std::ostream& os, const Field& u) {
  json header = grid_to_json(u.grid);
  header["components"] = u.m;
  std::string htext = header.dump();
  uint64_t hlen = htext.size();
  os.write("SYMF\x01\x00\x00\x00", 8);
  os.write(reinterpret_cast<const char*>(&hlen), 8);
  os.write(htext.data(), (std::streamsize)htext.size());
  std::vector<double> payload = u.values;
  if (!detail::host_is_little_endian()) detail::byteswap_doubles(payload);
  os.write(reinterpret_cast<const char*>(payload.data()),
           (std::streamsize)(payload.size() * sizeof(double)));
}

inline Field read_field(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "SYMF\x01", 5) != 0)
    throw ConfigError("not a field container (bad magic)");
  uint64_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), 8);
  if (!is || hlen > (1ull << 20)) throw ConfigError("corrupt field header");
  std::string htext(hlen, '\0');
  is.read(htext.data(), (std::streamsize)hlen);
  json header = json::parse(htext);
  Grid g = grid_from_json(header);
  int m = header.at("components").get<int>();
  Field u(g, m);
  is.read(reinterpret_cast<char*>(u.values.data()),
          (std::streamsize)(u.values.size() * sizeof(double)));
  if (!is) throw ConfigError("truncated field payload");
  if (!detail::host_is_little_endian()) detail::byteswap_doubles(u.values);
  return u;
}

inline void save_field(const std::string& path, const Field& u) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_field(f, u);
}

inline Field load_field(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for reading: " + path);
  return read_field(f);
}

/// Plain CSV: one row per node, coordinates then component values.
inline void write_field_csv(std::ostream& os, const Field& u) {
  const Grid& g = u.grid;
  const int N = g.dim();
  for (int a = 0; a < N; ++a) os << "x" << a << ",";
  for (int c = 0; c < u.m; ++c) os << "u" << c + 1 << (c + 1 < u.m ? "," : "\n");
  Vec x(N);
  char buf[32];
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    for (int a = 0; a < N; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", x[a]);
      os << buf << ",";
    }
    for (int c = 0; c < u.m; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", u.at(p, c));
      os << buf << (c + 1 < u.m ? "," : "\n");
    }
  }
}

// ---------------------------------------------------------------------------
// Reports

inline json profile_to_json(const RadialProfile& prof) {
  json j;
  j["dim"] = prof.N;
  j["v0"] = prof.v0;
  j["support_radius"] = prof.R_support;
  j["T"] = prof.T;
  j["V"] = prof.V;
  j["residual"] = prof.residual;
  j["samples"] = prof.r.size();
  return j;
}

inline void write_profile_csv(std::ostream& os, const RadialProfile& prof) {
  os << "r,v,dv\n";
  char buf[96];
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", prof.r[i], prof.v[i],
                  prof.vp[i]);
    os << buf;
  }
}

inline json compacton_to_json(const CompactonSpec& spec) {
  json j;
  j["alpha"] = spec.alpha;
  j["s1"] = spec.s1;
  j["s2"] = spec.s2;
  j["delta"] = spec.delta;
  j["bump_coeff"] = spec.bump_coeff;
  j["zeta"] = spec.zeta;
  j["F_zeta"] = spec.F_zeta;
  return j;
}

// ---------------------------------------------------------------------------
// Golden values: named scalars with recorded comparison tolerances

struct GoldenEntry {
  double value = 0.0;
  double rel_tol = 1e-3;
};

using GoldenTable = std::map<std::string, GoldenEntry>;

inline void save_golden(const std::string& path, const GoldenTable& table,
                        const std::string& note = {}) {
  json j;
  j["format"] = "symmin-golden-v1";
  if (!note.empty()) j["_note"] = note;
  json vals = json::object();
  for (const auto& [name, e] : table)
    vals[name] = {{"value", e.value}, {"rel_tol", e.rel_tol}};
  j["values"] = std::move(vals);
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << j.dump(2) << "\n";
}

inline GoldenTable load_golden(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MissingGolden("golden file not found: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("unreadable golden file " + path + ": " + e.what());
  }
  if (j.value("format", "") != "symmin-golden-v1")
    throw ConfigError("unrecognized golden format in " + path);
  GoldenTable table;
  for (const auto& [name, e] : j.at("values").items())
    table[name] = {e.at("value").get<double>(), e.at("rel_tol").get<double>()};
  return table;
}

struct GoldenCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double rel_error = 0.0;
  double rel_tol = 0.0;
  bool pass = false;
};

inline GoldenCheck check_golden(const GoldenTable& table, const std::string& name,
                                double actual) {
  auto it = table.find(name);
  if (it == table.end()) throw MissingGolden("no golden entry named " + name);
  GoldenCheck c;
  c.name = name;
  c.expected = it->second.value;
  c.actual = actual;
  c.rel_tol = it->second.rel_tol;
  c.rel_error = std::fabs(actual - c.expected) /
                std::max(1e-30, std::fabs(c.expected));
  c.pass = c.rel_error <= c.rel_tol;
  return c;
}

inline const char* verdict_name(SymmetryVerdict v) {
  switch (v) {
    case SymmetryVerdict::radial_about_subspace: return "radial_about_subspace";
    case SymmetryVerdict::symmetric_only: return "symmetric_only";
    default: return "inconclusive";
  }
}

inline json symmetry_to_json(const SymmetryReport& rep) {
  json j;
  j["verdict"] = verdict_name(rep.verdict);
  j["radial_defect"] = rep.radial;
  if (!rep.note.empty()) j["note"] = rep.note;
  j["subspace"] = {{"base", rep.V.base}, {"basis", json::array()}};
  for (const Vec& b : rep.V.basis) j["subspace"]["basis"].push_back(b);
  j["planes"] = json::array();
  for (const PlaneCheck& pc : rep.planes) {
    json p;
    p["normal"] = pc.plane.normal;
    p["offset"] = pc.plane.offset;
    p["zero_norm"] = pc.zero_norm;
    p["converged"] = pc.converged;
    p["energy_residual"] = pc.energy_residual;
    p["identity_tol"] = pc.identity_tol;
    p["mirror_defect"] = pc.mirror_defect;
    p["normal_derivative"] = pc.normal_derivative;
    j["planes"].push_back(std::move(p));
  }
  return j;
}

}  // namespace symmin
