#pragma once

// JSON analysis configuration: the map Phi, grids, tolerances, seed and output format.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardyop/errors.hpp"
#include "hardyop/measure.hpp"
#include "hardyop/phi.hpp"
#include "hardyop/range.hpp"

namespace hardyop {

using json = nlohmann::json;

struct ScalarRange {
  double lo;
  double hi;
  int count;
};

struct AnalysisConfig {
  json phi_spec;
  int iterate = 1;
  std::vector<cplx> points;
  std::vector<double> taus;
  std::optional<std::vector<double>> centers;
  std::optional<std::vector<double>> lengths;
  std::optional<std::vector<double>> grid_taus;
  std::vector<double> y_grid = default_y_grid();
  VerdictThresholds thresholds;
  int similarity_depth = 6;
  json verify = json::object();
  std::uint64_t seed = 1;
  std::string format = "csv";
};

namespace config_detail {

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(what + " must be finite");
  return v;
}

inline double number_or(const json& obj, const char* key, double fallback, const std::string& ctx) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), ctx + "." + key);
}

inline void only_keys(const json& obj, std::initializer_list<const char*> keys,
                      const std::string& ctx) {
  if (!obj.is_object()) throw ConfigError(ctx + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + ctx);
  }
}

/// A list of numbers, or {"from": a, "to": b, "count": n} for n evenly spaced values.
inline std::vector<double> number_list(const json& j, const std::string& ctx) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(number(v, ctx + "[]"));
  } else if (j.is_object()) {
    only_keys(j, {"from", "to", "count", "geometric"}, ctx);
    const double a = number(j.at("from"), ctx + ".from");
    const double b = number(j.at("to"), ctx + ".to");
    const int n = static_cast<int>(number(j.at("count"), ctx + ".count"));
    const bool geo = j.value("geometric", false);
    if (n < 1) throw ConfigError(ctx + ".count must be >= 1");
    if (geo && !(a > 0.0 && b > 0.0)) throw ConfigError(ctx + ": geometric range needs positive ends");
    for (int k = 0; k < n; ++k) {
      const double s = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
      out.push_back(geo ? a * std::pow(b / a, s) : a + (b - a) * s);
    }
  } else {
    throw ConfigError(ctx + " must be a list of numbers or a range object");
  }
  if (out.empty()) throw ConfigError(ctx + " must not be empty");
  return out;
}

}  // namespace config_detail

/// Measure block: {"atoms": [[x, m], ...], "densities": [...], "sc": [...]}.
inline RealMeasure measure_from_json(const json& j, const std::string& ctx = "measure") {
  using namespace config_detail;
  only_keys(j, {"atoms", "densities", "sc"}, ctx);
  RealMeasure mu;
  try {
    std::vector<Atom> atoms;
    if (j.contains("atoms")) {
      for (const auto& a : j.at("atoms")) {
        if (!a.is_array() || a.size() != 2) throw ConfigError(ctx + ".atoms entries are [position, mass]");
        atoms.push_back({number(a[0], ctx + ".atoms"), number(a[1], ctx + ".atoms")});
      }
    }
    mu = measures::atoms(atoms);
    if (j.contains("densities")) {
      for (const auto& d : j.at("densities")) {
        const std::string c = ctx + ".densities";
        const std::string kind = d.value("kind", "");
        const double a = number_or(d, "a", NAN, c), b = number_or(d, "b", NAN, c);
        if (kind == "uniform") {
          only_keys(d, {"kind", "a", "b", "mass"}, c);
          mu = mu + measures::uniform(a, b, number_or(d, "mass", 1.0, c));
        } else if (kind == "arcsine") {
          only_keys(d, {"kind", "a", "b", "mass"}, c);
          mu = mu + measures::arcsine(a, b, number_or(d, "mass", 1.0, c));
        } else if (kind == "cauchy_weight") {
          only_keys(d, {"kind", "a", "b", "weight"}, c);
          mu = mu + measures::cauchy_weight(a, b, number_or(d, "weight", 1.0, c));
        } else if (kind == "semicircle_weight") {
          only_keys(d, {"kind", "a", "b", "weight"}, c);
          mu = mu + measures::semicircle_weight(a, b, number_or(d, "weight", 1.0, c));
        } else {
          throw ConfigError("unknown density kind '" + kind +
                            "' (uniform, arcsine, cauchy_weight, semicircle_weight)");
        }
      }
    }
    if (j.contains("sc")) {
      for (const auto& s : j.at("sc")) {
        const std::string c = ctx + ".sc";
        only_keys(s, {"kind", "a", "b", "mass", "depth"}, c);
        if (s.value("kind", "cantor") != "cantor") throw ConfigError("only 'cantor' sc pieces exist");
        mu = mu + measures::cantor(number_or(s, "a", 0.0, c), number_or(s, "b", 1.0, c),
                                   number_or(s, "mass", 1.0, c),
                                   static_cast<int>(number_or(s, "depth", 16, c)));
      }
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(ctx + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
  return mu;
}

/// {"catalog": name, "alpha": ...} or {"nevanlinna": {"alpha", "beta", "atoms", "densities", "sc"}}.
inline PhiFunction phi_from_json(const json& j) {
  using namespace config_detail;
  if (!j.is_object()) throw ConfigError("phi must be an object");
  const bool cat = j.contains("catalog"), nev = j.contains("nevanlinna");
  if (cat == nev) throw ConfigError("phi needs exactly one of 'catalog' or 'nevanlinna'");
  try {
    if (cat) {
      std::map<std::string, double> params;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "catalog") continue;
        if (it.key() == "params") {
          for (auto p = it->begin(); p != it->end(); ++p) params[p.key()] = number(*p, "phi.params");
          continue;
        }
        params[it.key()] = number(*it, "phi." + it.key());
      }
      if (!j.at("catalog").is_string()) throw ConfigError("phi.catalog must be a string");
      return phi_from_catalog(j.at("catalog").get<std::string>(), params);
    }
    const json& n = j.at("nevanlinna");
    only_keys(n, {"alpha", "beta", "atoms", "densities", "sc"}, "phi.nevanlinna");
    NevanlinnaData data;
    data.alpha = number_or(n, "alpha", 0.0, "phi.nevanlinna");
    data.beta = number_or(n, "beta", 1.0, "phi.nevanlinna");
    json rho = json::object();
    for (const char* k : {"atoms", "densities", "sc"})
      if (n.contains(k)) rho[k] = n.at(k);
    data.rho = measure_from_json(rho, "phi.nevanlinna");
    return phi_from_nevanlinna(std::move(data));
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("phi: ") + e.what());
  }
}

inline AnalysisConfig parse_config(const json& j) {
  using namespace config_detail;
  only_keys(j, {"phi", "iterate", "points", "taus", "grids", "thresholds", "similarity", "verify",
                "seed", "format"},
            "config");
  AnalysisConfig c;
  if (!j.contains("phi")) throw ConfigError("config needs a 'phi' block");
  c.phi_spec = j.at("phi");
  phi_from_json(c.phi_spec);  // validate early
  if (j.contains("iterate")) {
    c.iterate = static_cast<int>(number(j.at("iterate"), "iterate"));
    if (c.iterate < 1) throw ConfigError("iterate must be >= 1");
  }
  if (j.contains("points")) {
    for (const auto& p : j.at("points")) {
      if (p.is_number())
        c.points.emplace_back(number(p, "points[]"), 0.0);
      else if (p.is_array() && p.size() == 2)
        c.points.emplace_back(number(p[0], "points[]"), number(p[1], "points[]"));
      else
        throw ConfigError("points entries are x or [x, y]");
    }
  }
  if (j.contains("taus")) c.taus = number_list(j.at("taus"), "taus");
  if (j.contains("grids")) {
    const json& g = j.at("grids");
    only_keys(g, {"centers", "lengths", "taus", "y"}, "grids");
    if (g.contains("centers")) c.centers = number_list(g.at("centers"), "grids.centers");
    if (g.contains("lengths")) {
      c.lengths = number_list(g.at("lengths"), "grids.lengths");
      for (double l : *c.lengths)
        if (!(l > 0.0)) throw ConfigError("grids.lengths must be positive");
    }
    if (g.contains("taus")) c.grid_taus = number_list(g.at("taus"), "grids.taus");
    if (g.contains("y")) {
      c.y_grid = number_list(g.at("y"), "grids.y");
      if (c.y_grid.size() < 2) throw ConfigError("grids.y needs at least two values");
      for (std::size_t i = 0; i < c.y_grid.size(); ++i)
        if (!(c.y_grid[i] > 0.0) || (i > 0 && !(c.y_grid[i] > c.y_grid[i - 1])))
          throw ConfigError("grids.y must be positive and increasing");
    }
  }
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    only_keys(t, {"floor", "cross_gap"}, "thresholds");
    c.thresholds.floor = number_or(t, "floor", c.thresholds.floor, "thresholds");
    c.thresholds.cross_gap = number_or(t, "cross_gap", c.thresholds.cross_gap, "thresholds");
  }
  if (j.contains("similarity")) {
    only_keys(j.at("similarity"), {"depth"}, "similarity");
    c.similarity_depth =
        static_cast<int>(number_or(j.at("similarity"), "depth", c.similarity_depth, "similarity"));
    if (c.similarity_depth < 1) throw ConfigError("similarity.depth must be >= 1");
  }
  if (j.contains("verify")) {
    c.verify = j.at("verify");
    only_keys(c.verify, {"boole", "letac", "tsereteli", "disk_identity"}, "verify");
  }
  if (j.contains("seed")) {
    const double s = number(j.at("seed"), "seed");
    if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a nonnegative integer");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("format")) {
    if (!j.at("format").is_string()) throw ConfigError("format must be a string");
    c.format = j.at("format").get<std::string>();
  }
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  return c;
}

inline AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline PhiFunction build_phi(const AnalysisConfig& c) {
  PhiFunction phi = phi_from_json(c.phi_spec);
  return c.iterate > 1 ? iterate(phi, c.iterate) : phi;
}

inline Grid build_grid(const AnalysisConfig& c, const PhiFunction& phi) {
  Grid g = default_grid(phi);
  if (c.centers) g.centers = *c.centers;
  if (c.lengths) g.lengths = *c.lengths;
  g.taus = c.grid_taus ? *c.grid_taus : g.centers;
  return g;
}

}  // namespace hardyop
