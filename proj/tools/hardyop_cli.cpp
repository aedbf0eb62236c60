// hardyop: config-driven front end for the composition-operator analyses.
//
//   hardyop <eval|clark|constants|similarity|verify> --config FILE [--out DIR]
//           [--format csv|json] [--seed N] [--jobs N]
//
// Exit codes: 0 success, 1 verification failure, 2 config error, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardyop/config.hpp"
#include "hardyop/hardyop.hpp"
#include "hardyop/io.hpp"

using namespace hardyop;
using io::json;

namespace {

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::string format;
  std::int64_t seed = -1;
  unsigned jobs = 1;
};

struct Run {
  Options opt;
  AnalysisConfig cfg;
  std::string format;

  io::Meta meta(const PhiFunction& phi) const {
    return {{"command", opt.command},
            {"phi", phi.describe()},
            {"iterate", cfg.iterate},
            {"seed", cfg.seed},
            {"format", format},
            {"y_grid", cfg.y_grid},
            {"threshold_floor", cfg.thresholds.floor},
            {"threshold_cross_gap", cfg.thresholds.cross_gap},
            {"similarity_depth", cfg.similarity_depth}};
  }
  void emit(const io::Table& t, const io::Meta& m) const { io::emit(t, m, format, opt.out); }
  // Secondary tables only go to files; stdout carries the primary table.
  void emit_file(const io::Table& t, const io::Meta& m) const {
    if (!opt.out.empty()) io::emit(t, m, format, opt.out);
  }
};

json num(double v) { return json(v); }

int cmd_eval(const Run& run) {
  const PhiFunction phi = build_phi(run.cfg);
  if (run.cfg.points.empty()) throw ConfigError("eval needs a 'points' list");
  io::Table t{"eval", {"x", "y", "phi_re", "phi_im", "dphi_re", "dphi_im", "branch"}, {}};
  for (const cplx z : run.cfg.points) {
    if (z.imag() < 0.0) throw ConfigError("eval points must lie in the closed upper half-plane");
    cplx v, d(NAN, NAN);
    long long branch = -1;
    if (z.imag() > 0.0) {
      v = phi.eval(z);
      d = phi.derivative(z);
    } else {
      v = phi.boundary_value(z.real());
      if (auto b = phi.branch_index(z.real())) {
        branch = static_cast<long long>(*b);
        d = cplx(phi.derivative(z.real()), 0.0);
      }
    }
    t.add({num(z.real()), num(z.imag()), num(v.real()), num(v.imag()), num(d.real()),
           num(d.imag()), branch});
  }
  run.emit(t, run.meta(phi));
  return 0;
}

int cmd_clark(const Run& run) {
  const PhiFunction phi = build_phi(run.cfg);
  phi.require_unit_beta("clark");
  const std::vector<double> taus = run.cfg.taus.empty() ? std::vector<double>{0.0} : run.cfg.taus;
  io::Table summary{"clark",
                    {"tau", "atoms", "atom_mass", "ac_mass", "sc_mass", "sc_used", "total",
                     "normalization_error", "tail_upper", "tail_lower", "tail_converged"},
                    {}};
  io::Table atoms{"clark_atoms", {"tau", "position", "mass"}, {}};
  auto meta = run.meta(phi);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double tau = taus[i];
    const ClarkMeasure cm = clark_measure(phi, tau, run.cfg.y_grid);
    summary.add({num(tau), static_cast<long long>(cm.measure.atoms().size()), num(cm.atom_mass),
                 num(cm.ac_mass), num(cm.sc_mass_estimate), cm.sc_used, num(cm.total_mass),
                 num(cm.normalization_error), num(cm.tsereteli.upper_limit),
                 num(cm.tsereteli.lower_limit), cm.tsereteli.converged});
    for (const auto& a : cm.measure.atoms()) atoms.add({num(tau), num(a.position), num(a.mass)});
    io::Table dens{"clark_density_" + std::to_string(i), {"x", "density"}, {}};
    for (const auto& tab : cm.tables)
      for (std::size_t k = 0; k < tab.x.size(); ++k) dens.add({num(tab.x[k]), num(tab.density[k])});
    auto dm = run.meta(phi);
    dm.emplace_back("tau", tau);
    run.emit_file(dens, dm);
  }
  run.emit(summary, meta);
  run.emit_file(atoms, meta);
  return 0;
}

int cmd_constants(const Run& run) {
  const PhiFunction phi = build_phi(run.cfg);
  phi.require_unit_beta("constants");
  const Grid grid = build_grid(run.cfg, phi);
  const RangeReport rep = closed_range_report(phi, grid, run.cfg.thresholds, run.opt.jobs);
  io::Table t{"constants",
              {"constant", "estimate", "argmin_a", "argmin_b", "argmin_tau", "boundary_argmin",
               "trend_1", "trend_2", "trend_3"},
              {}};
  auto row = [&](const char* name, const GridEstimate& e, bool interval) {
    t.add({name, num(e.value), interval ? num(e.a) : json(nullptr), interval ? num(e.b) : json(nullptr),
           interval ? json(nullptr) : num(e.tau), e.boundary_argmin, num(e.trend[0]),
           num(e.trend[1]), num(e.trend[2])});
  };
  row("A_upper", rep.A_upper, true);
  row("B", rep.B, true);
  row("C", rep.C, true);
  row("D", rep.D, false);
  auto meta = run.meta(phi);
  meta.emplace_back("verdict", to_string(rep.verdict));
  meta.emplace_back("cross_gap", rep.cross_gap);
  meta.emplace_back("rayleigh_c", rep.rayleigh_c);
  meta.emplace_back("rayleigh_at_A_argmin", rep.rayleigh);
  meta.emplace_back("grid_centers", grid.centers.size());
  meta.emplace_back("grid_lengths", grid.lengths);
  meta.emplace_back("grid_taus", grid.taus.size());
  run.emit(t, meta);
  io::Table g{"constants_grid", {"kind", "value"}, {}};
  for (double c : grid.centers) g.add({"center", num(c)});
  for (double l : grid.lengths) g.add({"length", num(l)});
  for (double x : grid.taus) g.add({"tau", num(x)});
  run.emit_file(g, run.meta(phi));
  return 0;
}

int cmd_similarity(const Run& run) {
  const PhiFunction phi = build_phi(run.cfg);
  phi.require_unit_beta("similarity");
  const SimilarityCertificate cert = similarity_certificate(phi);
  io::Table t{"similarity",
              {"status", "c", "d", "limit_left", "limit_right", "c1", "d1", "eta", "mirrored", "k",
               "product_bound", "orbit_gap_ok", "note"},
              {}};
  t.add({to_string(cert.status), num(cert.c), num(cert.d), num(cert.limit_left),
         num(cert.limit_right), num(cert.c1), num(cert.d1), num(cert.eta), cert.mirrored,
         num(cert.k), num(cert.product_bound), cert.orbit_gap_ok, cert.note});
  const Grid grid = build_grid(run.cfg, phi);
  const IteratedBound lb = similarity_lower_bound(phi, run.cfg.similarity_depth, grid, run.opt.jobs);
  auto meta = run.meta(phi);
  meta.emplace_back("iterated_lower_bound", lb.value);
  meta.emplace_back("iterated_max_depth", lb.max_depth);
  if (!lb.failure.empty()) meta.emplace_back("iterated_failure", lb.failure);
  run.emit(t, meta);
  io::Table it{"similarity_iterates", {"n", "B"}, {}};
  for (std::size_t n = 0; n < lb.per_n.size(); ++n)
    it.add({static_cast<long long>(n + 1), num(lb.per_n[n])});
  run.emit_file(it, run.meta(phi));
  if (cert.status == CertificateStatus::certified) {
    io::Table orb{"similarity_orbit", {"step", "t", "dphi", "running_product"}, {}};
    const auto orbit = backward_orbit(phi, cert, 0.0, 12);
    double prod = 1.0;
    for (std::size_t k = 0; k < orbit.size(); ++k) {
      const double d = phi.derivative(orbit[k]);
      prod *= d;
      orb.add({static_cast<long long>(k + 1), num(orbit[k]), num(d), num(prod)});
    }
    run.emit_file(orb, run.meta(phi));
  }
  return 0;
}

RealMeasure random_atomic_probability(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(-3.0, 3.0), w(0.1, 1.0);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    atoms.push_back({pos(rng), w(rng)});
    total += atoms.back().mass;
  }
  for (auto& a : atoms) a.mass /= total;
  return measures::atoms(atoms);
}

int cmd_verify(const Run& run) {
  const AnalysisConfig& cfg = run.cfg;
  std::mt19937_64 rng(cfg.seed);
  io::Table t{"verify", {"suite", "case", "error", "tolerance", "pass"}, {}};
  bool all_ok = true;
  auto record = [&](const std::string& suite, const std::string& name, double err, double tol) {
    const bool ok = err <= tol;
    all_ok = all_ok && ok;
    t.add({suite, name, num(err), num(tol), ok});
  };
  const json& v = cfg.verify;
  auto ys_of = [&](const json& block, std::vector<double> fallback) {
    return block.contains("y") ? config_detail::number_list(block.at("y"), "verify.y") : fallback;
  };

  {  // Boole: singular probability measures
    const json block = v.value("boole", json::object());
    const auto ys = ys_of(block, {0.5, 1.0, 2.0, 10.0});
    std::vector<std::pair<std::string, RealMeasure>> cases;
    if (block.contains("measures")) {
      int i = 0;
      for (const auto& m : block.at("measures"))
        cases.emplace_back("measure_" + std::to_string(i++), measure_from_json(m, "verify.boole"));
    } else {
      for (int i = 0; i < 5; ++i)
        cases.emplace_back("random_atoms_" + std::to_string(i), random_atomic_probability(rng, 1 + i));
      cases.emplace_back("cantor_depth_10", measures::cantor(0.0, 1.0, 1.0, 10));
    }
    for (const auto& [name, mu] : cases)
      record("boole", name, boole_check(mu, ys), mu.sc_pieces().empty() ? 1e-6 : 1e-3);
  }

  const PhiFunction phi = build_phi(cfg);
  {  // Letac: measure preservation for singular rho
    const json block = v.value("letac", json::object());
    const int count = static_cast<int>(config_detail::number_or(block, "count", 20, "verify.letac"));
    const auto* nev = dynamic_cast<const NevanlinnaModel*>(&phi.model());
    PhiFunction target = phi;
    std::string name = "config_phi";
    if (!nev || !nev->data().rho.is_singular() || phi.beta() != 1.0) {
      std::uniform_real_distribution<double> a0(-2.0, 2.0);
      target = phi_from_nevanlinna({a0(rng), 1.0, random_atomic_probability(rng, 3)});
      name = "random_atomic_rho";
    }
    std::uniform_real_distribution<double> ua(-5.0, 5.0), ul(0.01, 3.0);
    std::vector<std::pair<double, double>> ivs;
    for (int i = 0; i < count; ++i) {
      const double a = ua(rng);
      ivs.emplace_back(a, a + ul(rng));
    }
    record("letac", name, letac_check(target, ivs), 1e-8);
  }

  {  // Tsereteli: tail limit equals the singular mass
    const json block = v.value("tsereteli", json::object());
    const RealMeasure mu = block.contains("measure")
                               ? measure_from_json(block.at("measure"), "verify.tsereteli")
                               : measures::dirac(0.0, 0.5) + measures::uniform(0.0, 1.0, 0.5);
    const double y = config_detail::number_or(block, "y", 1e4, "verify.tsereteli");
    const double tol = config_detail::number_or(block, "tolerance", 0.02, "verify.tsereteli");
    const auto g = cauchy_transform(mu);
    const double s = mu.singular_mass();
    const double up = y * tail_set_measure(g, y, TailSide::upper);
    const double lo = y * tail_set_measure(g, y, TailSide::lower);
    const double scale = std::max(s, 1e-12);
    record("tsereteli", "upper_tail", std::abs(up - s) / scale, tol);
    record("tsereteli", "lower_tail", std::abs(lo - s) / scale, tol);
  }

  if (phi.beta() == 1.0) {  // disk identity: lower tail of G_tau = disk preimage
    const json block = v.value("disk_identity", json::object());
    const auto ys = ys_of(block, {0.5, 1.0, 2.0, 10.0});
    const auto taus = block.contains("taus")
                          ? config_detail::number_list(block.at("taus"), "verify.disk_identity.taus")
                          : std::vector<double>{-0.5, 0.0, 0.7};
    double err = 0.0;
    for (double tau : taus)
      for (double y : ys)
        err = std::max(err, std::abs(tail_set_measure(g_tau(phi, tau), y, TailSide::lower) -
                                     preimage_disk_measure(phi, DiskQuery(tau, tau + 1.0 / y))));
    record("disk_identity", "config_phi", err, 1e-8);
  }

  auto meta = run.meta(phi);
  meta.emplace_back("all_pass", all_ok);
  run.emit(t, meta);
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Composition operators on the Hardy space of the upper half-plane"};
  app.require_subcommand(1);
  const std::pair<const char*, const char*> commands[] = {
      {"eval", "evaluate Phi (or an iterate) and its derivative at points"},
      {"clark", "Clark measures: atoms, densities and singular mass per tau"},
      {"constants", "grid estimates of A, B, C, D and the closed-range verdict"},
      {"similarity", "similarity certificate and iterated lower bounds"},
      {"verify", "Boole, Letac, Tsereteli and disk-identity checks"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON configuration file")->required();
    sub->add_option("--out", opt.out, "output directory (default: primary table to stdout)");
    sub->add_option("--format", opt.format, "csv or json (overrides the config)");
    sub->add_option("--seed", opt.seed, "random seed (overrides the config)");
    sub->add_option("--jobs", opt.jobs, "worker threads for grid sweeps (0: all cores)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    Run run{opt, load_config(opt.config), ""};
    if (opt.seed >= 0) run.cfg.seed = static_cast<std::uint64_t>(opt.seed);
    run.format = opt.format.empty() ? run.cfg.format : opt.format;
    if (run.format != "csv" && run.format != "json") throw ConfigError("--format must be csv or json");
    if (opt.command == "eval") return cmd_eval(run);
    if (opt.command == "clark") return cmd_clark(run);
    if (opt.command == "constants") return cmd_constants(run);
    if (opt.command == "similarity") return cmd_similarity(run);
    return cmd_verify(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const UnsupportedStructure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
