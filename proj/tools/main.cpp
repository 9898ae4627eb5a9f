#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "empcosmo/cosmo.hpp"
#include "empcosmo/io.hpp"
#include "verify_checks.hpp"

using nlohmann::json;
using namespace empcosmo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

closedform::FamilyKind parse_family(const std::string& name) {
  if (name == "stiff") return closedform::FamilyKind::Stiff;
  if (name == "matter") return closedform::FamilyKind::Matter;
  if (name == "radiation") return closedform::FamilyKind::Radiation;
  if (name == "bianchi-g2") return closedform::FamilyKind::BianchiGamma2;
  if (name == "bianchi-gn") return closedform::FamilyKind::BianchiGammaN;
  throw std::domain_error("unknown family '" + name +
                          "' (expected stiff|matter|radiation|bianchi-g2|bianchi-gn)");
}

std::string family_name(closedform::FamilyKind k) {
  switch (k) {
    case closedform::FamilyKind::Stiff: return "stiff";
    case closedform::FamilyKind::Matter: return "matter";
    case closedform::FamilyKind::Radiation: return "radiation";
    case closedform::FamilyKind::BianchiGamma2: return "bianchi-g2";
    case closedform::FamilyKind::BianchiGammaN: return "bianchi-gn";
  }
  return "?";
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << text;
}

std::string sidecar_path(const std::string& csv_path) {
  const auto dot = csv_path.find_last_of('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string trap = "constant:1";
  std::string family = "stiff";
  int n = 1, d = 4;
  double alpha = 1.0;
  double i1 = 1.0, i2 = 1.0, i3 = 0.0, i4 = 0.5;
  double t_end = 10.0, rtol = 1e-10, max_step = 0.008;
  std::string out = "-";
};

int cmd_simulate(const SimulateArgs& a) {
  moments::TrapSpec trap;
  if (a.trap.rfind("constant:", 0) == 0) {
    trap = moments::TrapSpec::constant(std::stod(a.trap.substr(9)));
  } else if (a.trap == "closure") {
    closedform::GammaFamily fam;
    fam.kind = parse_family(a.family);
    fam.d = a.d;
    fam.alpha = a.alpha;
    fam.n = a.n;
    trap = moments::TrapSpec::closure(fam);
  } else if (a.trap.rfind("table:", 0) == 0) {
    const io::Table t = io::read_csv(a.trap.substr(6), io::kTrapTableHeader);
    trap = moments::TrapSpec::tabulated(t.col("t"), t.col("omega_sq"));
  } else {
    throw std::domain_error("bad --trap '" + a.trap +
                            "' (expected constant:W | closure | table:FILE)");
  }
  moments::EvolveOptions eo;
  eo.rtol = a.rtol;
  eo.max_step = a.max_step;
  auto traj = moments::evolve({0.0, a.i1, a.i2, a.i3, a.i4}, trap, a.t_end, eo);

  std::vector<double> t, I1, I2, I3, I4, w2, lam;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto s = traj.node(i);
    t.push_back(s.t);
    I1.push_back(s.I1);
    I2.push_back(s.I2);
    I3.push_back(s.I3);
    I4.push_back(s.I4);
    w2.push_back(traj.trap().omega_sq(s.t, s.I2));
    lam.push_back(moments::lambda_invariant(s));
  }
  std::ostringstream os;
  io::write_csv(os, io::kTrajectoryHeader, {&t, &I1, &I2, &I3, &I4, &w2, &lam});
  write_text(a.out, os.str());
  if (traj.i2_floor_hit())
    std::cerr << "note: halted at the I2 floor before t-end\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string family;
  int n = 1, d = 4;
  double alpha = 1.0, lambda = 0.0, Lambda = 0.0;
  double i2_0 = 1.0, t_end = 1.0;
  int samples = 201, di2_sign = 1;
  std::string out = "solve.csv";
};

int cmd_solve(const SolveArgs& a) {
  closedform::GammaFamily fam;
  fam.kind = parse_family(a.family);
  fam.d = a.d;
  fam.alpha = a.alpha;
  fam.lambda = a.lambda;
  fam.Lambda = a.Lambda;
  fam.n = a.n;
  auto fs = closedform::solve_family(fam, a.i2_0, a.di2_sign);
  auto rows = fs.sample(a.t_end, a.samples);

  std::vector<double> t, I2, w2;
  for (const auto& r : rows) {
    t.push_back(r.t);
    I2.push_back(r.I2);
    w2.push_back(r.omega_sq);
  }
  std::ostringstream os;
  io::write_csv(os, io::kSolveHeader, {&t, &I2, &w2});
  write_text(a.out, os.str());

  json meta;
  meta["family"] = family_name(fam.kind);
  meta["gamma"] = fam.gamma();
  meta["d"] = fam.d;
  meta["n"] = fam.n;
  meta["alpha"] = fam.alpha;
  meta["lambda"] = fam.lambda;
  meta["Lambda"] = fam.Lambda;
  meta["i2_0"] = fs.i2_initial();
  meta["di2_sign"] = fs.sign();
  meta["t0"] = fs.t0();
  meta["time_scale"] = fs.time_scale();
  meta["explicit_form"] = fs.explicit_form();
  if (fs.turning_time()) meta["turning_time"] = *fs.turning_time();
  if (fs.collapse_time()) meta["collapse_time"] = *fs.collapse_time();
  meta["samples_emitted"] = rows.size();
  const std::string jpath = a.out == "-" ? "solve.json" : sidecar_path(a.out);
  write_text(jpath, meta.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MapArgs {
  std::string input;
  std::string model;
  int d = 4;
  double Lambda = 0.0, K = 1.0, gamma = 2.0;
  int curvature = 0;
  std::string shear;
  std::string out = "map.csv";
};

moments::Trajectory trajectory_from_csv(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw std::invalid_argument("cannot open '" + path + "'");
  std::string header;
  std::getline(probe, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  probe.close();

  if (header == "t,I1,I2,I3,I4,omega_sq,lambda") {
    const io::Table tb = io::read_csv(path, io::kTrajectoryHeader);
    std::vector<moments::MomentState> states(tb.rows());
    for (std::size_t i = 0; i < tb.rows(); ++i)
      states[i] = {tb.col("t")[i], tb.col("I1")[i], tb.col("I2")[i],
                   tb.col("I3")[i], tb.col("I4")[i]};
    return moments::trajectory_from_samples(
        states, moments::TrapSpec::tabulated(tb.col("t"), tb.col("omega_sq")));
  }
  if (header == "t,I2,omega_sq") {
    // Solver output: the sidecar carries the closure constants needed to
    // reconstruct I3 and I4.
    const std::string jpath = sidecar_path(path);
    std::ifstream jin(jpath);
    if (!jin)
      throw std::invalid_argument("solver-format input needs its JSON sidecar '" +
                               jpath + "'");
    json meta = json::parse(jin);
    closedform::GammaFamily fam;
    fam.kind = parse_family(meta.at("family").get<std::string>());
    fam.d = meta.at("d").get<int>();
    fam.alpha = meta.at("alpha").get<double>();
    fam.lambda = meta.at("lambda").get<double>();
    fam.Lambda = meta.at("Lambda").get<double>();
    fam.n = meta.at("n").get<int>();
    const int sign = meta.at("di2_sign").get<int>();
    const io::Table tb = io::read_csv(path, io::kSolveHeader);
    std::vector<moments::MomentState> states(tb.rows());
    for (std::size_t i = 0; i < tb.rows(); ++i) {
      const double I2 = tb.col("I2")[i];
      const double rad = closedform::closure_radicand(I2, fam, fam.lambda);
      states[i] = {tb.col("t")[i], 1.0, I2,
                   sign * 2.0 * std::sqrt(std::max(0.0, rad)),
                   closedform::i4_closure(I2, fam)};
    }
    return moments::trajectory_from_samples(states, moments::TrapSpec::closure(fam));
  }
  throw std::invalid_argument("csv: malformed header in '" + path +
                           "' (expected a simulate or solve format)");
}

int cmd_map(const MapArgs& a) {
  auto traj = trajectory_from_csv(a.input);
  cosmo::CosmologyConfig cfg;
  cfg.d = a.d;
  cfg.Lambda = a.Lambda;
  cfg.K = a.K;
  cfg.gamma = a.gamma;
  cfg.curvature_k = a.curvature;
  if (!a.shear.empty()) {
    std::stringstream ss(a.shear);
    std::string f;
    while (std::getline(ss, f, ',')) cfg.shear_constants.push_back(std::stod(f));
  }

  json rep;
  cosmo::CosmoSeries series;
  if (a.model == "flrw") {
    cfg.model = closedform::CosmoModel::FLRW;
    series = cosmo::map_flrw(traj, cfg);
    auto res = cosmo::flrw_residuals(series, cfg);
    rep["friedmann_max"] = res.friedmann_max;
    rep["continuity_max"] = res.continuity_max;
  } else if (a.model == "bianchi") {
    cfg.model = closedform::CosmoModel::BianchiI;
    series = cosmo::map_bianchi(traj, cfg);
    auto res = cosmo::bianchi_residuals(series, cfg);
    rep["eq10_max"] = res.eq10_max;
    rep["eq11_max"] = res.eq11_max;
    rep["D"] = series.D;
    if (!cfg.shear_constants.empty()) {
      auto an = cosmo::anisotropy_recover(series, cfg);
      rep["D_shear"] = an.D_shear;
    }
  } else {
    throw std::domain_error("bad --model '" + a.model + "' (expected flrw|bianchi)");
  }
  rep["lambda"] = series.lambda_traj;
  rep["warnings"] = series.warnings;

  std::vector<double> H = series.hubble;
  std::ostringstream os;
  io::write_csv(os, io::kSeriesHeader,
                {&series.tau, &series.t_lab, &series.scale, &H, &series.rho_phi,
                 &series.p_phi});
  write_text(a.out, os.str());

  std::string rdir;
  const auto slash = a.out.find_last_of('/');
  if (a.out != "-" && slash != std::string::npos) rdir = a.out.substr(0, slash + 1);
  write_text(rdir + "residuals.json", rep.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RootsArgs {
  double A = 1, B = 0, C = 1;
  double tol = 1e-10;
};

int cmd_roots(const RootsArgs& a) {
  auto an = cubic::analyze({a.A, a.B, a.C}, a.tol);
  json j;
  j["delta"] = an.inv.delta;
  j["m"] = an.inv.m;
  j["shift_n"] = an.inv.shift_n;
  j["g2"] = an.inv.g2;
  j["g3"] = an.inv.g3;
  j["p"] = an.inv.p;
  j["q"] = an.inv.q;
  const auto& rd = an.roots;
  switch (rd.cls) {
    case cubic::CubicClass::OneReal:
      j["class"] = "one-real";
      j["roots"] = {rd.r1};
      j["sigma"] = rd.sigma;
      j["rho"] = rd.rho;
      j["g"] = rd.g;
      j["t1"] = rd.t1;
      j["t2"] = rd.t2;
      j["modulus"] = rd.modulus.k;
      break;
    case cubic::CubicClass::ThreeReal:
      j["class"] = "three-real";
      j["roots"] = {rd.a, rd.b, rd.c};
      j["g"] = rd.g;
      j["modulus"] = rd.modulus.k;
      break;
    case cubic::CubicClass::Degenerate:
      j["class"] = "degenerate";
      j["roots"] = {rd.a, rd.a, rd.c};
      j["near_degenerate"] = rd.near_degenerate;
      break;
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string input;
  std::string out = "-";
  int jobs = 1;
};

int cmd_verify(const VerifyArgs& a) {
  std::vector<cli::CheckResult> checks;
  if (a.input.empty())
    checks = cli::builtin_checks(a.jobs);
  else
    checks = cli::trajectory_checks(a.input);

  json rep;
  rep["checks"] = json::array();
  bool all = true;
  for (const auto& c : checks) {
    rep["checks"].push_back({{"name", c.name},
                             {"max_abs_residual", c.max_abs_residual},
                             {"tolerance", c.tolerance},
                             {"pass", c.pass}});
    all = all && c.pass;
  }
  rep["all_pass"] = all;
  write_text(a.out, rep.dump(2) + "\n");
  if (!all) {
    for (const auto& c : checks)
      if (!c.pass)
        std::cerr << "verify: FAILED check '" << c.name << "' (residual "
                  << io::format_g17(c.max_abs_residual) << " > tolerance "
                  << io::format_g17(c.tolerance) << ")\n";
    return kExitVerifyFail;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SpecfunArgs {
  std::string fn;
  double x = 0, k = 0, u = 0, y = 0;
  double a = 0, b = 0, c = 0, z = 0;
};

int cmd_specfun(const SpecfunArgs& s) {
  const specfun::Modulus mod(s.k);
  if (s.fn == "ellip_f") {
    std::cout << io::format_g17(specfun::ellip_f(s.x, mod)) << "\n";
  } else if (s.fn == "ellip_e") {
    std::cout << io::format_g17(specfun::ellip_e_incomplete(s.u, mod)) << "\n";
  } else if (s.fn == "jacobi") {
    const auto j = specfun::jacobi(s.u, mod);
    std::cout << io::format_g17(j.sn) << " " << io::format_g17(j.cn) << " "
              << io::format_g17(j.dn) << " " << io::format_g17(j.tn) << "\n";
  } else if (s.fn == "inverse_cn") {
    std::cout << io::format_g17(specfun::inverse_cn(s.y, mod)) << "\n";
  } else if (s.fn == "hyp2f1") {
    std::cout << io::format_g17(specfun::hyp2f1(s.a, s.b, s.c, s.z)) << "\n";
  } else if (s.fn == "complete_k") {
    std::cout << io::format_g17(specfun::complete_k(mod)) << "\n";
  } else if (s.fn == "complete_e") {
    std::cout << io::format_g17(specfun::complete_e(mod)) << "\n";
  } else {
    throw std::domain_error("unknown function '" + s.fn + "'");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "empcosmo: trapped-condensate moment dynamics mapped onto FLRW and "
      "Bianchi I cosmology, with the elliptic-function solution machinery.\n"
      "All commands are deterministic (no random seeds anywhere)."};
  app.require_subcommand(1);
  app.set_config("--config");
  app.allow_config_extras(CLI::config_extras_mode::error);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "integrate the moment system, emit CSV");
  c_sim->add_option("--trap", sim.trap, "constant:W | closure | table:FILE")
      ->capture_default_str();
  c_sim->add_option("--family", sim.family,
                    "closure family: stiff|matter|radiation|bianchi-g2|bianchi-gn")
      ->capture_default_str();
  c_sim->add_option("--n", sim.n, "gamma_n index")->capture_default_str();
  c_sim->add_option("--d", sim.d, "spacetime dimension")->capture_default_str();
  c_sim->add_option("--alpha", sim.alpha, "closure constant alpha")->capture_default_str();
  c_sim->add_option("--i1", sim.i1, "I1(0)")->capture_default_str();
  c_sim->add_option("--i2", sim.i2, "I2(0)")->capture_default_str();
  c_sim->add_option("--i3", sim.i3, "I3(0)")->capture_default_str();
  c_sim->add_option("--i4", sim.i4, "I4(0)")->capture_default_str();
  c_sim->add_option("--t-end", sim.t_end, "end time")->capture_default_str();
  c_sim->add_option("--rtol", sim.rtol, "relative tolerance")->capture_default_str();
  c_sim->add_option("--max-step", sim.max_step, "step cap")->capture_default_str();
  c_sim->add_option("--out", sim.out, "output CSV path ('-' = stdout)")
      ->capture_default_str();

  SolveArgs sol;
  auto* c_sol = app.add_subcommand("solve", "closed-form family solution, emit CSV + JSON");
  c_sol->add_option("--family", sol.family, "stiff|matter|radiation|bianchi-g2|bianchi-gn")
      ->required();
  c_sol->add_option("--n", sol.n, "gamma_n index")->capture_default_str();
  c_sol->add_option("--d", sol.d, "spacetime dimension")->capture_default_str();
  c_sol->add_option("--alpha", sol.alpha, "closure constant alpha")->capture_default_str();
  c_sol->add_option("--lambda", sol.lambda, "moment invariant lambda")->capture_default_str();
  c_sol->add_option("--Lambda", sol.Lambda, "cosmological constant")->capture_default_str();
  c_sol->add_option("--i2-0", sol.i2_0, "I2(0)")->capture_default_str();
  c_sol->add_option("--t-end", sol.t_end, "end time")->capture_default_str();
  c_sol->add_option("--samples", sol.samples, "row count")->capture_default_str();
  c_sol->add_option("--di2-sign", sol.di2_sign, "sign of I2dot(0): +1 or -1")
      ->capture_default_str();
  c_sol->add_option("--out", sol.out, "output CSV path")->capture_default_str();

  MapArgs mapa;
  auto* c_map = app.add_subcommand("map", "map a trajectory CSV onto cosmology, emit CSV + residuals.json");
  c_map->add_option("--input", mapa.input, "trajectory CSV (simulate or solve format)")
      ->required();
  c_map->add_option("--model", mapa.model, "flrw|bianchi")->required();
  c_map->add_option("--d", mapa.d, "spacetime dimension")->capture_default_str();
  c_map->add_option("--Lambda", mapa.Lambda, "cosmological constant")->capture_default_str();
  c_map->add_option("--K", mapa.K, "coupling 8 pi G_d")->capture_default_str();
  c_map->add_option("--gamma", mapa.gamma, "equation-of-state index")->capture_default_str();
  c_map->add_option("--curvature", mapa.curvature, "FLRW curvature")
      ->check(CLI::IsMember({-1, 0, 1}))
      ->capture_default_str();
  c_map->add_option("--shear", mapa.shear, "Bianchi shear constants c1,c2,...")
      ->capture_default_str();
  c_map->add_option("--out", mapa.out, "output CSV path")->capture_default_str();

  RootsArgs rt;
  auto* c_rt = app.add_subcommand("roots", "cubic reduction report for (A,B,C)");
  c_rt->add_option("--A", rt.A, "moment-flux constant, > 0")->required();
  c_rt->add_option("--B", rt.B, "EMP invariant constant")->required();
  c_rt->add_option("--C", rt.C, "cosmological-constant combination, != 0")->required();
  c_rt->add_option("--degeneracy-tol", rt.tol, "discriminant band")->capture_default_str();

  VerifyArgs ver;
  auto* c_ver = app.add_subcommand("verify", "run the invariant battery, emit JSON report");
  c_ver->add_option("--input", ver.input, "trajectory CSV to check instead of the built-in suite");
  c_ver->add_option("--out", ver.out, "report path ('-' = stdout)")->capture_default_str();
  c_ver->add_option("--jobs", ver.jobs, "parallel workers for independent checks")
      ->capture_default_str();

  SpecfunArgs sf;
  auto* c_sf = app.add_subcommand("specfun-eval", "evaluate one special function");
  c_sf->group("");  // hidden
  c_sf->add_option("fn", sf.fn,
                   "ellip_f|ellip_e|jacobi|inverse_cn|hyp2f1|complete_k|complete_e")
      ->required();
  c_sf->add_option("--x", sf.x, "argument x");
  c_sf->add_option("--k", sf.k, "modulus");
  c_sf->add_option("--u", sf.u, "Jacobi argument");
  c_sf->add_option("--y", sf.y, "cn value");
  c_sf->add_option("--a", sf.a, "2F1 parameter a");
  c_sf->add_option("--b", sf.b, "2F1 parameter b");
  c_sf->add_option("--c", sf.c, "2F1 parameter c");
  c_sf->add_option("--z", sf.z, "2F1 argument z");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_sim) return cmd_simulate(sim);
    if (*c_sol) return cmd_solve(sol);
    if (*c_map) return cmd_map(mapa);
    if (*c_rt) return cmd_roots(rt);
    if (*c_ver) return cmd_verify(ver);
    if (*c_sf) return cmd_specfun(sf);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
