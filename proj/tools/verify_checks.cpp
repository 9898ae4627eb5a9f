#include "verify_checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <mutex>
#include <thread>

#include "empcosmo/cosmo.hpp"
#include "empcosmo/io.hpp"

namespace empcosmo::cli {

namespace {

using closedform::CosmoModel;
using closedform::FamilyKind;
using closedform::GammaFamily;

double stddev(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size()));
}

CheckResult make(const std::string& name, double residual, double tol) {
  return {name, residual, tol, residual <= tol};
}

moments::Trajectory sin_trap_run() {
  auto trap = moments::TrapSpec::callable([](double t) {
    const double w = 1.0 + 0.3 * std::sin(t);
    return w * w;
  });
  return moments::evolve({0.0, 1.0, 2.0, 0.5, 1.0}, trap, 20.0, 1e-10);
}

CheckResult check_lambda_conservation() {
  auto traj = sin_trap_run();
  const double lam0 = traj.lambda0();
  double drift = 0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    drift = std::max(drift,
                     std::abs(moments::lambda_invariant(traj.node(i)) - lam0) /
                         std::abs(lam0));
  return make("lambda-conservation", drift, 1e-7);
}

CheckResult check_emp_reduction() {
  return make("emp-reduction", moments::emp_residual(sin_trap_run()), 1e-5);
}

CheckResult check_stiff_closed_form() {
  GammaFamily fam{FamilyKind::Stiff, 4, 1.0, 1.0, 0.0, 0.0, 1};
  auto fs = closedform::solve_family(fam, 1.0, +1);
  moments::MomentState s0{0, 1.0, 1.0, 2.0, closedform::i4_closure(1.0, fam)};
  const double t_turn = fs.turning_time().value();
  auto traj = moments::evolve(s0, moments::TrapSpec::closure(fam), 0.95 * t_turn, 1e-10);
  double worst = 0;
  for (double t = 0; t <= 0.95 * t_turn; t += t_turn / 64)
    worst = std::max(worst, std::abs(fs.i2_at(t) - traj.at(t).I2) / traj.at(t).I2);
  return make("stiff-closed-form", worst, 1e-6);
}

CheckResult check_elliptic_branch() {
  auto an = cubic::analyze({1.0, 1.0, 1.0});
  ode::Rhs rhs = [](double, const std::vector<double>& y, std::vector<double>& d) {
    d.resize(2);
    d[0] = y[1];
    d[1] = -8.0 / (y[0] * y[0] * y[0]) + 2.0;
  };
  const double y0 = 2.0;
  const double yd0 = 2.0 * std::sqrt(2.0 / (y0 * y0) - 1.0 + y0);
  ode::IntegrateOptions io;
  io.rtol = 1e-12;
  io.atol = 1e-14;
  io.max_step = 0.01;
  auto sol = ode::rk_integrate(rhs, {y0, yd0}, 0.0, 1.5, io);
  closedform::BranchSolution br{closedform::Window::Upper, +1, 0.0};
  std::vector<double> devs;
  for (double t = 0; t <= 1.5; t += 0.05)
    devs.push_back(closedform::w_of(sol.eval(t)[0], an, br) - t);
  return make("elliptic-branch-inverse", stddev(devs), 1e-5);
}

CheckResult check_appendix_integrals() {
  double worst = 0;
  auto deriv_check = [&](const cubic::RootData& rd, double x) {
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    for (int j = 0; j <= 1; ++j) {
      const double d = (closedform::appendix_integral(j, x + h, rd) -
                        closedform::appendix_integral(j, x - h, rd)) /
                       (2 * h);
      const double expect = (j == 0 ? 1.0 : x) / std::sqrt(rd.X(x));
      worst = std::max(worst, std::abs(d - expect) / std::max(1.0, std::abs(expect)));
    }
  };
  auto an = cubic::analyze({1.0, 1.0, 1.0});  // delta < 0
  deriv_check(an.roots, an.roots.r1 + 0.2);
  deriv_check(an.roots, an.roots.t1 + 0.8);
  cubic::CubicInvariants i3{};
  i3.p = -1.0;
  i3.delta = 4.0;  // roots 1, 0, -1
  auto r3 = cubic::classify_and_solve(i3);
  deriv_check(r3, 1.4);
  deriv_check(r3, 3.0);
  cubic::CubicInvariants id{};
  id.p = -3.0;
  id.q = 2.0;  // (x-1)^2 (x+2)
  auto rdg = cubic::classify_and_solve(id);
  deriv_check(rdg, -1.5);
  deriv_check(rdg, 2.2);
  // definite value against tanh-sinh quadrature
  const double dI = closedform::appendix_integral(1, 2.5, r3) -
                    closedform::appendix_integral(1, 1.2, r3);
  const double q = ode::quad_adaptive(
      [&](double t) { return t / std::sqrt(r3.X(t)); }, 1.2, 2.5, 1e-12, true);
  worst = std::max(worst, std::abs(dI - q) * 1e2);  // scale onto the 1e-6 budget
  return make("appendix-integrals", worst, 1e-6);
}

CheckResult check_family_integral() {
  double worst = 0;
  const double a = 2.0, c = 0.7;
  for (int n = 0; n <= 4; ++n) {
    const double x = 3.1, h = 1e-5;
    const double d = (closedform::family_integral(n, a, c, x + h) -
                      closedform::family_integral(n, a, c, x - h)) /
                     (2 * h);
    const double expect = 1.0 / std::sqrt(a * std::pow(x, 1.0 / (n + 1)) - c);
    worst = std::max(worst, std::abs(d - expect) / expect);
    const double dv = closedform::family_integral(n, a, c, x) -
                      closedform::family_integral(n, a, c, 1.0);
    const double q = ode::quad_adaptive(
        [&](double t) { return 1.0 / std::sqrt(a * std::pow(t, 1.0 / (n + 1)) - c); },
        1.0, x, 1e-12);
    worst = std::max(worst, std::abs(dv - q));
  }
  return make("family-integral", worst, 1e-6);
}

CheckResult check_specfun() {
  double worst = 0;  // scaled so everything shares a 1e-10 budget
  for (double k = 0.0; k <= 0.95; k += 0.19) {
    specfun::Modulus m(k);
    for (double x = -0.9; x <= 0.95; x += 0.3) {
      const double ref = ode::quad_adaptive(
          [&](double t) { return 1.0 / std::sqrt((1 - t * t) * (1 - k * k * t * t)); },
          0, x, 1e-12, true);
      worst = std::max(worst, std::abs(specfun::ellip_f(x, m) - ref));
    }
    for (double u = -2.0; u <= 2.1; u += 0.8) {
      const double ref = ode::quad_adaptive(
          [&](double v) {
            const auto j = specfun::jacobi(v, m);
            return j.dn * j.dn;
          },
          0, u, 1e-12);
      worst = std::max(worst, std::abs(specfun::ellip_e_incomplete(u, m) - ref));
    }
    for (double x = 0.1; x <= 0.9; x += 0.2)
      worst = std::max(worst,
                       std::abs(specfun::jacobi(specfun::ellip_f(x, m), m).sn - x));
  }
  for (double z : {-0.5, -0.1, 0.1, 0.5, 0.9})
    worst = std::max(worst, 1e2 * std::abs(specfun::hyp2f1(1, 1, 2, z) +
                                           std::log(1 - z) / z));
  return make("specfun-oracles", worst, 1e-10);
}

CheckResult check_flrw_pipeline() {
  GammaFamily fam{FamilyKind::Stiff, 4, 0.95, 1.0, 0.3, 0.0, 1};
  moments::MomentState s0{0, 1.0, 1.0, 2.0, closedform::i4_closure(1.0, fam)};
  moments::EvolveOptions eo;
  eo.max_step = 0.001;
  auto traj = moments::evolve(s0, moments::TrapSpec::closure(fam), 0.6, eo);
  cosmo::CosmologyConfig cfg;
  cfg.model = CosmoModel::FLRW;
  cfg.d = 4;
  cfg.Lambda = 0.3;
  cfg.K = 1.0;
  cfg.curvature_k = 1.0;
  cfg.gamma = 2.0;
  auto series = cosmo::map_flrw(traj, cfg);
  auto res = cosmo::flrw_residuals(series, cfg);
  double eos = 0;
  for (std::size_t i = 0; i < series.rows(); ++i)
    eos = std::max(eos, std::abs(series.p_phi[i] - (cfg.gamma - 1) * series.rho_phi[i]) /
                            std::max(1.0, std::abs(series.rho_phi[i])));
  const double worst =
      std::max({res.friedmann_max, res.continuity_max * 0.1, eos * 1e4});
  return make("flrw-pipeline", worst, 1e-6);
}

CheckResult check_bianchi_pipeline() {
  GammaFamily fam{FamilyKind::BianchiGamma2, 4, 1.5, -3.0, -2.0, 0.0, 1};
  moments::MomentState s0{0, 1.0, 1.0, 0.0, closedform::i4_closure(1.0, fam)};
  moments::EvolveOptions eo;
  eo.max_step = 0.001;
  auto traj = moments::evolve(s0, moments::TrapSpec::closure(fam), 0.35, eo);
  cosmo::CosmologyConfig cfg;
  cfg.model = CosmoModel::BianchiI;
  cfg.d = 4;
  cfg.Lambda = -2.0;
  cfg.K = 1.0;
  cfg.gamma = 2.0;
  cfg.shear_constants = {1.0, -1.0, 0.0};
  auto series = cosmo::map_bianchi(traj, cfg);
  auto res = cosmo::bianchi_residuals(series, cfg);
  auto an = cosmo::anisotropy_recover(series, cfg);
  double prod = 0;
  for (std::size_t i = 0; i < series.rows(); ++i) {
    const double p = an.X_axes[0][i] * an.X_axes[1][i] * an.X_axes[2][i];
    const double R3 = std::pow(series.scale[i], 3.0);
    prod = std::max(prod, std::abs(p - R3) / R3);
  }
  const double dmis = std::abs(an.D_shear - an.D_lambda);
  const double worst = std::max({res.eq10_max, res.eq11_max, prod * 1e4, dmis * 1e2});
  return make("bianchi-pipeline", worst, 1e-6);
}

CheckResult check_gamma_family() {
  double worst = 0;
  for (int n : {1, 2, 3}) {
    GammaFamily fam{FamilyKind::BianchiGammaN, 4, 1.0, 0.5, 0.0, 0.0, n};
    auto fs = closedform::solve_family(fam, 1.0, +1);
    moments::MomentState s0{0, 1, 1.0, 2.0 * std::sqrt(2.0 - 0.5),
                            closedform::i4_closure(1.0, fam)};
    auto traj = moments::evolve(s0, moments::TrapSpec::closure(fam), 1.0, 1e-11);
    std::vector<double> devs;
    for (double t = 0; t <= 1.0; t += 0.05)
      devs.push_back(fs.relation(traj.at(t).I2) - 2.0 * t);
    worst = std::max(worst, stddev(devs));
    const double I2q = traj.at(0.7).I2;
    const double trap_law = 2.0 * n * fam.alpha / ((n + 1) * std::pow(I2q, 2.0 - 1.0 / (n + 1)));
    worst = std::max(worst, std::abs(closedform::omega_sq_law(I2q, fam) - trap_law));
  }
  return make("gamma-family", worst, 1e-5);
}

}  // namespace

std::vector<CheckResult> builtin_checks(int jobs) {
  using Fn = std::function<CheckResult()>;
  const std::vector<Fn> fns = {
      check_lambda_conservation, check_emp_reduction,  check_stiff_closed_form,
      check_elliptic_branch,     check_appendix_integrals, check_family_integral,
      check_specfun,             check_flrw_pipeline,  check_bianchi_pipeline,
      check_gamma_family};
  std::vector<CheckResult> out(fns.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < fns.size(); ++i) out[i] = fns[i]();
    return out;
  }
  std::vector<std::thread> pool;
  std::size_t next = 0;
  std::mutex mtx;
  for (int w = 0; w < std::min<int>(jobs, int(fns.size())); ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lk(mtx);
          if (next >= fns.size()) return;
          i = next++;
        }
        out[i] = fns[i]();
      }
    });
  for (auto& th : pool) th.join();
  return out;
}

std::vector<CheckResult> trajectory_checks(const std::string& csv_path) {
  const io::Table table = io::read_csv(csv_path, io::kTrajectoryHeader);
  const auto& t = table.col("t");
  const auto& I1 = table.col("I1");
  const auto& I2 = table.col("I2");
  const auto& I3 = table.col("I3");
  const auto& I4 = table.col("I4");
  const auto& w2 = table.col("omega_sq");
  std::vector<CheckResult> out;

  std::vector<moments::MomentState> states(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i)
    states[i] = {t[i], I1[i], I2[i], I3[i], I4[i]};

  // Conservation of 2 I2 I4 - I3^2/4 across rows, pure arithmetic.
  const double lam0 = moments::lambda_invariant(states[0]);
  double drift = 0;
  for (const auto& s : states)
    drift = std::max(drift, std::abs(moments::lambda_invariant(s) - lam0) /
                                std::max(1e-12, std::abs(lam0)));
  out.push_back(make("lambda-conservation", drift, 1e-7));

  // I1 must be constant.
  double i1dev = 0;
  for (double v : I1) i1dev = std::max(i1dev, std::abs(v - I1[0]));
  out.push_back(make("particle-number", i1dev, 1e-12));

  if (table.rows() >= 5) {
    // I2dot = I3 by nonuniform 4th-order differencing of the I2 column.
    const auto dI2 = ode::fd_derivative_nonuniform(t, I2);
    double worst = 0;
    for (std::size_t i = 2; i + 2 < table.rows(); ++i)
      worst = std::max(worst, std::abs(dI2[i] - I3[i]) / std::max(1.0, std::abs(I3[i])));
    out.push_back(make("i3-matches-di2", worst, 1e-5));

    auto traj = moments::trajectory_from_samples(
        states, moments::TrapSpec::tabulated(t, w2));
    out.push_back(make("emp-reduction", moments::emp_residual(traj), 1e-5));
  }
  return out;
}

}  // namespace empcosmo::cli
