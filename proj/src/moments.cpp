#include "empcosmo/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace empcosmo::moments {

TrapSpec TrapSpec::constant(double omega0) {
  TrapSpec t;
  t.kind = Kind::Constant;
  t.omega0_sq = omega0 * omega0;
  return t;
}

TrapSpec TrapSpec::closure(const closedform::GammaFamily& fam) {
  TrapSpec t;
  t.kind = Kind::Closure;
  t.fam = fam;
  return t;
}

TrapSpec TrapSpec::tabulated(std::vector<double> tg, std::vector<double> w2) {
  if (tg.size() != w2.size() || tg.size() < 2)
    throw std::invalid_argument("TrapSpec::tabulated: need two aligned columns");
  if (!std::is_sorted(tg.begin(), tg.end()) ||
      std::adjacent_find(tg.begin(), tg.end()) != tg.end())
    throw std::invalid_argument("TrapSpec::tabulated: time grid must be strictly increasing");
  TrapSpec t;
  t.kind = Kind::Tabulated;
  t.tgrid = std::move(tg);
  t.w2grid = std::move(w2);
  return t;
}

TrapSpec TrapSpec::callable(std::function<double(double)> f) {
  TrapSpec t;
  t.kind = Kind::Callable;
  t.fn = std::move(f);
  return t;
}

double TrapSpec::omega_sq(double t, double I2) const {
  switch (kind) {
    case Kind::Constant:
      return omega0_sq;
    case Kind::Closure:
      // A trial stage may overshoot past I2 = 0; NaN makes the integrator
      // reject that step instead of aborting the run.
      if (!(I2 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
      return closedform::omega_sq_law(I2, fam);
    case Kind::Tabulated: {
      if (t <= tgrid.front()) return w2grid.front();
      if (t >= tgrid.back()) return w2grid.back();
      const auto it = std::upper_bound(tgrid.begin(), tgrid.end(), t);
      const std::size_t i = std::size_t(it - tgrid.begin());
      const double f = (t - tgrid[i - 1]) / (tgrid[i] - tgrid[i - 1]);
      return (1.0 - f) * w2grid[i - 1] + f * w2grid[i];
    }
    case Kind::Callable:
      return fn(t);
  }
  return 0.0;
}

std::array<double, 4> moment_rhs(const MomentState& s, double omega_sq) {
  return {0.0, s.I3, -2.0 * omega_sq * s.I2 + 4.0 * s.I4, -0.5 * omega_sq * s.I3};
}

double lambda_invariant(const MomentState& s) {
  return 2.0 * s.I2 * s.I4 - s.I3 * s.I3 / 4.0;
}

Trajectory::Trajectory(ode::DenseSolution sol, TrapSpec trap)
    : sol_(std::move(sol)), trap_(std::move(trap)) {
  lambda0_ = lambda_invariant(node(0));
}

MomentState Trajectory::at(double t) const {
  std::vector<double> y;
  sol_.eval(t, y);
  return {t, y[0], y[1], y[2], y[3]};
}

double Trajectory::omega_sq_at(double t) const {
  return trap_.omega_sq(t, at(t).I2);
}

MomentState Trajectory::node(std::size_t i) const {
  const auto& y = sol_.node_state(i);
  return {sol_.node_times()[i], y[0], y[1], y[2], y[3]};
}

Trajectory evolve(const MomentState& s0, const TrapSpec& trap, double t_end,
                  double rtol) {
  EvolveOptions opt;
  opt.rtol = rtol;
  return evolve(s0, trap, t_end, opt);
}

Trajectory evolve(const MomentState& s0, const TrapSpec& trap, double t_end,
                  const EvolveOptions& opt) {
  if (!(s0.I2 > 0.0)) throw std::domain_error("evolve: requires I2(0) > 0");
  if (!(opt.rtol >= 1e-13 && opt.rtol <= 1e-3))
    throw std::domain_error("evolve: rtol must lie in [1e-13, 1e-3]");

  ode::IntegrateOptions io;
  io.rtol = opt.rtol;
  io.max_step = opt.max_step;
  if (opt.atol > 0.0) {
    io.atol = opt.atol;
  } else {
    const double norm = std::sqrt(s0.I1 * s0.I1 + s0.I2 * s0.I2 + s0.I3 * s0.I3 +
                                  s0.I4 * s0.I4);
    io.atol = opt.rtol * 1e-2 * std::max(norm, 1e-30);
  }
  const double floor = opt.i2_floor;
  io.events.push_back([floor](double, const std::vector<double>& y) {
    return y[1] - floor;
  });

  ode::Rhs rhs = [&trap](double t, const std::vector<double>& y,
                         std::vector<double>& dydt) {
    const double w2 = trap.omega_sq(t, y[1]);
    dydt.resize(4);
    dydt[0] = 0.0;
    dydt[1] = y[2];
    dydt[2] = -2.0 * w2 * y[1] + 4.0 * y[3];
    dydt[3] = -0.5 * w2 * y[2];
  };

  auto sol = ode::rk_integrate(rhs, {s0.I1, s0.I2, s0.I3, s0.I4}, s0.t, t_end, io);
  return Trajectory(std::move(sol), trap);
}

Trajectory trajectory_from_samples(const std::vector<MomentState>& states,
                                   TrapSpec trap) {
  if (states.size() < 2)
    throw std::invalid_argument("trajectory_from_samples: need at least 2 rows");
  std::vector<double> ts(states.size());
  std::vector<std::vector<double>> ys(states.size()), fs(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const MomentState& s = states[i];
    ts[i] = s.t;
    ys[i] = {s.I1, s.I2, s.I3, s.I4};
    const auto d = moment_rhs(s, trap.omega_sq(s.t, s.I2));
    fs[i] = {d[0], d[1], d[2], d[3]};
  }
  return Trajectory(ode::DenseSolution::from_samples(std::move(ts), std::move(ys),
                                                     std::move(fs)),
                    std::move(trap));
}

double emp_residual(const Trajectory& traj, int grid_points) {
  if (traj.size() < 5) throw std::domain_error("emp_residual: too few samples");
  // Differencing at the accepted-step breakpoints keeps the dense-output
  // interpolation error out of the stencil.
  std::vector<double> ts, X, w2X;
  const double lam = traj.lambda0();
  if (grid_points <= 0) {
    ts = traj.node_times();
    // Event truncation leaves an off-pattern final interval; stencils
    // spanning it lose their accuracy, so trim it (and any sliver) before
    // differencing.
    if (traj.i2_floor_hit() && ts.size() > 5) ts.pop_back();
    if (ts.size() >= 6) {
      std::vector<double> dts(ts.size() - 1);
      for (std::size_t i = 0; i + 1 < ts.size(); ++i) dts[i] = ts[i + 1] - ts[i];
      std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
      const double med = dts[dts.size() / 2];
      while (ts.size() > 5 && ts.back() - ts[ts.size() - 2] < 0.3 * med)
        ts.pop_back();
      while (ts.size() > 5 && ts[1] - ts[0] < 0.3 * med) ts.erase(ts.begin());
    }
  } else {
    if (grid_points < 5) throw std::domain_error("emp_residual: need at least 5 samples");
    const double ta = traj.t_begin(), tb = traj.t_end();
    ts.resize(std::size_t(grid_points));
    for (int i = 0; i < grid_points; ++i)
      ts[std::size_t(i)] = ta + (tb - ta) * i / (grid_points - 1);
  }
  X.resize(ts.size());
  w2X.resize(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const MomentState s = traj.at(ts[i]);
    if (!(s.I2 > 0.0)) throw std::domain_error("emp_residual: I2 <= 0 on the grid");
    X[i] = std::sqrt(s.I2);
    w2X[i] = traj.trap().omega_sq(ts[i], s.I2) * X[i];
  }
  const auto Xdd = ode::fd_second_derivative_nonuniform(ts, X);
  double worst = 0.0;
  for (std::size_t i = 0; i < Xdd.size(); ++i) {
    const double Xi = X[i + 2];
    worst = std::max(worst, std::abs(Xdd[i] + w2X[i + 2] - lam / (Xi * Xi * Xi)));
  }
  return worst;
}

double i2_scalar_residual(const Trajectory& traj, const closedform::GammaFamily& fam) {
  const double lam = traj.lambda0();
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const MomentState s = traj.node(i);
    const double rad = closedform::closure_radicand(s.I2, fam, lam);
    worst = std::max(worst, std::abs(s.I3 * s.I3 / 4.0 - rad));
  }
  return worst;
}

}  // namespace empcosmo::moments
