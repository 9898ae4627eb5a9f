#pragma once

#include <array>
#include <functional>
#include <vector>

#include "empcosmo/closed_form.hpp"
#include "empcosmo/ode.hpp"

namespace empcosmo::moments {

// Condensate-side state: the four wavefunction moments at lab time t.
// I2 > 0 (squared wavepacket width); I2dot = I3 along valid trajectories.
struct MomentState {
  double t = 0.0;
  double I1 = 1.0;
  double I2 = 1.0;
  double I3 = 0.0;
  double I4 = 0.5;
};

// Harmonic trap specification omega^2(t).  The Callable kind is a
// programmatic extension used by tests; the CLI exposes the other three.
struct TrapSpec {
  enum class Kind { Constant, Closure, Tabulated, Callable };
  Kind kind = Kind::Constant;

  double omega0_sq = 1.0;                     // Constant
  closedform::GammaFamily fam{};              // Closure
  std::vector<double> tgrid, w2grid;          // Tabulated (linear interpolation)
  std::function<double(double)> fn;           // Callable

  static TrapSpec constant(double omega0);
  static TrapSpec closure(const closedform::GammaFamily& fam);
  static TrapSpec tabulated(std::vector<double> t, std::vector<double> omega_sq);
  static TrapSpec callable(std::function<double(double)> omega_sq_of_t);

  double omega_sq(double t, double I2) const;
};

// RHS of the moment system for a given omega^2:
//   (I1dot, I2dot, I3dot, I4dot) = (0, I3, -2 w^2 I2 + 4 I4, -(w^2/2) I3).
std::array<double, 4> moment_rhs(const MomentState& s, double omega_sq);

// Conserved combination 2 I2 I4 - I3^2 / 4.
double lambda_invariant(const MomentState& s);

struct EvolveOptions {
  double rtol = 1e-10;
  double atol = 0.0;  // 0: rtol * 1e-2 * ||s0||
  double max_step = 0.008;  // keeps breakpoints dense (and mostly uniform)
  double i2_floor = 1e-12;
};

class Trajectory {
 public:
  Trajectory(ode::DenseSolution sol, TrapSpec trap);

  double t_begin() const { return sol_.t_begin(); }
  double t_end() const { return sol_.t_end(); }
  double lambda0() const { return lambda0_; }
  bool i2_floor_hit() const { return sol_.event_hit(); }

  MomentState at(double t) const;
  double omega_sq_at(double t) const;

  std::size_t size() const { return sol_.node_times().size(); }
  const std::vector<double>& node_times() const { return sol_.node_times(); }
  MomentState node(std::size_t i) const;

  const ode::DenseSolution& dense() const { return sol_; }
  const TrapSpec& trap() const { return trap_; }

 private:
  ode::DenseSolution sol_;
  TrapSpec trap_;
  double lambda0_ = 0.0;
};

Trajectory evolve(const MomentState& s0, const TrapSpec& trap, double t_end,
                  double rtol = 1e-10);
Trajectory evolve(const MomentState& s0, const TrapSpec& trap, double t_end,
                  const EvolveOptions& opt);

// Rebuilds a trajectory from sampled states (e.g. CSV rows); the node
// derivatives come from moment_rhs with the trap's omega^2.
Trajectory trajectory_from_samples(const std::vector<MomentState>& states,
                                   TrapSpec trap);

// Max |Xddot + w^2 X - lambda/X^3| over interior points, X = sqrt(I2),
// Xddot by 4th-order central differences, lambda measured at t0.
// grid_points = 0 differences at the trajectory's own breakpoints;
// otherwise a uniform grid of that size is resampled from the dense output.
double emp_residual(const Trajectory& traj, int grid_points = 0);

// Max |I3^2/4 - radicand(I2)| over trajectory nodes, where the radicand is
// the closure first integral (FLRW or Bianchi I per the family), with lambda
// measured at t0.
double i2_scalar_residual(const Trajectory& traj, const closedform::GammaFamily& fam);

}  // namespace empcosmo::moments
