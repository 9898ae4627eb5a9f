#pragma once

#include <functional>
#include <vector>

namespace empcosmo::ode {

using Rhs = std::function<void(double t, const std::vector<double>& y,
                               std::vector<double>& dydt)>;

// Event functions are checked for a sign change on every accepted step.
// A root terminates the integration at its location.
using EventFn = std::function<double(double t, const std::vector<double>& y)>;

struct IntegrateOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = 0.02;
  double initial_step = 0.0;  // 0 = choose automatically
  long max_steps = 4000000;
  std::vector<EventFn> events;
};

// Piecewise cubic Hermite interpolant over the accepted steps of one
// integration.  Node values and derivatives are exact at breakpoints, so the
// interpolant is continuous with continuous first derivative.
class DenseSolution {
 public:
  double t_begin() const { return t_nodes_.front(); }
  double t_end() const { return t_nodes_.back(); }
  std::size_t dim() const { return dim_; }
  std::size_t segments() const { return t_nodes_.size() - 1; }

  const std::vector<double>& node_times() const { return t_nodes_; }
  const std::vector<double>& node_state(std::size_t i) const { return y_nodes_[i]; }
  const std::vector<double>& node_derivative(std::size_t i) const { return f_nodes_[i]; }

  void eval(double t, std::vector<double>& y) const;
  std::vector<double> eval(double t) const;
  // Derivative of the interpolant (exact at nodes).
  void eval_derivative(double t, std::vector<double>& dydt) const;

  bool event_hit() const { return event_index_ >= 0; }
  int event_index() const { return event_index_; }

  long accepted_steps() const { return n_accepted_; }
  long rejected_steps() const { return n_rejected_; }
  long rhs_evaluations() const { return n_rhs_; }

  // Builds an interpolant from externally supplied nodes (e.g. CSV rows with
  // derivatives recomputed from the governing equations).
  static DenseSolution from_samples(std::vector<double> t,
                                    std::vector<std::vector<double>> y,
                                    std::vector<std::vector<double>> f);

 private:
  std::size_t segment_of(double t) const;

  std::size_t dim_ = 0;
  std::vector<double> t_nodes_;
  std::vector<std::vector<double>> y_nodes_;
  std::vector<std::vector<double>> f_nodes_;
  int event_index_ = -1;
  long n_accepted_ = 0, n_rejected_ = 0, n_rhs_ = 0;

  friend DenseSolution rk_integrate(const Rhs&, std::vector<double>, double,
                                    double, const IntegrateOptions&);
};

// Embedded Dormand-Prince 5(4) pair with PI step control and dense output.
// Integrates forward or backward depending on sign(t_end - t0).
// Throws std::runtime_error on step-size underflow or step-count overflow.
DenseSolution rk_integrate(const Rhs& rhs, std::vector<double> y0, double t0,
                           double t_end, const IntegrateOptions& opt = {});

// Adaptive quadrature of f over [a,b] to absolute tolerance tol.
// With singular_endpoints the integral is evaluated by a tanh-sinh rule that
// tolerates integrable endpoint singularities such as (x-a)^(-1/2).
// Throws std::runtime_error if the requested tolerance cannot be met.
double quad_adaptive(const std::function<double(double)>& f, double a, double b,
                     double tol, bool singular_endpoints = false);

// First derivative of uniformly spaced samples, 4th order: central stencils
// in the interior, one-sided 4th-order stencils at the two points nearest
// each edge.  Needs at least 5 samples.
std::vector<double> fd_derivative(const std::vector<double>& samples, double h);

// Second derivative at interior points (indices 2 .. n-3), 4th order.
// Returns n-4 values.  Needs at least 5 samples.
std::vector<double> fd_second_derivative(const std::vector<double>& samples, double h);

// Finite-difference weights for the m-th derivative at z from the given
// nodes (Fornberg's recurrence).  weights has one entry per node.
void fd_weights(double z, const std::vector<double>& xs, int m,
                std::vector<double>& weights);

// Second derivative at interior points of a strictly increasing, possibly
// nonuniform grid via sliding 5-point stencils (4th order on smooth grids).
// Returns n-4 values for indices 2 .. n-3.
std::vector<double> fd_second_derivative_nonuniform(const std::vector<double>& xs,
                                                    const std::vector<double>& ys);

// First derivative on a possibly nonuniform grid, sliding 5-point stencils,
// one value per sample (stencils shift near the edges).
std::vector<double> fd_derivative_nonuniform(const std::vector<double>& xs,
                                             const std::vector<double>& ys);

// Gauss-Legendre nodes and weights on [-1,1], computed by Newton iteration
// on the Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Cumulative integral of samples f(x_i) on a (possibly nonuniform) strictly
// increasing grid, using local cubic interpolation through four neighbouring
// points per interval.  Returns partial integrals anchored at xs.front().
std::vector<double> cumulative_integral(const std::vector<double>& xs,
                                        const std::vector<double>& fs);

}  // namespace empcosmo::ode
