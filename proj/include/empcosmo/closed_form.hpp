#pragma once

#include <optional>
#include <vector>

#include "empcosmo/cubic.hpp"

namespace empcosmo::closedform {

// ---------------------------------------------------------------------------
// Elliptic branch solutions of the auxiliary ODE  ydot^2/4 = 2A/y^2 - B + Cy
// in the reduced variable x = (y - shift_n)/m, for the one-real-root class.
// ---------------------------------------------------------------------------

enum class Window { Lower, Upper };  // r1 < x < t1  /  x > t1

struct BranchSolution {
  Window window = Window::Lower;
  int sign = +1;
  double z0 = 0.0;
};

// u(x,k) = EF(sqrt(theta(x)), k) with theta(x) = [2x-(t1+t2)](t1-t2)/(x-t2)^2.
// Defined for x > r1 (OneReal class); u(t1) is the complete integral K(k).
// The equivalent inverse-cn description cn(u) = |x-t1|/(x-t2) is checked
// internally to 1e-10.
double theta_u(double x, const cubic::RootData& roots);

// The branch antiderivative z(x) combining u(x), E(u(x)) and
// sqrt(X(x))/(x-t2), with window-dependent coefficient signs.  x may equal
// t1 (treated as the removable window boundary).
double z_branch(double x, const cubic::CubicAnalysis& an, const BranchSolution& br);

// w(x) = z((x - shift_n)/m): implicit inverse of the solution y(t).
double w_of(double x, const cubic::CubicAnalysis& an, const BranchSolution& br);

// Antiderivatives I_j(x) of x^j / sqrt(X(x)), j in {0,1}, in all three
// discriminant classes.  Valid regions: x > r1, x != t1 (OneReal; the two
// windows carry independent integration constants); x > a (ThreeReal);
// x > a for the triple root, x > c with x != a otherwise (Degenerate).
double appendix_integral(int j, double x, const cubic::RootData& roots);

// ---------------------------------------------------------------------------
// Equation-of-state families.
// ---------------------------------------------------------------------------

enum class CosmoModel { FLRW, BianchiI };

enum class FamilyKind { Stiff, Matter, Radiation, BianchiGamma2, BianchiGammaN };

struct GammaFamily {
  FamilyKind kind = FamilyKind::Stiff;
  int d = 4;            // spacetime dimension, >= 3
  double alpha = 1.0;   // integration constant of the I4 closure, > 0
  double lambda = 0.0;  // moment invariant entering the I2 relations
  double Lambda = 0.0;  // cosmological constant
  double t0 = 0.0;      // integration constant of the time relation
  int n = 1;            // index of the gamma_n = 2(1 - 1/(n+1)) family

  double gamma() const;
  CosmoModel model() const;  // FLRW for Stiff/Matter/Radiation, Bianchi I otherwise
};

// Trap-frequency law omega^2(I2), Lambda-independent:
//   FLRW:      gamma (d-1) alpha / I2^((gamma(d-1)+2)/2)
//   Bianchi I: gamma alpha / I2^(gamma/2+1)
double omega_sq_law(double I2, const GammaFamily& fam);

// First integral of the I4 equation:
//   FLRW:      alpha / I2^(gamma(d-1)/2) + Lambda/((d-1)(d-2))
//   Bianchi I: alpha / I2^(gamma/2) + (d-1) Lambda/(d-2)
double i4_closure(double I2, const GammaFamily& fam);

// Finite-sum antiderivative of 1/sqrt(a x^(1/(n+1)) - c), n >= 0.
// Requires x > 0 and a positive radicand.
double family_integral(int n, double a, double c, double x);

// The closure first integral I2dot^2/4 as a function of I2:
//   FLRW:      2 alpha / I2^((gamma(d-1)-2)/2) + 2 Lambda I2/((d-1)(d-2)) - lambda
//   Bianchi I: 2 alpha / I2^(gamma/2-1) + 2 (d-1) Lambda I2/(d-2) - lambda
double closure_radicand(double I2, const GammaFamily& fam, double lambda);

struct SolveSample {
  double t, I2, omega_sq;
};

// Closed-form (or quadrature-backed) solution of the closure ODE for one
// family.  Implicit relations are inverted by bisection+Newton on the
// monotone segment containing the initial condition; explicit families
// evaluate their formula directly.
class FamilySolution {
 public:
  const GammaFamily& family() const { return fam_; }
  int sign() const { return sign_; }          // sign of I2dot at t = 0
  double t0() const { return t0_; }           // constant of the time relation
  double time_scale() const { return scale_; }  // relation = sign*scale*t + t0
  double i2_initial() const { return i2_0_; }
  bool explicit_form() const;

  // Textbook-form LHS of the implicit relation; throws std::logic_error for the
  // explicit families (Stiff with Lambda = 0, Bianchi gamma = 2).
  double relation(double I2) const;

  // I2 at lab time t >= 0, within the monotone segment from the initial
  // condition (explicit families evolve through turning points).
  double i2_at(double t) const;

  // Time at which I2dot vanishes (radicand root), when reachable.
  std::optional<double> turning_time() const { return turning_time_; }
  // Time at which I2 reaches zero, when reachable.
  std::optional<double> collapse_time() const { return collapse_time_; }

  std::vector<SolveSample> sample(double t_end, int n_samples) const;

 private:
  friend FamilySolution solve_family(const GammaFamily&, double, int);

  enum class Form {
    StiffQuadratic,    // I2^2 quadratic in t (Lambda = 0)
    StiffElliptic,     // w(I2) via the reduced cubic (Lambda != 0)
    MatterClosed,      // arctan relation (Lambda = 0)
    MatterQuadrature,  // quadrature of the defining integral (Lambda != 0)
    RadiationClosed,   // arctan relation (Lambda = 0)
    BianchiLinear,     // gamma = 2, Lambda = 0
    BianchiParabola,   // gamma = 2, Lambda != 0
    BianchiFamilyN     // gamma_n ladder, Lambda = 0
  };

  double radicand(double I2) const;        // I2dot^2/4 as a function of I2
  double phi(double I2) const;             // relation / time_scale
  double invert_phi(double target, double t_hint) const;
  double stiff_w(double I2) const;         // glued w for StiffElliptic

  GammaFamily fam_{};
  Form form_ = Form::StiffQuadratic;
  int sign_ = +1;
  double scale_ = 1.0;
  double t0_ = 0.0;
  double i2_0_ = 1.0;
  std::optional<double> turning_time_, collapse_time_;
  double seg_lo_ = 0.0, seg_hi_ = 0.0;  // monotone segment (hi may be +inf)

  // StiffQuadratic / BianchiParabola coefficients: value = q0 + q1 t + q2 t^2
  // (for I2^2 and I2 respectively); BianchiLinear uses q0 + q1 t.
  double q0_ = 0, q1_ = 0, q2_ = 0;

  cubic::CubicAnalysis an_{};   // StiffElliptic
  double glue_lower_ = 0, glue_upper_ = 0;
};

// Builds the solution for the family, anchored at I2(0) = I2_0 with
// sign(I2dot(0)) = di2_sign.  Throws std::domain_error for unsupported
// combinations (Radiation or gamma_n with Lambda != 0; stated domain
// violations), with a pointer to numeric integration.
FamilySolution solve_family(const GammaFamily& fam, double I2_0, int di2_sign = +1);

}  // namespace empcosmo::closedform
