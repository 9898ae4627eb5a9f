#pragma once

#include "empcosmo/specfun.hpp"

namespace empcosmo::cubic {

// Coefficients of the auxiliary first-integral ODE  ydot^2/4 = 2A/y^2 - B + C y.
// A > 0 throughout; C = 0 belongs to the elementary solution paths and is
// rejected by derive_invariants.
struct EmpCoefficients {
  double A = 1.0;
  double B = 0.0;
  double C = 1.0;
};

// Weierstrass-reduced data:  v = (y - shift_n)/m maps the ODE onto
// z'(x)^2 = (m^2/16)(m x + 3 C shift_n / (3C))^2 / X(x),  X(x) = x^3 + p x + q.
struct CubicInvariants {
  double m;        // sign(C) * (4/|C|)^(1/3), so m^3 = 4/C
  double shift_n;  // B / (3C)
  double g2, g3;   // Weierstrass invariants
  double p, q;     // p = -g2/4, q = -g3/4
  double delta;    // -4 p^3 - 27 q^2
};

enum class CubicClass { OneReal, ThreeReal, Degenerate };

struct RootData {
  CubicClass cls;
  double delta = 0.0;
  double p = 0.0, q = 0.0;
  bool near_degenerate = false;  // |delta| fell inside the degeneracy band but was nonzero

  // OneReal (delta < 0): real root r1, complex pair rho +- i sigma, and the
  // derived parameters of the elliptic reduction.
  double r1 = 0.0, sigma = 0.0, rho = 0.0, g = 0.0, t1 = 0.0, t2 = 0.0;
  specfun::Modulus modulus{};

  // ThreeReal (delta > 0): a > b > c, with modulus = sqrt((b-c)/(a-c)) and
  // g = 2/sqrt(a-c) stored in the shared fields above.
  double a = 0.0, b = 0.0, c = 0.0;
  // Degenerate (delta = 0): a is the repeated root, c the simple one (a = c
  // for a triple root).

  // X(x) evaluated from the factored form of the class (stable near roots).
  double X(double x) const;
};

// Fields of CubicInvariants from (A,B,C).  Throws std::domain_error when
// C = 0 with a directive to use the elementary (Lambda = 0) code paths.
CubicInvariants derive_invariants(const EmpCoefficients& coeffs);

// Root classification and derived parameters.  degeneracy_tol is applied to
// |delta| scaled by max(1, |p|^3, |q|^2).
RootData classify_and_solve(const CubicInvariants& inv, double degeneracy_tol = 1e-10);

// x^3 + p x + q with fused accumulation.
double cubic_value(double x, double p, double q);
double cubic_value(double x, const CubicInvariants& inv);

struct CubicAnalysis {
  EmpCoefficients coeffs;
  CubicInvariants inv;
  RootData roots;
};

CubicAnalysis analyze(const EmpCoefficients& coeffs, double degeneracy_tol = 1e-10);

}  // namespace empcosmo::cubic
