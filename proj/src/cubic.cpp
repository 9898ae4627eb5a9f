#include "empcosmo/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace empcosmo::cubic {

namespace {

double newton_polish(double x, double p, double q) {
  for (int i = 0; i < 2; ++i) {
    const double f = cubic_value(x, p, q);
    const double df = 3.0 * x * x + p;
    if (df == 0.0) break;
    x -= f / df;
  }
  return x;
}

}  // namespace

double cubic_value(double x, double p, double q) {
  return std::fma(x * x, x, std::fma(p, x, q));
}

double cubic_value(double x, const CubicInvariants& inv) {
  return cubic_value(x, inv.p, inv.q);
}

double RootData::X(double x) const {
  switch (cls) {
    case CubicClass::OneReal: {
      const double dr = x - rho;
      return (x - r1) * (dr * dr + sigma * sigma);
    }
    case CubicClass::ThreeReal:
      return (x - a) * (x - b) * (x - c);
    case CubicClass::Degenerate: {
      const double da = x - a;
      return da * da * (x - c);
    }
  }
  return 0.0;
}

CubicInvariants derive_invariants(const EmpCoefficients& coeffs) {
  if (!(coeffs.A > 0.0))
    throw std::domain_error("derive_invariants: requires A > 0");
  if (coeffs.C == 0.0)
    throw std::domain_error(
        "derive_invariants: C = 0 has no elliptic reduction; "
        "use the elementary Lambda = 0 solution paths");
  const double A = coeffs.A, B = coeffs.B, C = coeffs.C;
  CubicInvariants inv{};
  inv.m = std::copysign(std::cbrt(4.0 / std::abs(C)), C);
  inv.shift_n = B / (3.0 * C);
  inv.g2 = inv.m * B * B / (3.0 * C);
  inv.g3 = 2.0 * B * B * B / (27.0 * C * C) - 2.0 * A;
  inv.p = -inv.g2 / 4.0;
  inv.q = -inv.g3 / 4.0;
  inv.delta = -4.0 * inv.p * inv.p * inv.p - 27.0 * inv.q * inv.q;
  return inv;
}

RootData classify_and_solve(const CubicInvariants& inv, double degeneracy_tol) {
  const double p = inv.p, q = inv.q;
  RootData rd{};
  rd.p = p;
  rd.q = q;
  rd.delta = inv.delta;

  const double scale = std::max({1.0, std::abs(p * p * p), q * q});
  if (std::abs(inv.delta) <= degeneracy_tol * scale) {
    rd.cls = CubicClass::Degenerate;
    rd.near_degenerate = inv.delta != 0.0;
    // X = (x-a)^2 (x-c) with 2a + c = 0 forces p = -3a^2, q = 2a^3.
    rd.a = std::cbrt(q / 2.0);
    rd.c = -2.0 * rd.a;
    return rd;
  }

  if (inv.delta > 0.0) {
    rd.cls = CubicClass::ThreeReal;
    // p < 0 here; trigonometric solution of the depressed cubic.
    const double mfac = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * mfac), -1.0, 1.0);
    const double theta = std::acos(arg);
    const double two_pi = 6.28318530717958647692;
    double r[3];
    for (int j = 0; j < 3; ++j)
      r[j] = newton_polish(mfac * std::cos((theta - two_pi * j) / 3.0), p, q);
    std::sort(r, r + 3, std::greater<>());
    rd.a = r[0];
    rd.b = r[1];
    rd.c = r[2];
    rd.g = 2.0 / std::sqrt(rd.a - rd.c);
    rd.modulus = specfun::Modulus(
        std::sqrt(std::clamp((rd.b - rd.c) / (rd.a - rd.c), 0.0, 1.0)));
    return rd;
  }

  rd.cls = CubicClass::OneReal;
  // Cardano, arranged to avoid cancellation between the cube roots.
  const double w = -q / 2.0;
  const double s = std::sqrt(w * w + p * p * p / 27.0);  // > 0 for delta < 0
  double r1;
  if (p == 0.0) {
    r1 = std::cbrt(-q);
  } else {
    const double u = (w >= 0.0) ? std::cbrt(w + s) : std::cbrt(w - s);
    r1 = u - p / (3.0 * u);
  }
  r1 = newton_polish(r1, p, q);
  rd.r1 = r1;
  rd.rho = -r1 / 2.0;
  // Complex pair from the quadratic cofactor x^2 + r1 x + (p + r1^2).
  rd.sigma = 0.5 * std::sqrt(std::max(0.0, 3.0 * r1 * r1 + 4.0 * p));
  const double s9 = std::sqrt(9.0 * rd.rho * rd.rho + rd.sigma * rd.sigma);
  rd.t1 = r1 + s9;
  rd.t2 = r1 - s9;
  rd.g = 1.0 / std::sqrt(s9);
  rd.modulus = specfun::Modulus(
      std::sqrt(std::clamp((s9 + 3.0 * rd.rho) / (2.0 * s9), 0.0, 1.0)));
  return rd;
}

CubicAnalysis analyze(const EmpCoefficients& coeffs, double degeneracy_tol) {
  CubicAnalysis an;
  an.coeffs = coeffs;
  an.inv = derive_invariants(coeffs);
  an.roots = classify_and_solve(an.inv, degeneracy_tol);
  return an;
}

}  // namespace empcosmo::cubic
