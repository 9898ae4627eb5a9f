#include "empcosmo/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace empcosmo::specfun {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxAgm = 32;

struct AgmLadder {
  int n = 0;                 // iterations performed; arrays valid for 0..n
  double a[kMaxAgm + 1];
  double b[kMaxAgm + 1];
  double c[kMaxAgm + 1];
};

AgmLadder agm_ladder(double k, double kc) {
  AgmLadder L;
  L.a[0] = 1.0;
  L.b[0] = kc;
  L.c[0] = k;
  int i = 0;
  while (i < kMaxAgm && std::abs(L.c[i]) > 1e-17 * L.a[i]) {
    L.a[i + 1] = 0.5 * (L.a[i] + L.b[i]);
    L.b[i + 1] = std::sqrt(L.a[i] * L.b[i]);
    L.c[i + 1] = 0.5 * (L.a[i] - L.b[i]);
    ++i;
  }
  L.n = i;
  return L;
}

// Continuous branch of arctan((b/a) tan(phi)), i.e. the value within pi/2 of
// phi itself (both lie in the same half-period of the tangent).
double landen_angle(double a, double b, double phi) {
  double d = std::atan2(b * std::sin(phi), a * std::cos(phi));
  d += 2 * kPi * std::round((phi - d) / (2 * kPi));
  return d;
}

// Amplitudes phi_0..phi_n of the descending Landen recursion for given u,
// with phi_n = 2^n a_n u.  phis must hold n+1 values.
void amplitudes(const AgmLadder& L, double u, double* phis) {
  phis[L.n] = std::ldexp(L.a[L.n] * u, L.n);
  for (int i = L.n; i >= 1; --i) {
    const double s = std::clamp(L.c[i] / L.a[i] * std::sin(phis[i]), -1.0, 1.0);
    phis[i - 1] = 0.5 * (phis[i] + std::asin(s));
  }
}

}  // namespace

Modulus::Modulus(double k_value) : k(k_value) {
  if (!(k >= 0.0 && k <= 1.0))
    throw std::domain_error("Modulus: k must lie in [0,1]");
}

double Modulus::kc() const { return std::sqrt((1.0 - k) * (1.0 + k)); }

double ellip_f(double x, Modulus mod) {
  const double k = mod.k;
  if (!(std::abs(x) <= 1.0))
    throw std::domain_error("ellip_f: |x| must be <= 1");
  if (x == 0.0) return 0.0;
  if (std::abs(x) == 1.0) {
    if (k >= 1.0) throw std::domain_error("ellip_f: diverges at |x| = 1 when k = 1");
    return std::copysign(complete_k(mod), x);
  }
  if (1.0 - k <= kModulusBoundarySwitch) return std::atanh(x);
  if (k == 0.0) return std::asin(x);

  double phi = std::asin(x);
  double a = 1.0, b = mod.kc();
  int n = 0;
  while (n < kMaxAgm && a - b > 1e-17 * a) {
    phi += landen_angle(a, b, phi);
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    ++n;
  }
  return phi / std::ldexp(a, n);
}

double complete_k(Modulus mod) {
  if (mod.k >= 1.0) throw std::domain_error("complete_k: diverges at k = 1");
  const AgmLadder L = agm_ladder(mod.k, mod.kc());
  return kPi / (2.0 * L.a[L.n]);
}

double complete_e(Modulus mod) {
  if (mod.k >= 1.0) return 1.0;  // E(1) = 1
  const AgmLadder L = agm_ladder(mod.k, mod.kc());
  double csum = 0.0;
  for (int i = 0; i <= L.n; ++i) csum += std::ldexp(L.c[i] * L.c[i], i - 1);
  return complete_k(mod) * (1.0 - csum);
}

double jacobi_amplitude(double u, Modulus mod) {
  if (!std::isfinite(u)) throw std::domain_error("jacobi_amplitude: non-finite argument");
  const double k = mod.k;
  if (k == 0.0) return u;
  if (1.0 - k <= kModulusBoundarySwitch) return std::atan(std::sinh(u));  // gd(u)
  const AgmLadder L = agm_ladder(k, mod.kc());
  double phis[kMaxAgm + 1];
  amplitudes(L, u, phis);
  return phis[0];
}

JacobiValues jacobi(double u, Modulus mod) {
  if (!std::isfinite(u)) throw std::domain_error("jacobi: non-finite argument");
  const double k = mod.k;
  JacobiValues v{};
  if (1.0 - k <= kModulusBoundarySwitch) {
    v.sn = std::tanh(u);
    v.cn = v.dn = 1.0 / std::cosh(u);
    v.tn = std::sinh(u);
    return v;
  }
  const double phi = jacobi_amplitude(u, mod);
  v.sn = std::sin(phi);
  v.cn = std::cos(phi);
  v.dn = std::sqrt((1.0 - k) * (1.0 + k) + k * k * v.cn * v.cn);
  v.tn = v.sn / v.cn;
  return v;
}

double ellip_e_incomplete(double u, Modulus mod) {
  if (!std::isfinite(u)) throw std::domain_error("ellip_e_incomplete: non-finite argument");
  const double k = mod.k;
  if (u == 0.0) return 0.0;
  if (k == 0.0) return u;  // dn = 1
  if (1.0 - k <= kModulusBoundarySwitch) return std::tanh(u);
  const AgmLadder L = agm_ladder(k, mod.kc());
  double phis[kMaxAgm + 1];
  amplitudes(L, u, phis);
  double csum = 0.0;
  for (int i = 0; i <= L.n; ++i) csum += std::ldexp(L.c[i] * L.c[i], i - 1);
  double corr = 0.0;
  for (int i = 1; i <= L.n; ++i) corr += L.c[i] * std::sin(phis[i]);
  return u * (1.0 - csum) + corr;
}

double inverse_cn(double y, Modulus mod) {
  if (!(y > 0.0 && y <= 1.0))
    throw std::domain_error("inverse_cn: argument must lie in (0,1]");
  if (y == 1.0) return 0.0;
  return ellip_f(std::sqrt((1.0 - y) * (1.0 + y)), mod);
}

double hyp2f1(double a, double b, double c, double z) {
  if (!(std::abs(z) < 1.0))
    throw std::runtime_error("hyp2f1: series requires |z| < 1");
  if (c <= 0.0 && c == std::floor(c)) {
    // Termination before the pole of (c)_n rescues the series only if a or b
    // is a non-positive integer of smaller magnitude.
    const bool a_cuts = a <= 0.0 && a == std::floor(a) && a > c;
    const bool b_cuts = b <= 0.0 && b == std::floor(b) && b > c;
    if (!a_cuts && !b_cuts)
      throw std::domain_error("hyp2f1: c is a non-positive integer");
  }
  if (z == 0.0) return 1.0;
  double term = 1.0, sum = 1.0;
  constexpr long cap = 1000000;
  for (long n = 0; n < cap; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z;
    sum += term;
    if (std::abs(term) <= 1e-15 * std::abs(sum)) return sum;
  }
  throw std::runtime_error("hyp2f1: series did not converge within the term cap");
}

}  // namespace empcosmo::specfun
