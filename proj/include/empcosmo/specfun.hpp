#pragma once

namespace empcosmo::specfun {

// Elliptic modulus, restricted to [0,1].  Only k is stored; the
// complementary modulus k' with k'^2 + k^2 = 1 is derived on demand.
struct Modulus {
  double k = 0.0;
  Modulus() = default;
  explicit Modulus(double k_value);
  double kc() const;  // sqrt((1-k)(1+k))
};

// Within this distance of k = 1 the elliptic routines switch to their
// logarithmic / hyperbolic limit forms (raw AGM loses digits there).
inline constexpr double kModulusBoundarySwitch = 1e-9;

// Incomplete elliptic integral of the first kind in Jacobi form,
//   EF(x,k) = integral_0^x dt / sqrt((1-t^2)(1-k^2 t^2)),
// evaluated by the arithmetic-geometric mean with the ascending Landen
// amplitude recursion.  Odd in x.  Requires |x| <= 1, and |x| < 1 when k = 1.
double ellip_f(double x, Modulus k);

// Incomplete elliptic integral of the second kind as a function of the
// Jacobi argument u:  E(u,k) = integral_0^u dn^2(v,k) dv.
double ellip_e_incomplete(double u, Modulus k);

// Complete integrals K(k) = EF(1,k) and E(k) = E(K(k),k).
double complete_k(Modulus k);
double complete_e(Modulus k);

struct JacobiValues {
  double sn, cn, dn, tn;  // tn = sn/cn; +-inf at the poles of tn
};

// Jacobi elliptic functions by the descending AGM amplitude recursion.
JacobiValues jacobi(double u, Modulus k);

// Jacobi amplitude am(u,k), i.e. sn(u) = sin(am(u)).
double jacobi_amplitude(double u, Modulus k);

// Smallest u >= 0 with cn(u,k) = y, for y in (0,1].
double inverse_cn(double y, Modulus k);

// Gauss hypergeometric series 2F1(a,b;c;z) for |z| < 1, direct summation
// with relative term cutoff 1e-15 and a 10^6-term cap.
double hyp2f1(double a, double b, double c, double z);

}  // namespace empcosmo::specfun
