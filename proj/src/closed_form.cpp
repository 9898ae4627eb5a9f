#include "empcosmo/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "empcosmo/ode.hpp"

namespace empcosmo::closedform {

namespace {

using cubic::CubicAnalysis;
using cubic::CubicClass;
using cubic::RootData;

constexpr double kInf = std::numeric_limits<double>::infinity();

double theta_of(double x, const RootData& rd) {
  const double d2 = x - rd.t2;
  return std::clamp((2.0 * x - (rd.t1 + rd.t2)) * (rd.t1 - rd.t2) / (d2 * d2), 0.0, 1.0);
}

// u(x,k) without the strict x > r1 precondition (tolerates the window
// boundaries, where theta is clamped onto [0,1]).
double u_unchecked(double x, const RootData& rd) {
  return specfun::ellip_f(std::sqrt(theta_of(x, rd)), rd.modulus);
}

// The +-bracket of the branch antiderivative, Lower/Upper window form.
double onereal_bracket(double x, const CubicAnalysis& an, Window w) {
  const RootData& rd = an.roots;
  const double m = an.inv.m, g = rd.g;
  const double B = an.coeffs.B, C = an.coeffs.C;
  const double u = u_unchecked(x, rd);
  const double Eu = specfun::ellip_e_incomplete(u, rd.modulus);
  const double coef = m * m / (2.0 * g) + m * m * g * rd.t2 / 4.0 + m * g * B / (12.0 * C);
  const double croot = m * m * std::sqrt(std::max(0.0, rd.X(x))) / (2.0 * (x - rd.t2));
  if (w == Window::Lower) return coef * u - m * m / (2.0 * g) * Eu + croot;
  return -coef * u + m * m / (2.0 * g) * Eu + croot;
}

// I_j antiderivatives per class, tolerating the turning-root boundary where
// the antiderivative vanishes by construction.
double threereal_I(int j, double x, const RootData& rd) {
  const double arg2 = std::clamp((x - rd.a) / (x - rd.b), 0.0, 1.0);
  const double u = specfun::ellip_f(std::sqrt(arg2), rd.modulus);
  const double g = rd.g;  // 2/sqrt(a-c)
  if (j == 0) return g * u;
  const auto jv = specfun::jacobi(u, rd.modulus);
  const double Eu = specfun::ellip_e_incomplete(u, rd.modulus);
  return 2.0 * std::sqrt(rd.a - rd.c) * (jv.dn * jv.tn - Eu) + rd.a * g * u;
}

double onereal_I(int j, double x, const RootData& rd) {
  const double u = u_unchecked(x, rd);
  const double g = rd.g;
  if (j == 0) return x < rd.t1 ? g * u : -g * u;
  const double Eu = specfun::ellip_e_incomplete(u, rd.modulus);
  const double rt = g * std::sqrt(std::max(0.0, rd.X(x))) / (x - rd.t2);
  if (x < rd.t1) return 2.0 / g * (u - Eu + rt) + rd.t2 * g * u;
  return -2.0 / g * (u - Eu - rt) - rd.t2 * g * u;
}

bool degenerate_is_triple(const RootData& rd) {
  return std::abs(rd.a - rd.c) <=
         1e-12 * std::max({1.0, std::abs(rd.a), std::abs(rd.c)});
}

double degenerate_I(int j, double x, const RootData& rd) {
  const double a = rd.a, c = rd.c;
  if (degenerate_is_triple(rd)) {
    const double s = std::sqrt(x - a);
    return j == 0 ? -2.0 / s : 2.0 * (x - 2.0 * a) / s;
  }
  if (a > c) {
    const double e = std::sqrt(a - c), s = std::sqrt(std::max(0.0, x - c));
    if (x > a) {
      const double i0 = std::log((s - e) / (s + e)) / e;
      return j == 0 ? i0 : 2.0 * s + a * i0;
    }
    const double i0 = std::log((e + s) / (e - s)) / e;
    return j == 0 ? i0 : -2.0 * s + a * i0;
  }
  const double h = std::sqrt(c - a), s = std::sqrt(std::max(0.0, x - c));
  const double i0 = 2.0 * std::atan(s / h) / h;
  return j == 0 ? i0 : 2.0 * s + a * i0;
}

}  // namespace

double theta_u(double x, const RootData& roots) {
  if (roots.cls != CubicClass::OneReal)
    throw std::domain_error("theta_u: requires the one-real-root class");
  if (!(x > roots.r1)) throw std::domain_error("theta_u: requires x > r1");
  const double u = u_unchecked(x, roots);
  // The inverse-cn description of the same function, as a consistency check.
  const double cn_ref = std::abs(x - roots.t1) / (x - roots.t2);
  const double cn_val = specfun::jacobi(u, roots.modulus).cn;
  if (std::abs(cn_val - cn_ref) > 1e-10)
    throw std::runtime_error("theta_u: cn cross-check exceeded 1e-10");
  return u;
}

double z_branch(double x, const CubicAnalysis& an, const BranchSolution& br) {
  const RootData& rd = an.roots;
  if (rd.cls != CubicClass::OneReal)
    throw std::domain_error("z_branch: requires the one-real-root class");
  if (br.window == Window::Lower) {
    if (!(x > rd.r1 && x <= rd.t1))
      throw std::domain_error("z_branch: lower window requires r1 < x <= t1");
  } else if (!(x >= rd.t1)) {
    throw std::domain_error("z_branch: upper window requires x >= t1");
  }
  return br.sign * onereal_bracket(x, an, br.window) + br.z0;
}

double w_of(double x, const CubicAnalysis& an, const BranchSolution& br) {
  return z_branch((x - an.inv.shift_n) / an.inv.m, an, br);
}

double appendix_integral(int j, double x, const RootData& roots) {
  if (j != 0 && j != 1)
    throw std::domain_error("appendix_integral: j must be 0 or 1");
  switch (roots.cls) {
    case CubicClass::OneReal:
      if (!(x > roots.r1) || x == roots.t1)
        throw std::domain_error("appendix_integral: requires x > r1, x != t1");
      return onereal_I(j, x, roots);
    case CubicClass::ThreeReal:
      if (!(x > roots.a))
        throw std::domain_error("appendix_integral: requires x > a");
      return threereal_I(j, x, roots);
    case CubicClass::Degenerate:
      if (degenerate_is_triple(roots)) {
        if (!(x > roots.a))
          throw std::domain_error("appendix_integral: requires x > a");
      } else if (!(x > std::min(roots.a, roots.c)) || !(x > roots.c) || x == roots.a) {
        throw std::domain_error("appendix_integral: requires x > c, x != a");
      }
      return degenerate_I(j, x, roots);
  }
  throw std::logic_error("appendix_integral: unreachable");
}

// ---------------------------------------------------------------------------

double GammaFamily::gamma() const {
  switch (kind) {
    case FamilyKind::Stiff: return 6.0 / (d - 1);
    case FamilyKind::Matter: return 4.0 / (d - 1);
    case FamilyKind::Radiation: return 3.0 / (d - 1);
    case FamilyKind::BianchiGamma2: return 2.0;
    case FamilyKind::BianchiGammaN: return 2.0 * (1.0 - 1.0 / (n + 1.0));
  }
  return 0.0;
}

CosmoModel GammaFamily::model() const {
  return (kind == FamilyKind::BianchiGamma2 || kind == FamilyKind::BianchiGammaN)
             ? CosmoModel::BianchiI
             : CosmoModel::FLRW;
}

double omega_sq_law(double I2, const GammaFamily& fam) {
  if (!(I2 > 0.0)) throw std::domain_error("omega_sq_law: requires I2 > 0");
  const double g = fam.gamma();
  if (!(g > 0.0)) throw std::domain_error("omega_sq_law: requires gamma > 0");
  if (fam.model() == CosmoModel::FLRW)
    return g * (fam.d - 1) * fam.alpha / std::pow(I2, (g * (fam.d - 1) + 2.0) / 2.0);
  return g * fam.alpha / std::pow(I2, g / 2.0 + 1.0);
}

double i4_closure(double I2, const GammaFamily& fam) {
  if (!(I2 > 0.0)) throw std::domain_error("i4_closure: requires I2 > 0");
  const double g = fam.gamma();
  if (fam.model() == CosmoModel::FLRW)
    return fam.alpha / std::pow(I2, g * (fam.d - 1) / 2.0) +
           fam.Lambda / double((fam.d - 1) * (fam.d - 2));
  return fam.alpha / std::pow(I2, g / 2.0) + (fam.d - 1) * fam.Lambda / double(fam.d - 2);
}

double family_integral(int n, double a, double c, double x) {
  if (n < 0) throw std::domain_error("family_integral: requires n >= 0");
  if (!(x > 0.0)) throw std::domain_error("family_integral: requires x > 0");
  if (a == 0.0) throw std::domain_error("family_integral: requires a != 0");
  const double s = a * std::pow(x, 1.0 / (n + 1.0)) - c;
  if (!(s > 0.0)) throw std::domain_error("family_integral: radicand must be positive");
  double sum = 0.0, binom = 1.0;
  for (int j = 0; j <= n; ++j) {
    sum += binom * std::pow(s, double(n - j)) * std::pow(c, double(j)) / (2 * n - 2 * j + 1);
    binom *= double(n - j) / double(j + 1);
  }
  return 2.0 * (n + 1) / std::pow(a, double(n + 1)) * std::sqrt(s) * sum;
}

double closure_radicand(double I2, const GammaFamily& fam, double lambda) {
  if (!(I2 > 0.0)) throw std::domain_error("closure_radicand: requires I2 > 0");
  const double g = fam.gamma();
  const int d = fam.d;
  if (fam.model() == CosmoModel::FLRW)
    return 2.0 * fam.alpha / std::pow(I2, (g * (d - 1) - 2.0) / 2.0) +
           2.0 * fam.Lambda * I2 / double((d - 1) * (d - 2)) - lambda;
  return 2.0 * fam.alpha / std::pow(I2, g / 2.0 - 1.0) +
         2.0 * (d - 1) * fam.Lambda * I2 / double(d - 2) - lambda;
}

// ---------------------------------------------------------------------------
// FamilySolution
// ---------------------------------------------------------------------------

bool FamilySolution::explicit_form() const {
  return form_ == Form::StiffQuadratic || form_ == Form::BianchiLinear ||
         form_ == Form::BianchiParabola;
}

double FamilySolution::radicand(double y) const {
  const double a = fam_.alpha, l = fam_.lambda;
  const int d = fam_.d;
  switch (form_) {
    case Form::StiffQuadratic:
    case Form::StiffElliptic:
      return 2.0 * a / (y * y) - l + 2.0 * fam_.Lambda / double((d - 1) * (d - 2)) * y;
    case Form::MatterClosed:
    case Form::MatterQuadrature:
      return 2.0 * a / y - l + 2.0 * fam_.Lambda / double((d - 1) * (d - 2)) * y;
    case Form::RadiationClosed:
      return 2.0 * a / std::sqrt(y) - l;
    case Form::BianchiLinear:
    case Form::BianchiParabola:
      return 2.0 * a - l + 2.0 * (d - 1) * fam_.Lambda / double(d - 2) * y;
    case Form::BianchiFamilyN:
      return 2.0 * a * std::pow(y, 1.0 / (fam_.n + 1.0)) - l;
  }
  return 0.0;
}

double FamilySolution::stiff_w(double y) const {
  const double x = (y - an_.inv.shift_n) / an_.inv.m;
  const RootData& rd = an_.roots;
  if (rd.cls == CubicClass::OneReal) {
    if (x <= rd.t1) return onereal_bracket(x, an_, Window::Lower) + glue_lower_;
    return onereal_bracket(x, an_, Window::Upper) + glue_upper_;
  }
  const double m = an_.inv.m, B = an_.coeffs.B, C = an_.coeffs.C;
  const double i0 = rd.cls == CubicClass::ThreeReal ? threereal_I(0, x, rd)
                                                    : degenerate_I(0, x, rd);
  const double i1 = rd.cls == CubicClass::ThreeReal ? threereal_I(1, x, rd)
                                                    : degenerate_I(1, x, rd);
  return m * B / (12.0 * C) * i0 + m * m / 4.0 * i1;
}

double FamilySolution::phi(double y) const {
  switch (form_) {
    case Form::StiffElliptic:
      return stiff_w(y) - q0_;  // q0_ stores w(y0) here
    case Form::MatterClosed:
    case Form::RadiationClosed:
    case Form::BianchiFamilyN:
      return (relation(y) - t0_) / scale_;
    case Form::MatterQuadrature: {
      const double B = fam_.lambda;
      const double C = 2.0 * fam_.Lambda / double((fam_.d - 1) * (fam_.d - 2));
      // When the motion approaches a radicand root r, substitute t = r -+ s^2:
      // the 1/sqrt(r - t) factor cancels and the integrand stays regular all
      // the way onto the turning point.
      if (sign_ > 0 && std::isfinite(seg_hi_)) {
        const double r = seg_hi_, other = B / C - r;
        auto S = [&](double sig) {
          return ode::quad_adaptive(
              [&](double s) {
                const double t = r - s * s;
                return std::sqrt(std::max(t, 0.0)) /
                       std::sqrt(std::max(-C * (t - other), 1e-300));
              },
              0.0, sig, 1e-12);
        };
        return S(std::sqrt(r - i2_0_)) - S(std::sqrt(std::max(r - y, 0.0)));
      }
      if (sign_ < 0 && seg_lo_ > 0.0) {
        const double r = seg_lo_, other = B / C - r;
        auto S = [&](double sig) {
          return ode::quad_adaptive(
              [&](double s) {
                const double t = r + s * s;
                return std::sqrt(t) / std::sqrt(std::max(C * (t - other), 1e-300));
              },
              0.0, sig, 1e-12);
        };
        return S(std::sqrt(std::max(y - r, 0.0))) - S(std::sqrt(i2_0_ - r));
      }
      const double A = 2.0 * fam_.alpha;
      auto f = [&](double t) {
        return 0.5 * std::sqrt(t) / std::sqrt(std::max(C * t * t - B * t + A, 0.0));
      };
      return ode::quad_adaptive(f, i2_0_, y, 1e-12);
    }
    default:
      throw std::logic_error("phi: explicit family");
  }
}

double FamilySolution::relation(double I2) const {
  if (!(I2 > 0.0)) throw std::domain_error("relation: requires I2 > 0");
  const double a = fam_.alpha, l = fam_.lambda;
  switch (form_) {
    case Form::StiffElliptic:
      return stiff_w(I2) - q0_;
    case Form::MatterClosed: {
      const double A = 2.0 * a, B = l;
      double rem = A - B * I2;
      if (rem < 0.0) {
        if (rem < -1e-12 * A)
          throw std::domain_error("relation: I2 outside (0, 2 alpha / lambda)");
        rem = 0.0;  // clamp at the open domain edge
      }
      return -std::sqrt(rem) * std::sqrt(I2) / B +
             A / std::pow(B, 1.5) * std::atan2(std::sqrt(B * I2), std::sqrt(rem));
    }
    case Form::RadiationClosed: {
      double rem = 2.0 * a - l * std::sqrt(I2);
      if (rem < 0.0) {
        if (rem < -1e-12 * 2.0 * a)
          throw std::domain_error("relation: I2 outside the radicand domain");
        rem = 0.0;
      }
      const double q1 = std::pow(I2, 0.25), q3 = std::pow(I2, 0.75);
      return 6.0 * a * a / std::pow(l, 2.5) *
                 std::atan2(std::sqrt(l) * q1, std::sqrt(rem)) -
             std::sqrt(rem) * (3.0 * a * q1 / (l * l) + q3 / l);
    }
    case Form::MatterQuadrature:
      return scale_ * phi(I2);
    case Form::BianchiFamilyN:
      return family_integral(fam_.n, 2.0 * a, l, I2);
    default:
      throw std::logic_error("relation: family has an explicit solution; use i2_at");
  }
}

double FamilySolution::invert_phi(double target, double y_hint) const {
  double lo, hi;
  if (sign_ > 0) {
    lo = i2_0_;
    hi = seg_hi_;
    if (!std::isfinite(hi)) {
      hi = std::max(2.0 * lo, 1.0);
      int guard = 0;
      while (phi(hi) < target) {
        hi *= 2.0;
        if (++guard > 2000) throw std::runtime_error("invert_phi: bracket expansion failed");
      }
    }
  } else {
    lo = seg_lo_;
    hi = i2_0_;
  }
  double y = std::clamp(y_hint, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double f = phi(y) - target;
    if (f > 0.0) hi = y; else lo = y;
    const double r = radicand(y);
    double ynew = (r > 0.0) ? y - f * 2.0 * std::sqrt(r) : 0.5 * (lo + hi);
    if (!(ynew > lo && ynew < hi)) ynew = 0.5 * (lo + hi);
    if (std::abs(ynew - y) <= 1e-15 * std::max(1.0, std::abs(y))) return ynew;
    y = ynew;
  }
  return y;
}

double FamilySolution::i2_at(double t) const {
  if (!(t >= 0.0)) throw std::domain_error("i2_at: requires t >= 0");
  switch (form_) {
    case Form::StiffQuadratic: {
      const double v = q0_ + t * (q1_ + t * q2_);
      if (!(v > 0.0)) throw std::domain_error("i2_at: I2 collapsed to zero before t");
      return std::sqrt(v);
    }
    case Form::BianchiLinear:
    case Form::BianchiParabola: {
      const double v = q0_ + t * (q1_ + t * q2_);
      if (!(v > 0.0)) throw std::domain_error("i2_at: I2 collapsed to zero before t");
      return v;
    }
    default: {
      if (t == 0.0) return i2_0_;
      const double stop = std::min(turning_time_.value_or(kInf), collapse_time_.value_or(kInf));
      if (t > stop * (1.0 + 1e-12))
        throw std::domain_error("i2_at: t lies beyond the monotone segment (turning point)");
      return invert_phi(sign_ * t, i2_0_);
    }
  }
}

std::vector<SolveSample> FamilySolution::sample(double t_end, int n_samples) const {
  if (!(t_end > 0.0) || n_samples < 2)
    throw std::invalid_argument("sample: need t_end > 0 and at least 2 samples");
  std::vector<SolveSample> out;
  out.reserve(std::size_t(n_samples));
  const double implicit_stop =
      explicit_form() ? kInf
                      : std::min(turning_time_.value_or(kInf), collapse_time_.value_or(kInf));
  double y_prev = i2_0_;
  for (int i = 0; i < n_samples; ++i) {
    const double t = t_end * i / double(n_samples - 1);
    if (t > implicit_stop) break;
    double y;
    if (explicit_form()) {
      const double v = q0_ + t * (q1_ + t * q2_);
      if (!(v > 0.0)) break;
      y = form_ == Form::StiffQuadratic ? std::sqrt(v) : v;
    } else {
      y = invert_phi(sign_ * t, y_prev);
      y_prev = y;
    }
    out.push_back({t, y, omega_sq_law(y, fam_)});
  }
  return out;
}

namespace {

// Smallest positive root of q0 + q1 t + q2 t^2, if any.
std::optional<double> first_positive_root(double q0, double q1, double q2) {
  if (q2 == 0.0) {
    if (q1 == 0.0) return std::nullopt;
    const double r = -q0 / q1;
    return r > 0.0 ? std::optional<double>(r) : std::nullopt;
  }
  const double disc = q1 * q1 - 4.0 * q2 * q0;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double r1 = (-q1 - sq) / (2.0 * q2), r2 = (-q1 + sq) / (2.0 * q2);
  const double lo = std::min(r1, r2), hi = std::max(r1, r2);
  if (lo > 0.0) return lo;
  if (hi > 0.0) return hi;
  return std::nullopt;
}

}  // namespace

FamilySolution solve_family(const GammaFamily& fam, double I2_0, int di2_sign) {
  if (fam.d < 3) throw std::domain_error("solve_family: requires d >= 3");
  if (!(fam.alpha > 0.0)) throw std::domain_error("solve_family: requires alpha > 0");
  if (!(I2_0 > 0.0)) throw std::domain_error("solve_family: requires I2(0) > 0");
  if (di2_sign != 1 && di2_sign != -1)
    throw std::invalid_argument("solve_family: di2_sign must be +1 or -1");

  FamilySolution s;
  s.fam_ = fam;
  s.sign_ = di2_sign;
  s.i2_0_ = I2_0;
  const double alpha = fam.alpha, lam = fam.lambda, Lam = fam.Lambda;
  const int d = fam.d;

  switch (fam.kind) {
    case FamilyKind::Stiff: {
      s.scale_ = 1.0;
      if (Lam == 0.0) {
        s.form_ = FamilySolution::Form::StiffQuadratic;
        const double rad = 2.0 * alpha - lam * I2_0 * I2_0;
        if (rad < 0.0)
          throw std::domain_error("solve_family: negative radicand at I2(0)");
        s.q0_ = I2_0 * I2_0;
        s.q1_ = di2_sign * 4.0 * std::sqrt(rad);
        s.q2_ = -4.0 * lam;
        if (lam != 0.0) s.t0_ = -s.q1_ * di2_sign / (8.0 * lam);
        s.collapse_time_ = first_positive_root(s.q0_, s.q1_, s.q2_);
        if (s.q2_ != 0.0) {
          const double tv = -s.q1_ / (2.0 * s.q2_);
          const double vv = s.q0_ + tv * (s.q1_ + tv * s.q2_);
          if (tv > 0.0 && vv > 0.0 &&
              tv < s.collapse_time_.value_or(kInf))
            s.turning_time_ = tv;
        }
        return s;
      }
      s.form_ = FamilySolution::Form::StiffElliptic;
      const double C = 2.0 * Lam / double((d - 1) * (d - 2));
      s.an_ = cubic::analyze({alpha, lam, C});
      if (!(s.radicand(I2_0) > 0.0))
        throw std::domain_error("solve_family: I2(0) sits at or outside a turning point");
      const auto& rd = s.an_.roots;
      const double m = s.an_.inv.m, n = s.an_.inv.shift_n;
      const double x0 = (I2_0 - n) / m;
      if (rd.cls == CubicClass::ThreeReal && !(x0 > rd.a))
        throw std::domain_error(
            "solve_family: reduced variable falls in the bounded root pocket; "
            "no closed form applies, integrate numerically");
      // Glue the two window antiderivatives at t1 so w is continuous.
      if (rd.cls == CubicClass::OneReal) {
        const double zl = onereal_bracket(rd.t1, s.an_, Window::Lower);
        const double zu = onereal_bracket(rd.t1, s.an_, Window::Upper);
        if (x0 <= rd.t1) {
          s.glue_lower_ = 0.0;
          s.glue_upper_ = zl - zu;
        } else {
          s.glue_upper_ = 0.0;
          s.glue_lower_ = zu - zl;
        }
      }
      s.q0_ = s.stiff_w(I2_0);  // anchor: phi(y0) = 0
      // Segment bounds: radicand roots of X mapped back to y, plus y = 0.
      s.seg_lo_ = 0.0;
      s.seg_hi_ = kInf;
      double turning_root = 0.0;
      bool turning_is_multiple = false, have_turning_root = false;
      auto consider = [&](double xr, bool multiple) {
        const double yr = m * xr + n;
        if (!(yr > 0.0)) return;
        if (yr < I2_0 && yr > s.seg_lo_) {
          s.seg_lo_ = yr;
          if (di2_sign < 0) { turning_root = xr; turning_is_multiple = multiple; have_turning_root = true; }
        } else if (yr > I2_0 && yr < s.seg_hi_) {
          s.seg_hi_ = yr;
          if (di2_sign > 0) { turning_root = xr; turning_is_multiple = multiple; have_turning_root = true; }
        }
      };
      if (rd.cls == CubicClass::OneReal) {
        consider(rd.r1, false);
      } else if (rd.cls == CubicClass::ThreeReal) {
        consider(rd.a, false);
        consider(rd.b, false);
        consider(rd.c, false);
      } else {
        consider(rd.a, true);
        if (!degenerate_is_triple(rd)) consider(rd.c, false);
      }
      if (have_turning_root) {
        if (!turning_is_multiple) {
          // z_raw vanishes at a simple root; only the window glue survives.
          const double at_root = rd.cls == CubicClass::OneReal ? s.glue_lower_ : 0.0;
          s.turning_time_ = std::abs(at_root - s.q0_);
        }
        // A multiple root is approached asymptotically: no finite turning.
      } else if (di2_sign < 0 && s.seg_lo_ == 0.0) {
        s.collapse_time_ = std::abs(s.stiff_w(1e-300) - s.q0_);
      }
      return s;
    }

    case FamilyKind::Matter: {
      s.scale_ = 2.0;
      if (Lam == 0.0) {
        s.form_ = FamilySolution::Form::MatterClosed;
        if (!(lam > 0.0))
          throw std::domain_error(
              "solve_family: the matter-era closed form requires lambda > 0");
        const double cap = 2.0 * alpha / lam;
        if (!(I2_0 < cap))
          throw std::domain_error("solve_family: requires I2(0) < 2 alpha / lambda");
        s.seg_lo_ = 0.0;
        s.seg_hi_ = cap;
        s.t0_ = s.relation(I2_0);
        if (di2_sign > 0)
          s.turning_time_ = (s.relation(cap) - s.t0_) / s.scale_;
        else
          s.collapse_time_ = (s.t0_ - 0.0) / s.scale_;  // relation(0) = 0
        return s;
      }
      s.form_ = FamilySolution::Form::MatterQuadrature;
      if (!(s.radicand(I2_0) > 0.0))
        throw std::domain_error("solve_family: I2(0) sits at or outside a turning point");
      const double C = 2.0 * Lam / double((d - 1) * (d - 2));
      s.seg_lo_ = 0.0;
      s.seg_hi_ = kInf;
      // Positive roots of C y^2 - lam y + 2 alpha bracketing I2_0.
      const double disc = lam * lam - 8.0 * alpha * C;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double yr : {(lam - sq) / (2.0 * C), (lam + sq) / (2.0 * C)}) {
          if (!(yr > 0.0)) continue;
          if (yr < I2_0 && yr > s.seg_lo_) s.seg_lo_ = yr;
          if (yr > I2_0 && yr < s.seg_hi_) s.seg_hi_ = yr;
        }
      }
      const double reach = di2_sign > 0 ? s.seg_hi_ : s.seg_lo_;
      try {
        if (std::isfinite(reach) && reach > 0.0)
          s.turning_time_ = std::abs(s.phi(reach));
        else if (di2_sign < 0)
          s.collapse_time_ = std::abs(s.phi(0.0));
      } catch (const std::runtime_error&) {
        // A near-double radicand root is approached asymptotically; the
        // approach-time quadrature diverges and the turning stays unset.
      }
      return s;
    }

    case FamilyKind::Radiation: {
      if (Lam != 0.0)
        throw std::domain_error(
            "solve_family: radiation with Lambda != 0 is non-tractable in closed "
            "form; integrate numerically (simulate)");
      if (!(lam > 0.0))
        throw std::domain_error(
            "solve_family: the radiation-era closed form requires lambda > 0");
      s.form_ = FamilySolution::Form::RadiationClosed;
      s.scale_ = 2.0;
      const double cap = (2.0 * alpha / lam) * (2.0 * alpha / lam);
      if (!(I2_0 < cap))
        throw std::domain_error("solve_family: requires sqrt(I2(0)) < 2 alpha / lambda");
      s.seg_lo_ = 0.0;
      s.seg_hi_ = cap;
      s.t0_ = s.relation(I2_0);
      if (di2_sign > 0)
        s.turning_time_ = (s.relation(cap) - s.t0_) / s.scale_;
      else
        s.collapse_time_ = (s.t0_ - 0.0) / s.scale_;
      return s;
    }

    case FamilyKind::BianchiGamma2: {
      s.scale_ = 2.0;
      const double b = 2.0 * (d - 1) * Lam / double(d - 2);
      const double rad = 2.0 * alpha - lam + b * I2_0;
      if (rad < 0.0)
        throw std::domain_error("solve_family: negative radicand at I2(0)");
      s.form_ = Lam == 0.0 ? FamilySolution::Form::BianchiLinear : FamilySolution::Form::BianchiParabola;
      s.q0_ = I2_0;
      s.q1_ = di2_sign * 2.0 * std::sqrt(rad);
      s.q2_ = b;
      if (b != 0.0) s.t0_ = 2.0 / b * std::sqrt(rad);
      s.collapse_time_ = first_positive_root(s.q0_, s.q1_, s.q2_);
      if (s.q2_ != 0.0) {
        const double tv = -s.q1_ / (2.0 * s.q2_);
        const double vv = s.q0_ + tv * (s.q1_ + tv * s.q2_);
        if (tv > 0.0 && vv > 0.0 && tv < s.collapse_time_.value_or(kInf))
          s.turning_time_ = tv;
      }
      return s;
    }

    case FamilyKind::BianchiGammaN: {
      if (Lam != 0.0)
        throw std::domain_error(
            "solve_family: the gamma_n family is given for Lambda = 0 only; "
            "integrate numerically (simulate)");
      if (fam.n < 1)
        throw std::domain_error("solve_family: gamma_n dynamics needs n >= 1");
      s.form_ = FamilySolution::Form::BianchiFamilyN;
      s.scale_ = 2.0;
      if (!(s.radicand(I2_0) > 0.0))
        throw std::domain_error("solve_family: I2(0) sits at or outside a turning point");
      s.seg_lo_ = lam > 0.0 ? std::pow(lam / (2.0 * alpha), fam.n + 1.0) : 0.0;
      s.seg_hi_ = kInf;
      s.t0_ = s.relation(I2_0);
      if (di2_sign < 0) {
        if (s.seg_lo_ > 0.0)
          s.turning_time_ = (s.t0_ - s.relation(s.seg_lo_)) / s.scale_;
        else
          s.collapse_time_ = (s.t0_ - family_integral(fam.n, 2.0 * alpha, lam, 1e-300)) / s.scale_;
      }
      return s;
    }
  }
  throw std::logic_error("solve_family: unreachable");
}

}  // namespace empcosmo::closedform
