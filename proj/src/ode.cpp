#include "empcosmo/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace empcosmo::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - bhat, error estimator coefficients.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double hermite(double y0, double f0, double y1, double f1, double h, double theta) {
  const double t2 = theta * theta, t3 = t2 * theta;
  return (2 * t3 - 3 * t2 + 1) * y0 + h * (t3 - 2 * t2 + theta) * f0 +
         (-2 * t3 + 3 * t2) * y1 + h * (t3 - t2) * f1;
}

double hermite_deriv(double y0, double f0, double y1, double f1, double h, double theta) {
  const double t2 = theta * theta;
  return ((6 * t2 - 6 * theta) * (y0 - y1) / h + (3 * t2 - 4 * theta + 1) * f0 +
          (3 * t2 - 2 * theta) * f1);
}

}  // namespace

DenseSolution DenseSolution::from_samples(std::vector<double> t,
                                          std::vector<std::vector<double>> y,
                                          std::vector<std::vector<double>> f) {
  if (t.size() < 2 || t.size() != y.size() || t.size() != f.size())
    throw std::invalid_argument("DenseSolution::from_samples: need aligned nodes");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw std::invalid_argument("DenseSolution::from_samples: times must increase");
  DenseSolution s;
  s.dim_ = y[0].size();
  s.t_nodes_ = std::move(t);
  s.y_nodes_ = std::move(y);
  s.f_nodes_ = std::move(f);
  return s;
}

std::size_t DenseSolution::segment_of(double t) const {
  const bool fwd = t_nodes_.back() >= t_nodes_.front();
  auto cmp = [fwd](double a, double b) { return fwd ? a < b : a > b; };
  auto it = std::upper_bound(t_nodes_.begin(), t_nodes_.end(), t, cmp);
  std::size_t i = it == t_nodes_.begin() ? 0 : std::size_t(it - t_nodes_.begin()) - 1;
  return std::min(i, t_nodes_.size() - 2);
}

void DenseSolution::eval(double t, std::vector<double>& y) const {
  const std::size_t s = segment_of(t);
  const double h = t_nodes_[s + 1] - t_nodes_[s];
  const double theta = (t - t_nodes_[s]) / h;
  y.resize(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    y[i] = hermite(y_nodes_[s][i], f_nodes_[s][i], y_nodes_[s + 1][i],
                   f_nodes_[s + 1][i], h, theta);
}

std::vector<double> DenseSolution::eval(double t) const {
  std::vector<double> y;
  eval(t, y);
  return y;
}

void DenseSolution::eval_derivative(double t, std::vector<double>& dydt) const {
  const std::size_t s = segment_of(t);
  const double h = t_nodes_[s + 1] - t_nodes_[s];
  const double theta = (t - t_nodes_[s]) / h;
  dydt.resize(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    dydt[i] = hermite_deriv(y_nodes_[s][i], f_nodes_[s][i], y_nodes_[s + 1][i],
                            f_nodes_[s + 1][i], h, theta);
}

DenseSolution rk_integrate(const Rhs& rhs, std::vector<double> y0, double t0,
                           double t_end, const IntegrateOptions& opt) {
  const std::size_t n = y0.size();
  if (n == 0) throw std::invalid_argument("rk_integrate: empty state");
  for (double v : y0)
    if (!std::isfinite(v)) throw std::invalid_argument("rk_integrate: non-finite initial state");
  if (!(opt.rtol >= 1e-13)) throw std::invalid_argument("rk_integrate: rtol must be >= 1e-13");
  if (!(opt.max_step > 0)) throw std::invalid_argument("rk_integrate: max_step must be positive");
  if (t_end == t0) throw std::invalid_argument("rk_integrate: empty time span");

  const double dir = t_end > t0 ? 1.0 : -1.0;
  const double span = std::abs(t_end - t0);

  DenseSolution sol;
  sol.dim_ = n;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n);
  auto feval = [&](double t, const std::vector<double>& y, std::vector<double>& f) {
    rhs(t, y, f);
    ++sol.n_rhs_;
  };

  double t = t0;
  std::vector<double> y = std::move(y0);
  feval(t, y, k1);

  // Start at the step cap; a too-large guess costs one rejection cycle and
  // keeps the accepted breakpoints uniform from the first step.
  double h = opt.initial_step > 0 ? opt.initial_step : opt.max_step;
  h = std::min({h, opt.max_step, span});

  sol.t_nodes_.push_back(t);
  sol.y_nodes_.push_back(y);
  sol.f_nodes_.push_back(k1);

  std::vector<double> event_prev(opt.events.size());
  for (std::size_t e = 0; e < opt.events.size(); ++e) event_prev[e] = opt.events[e](t, y);

  double err_old = 1e-4;
  long steps = 0;
  bool done = false;

  while (!done) {
    if (++steps > opt.max_steps) throw std::runtime_error("rk_integrate: max step count exceeded");
    if (h < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw std::runtime_error("rk_integrate: step size underflow");
    const double remaining = std::abs(t_end - t);
    if (remaining <= 1e-12 * std::max(1.0, std::abs(t_end))) break;
    // Approach t_end with equal-length steps so the breakpoint spacing stays
    // smooth for finite-difference consumers of the dense output.
    if (remaining <= 8.0 * h) {
      const int m = std::max(1, int(std::ceil(remaining / h - 1e-9)));
      h = remaining / m;
      if (m == 1) done = true;
    }
    const double hs = h * dir;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    feval(t + c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    feval(t + c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    feval(t + c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    feval(t + c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    feval(t + hs, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    feval(t + hs, y1, k7);  // FSAL

    double err = 0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(y1[i])) { finite = false; break; }
      const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                              e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = finite ? std::sqrt(err / double(n)) : 1e10;

    if (err <= 1.0) {
      t += hs;
      y.swap(y1);
      k1.swap(k7);
      ++sol.n_accepted_;
      sol.t_nodes_.push_back(t);
      sol.y_nodes_.push_back(y);
      sol.f_nodes_.push_back(k1);

      // Terminal events: bisect the dense interpolant down to 1e-12 in t.
      for (std::size_t e = 0; e < opt.events.size(); ++e) {
        const double g1 = opt.events[e](t, y);
        if (event_prev[e] > 0 && g1 <= 0) {
          double lo = t - hs, hi = t;
          std::vector<double> ymid(n);
          while (std::abs(hi - lo) > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            sol.eval(mid, ymid);
            if (opt.events[e](mid, ymid) > 0) lo = mid; else hi = mid;
          }
          sol.eval(hi, ymid);
          std::vector<double> fmid(n);
          feval(hi, ymid, fmid);
          sol.t_nodes_.back() = hi;
          sol.y_nodes_.back() = ymid;
          sol.f_nodes_.back() = fmid;
          sol.event_index_ = int(e);
          return sol;
        }
        event_prev[e] = g1;
      }

      // PI controller (accept branch).
      const double expo = 0.2, beta = 0.04, alpha = expo - 0.75 * beta;
      double fac = 0.9 * std::pow(std::max(err, 1e-16), -alpha) * std::pow(err_old, beta);
      fac = std::clamp(fac, 0.2, 5.0);
      err_old = std::max(err, 1e-4);
      h = std::min(h * fac, opt.max_step);
      if (done && std::abs(t - t_end) > 1e-12 * std::max(1.0, std::abs(t_end))) done = false;
    } else {
      ++sol.n_rejected_;
      done = false;
      const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      h *= fac;
    }
  }
  return sol;
}

namespace {

const std::vector<double>& gl_nodes12() {
  static std::vector<double> x, w;
  if (x.empty()) gauss_legendre(12, x, w);
  return x;
}
const std::vector<double>& gl_weights12() {
  static std::vector<double> x, w;
  if (w.empty()) gauss_legendre(12, x, w);
  return w;
}

double gl12(const std::function<double(double)>& f, double a, double b) {
  const auto& xs = gl_nodes12();
  const auto& ws = gl_weights12();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += ws[i] * f(mid + half * xs[i]);
  return s * half;
}

double quad_rec(const std::function<double(double)>& f, double a, double b,
                double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl12(f, a, m), right = gl12(f, m, b);
  const double s2 = left + right;
  const double diff = std::abs(s2 - whole);
  if (diff <= tol || diff <= 8 * std::numeric_limits<double>::epsilon() * std::abs(s2))
    return s2;
  if (depth >= 48) throw std::runtime_error("quad_adaptive: did not converge");
  return quad_rec(f, a, m, left, 0.5 * tol, depth + 1) +
         quad_rec(f, m, b, right, 0.5 * tol, depth + 1);
}

// tanh-sinh rule on [a,b].  Nodes cluster doubly-exponentially at the
// endpoints, so integrable endpoint singularities are harmless.
double tanh_sinh(const std::function<double(double)>& f, double a, double b, double tol) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double tmax = 4.0;
  const double pi_half = 1.5707963267948966;
  auto node_sum = [&](double h, int stride_from, int stride) {
    // Sum of w(t_j) f(x(t_j)) for t_j = j*h over the requested subset of j.
    // Nodes are formed as endpoint +- offset with the offset computed
    // cancellation-free, so algebraic endpoint singularities see accurate
    // distances.
    double s = 0;
    const int jmax = int(tmax / h);
    for (int j = stride_from; j <= jmax; j += stride) {
      const double u = pi_half * std::sinh(j * h);
      const double ch = std::cosh(u);
      const double w = pi_half * std::cosh(j * h) / (ch * ch);
      if (w < 1e-300) break;
      const double em = 2.0 / (std::exp(2.0 * u) + 1.0);  // 1 - tanh(u)
      const double xp = b - half * em;
      const double xm = a + half * em;
      double fp = (xp < b) ? f(xp) : 0.0;
      double fm = (xm > a) ? f(xm) : 0.0;
      if (!std::isfinite(fp)) fp = 0.0;
      if (!std::isfinite(fm)) fm = 0.0;
      s += w * (fp + fm);
    }
    return s;
  };

  double h = 1.0;
  double sum = pi_half * f(mid) + node_sum(h, 1, 1);  // j = 0 term + |j| >= 1
  double prev = half * h * sum;
  for (int level = 1; level <= 12; ++level) {
    h *= 0.5;
    sum += node_sum(h, 1, 2);  // only the new, odd-index nodes
    const double cur = half * h * sum;
    if (level >= 3 && std::abs(cur - prev) <= std::max(tol, 4e-16 * std::abs(cur)))
      return cur;
    prev = cur;
  }
  throw std::runtime_error("quad_adaptive: tanh-sinh did not converge");
}

}  // namespace

double quad_adaptive(const std::function<double(double)>& f, double a, double b,
                     double tol, bool singular_endpoints) {
  if (a == b) return 0.0;
  if (b < a) return -quad_adaptive(f, b, a, tol, singular_endpoints);
  if (singular_endpoints) return tanh_sinh(f, a, b, tol);
  return quad_rec(f, a, b, gl12(f, a, b), tol, 0);
}

std::vector<double> fd_derivative(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 5) throw std::invalid_argument("fd_derivative: need at least 5 samples");
  std::vector<double> d(n);
  d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h);
  d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h);
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (y[i - 2] - 8 * y[i - 1] + 8 * y[i + 1] - y[i + 2]) / (12 * h);
  d[n - 2] = (3 * y[n - 1] + 10 * y[n - 2] - 18 * y[n - 3] + 6 * y[n - 4] - y[n - 5]) / (12 * h);
  d[n - 1] = (25 * y[n - 1] - 48 * y[n - 2] + 36 * y[n - 3] - 16 * y[n - 4] + 3 * y[n - 5]) / (12 * h);
  return d;
}

std::vector<double> fd_second_derivative(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 5) throw std::invalid_argument("fd_second_derivative: need at least 5 samples");
  std::vector<double> d(n - 4);
  const double h2 = h * h;
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i - 2] = (-y[i - 2] + 16 * y[i - 1] - 30 * y[i] + 16 * y[i + 1] - y[i + 2]) / (12 * h2);
  return d;
}

void fd_weights(double z, const std::vector<double>& xs, int m,
                std::vector<double>& weights) {
  // Fornberg's recurrence for the weights of derivatives 0..m at z.
  const int n = int(xs.size());
  if (n < m + 1) throw std::invalid_argument("fd_weights: too few nodes");
  std::vector<double> c(std::size_t(n) * (m + 1), 0.0);
  auto C = [&](int i, int k) -> double& { return c[std::size_t(i) * (m + 1) + k]; };
  double c1 = 1.0, c4 = xs[0] - z;
  C(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
        C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
  weights.resize(n);
  for (int i = 0; i < n; ++i) weights[i] = C(i, m);
}

std::vector<double> fd_derivative_nonuniform(const std::vector<double>& xs,
                                             const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 5)
    throw std::invalid_argument("fd_derivative_nonuniform: need 5 aligned samples");
  std::vector<double> out(n);
  std::vector<double> stencil(5), w;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i < 2 ? 0 : std::min(i - 2, n - 5);
    for (int k = 0; k < 5; ++k) stencil[k] = xs[j0 + k];
    fd_weights(xs[i], stencil, 1, w);
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) acc += w[k] * ys[j0 + k];
    out[i] = acc;
  }
  return out;
}

std::vector<double> fd_second_derivative_nonuniform(const std::vector<double>& xs,
                                                    const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 5)
    throw std::invalid_argument("fd_second_derivative_nonuniform: need 5 aligned samples");
  std::vector<double> out(n - 4);
  std::vector<double> stencil(5), w;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    for (int k = 0; k < 5; ++k) stencil[k] = xs[i - 2 + k];
    fd_weights(xs[i], stencil, 2, w);
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) acc += w[k] * ys[i - 2 + k];
    out[i - 2] = acc;
  }
  return out;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
}

std::vector<double> cumulative_integral(const std::vector<double>& xs,
                                        const std::vector<double>& fs) {
  const std::size_t n = xs.size();
  if (n != fs.size() || n < 2) throw std::invalid_argument("cumulative_integral: bad input");
  std::vector<double> out(n, 0.0);
  if (n < 4) {  // trapezoid fallback for very short series
    for (std::size_t i = 1; i < n; ++i)
      out[i] = out[i - 1] + 0.5 * (fs[i] + fs[i - 1]) * (xs[i] - xs[i - 1]);
    return out;
  }
  for (std::size_t i = 1; i < n; ++i) {
    // Integrate the cubic through four points bracketing [x_{i-1}, x_i].
    std::size_t j0 = (i == 1) ? 0 : (i + 2 > n ? n - 4 : i - 2);
    double inc = 0;
    for (std::size_t m = 0; m < 4; ++m) {
      // Integral of the Lagrange basis polynomial l_m over [x_{i-1}, x_i],
      // by 4-point Gauss-Legendre (exact for cubics).
      static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                   0.3399810435848563, 0.8611363115940526};
      static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                   0.6521451548625461, 0.3478548451374538};
      const double a = xs[i - 1], b = xs[i];
      double li = 0;
      for (int q = 0; q < 4; ++q) {
        const double xq = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
        double l = 1;
        for (std::size_t r = 0; r < 4; ++r)
          if (r != m) l *= (xq - xs[j0 + r]) / (xs[j0 + m] - xs[j0 + r]);
        li += gw[q] * l;
      }
      inc += fs[j0 + m] * li * 0.5 * (b - a);
    }
    out[i] = out[i - 1] + inc;
  }
  return out;
}

}  // namespace empcosmo::ode
