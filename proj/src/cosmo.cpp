#include "empcosmo/cosmo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "empcosmo/ode.hpp"

namespace empcosmo::cosmo {

namespace {

// Local cubic Lagrange interpolation on a strictly increasing grid.
double interp_cubic(const std::vector<double>& xs, const std::vector<double>& ys,
                    double x) {
  const std::size_t n = xs.size();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : std::size_t(it - xs.begin()) - 1;
  std::size_t j0 = (i == 0) ? 0 : std::min(i - 1, n - 4);
  double acc = 0.0;
  for (std::size_t m = 0; m < 4; ++m) {
    double l = 1.0;
    for (std::size_t r = 0; r < 4; ++r)
      if (r != m) l *= (x - xs[j0 + r]) / (xs[j0 + m] - xs[j0 + r]);
    acc += ys[j0 + m] * l;
  }
  return acc;
}

void require_positive_i2(const moments::Trajectory& traj) {
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (!(traj.node(i).I2 > 0.0))
      throw std::domain_error("cosmology map: I2 must stay positive");
}

}  // namespace

TimeMap::TimeMap(std::vector<double> t_nodes, std::vector<double> tau_nodes)
    : t_(std::move(t_nodes)), tau_(std::move(tau_nodes)) {
  if (t_.size() != tau_.size() || t_.size() < 2)
    throw std::invalid_argument("TimeMap: bad node arrays");
  for (std::size_t i = 1; i < tau_.size(); ++i)
    if (!(tau_[i] > tau_[i - 1]))
      throw std::runtime_error("TimeMap: tau is not strictly increasing");
}

double TimeMap::tau_at(double t) const { return interp_cubic(t_, tau_, t); }

double TimeMap::t_at(double tau) const {
  double lo = t_.front(), hi = t_.back();
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tau_at(mid) < tau) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

TimeMap cosmic_time(const moments::Trajectory& traj) {
  require_positive_i2(traj);
  const auto& ts = traj.node_times();
  std::vector<double> nodes, weights;
  ode::gauss_legendre(8, nodes, weights);
  std::vector<double> tau(ts.size(), 0.0);
  std::vector<double> y;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double a = ts[i - 1], b = ts[i];
    double inc = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * nodes[q];
      traj.dense().eval(t, y);
      if (!(y[1] > 0.0)) throw std::domain_error("cosmic_time: I2 must stay positive");
      inc += weights[q] / std::sqrt(y[1]);
    }
    tau[i] = tau[i - 1] + inc * 0.5 * (b - a);
  }
  return TimeMap(ts, std::move(tau));
}

namespace {

CosmoSeries map_common(const moments::Trajectory& traj, const CosmologyConfig& cfg) {
  require_positive_i2(traj);
  if (cfg.d < 3) throw std::domain_error("cosmology map: requires d >= 3");
  if (!(cfg.K > 0.0)) throw std::domain_error("cosmology map: requires K > 0");
  CosmoSeries s;
  s.model = cfg.model;
  s.d = cfg.d;
  s.K = cfg.K;
  s.Lambda = cfg.Lambda;
  s.lambda_traj = traj.lambda0();
  const TimeMap tm = cosmic_time(traj);
  s.tau = tm.tau_nodes();
  s.t_lab = tm.t_nodes();
  const std::size_t n = traj.size();
  s.scale.resize(n);
  s.hubble.resize(n);
  s.rho_phi.resize(n);
  s.p_phi.resize(n);
  s.omega_sq.resize(n);
  return s;
}

}  // namespace

CosmoSeries map_flrw(const moments::Trajectory& traj, const CosmologyConfig& cfg) {
  if (cfg.model != CosmoModel::FLRW)
    throw std::domain_error("map_flrw: config must select the FLRW model");
  CosmoSeries s = map_common(traj, cfg);
  const int d = cfg.d;
  const double dd = double(d - 1) * double(d - 2);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const moments::MomentState m = traj.node(i);
    const double w2 = traj.trap().omega_sq(m.t, m.I2);
    const double a = std::sqrt(m.I2);
    s.scale[i] = a;
    s.hubble[i] = m.I3 / (2.0 * a);  // aH = I3/2
    s.rho_phi[i] = (dd * m.I4 - cfg.Lambda) / cfg.K;
    s.p_phi[i] = ((d - 2) * w2 * m.I2 - dd * m.I4 + cfg.Lambda) / cfg.K;
    s.omega_sq[i] = w2;
  }
  // The trajectory invariant plays the role of the curvature parameter.
  if (std::abs(s.lambda_traj - cfg.curvature_k) > 1e-9)
    s.warnings.push_back("curvature mismatch: trajectory lambda = " +
                         std::to_string(s.lambda_traj) + " differs from curvature_k");
  return s;
}

CosmoSeries map_bianchi(const moments::Trajectory& traj, const CosmologyConfig& cfg) {
  if (cfg.model != CosmoModel::BianchiI)
    throw std::domain_error("map_bianchi: config must select the Bianchi I model");
  CosmoSeries s = map_common(traj, cfg);
  const int d = cfg.d;
  const double r = double(d - 2) / double(d - 1);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const moments::MomentState m = traj.node(i);
    const double w2 = traj.trap().omega_sq(m.t, m.I2);
    s.scale[i] = std::pow(m.I2, 1.0 / (2.0 * (d - 1)));  // R^(2(d-1)) = I2
    s.hubble[i] = m.I3 / (2.0 * (d - 1) * std::sqrt(m.I2));
    s.rho_phi[i] = (r * m.I4 - cfg.Lambda) / cfg.K;
    s.p_phi[i] = (r * w2 * m.I2 - r * m.I4 + cfg.Lambda) / cfg.K;
    s.omega_sq[i] = w2;
  }
  s.D = -s.lambda_traj * (d - 2) / (2.0 * (d - 1) * cfg.K);
  if (s.D < -1e-12 * std::max(1.0, std::abs(s.lambda_traj)))
    s.warnings.push_back("anisotropy sign: trajectory lambda > 0 implies D < 0");
  return s;
}

FlrwResiduals flrw_residuals(const CosmoSeries& s, const CosmologyConfig& cfg) {
  if (s.rows() < 5) throw std::domain_error("flrw_residuals: series too short");
  const double dd = double(cfg.d - 1) * double(cfg.d - 2);
  FlrwResiduals out;
  // Friedmann residual directly on the rows (no derivative involved).
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const double a = s.scale[i];
    const double fluid = cfg.D_fluid == 0.0 ? 0.0 : cfg.D_fluid / std::pow(a, cfg.n_fluid);
    const double res = s.hubble[i] * s.hubble[i] + cfg.curvature_k / (a * a) -
                       2.0 * cfg.Lambda / dd - 2.0 * cfg.K / dd * (s.rho_phi[i] + fluid);
    out.friedmann_max = std::max(out.friedmann_max, std::abs(res));
  }
  // Continuity residual, differencing rho in tau directly on the rows (the
  // row values are exact; interpolating them first costs three digits).
  // Maxima run over the rows with full central stencils.
  const auto drho = ode::fd_derivative_nonuniform(s.tau, s.rho_phi);
  for (std::size_t i = 2; i + 2 < s.rows(); ++i) {
    const double res = drho[i] + (cfg.d - 1) * s.hubble[i] * (s.rho_phi[i] + s.p_phi[i]);
    out.continuity_max = std::max(out.continuity_max, std::abs(res));
  }
  return out;
}

BianchiResiduals bianchi_residuals(const CosmoSeries& s, const CosmologyConfig& cfg) {
  if (s.rows() < 5) throw std::domain_error("bianchi_residuals: series too short");
  const int d = cfg.d;
  const double half_dd = 0.5 * double(d - 1) * double(d - 2);
  BianchiResiduals out;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const double Rp = std::pow(s.scale[i], 2.0 * (d - 1));
    const double res = half_dd * s.hubble[i] * s.hubble[i] - s.D * cfg.K / Rp -
                       cfg.K * s.rho_phi[i] - cfg.Lambda;
    out.eq10_max = std::max(out.eq10_max, std::abs(res));
  }
  const auto dH = ode::fd_derivative_nonuniform(s.tau, s.hubble);
  for (std::size_t i = 2; i + 2 < s.rows(); ++i) {
    const double Rp = std::pow(s.scale[i], 2.0 * (d - 1));
    const double res = (d - 2) * dH[i] + half_dd * s.hubble[i] * s.hubble[i] +
                       s.D * cfg.K / Rp + cfg.K * s.p_phi[i] - cfg.Lambda;
    out.eq11_max = std::max(out.eq11_max, std::abs(res));
  }
  return out;
}

AnisotropyResult anisotropy_recover(const CosmoSeries& s, const CosmologyConfig& cfg) {
  if (s.model != CosmoModel::BianchiI)
    throw std::domain_error("anisotropy_recover: requires a Bianchi series");
  const int axes = cfg.d - 1;
  if (int(cfg.shear_constants.size()) != axes)
    throw std::domain_error("anisotropy_recover: need d-1 shear constants");
  double csum = 0.0;
  for (double c : cfg.shear_constants) csum += c;
  if (std::abs(csum) > 1e-14 * std::max(1.0, std::abs(cfg.shear_constants[0])))
    throw std::domain_error("anisotropy_recover: shear constants must sum to zero");

  // alpha_l(tau) = c_l * int dtau / R^(d-1).
  std::vector<double> integrand(s.rows());
  for (std::size_t i = 0; i < s.rows(); ++i)
    integrand[i] = 1.0 / std::pow(s.scale[i], double(cfg.d - 1));
  const auto cum = ode::cumulative_integral(s.tau, integrand);

  AnisotropyResult out;
  out.X_axes.assign(axes, std::vector<double>(s.rows()));
  for (int l = 0; l < axes; ++l)
    for (std::size_t i = 0; i < s.rows(); ++i)
      out.X_axes[l][i] = s.scale[i] * std::exp(cfg.shear_constants[l] * cum[i]);

  double pairs = 0.0;
  for (int l = 0; l < axes; ++l)
    for (int k = l + 1; k < axes; ++k) {
      const double dc = cfg.shear_constants[l] - cfg.shear_constants[k];
      pairs += dc * dc;
    }
  out.D_shear = pairs / (2.0 * (cfg.d - 1) * cfg.K);
  out.D_lambda = s.D;
  if (std::abs(out.D_shear - out.D_lambda) >
      1e-8 * std::max(1.0, std::abs(out.D_lambda)))
    throw std::domain_error(
        "anisotropy_recover: shear constants are inconsistent with the "
        "trajectory lambda (D mismatch)");
  return out;
}

ConstancyResult constancy_check(const std::vector<double>& g,
                                const std::vector<double>& R, double M,
                                double tol) {
  if (g.size() != R.size() || g.empty())
    throw std::invalid_argument("constancy_check: need aligned samples");
  double vmin = 0, vmax = 0, vref = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = g[i] * std::pow(R[i], M);
    if (i == 0) { vmin = vmax = vref = v; }
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  ConstancyResult out;
  out.max_deviation = (vmax - vmin) / std::max(std::abs(vref), 1e-300);
  out.constant = out.max_deviation <= tol;
  return out;
}

}  // namespace empcosmo::cosmo
