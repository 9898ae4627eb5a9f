#pragma once

#include <string>
#include <vector>

#include "empcosmo/moments.hpp"

namespace empcosmo::cosmo {

using closedform::CosmoModel;

struct CosmologyConfig {
  CosmoModel model = CosmoModel::FLRW;
  int d = 4;
  double Lambda = 0.0;
  double K = 1.0;            // K_d = 8 pi G_d, > 0
  double curvature_k = 0.0;  // FLRW curvature; the CLI restricts to -1|0|1
  double gamma = 2.0;        // equation-of-state index, > 0
  double D_fluid = 0.0;      // FLRW fluid constant D (default 0)
  double n_fluid = 0.0;      // exponent of the D/a^n fluid term
  std::vector<double> shear_constants;  // Bianchi c_l, sums to zero
};

// Cosmic-time series of the gravitational-side quantities.  scale is a for
// FLRW and the mean factor R for Bianchi I.
struct CosmoSeries {
  CosmoModel model = CosmoModel::FLRW;
  int d = 4;
  double K = 1.0, Lambda = 0.0;
  std::vector<double> tau, t_lab, scale, hubble, rho_phi, p_phi;
  std::vector<double> omega_sq;  // trap values at the rows (used by EOS checks)
  double lambda_traj = 0.0;      // moment invariant of the source trajectory
  double D = 0.0;                // Bianchi anisotropy constant from lambda
  std::vector<std::string> warnings;
  std::size_t rows() const { return tau.size(); }
};

// Lab-time to cosmic-time map tau(t) = int dt / sqrt(I2); strictly increasing.
class TimeMap {
 public:
  TimeMap(std::vector<double> t_nodes, std::vector<double> tau_nodes);
  double tau_at(double t) const;
  double t_at(double tau) const;
  const std::vector<double>& t_nodes() const { return t_; }
  const std::vector<double>& tau_nodes() const { return tau_; }

 private:
  std::vector<double> t_, tau_;
};

TimeMap cosmic_time(const moments::Trajectory& traj);

CosmoSeries map_flrw(const moments::Trajectory& traj, const CosmologyConfig& cfg);
CosmoSeries map_bianchi(const moments::Trajectory& traj, const CosmologyConfig& cfg);

struct FlrwResiduals {
  double friedmann_max = 0.0;
  double continuity_max = 0.0;
};
FlrwResiduals flrw_residuals(const CosmoSeries& series, const CosmologyConfig& cfg);

struct BianchiResiduals {
  double eq10_max = 0.0;
  double eq11_max = 0.0;
};
BianchiResiduals bianchi_residuals(const CosmoSeries& series, const CosmologyConfig& cfg);

// Per-axis scale factors X_l = R exp(alpha_l) with alpha_l' = c_l / R^(d-1).
struct AnisotropyResult {
  std::vector<std::vector<double>> X_axes;  // [axis][row]
  double D_shear = 0.0;    // sum_{l<k} (c_l - c_k)^2 / (2 (d-1) K)
  double D_lambda = 0.0;   // from the dictionary lambda entry
};
AnisotropyResult anisotropy_recover(const CosmoSeries& series, const CosmologyConfig& cfg);

struct ConstancyResult {
  bool constant = false;
  double max_deviation = 0.0;
};
// Checks that g(tau) R(tau)^M is constant over aligned samples (relative
// peak-to-peak deviation against tol).
ConstancyResult constancy_check(const std::vector<double>& g,
                                const std::vector<double>& R, double M,
                                double tol = 1e-8);

}  // namespace empcosmo::cosmo
