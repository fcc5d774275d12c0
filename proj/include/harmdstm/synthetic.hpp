#pragma once

#include <filesystem>
#include <utility>

#include "harmdstm/dataset.hpp"
#include "harmdstm/model.hpp"
#include "harmdstm/spatial_cov.hpp"

namespace harmdstm {

// Generative configuration: geometry, per-year day counts, and the true
// parameter values driving the forward model.
struct TruthSpec {
  Bounds domain;
  int site_nx = 2;
  int site_ny = 2;
  int knot_nx = 1;
  int knot_ny = 1;
  std::vector<YearInfo> years;

  Eigen::MatrixXd Sigma_beta;  // 8x8
  Eigen::VectorXd sigma2_w;    // size 8
  /// n x 2 per-(site, variable) error variances; a 1 x 2 matrix broadcasts.
  Eigen::MatrixXd sigma2_eps;
  Eigen::VectorXd mu0;     // size 8
  Eigen::MatrixXd Sigma0;  // 8x8
  double phi = 1.0;
  double jitter = 1e-8;
  std::uint64_t seed = 0;

  int n_sites() const { return site_nx * site_ny; }
  int n_knots() const { return knot_nx * knot_ny; }
  int n_years() const { return static_cast<int>(years.size()); }
  void validate() const;

  /// Small smoke-test configuration with unit-scale parameters.
  static TruthSpec example();
};

/// Everything latent behind a simulated dataset, persisted so recovery tests
/// never re-derive truth from data.
struct TruthRecord {
  Eigen::MatrixXd Sigma_beta;
  Eigen::VectorXd sigma2_w;
  Eigen::MatrixXd sigma2_eps;  // n x 2
  Eigen::VectorXd mu0;
  Eigen::MatrixXd Sigma0;
  double phi = 0.0;
  double jitter = 0.0;
  std::uint64_t seed = 0;
  std::vector<Location> knots;
  /// beta[l] is n x 8 with index 0 = beta_0.
  std::vector<Eigen::MatrixXd> beta;
  /// wstar[l-1] is m x 8.
  std::vector<Eigen::MatrixXd> wstar;

  void save(const std::filesystem::path& path) const;
  static TruthRecord load(const std::filesystem::path& path);
};

/// Forward simulation of the full generative model: beta_0 fields, knot
/// increments, random-walk accumulation, and harmonic data.  The returned
/// dataset is centered by year (the harmonic columns are orthogonal to the
/// constant, so centering does not disturb the coefficients).
std::pair<TemperatureDataset, TruthRecord> simulate(const TruthSpec& spec);

/// Hierarchical forward draw: parameters from their priors (Sigma_beta from
/// the inverse-Wishart, variances from their inverse-gammas), then the same
/// forward path as simulate().  Geometry and day counts come from `spec`;
/// parameter values in `spec` are ignored.  Data are left uncentered, exactly
/// as generated, so the draw is an exact sample from the joint model.
std::pair<TruthRecord, TemperatureDataset> prior_predictive(const TruthSpec& spec,
                                                            const Hyperparameters& hyp,
                                                            std::uint64_t seed);

/// Redraws the observation layer only: values = X beta + noise with the given
/// coefficients and error variances, uncentered, zero offsets.  `round_id`
/// separates successive redraws in validation loops.
TemperatureDataset simulate_data_given(const TemperatureDataset& shape,
                                       const std::vector<Eigen::MatrixXd>& beta,
                                       const Eigen::MatrixXd& sigma2_eps, std::uint64_t seed,
                                       std::uint64_t round_id);

}  // namespace harmdstm
