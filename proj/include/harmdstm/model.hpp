#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "harmdstm/harmonic.hpp"

namespace harmdstm {

// Priors and fixed quantities of the hierarchical model.  The process-level
// inverse-gamma parameters a_w/b_w are indexed q = j*p + k over the 2p = 8
// knot processes.
struct Hyperparameters {
  Eigen::MatrixXd V;       // 8x8 inverse-Wishart scale for Sigma_beta
  double xi = 11.0;        // inverse-Wishart degrees of freedom
  double a = 2.0;          // error-variance prior shape
  double b = 2.0;          // error-variance prior scale
  Eigen::VectorXd a_w;     // per-process spatial-variance prior shapes (size 8)
  Eigen::VectorXd b_w;     // per-process spatial-variance prior scales (size 8)
  Eigen::VectorXd mu0;     // prior mean of beta_0 (size 8)
  Eigen::MatrixXd Sigma0;  // prior covariance of beta_0 (8x8)
  double phi = 1.0;        // fixed spatial decay

  /// V = I, xi = 11, a = b = a_w = b_w = 2, mu0 = 0, Sigma0 = 100 I.
  static Hyperparameters defaults(double phi);

  void validate() const;
};

// All latent quantities of one MCMC sweep.
struct ModelState {
  /// beta[l] is n x 8, row per site; index 0 holds beta_0.
  std::vector<Eigen::MatrixXd> beta;
  /// wstar[l-1] is m x 8, column per knot process, for years l = 1..L.
  std::vector<Eigen::MatrixXd> wstar;
  Eigen::MatrixXd Sigma_beta;  // 8x8
  Eigen::MatrixXd sigma2_eps;  // n x 2, column per variable
  Eigen::VectorXd sigma2_w;    // size 8, indexed q = j*p + k

  int n_sites() const { return beta.empty() ? 0 : static_cast<int>(beta[0].rows()); }
  int n_years() const { return static_cast<int>(wstar.size()); }
  int n_knots() const { return wstar.empty() ? 0 : static_cast<int>(wstar[0].rows()); }

  void validate(int n, int m, int L) const;
};

struct SamplerConfig {
  int n_iter = 5000;
  int n_burn = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
  int parallel_width = 1;
  /// Retained draws per persisted chunk.
  int chunk_draws = 256;

  int n_retained() const { return (n_iter - n_burn) / thin; }
  void validate() const;
};

/// Flat process index q = j*p + k for variable j in {0,1}, coefficient k in 0..3.
inline int process_index(int j, int k) { return j * kCoeffsPerVariable + k; }

}  // namespace harmdstm
