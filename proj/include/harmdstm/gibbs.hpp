#pragma once

#include <cstdint>

#include "harmdstm/dataset.hpp"
#include "harmdstm/draws.hpp"
#include "harmdstm/model.hpp"
#include "harmdstm/rng.hpp"
#include "harmdstm/spatial_cov.hpp"

namespace harmdstm {

// Gibbs sampler for the full hierarchical model: harmonic data model,
// random-walk coefficient evolution, knot-based predictive process, and
// conjugate priors on all variance components.
//
// Each update_* method draws one parameter block from its full conditional
// given the rest of `state` and overwrites that slot; they are exposed
// individually so the conditionals can be verified against analytic oracles.
// A sweep applies them in order: knot processes per year, process variances,
// beta_0, the year-by-year beta fields, Sigma_beta, error variances.
//
// Every block draw uses a stream keyed by (seed, block, sweep, index), so a
// sweep's result is independent of parallel scheduling.
class GibbsSampler {
 public:
  GibbsSampler(const TemperatureDataset& data, const PredictiveBasis& basis, Hyperparameters hyp,
               SamplerConfig cfg);

  /// Deterministic initialization: per-location-year least-squares fits for
  /// beta, residual variances (floored at 1e-6) for sigma2_eps, identity
  /// Sigma_beta, zero knot processes, unit process variances.  The seed is
  /// recorded but unused; initialization draws nothing.
  ModelState init_state(std::uint64_t seed) const;

  // Appendix-style full-conditional updates.
  void update_wstar(ModelState& state, int year, RngStream& rng) const;   // year in 1..L
  void update_sigma2_w(ModelState& state, int q, RngStream& rng) const;   // q = j*p + k in 0..7
  void update_beta0(ModelState& state, int site, RngStream& rng) const;
  void update_beta(ModelState& state, int year, int site, RngStream& rng) const;
  void update_Sigma_beta(ModelState& state, RngStream& rng) const;
  void update_sigma2_eps(ModelState& state, Variable j, int site, RngStream& rng) const;

  /// One full sweep over all six blocks; draws come from streams keyed by
  /// `sweep_index`.  Numerical failures are rethrown with sweep and
  /// parameter coordinates attached.
  void sweep(ModelState& state, std::uint64_t sweep_index) const;

  /// Runs config.n_iter sweeps from the deterministic initial state and
  /// retains every thin-th post-burn-in state.
  PosteriorDraws run() const;

  /// Rebinds the observation panel (same shape) and recomputes the cached
  /// sufficient statistics; used by validation loops that re-simulate data.
  void set_data(const TemperatureDataset& data);

  const TemperatureDataset& data() const { return *data_; }
  const PredictiveBasis& basis() const { return *basis_; }
  const Hyperparameters& hyperparameters() const { return hyp_; }
  const SamplerConfig& config() const { return cfg_; }
  const Eigen::MatrixXd& hth() const { return hth_; }
  const DesignMatrix& design(int year) const { return designs_.at(year - 1); }

  /// w_l(s) = H(s, :) * wstar_l, the interpolated process row for one site.
  Eigen::RowVectorXd wfield_row(const ModelState& state, int year, int site) const;

 private:
  void recompute_data_caches();
  Eigen::MatrixXd sigma_beta_inverse(const ModelState& state) const;

  const TemperatureDataset* data_;
  const PredictiveBasis* basis_;
  Hyperparameters hyp_;
  SamplerConfig cfg_;
  int n_ = 0;
  int m_ = 0;
  int L_ = 0;

  std::vector<DesignMatrix> designs_;  // per year 1..L
  std::vector<Eigen::MatrixXd> xtx_;   // per year, 4 x 4
  /// xtz_[l] is n x 8: X' z for the min variable in columns 0..3, max in 4..7.
  std::vector<Eigen::MatrixXd> xtz_;
  /// ztz_[l] is n x 2: squared norms of the year's series.
  std::vector<Eigen::MatrixXd> ztz_;
  Eigen::MatrixXd hth_;  // m x m
  Eigen::MatrixXd s0_inv_;
  Eigen::VectorXd s0_inv_mu0_;
};

/// Convenience driver matching the one-call interface.
PosteriorDraws run_sampler(const TemperatureDataset& data, const PredictiveBasis& basis,
                           const Hyperparameters& hyp, const SamplerConfig& cfg);

}  // namespace harmdstm
