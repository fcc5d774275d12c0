#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

#include "harmdstm/errors.hpp"

namespace harmdstm {

/// SplitMix64 finalizer, used to mix stream keys into engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Parameter-block identifiers keying the sampler and simulator streams.
enum class Block : std::uint64_t {
  wstar = 1,
  sigma2_w,
  beta0,
  beta,
  sigma_beta,
  sigma2_eps,
  sim_beta0,
  sim_wstar,
  sim_rw,
  sim_noise,
  sim_prior,
  data_redraw,
  generic,
};

// One deterministic stream per (seed, block, counters...) key.  Every draw
// depends only on its key, never on thread scheduling, so disjoint blocks can
// be updated concurrently without changing the sampled chain.
class RngStream {
 public:
  RngStream(std::uint64_t seed, Block block, std::initializer_list<std::uint64_t> counters) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(block));
    for (std::uint64_t c : counters) h = splitmix64(h ^ c);
    engine_.seed(h);
  }

  double normal() {
    std::normal_distribution<double> d;
    return d(engine_);
  }

  double uniform() {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return d(engine_);
  }

  /// Gamma draw with the shape/scale convention (mean = shape * scale).
  double gamma(double shape, double scale) {
    std::gamma_distribution<double> d(shape, scale);
    return d(engine_);
  }

  double chi_squared(double df) {
    std::chi_squared_distribution<double> d(df);
    return d(engine_);
  }

  /// Inverse-gamma draw with shape a and scale b (mean b/(a-1) for a > 1).
  double inv_gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::invalid_argument("inv_gamma: shape and scale must be positive");
    return scale / gamma(shape, 1.0);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Draw from Gau(V^{-1} a, V^{-1}) given the precision V and shift a.
/// Throws numerical_error if V is not positive definite.
Eigen::VectorXd draw_mvn_from_precision(const Eigen::VectorXd& shift,
                                        const Eigen::MatrixXd& precision, RngStream& rng);

/// Draw from Gau(mean, L L') given the lower Cholesky factor L of the covariance.
Eigen::VectorXd draw_mvn_from_cov_chol(const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov_chol_lower, RngStream& rng);

/// Inverse-Wishart draw with scale matrix `scale` and `df` degrees of freedom,
/// via the Bartlett decomposition.  Requires df > dim - 1.
Eigen::MatrixXd draw_inverse_wishart(const Eigen::MatrixXd& scale, double df, RngStream& rng);

}  // namespace harmdstm
