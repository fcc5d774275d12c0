#pragma once

#include <vector>

#include <Eigen/Dense>

#include "harmdstm/errors.hpp"

namespace harmdstm {

/// Planar projected coordinates, same units as the decay parameter phi.
struct Location {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Location& a, const Location& b);

struct Bounds {
  double xmin = 0.0, xmax = 1.0;
  double ymin = 0.0, ymax = 1.0;

  double diagonal() const;
  bool degenerate() const { return !(xmax > xmin) || !(ymax > ymin); }
};

/// Exponential-kernel parameters: spatial variance (deg C)^2 and decay length.
struct CovarianceParams {
  double sigma2 = 1.0;
  double phi = 1.0;
};

/// sigma2 * exp(-d / phi); throws std::invalid_argument for d < 0.
double exp_cov(double d, const CovarianceParams& p);

/// Ordered knot locations; at least one, pairwise distinct.
class KnotSet {
 public:
  explicit KnotSet(std::vector<Location> knots);

  int size() const { return static_cast<int>(knots_.size()); }
  const Location& knot(int a) const { return knots_[a]; }
  const std::vector<Location>& knots() const { return knots_; }

 private:
  std::vector<Location> knots_;
};

/// m_x * m_y knots at the cell midpoints of a regular grid strictly inside
/// the bounds.
KnotSet build_knot_grid(const Bounds& bounds, int m_x, int m_y);

// Interpolation machinery of the knot-based predictive process.  The n x m
// matrix H = C Cstar^{-1} maps knot values to site values; it depends on phi
// and the geometry only, because sigma2 cancels (the diagonal jitter is scaled
// by sigma2 as well).  A built basis is immutable and safe to share across
// threads.
class PredictiveBasis {
 public:
  static PredictiveBasis build(const std::vector<Location>& sites, const KnotSet& knots,
                               const CovarianceParams& p, double jitter);

  const Eigen::MatrixXd& H() const { return h_; }
  /// Lower Cholesky factor of Cstar = sigma2 * Rstar.
  const Eigen::MatrixXd& cstar_chol() const { return cstar_chol_; }
  /// Inverse of the scale-free correlation matrix Rstar(phi) (jitter included).
  const Eigen::MatrixXd& rstar_inv() const { return rstar_inv_; }
  /// Lower Cholesky factor of Rstar, for simulating knot processes.
  const Eigen::MatrixXd& rstar_chol() const { return rstar_chol_; }

  int n_sites() const { return static_cast<int>(h_.rows()); }
  int n_knots() const { return static_cast<int>(h_.cols()); }
  const std::vector<Location>& knot_locations() const { return knots_; }
  /// Jitter actually used after any escalation.
  double jitter() const { return jitter_; }
  double phi() const { return phi_; }

  /// H * knot_values.
  Eigen::VectorXd interpolate(const Eigen::VectorXd& knot_values) const;

 private:
  PredictiveBasis() = default;

  Eigen::MatrixXd h_;
  Eigen::MatrixXd cstar_chol_;
  Eigen::MatrixXd rstar_inv_;
  Eigen::MatrixXd rstar_chol_;
  std::vector<Location> knots_;
  double jitter_ = 0.0;
  double phi_ = 0.0;
};

Eigen::VectorXd interpolate(const PredictiveBasis& basis, const Eigen::VectorXd& knot_values);

}  // namespace harmdstm
