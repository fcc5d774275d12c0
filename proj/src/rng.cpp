#include "harmdstm/rng.hpp"

namespace harmdstm {

Eigen::VectorXd draw_mvn_from_precision(const Eigen::VectorXd& shift,
                                        const Eigen::MatrixXd& precision, RngStream& rng) {
  if (precision.rows() != precision.cols() || precision.rows() != shift.size())
    throw std::invalid_argument("draw_mvn_from_precision: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw numerical_error("draw_mvn_from_precision: precision matrix is not positive definite");
  Eigen::VectorXd mean = llt.solve(shift);
  Eigen::VectorXd z(shift.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  // x = mean + L^{-T} z has covariance (L L')^{-1}.
  return mean + llt.matrixU().solve(z);
}

Eigen::VectorXd draw_mvn_from_cov_chol(const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov_chol_lower, RngStream& rng) {
  if (cov_chol_lower.rows() != cov_chol_lower.cols() || cov_chol_lower.rows() != mean.size())
    throw std::invalid_argument("draw_mvn_from_cov_chol: dimension mismatch");
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + cov_chol_lower.triangularView<Eigen::Lower>() * z;
}

Eigen::MatrixXd draw_inverse_wishart(const Eigen::MatrixXd& scale, double df, RngStream& rng) {
  const Eigen::Index d = scale.rows();
  if (scale.cols() != d) throw std::invalid_argument("draw_inverse_wishart: scale must be square");
  if (!(df > static_cast<double>(d) - 1.0))
    throw std::invalid_argument("draw_inverse_wishart: df must exceed dim - 1");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw numerical_error("draw_inverse_wishart: scale matrix is not positive definite");
  Eigen::MatrixXd L = llt.matrixL();

  // Bartlett factor of a Wishart(scale^{-1}, df) draw: row-major fill order.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) A(i, j) = rng.normal();
    A(i, i) = std::sqrt(rng.chi_squared(df - static_cast<double>(i)));
  }

  // With W = (L^{-T} A)(L^{-T} A)' ~ Wishart(scale^{-1}, df), the inverse is
  // W^{-1} = M M' with M = L A^{-T}; solve A M' = L' instead of inverting.
  Eigen::MatrixXd Mt = A.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(L.transpose()));
  return Mt.transpose() * Mt;
}

}  // namespace harmdstm
