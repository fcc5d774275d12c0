#include "harmdstm/model.hpp"

#include <stdexcept>

namespace harmdstm {

namespace {

void require_spd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != kStateDim || m.cols() != kStateDim)
    throw std::invalid_argument(std::string(what) + ": must be 8x8");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(std::string(what) + ": not symmetric positive definite");
}

}  // namespace

Hyperparameters Hyperparameters::defaults(double phi) {
  Hyperparameters h;
  h.V = Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  h.xi = 11.0;
  h.a = 2.0;
  h.b = 2.0;
  h.a_w = Eigen::VectorXd::Constant(kStateDim, 2.0);
  h.b_w = Eigen::VectorXd::Constant(kStateDim, 2.0);
  h.mu0 = Eigen::VectorXd::Zero(kStateDim);
  h.Sigma0 = 100.0 * Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  h.phi = phi;
  return h;
}

void Hyperparameters::validate() const {
  require_spd(V, "Hyperparameters::V");
  require_spd(Sigma0, "Hyperparameters::Sigma0");
  if (!(xi > 2.0 * kCoeffsPerVariable + 1.0))
    throw std::invalid_argument("Hyperparameters: xi must exceed 2p + 1 = 9");
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("Hyperparameters: a and b must be positive");
  if (a_w.size() != kStateDim || b_w.size() != kStateDim)
    throw std::invalid_argument("Hyperparameters: a_w/b_w must have size 8");
  if ((a_w.array() <= 0.0).any() || (b_w.array() <= 0.0).any())
    throw std::invalid_argument("Hyperparameters: a_w and b_w must be positive");
  if (mu0.size() != kStateDim) throw std::invalid_argument("Hyperparameters: mu0 must have size 8");
  if (!(phi > 0.0)) throw std::invalid_argument("Hyperparameters: phi must be positive");
}

void ModelState::validate(int n, int m, int L) const {
  if (static_cast<int>(beta.size()) != L + 1)
    throw std::invalid_argument("ModelState: beta must hold L + 1 fields");
  for (const Eigen::MatrixXd& b : beta)
    if (b.rows() != n || b.cols() != kStateDim || !b.allFinite())
      throw std::invalid_argument("ModelState: bad beta field");
  if (static_cast<int>(wstar.size()) != L)
    throw std::invalid_argument("ModelState: wstar must hold L fields");
  for (const Eigen::MatrixXd& w : wstar)
    if (w.rows() != m || w.cols() != kStateDim || !w.allFinite())
      throw std::invalid_argument("ModelState: bad wstar field");
  require_spd(Sigma_beta, "ModelState::Sigma_beta");
  if (sigma2_eps.rows() != n || sigma2_eps.cols() != 2 || !(sigma2_eps.array() > 0.0).all())
    throw std::invalid_argument("ModelState: sigma2_eps must be n x 2 and positive");
  if (sigma2_w.size() != kStateDim || !(sigma2_w.array() > 0.0).all())
    throw std::invalid_argument("ModelState: sigma2_w must be positive with size 8");
}

void SamplerConfig::validate() const {
  // n_iter == n_burn is allowed and yields an empty retained set.
  if (n_iter < n_burn || n_burn < 0)
    throw std::invalid_argument("SamplerConfig: need n_iter >= n_burn >= 0");
  if (thin < 1) throw std::invalid_argument("SamplerConfig: thin must be >= 1");
  if ((n_iter - n_burn) % thin != 0)
    throw std::invalid_argument("SamplerConfig: thin must divide n_iter - n_burn");
  if (parallel_width < 1) throw std::invalid_argument("SamplerConfig: parallel_width must be >= 1");
  if (chunk_draws < 1) throw std::invalid_argument("SamplerConfig: chunk_draws must be >= 1");
}

}  // namespace harmdstm
