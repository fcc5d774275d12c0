#include "harmdstm/spatial_cov.hpp"

#include <cmath>
#include <sstream>

namespace harmdstm {

double distance(const Location& a, const Location& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Bounds::diagonal() const { return std::hypot(xmax - xmin, ymax - ymin); }

double exp_cov(double d, const CovarianceParams& p) {
  if (!(d >= 0.0)) throw std::invalid_argument("exp_cov: distance must be >= 0");
  if (!(p.sigma2 > 0.0) || !(p.phi > 0.0))
    throw std::invalid_argument("exp_cov: sigma2 and phi must be positive");
  return p.sigma2 * std::exp(-d / p.phi);
}

KnotSet::KnotSet(std::vector<Location> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw std::invalid_argument("KnotSet: need at least one knot");
  for (std::size_t a = 0; a < knots_.size(); ++a) {
    if (!std::isfinite(knots_[a].x) || !std::isfinite(knots_[a].y))
      throw std::invalid_argument("KnotSet: non-finite knot coordinate");
    for (std::size_t b = 0; b < a; ++b) {
      if (knots_[a].x == knots_[b].x && knots_[a].y == knots_[b].y)
        throw std::invalid_argument("KnotSet: duplicate knot location");
    }
  }
}

KnotSet build_knot_grid(const Bounds& bounds, int m_x, int m_y) {
  if (m_x < 1 || m_y < 1) throw std::invalid_argument("build_knot_grid: counts must be >= 1");
  if (bounds.degenerate()) throw std::invalid_argument("build_knot_grid: degenerate bounds");
  std::vector<Location> knots;
  knots.reserve(static_cast<std::size_t>(m_x) * m_y);
  const double dx = (bounds.xmax - bounds.xmin) / m_x;
  const double dy = (bounds.ymax - bounds.ymin) / m_y;
  for (int iy = 0; iy < m_y; ++iy)
    for (int ix = 0; ix < m_x; ++ix)
      knots.push_back({bounds.xmin + (ix + 0.5) * dx, bounds.ymin + (iy + 0.5) * dy});
  return KnotSet(std::move(knots));
}

PredictiveBasis PredictiveBasis::build(const std::vector<Location>& sites, const KnotSet& knots,
                                       const CovarianceParams& p, double jitter) {
  if (sites.empty()) throw std::invalid_argument("PredictiveBasis: need at least one site");
  if (!(jitter >= 0.0)) throw std::invalid_argument("PredictiveBasis: jitter must be >= 0");
  if (!(p.sigma2 > 0.0) || !(p.phi > 0.0))
    throw std::invalid_argument("PredictiveBasis: sigma2 and phi must be positive");

  const int n = static_cast<int>(sites.size());
  const int m = knots.size();

  // Scale-free correlations; sigma2 enters only through cstar_chol.
  Eigen::MatrixXd rstar_base(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b <= a; ++b) {
      const double r = std::exp(-distance(knots.knot(a), knots.knot(b)) / p.phi);
      rstar_base(a, b) = r;
      rstar_base(b, a) = r;
    }

  Eigen::MatrixXd cross(n, m);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a)
      cross(i, a) = std::exp(-distance(sites[i], knots.knot(a)) / p.phi);

  // Jitter escalation: retry x10 up to 1e-4 before giving up.
  double j = jitter;
  Eigen::LLT<Eigen::MatrixXd> llt;
  while (true) {
    Eigen::MatrixXd rstar = rstar_base;
    rstar.diagonal().array() += j;
    llt.compute(rstar);
    if (llt.info() == Eigen::Success) break;
    const double next = (j == 0.0) ? 1e-8 : j * 10.0;
    if (next > 1e-4) {
      std::ostringstream msg;
      msg << "PredictiveBasis: Cholesky of the knot matrix failed (m=" << m << ", phi=" << p.phi
          << ", jitter escalated to " << j << ")";
      throw numerical_error(msg.str());
    }
    j = next;
  }

  PredictiveBasis basis;
  basis.knots_ = knots.knots();
  basis.jitter_ = j;
  basis.phi_ = p.phi;
  basis.rstar_chol_ = llt.matrixL();
  basis.rstar_inv_ = llt.solve(Eigen::MatrixXd::Identity(m, m));
  basis.h_ = llt.solve(cross.transpose()).transpose();
  basis.cstar_chol_ = std::sqrt(p.sigma2) * basis.rstar_chol_;
  return basis;
}

Eigen::VectorXd PredictiveBasis::interpolate(const Eigen::VectorXd& knot_values) const {
  if (knot_values.size() != h_.cols())
    throw std::invalid_argument("interpolate: knot value count != number of knots");
  return h_ * knot_values;
}

Eigen::VectorXd interpolate(const PredictiveBasis& basis, const Eigen::VectorXd& knot_values) {
  return basis.interpolate(knot_values);
}

}  // namespace harmdstm
