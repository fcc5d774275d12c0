#include "harmdstm/gibbs.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace harmdstm {

namespace {

constexpr double kSigma2Floor = 1e-6;

// Static contiguous partition across threads; iteration results must not
// depend on the partitioning, which holds because every index draws from its
// own keyed stream and writes a disjoint slot.
void parallel_for(int count, int width, const std::function<void(int)>& fn) {
  if (width <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int threads = std::min(width, count);
  std::vector<std::thread> pool;
  std::mutex err_mutex;
  std::exception_ptr first_error;
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(count) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(count) * (t + 1) / threads);
    pool.emplace_back([&, begin, end]() {
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw numerical_error(std::string(what) + ": matrix is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

double nonnegative_quad(double value, double scale, const char* what) {
  if (value < 0.0) {
    if (value < -1e-9 * (1.0 + scale))
      throw numerical_error(std::string(what) + ": quadratic form is negative");
    return 0.0;
  }
  return value;
}

}  // namespace

GibbsSampler::GibbsSampler(const TemperatureDataset& data, const PredictiveBasis& basis,
                           Hyperparameters hyp, SamplerConfig cfg)
    : data_(&data), basis_(&basis), hyp_(std::move(hyp)), cfg_(cfg) {
  hyp_.validate();
  cfg_.validate();
  n_ = data.n_sites();
  m_ = basis.n_knots();
  L_ = data.n_years();
  if (basis.n_sites() != n_)
    throw std::invalid_argument("GibbsSampler: basis was built for a different site set");

  designs_.reserve(L_);
  xtx_.resize(L_);
  for (int l = 0; l < L_; ++l) {
    designs_.emplace_back(data.year(l).days);
    const Eigen::MatrixXd& x = designs_[l].matrix();
    xtx_[l] = x.transpose() * x;
  }
  hth_ = basis.H().transpose() * basis.H();
  s0_inv_ = spd_inverse(hyp_.Sigma0, "GibbsSampler: Sigma0");
  s0_inv_mu0_ = s0_inv_ * hyp_.mu0;
  recompute_data_caches();
}

void GibbsSampler::recompute_data_caches() {
  xtz_.resize(L_);
  ztz_.resize(L_);
  for (int l = 0; l < L_; ++l) {
    xtz_[l].resize(n_, kStateDim);
    ztz_[l].resize(n_, 2);
    for (int j = 0; j < 2; ++j) {
      const Eigen::MatrixXd& z = data_->values(static_cast<Variable>(j), l);  // n x T
      xtz_[l].middleCols(j * kCoeffsPerVariable, kCoeffsPerVariable) = z * designs_[l].matrix();
      ztz_[l].col(j) = z.rowwise().squaredNorm();
    }
  }
}

void GibbsSampler::set_data(const TemperatureDataset& data) {
  if (data.n_sites() != n_ || data.n_years() != L_)
    throw std::invalid_argument("set_data: panel shape changed");
  for (int l = 0; l < L_; ++l)
    if (data.year(l).days != data_->year(l).days)
      throw std::invalid_argument("set_data: year lengths changed");
  data_ = &data;
  recompute_data_caches();
}

ModelState GibbsSampler::init_state(std::uint64_t /*seed*/) const {
  ModelState state;
  state.beta.assign(L_ + 1, Eigen::MatrixXd::Zero(n_, kStateDim));
  state.wstar.assign(L_, Eigen::MatrixXd::Zero(m_, kStateDim));
  state.Sigma_beta = Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  state.sigma2_eps.resize(n_, 2);
  state.sigma2_w = Eigen::VectorXd::Ones(kStateDim);

  Eigen::MatrixXd rss = Eigen::MatrixXd::Zero(n_, 2);
  double dof = 0.0;
  for (int l = 1; l <= L_; ++l) {
    dof += data_->year(l - 1).days - kCoeffsPerVariable;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < 2; ++j) {
        const Eigen::VectorXd series =
            data_->values(static_cast<Variable>(j), l - 1).row(i).transpose();
        const HarmonicFit fit = fit_harmonics(series, designs_[l - 1], /*with_intercept=*/false);
        state.beta[l](i, j * kCoeffsPerVariable + 0) = fit.coeffs.a1;
        state.beta[l](i, j * kCoeffsPerVariable + 1) = fit.coeffs.b1;
        state.beta[l](i, j * kCoeffsPerVariable + 2) = fit.coeffs.a2;
        state.beta[l](i, j * kCoeffsPerVariable + 3) = fit.coeffs.b2;
        rss(i, j) += fit.rss;
      }
  }
  state.beta[0] = state.beta[1];
  if (dof <= 0.0) throw std::invalid_argument("init_state: no residual degrees of freedom");
  state.sigma2_eps = (rss / dof).cwiseMax(kSigma2Floor);
  return state;
}

Eigen::MatrixXd GibbsSampler::sigma_beta_inverse(const ModelState& state) const {
  return spd_inverse(state.Sigma_beta, "Sigma_beta");
}

Eigen::RowVectorXd GibbsSampler::wfield_row(const ModelState& state, int year, int site) const {
  return basis_->H().row(site) * state.wstar.at(year - 1);
}

// Step 1: the stacked knot-process vector for one year, process-major.  The
// precision is Sigma_beta^{-1} (x) H'H plus the block-diagonal prior
// R*^{-1}/sigma2_q; the shift couples processes through Sigma_beta^{-1} only,
// so both are assembled blockwise without forming F.
void GibbsSampler::update_wstar(ModelState& state, int year, RngStream& rng) const {
  const int dim = kStateDim * m_;
  const Eigen::MatrixXd sinv = sigma_beta_inverse(state);
  const Eigen::MatrixXd delta = state.beta[year] - state.beta[year - 1];  // n x 8
  const Eigen::MatrixXd g = basis_->H().transpose() * delta;              // m x 8
  const Eigen::MatrixXd g_sinv = g * sinv;                                // m x 8

  Eigen::MatrixXd precision(dim, dim);
  for (int q = 0; q < kStateDim; ++q)
    for (int r = 0; r < kStateDim; ++r)
      precision.block(q * m_, r * m_, m_, m_) = sinv(q, r) * hth_;
  for (int q = 0; q < kStateDim; ++q)
    precision.block(q * m_, q * m_, m_, m_) += basis_->rstar_inv() / state.sigma2_w(q);

  Eigen::VectorXd shift(dim);
  for (int q = 0; q < kStateDim; ++q) shift.segment(q * m_, m_) = g_sinv.col(q);

  const Eigen::VectorXd draw = draw_mvn_from_precision(shift, precision, rng);
  for (int q = 0; q < kStateDim; ++q) state.wstar[year - 1].col(q) = draw.segment(q * m_, m_);
}

// Step 2: conjugate inverse-gamma update of one process variance.  The prior
// kernel is wstar ~ Gau(0, sigma2 R*), so the quadratic form uses the
// scale-free correlation inverse.
void GibbsSampler::update_sigma2_w(ModelState& state, int q, RngStream& rng) const {
  if (q < 0 || q >= kStateDim) throw std::invalid_argument("update_sigma2_w: bad process index");
  double quad = 0.0;
  double scale = 0.0;
  for (int l = 0; l < L_; ++l) {
    const Eigen::VectorXd& w = state.wstar[l].col(q);
    quad += w.dot(basis_->rstar_inv() * w);
    scale += w.squaredNorm();
  }
  quad = nonnegative_quad(quad, scale, "update_sigma2_w");
  const double shape = 0.5 * L_ * m_ + hyp_.a_w(q);
  const double rate = hyp_.b_w(q) + 0.5 * quad;
  state.sigma2_w(q) = rng.inv_gamma(shape, rate);
}

// Step 3: Gaussian update of the initial field at one site.
void GibbsSampler::update_beta0(ModelState& state, int site, RngStream& rng) const {
  const Eigen::MatrixXd sinv = sigma_beta_inverse(state);
  const Eigen::VectorXd resid =
      (state.beta[1].row(site) - wfield_row(state, 1, site)).transpose();
  const Eigen::MatrixXd precision = sinv + s0_inv_;
  const Eigen::VectorXd shift = sinv * resid + s0_inv_mu0_;
  state.beta[0].row(site) = draw_mvn_from_precision(shift, precision, rng).transpose();
}

// Step 4: Gaussian update of one coefficient vector.  The random walk
// contributes the backward prediction beta_{l-1} + w_l and, for interior
// years, the forward prediction beta_{l+1} - w_{l+1}; at l = L the forward
// term is absent and the precision carries a single Sigma_beta^{-1}.
void GibbsSampler::update_beta(ModelState& state, int year, int site, RngStream& rng) const {
  if (year < 1 || year > L_) throw std::invalid_argument("update_beta: year out of range");
  const Eigen::MatrixXd sinv = sigma_beta_inverse(state);
  const int l = year - 1;

  Eigen::MatrixXd precision = (year < L_) ? (2.0 * sinv).eval() : sinv;
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(kStateDim);
  for (int j = 0; j < 2; ++j) {
    const double inv_var = 1.0 / state.sigma2_eps(site, j);
    precision.block(j * kCoeffsPerVariable, j * kCoeffsPerVariable, kCoeffsPerVariable,
                    kCoeffsPerVariable) += inv_var * xtx_[l];
    shift.segment(j * kCoeffsPerVariable, kCoeffsPerVariable) =
        inv_var *
        xtz_[l].row(site).segment(j * kCoeffsPerVariable, kCoeffsPerVariable).transpose();
  }
  const Eigen::VectorXd backward =
      (state.beta[year - 1].row(site) + wfield_row(state, year, site)).transpose();
  shift += sinv * backward;
  if (year < L_) {
    const Eigen::VectorXd forward =
        (state.beta[year + 1].row(site) - wfield_row(state, year + 1, site)).transpose();
    shift += sinv * forward;
  }
  state.beta[year].row(site) = draw_mvn_from_precision(shift, precision, rng).transpose();
}

// Step 5: inverse-Wishart update of the innovation covariance from the
// accumulated outer products of the random-walk residuals.
void GibbsSampler::update_Sigma_beta(ModelState& state, RngStream& rng) const {
  Eigen::MatrixXd resid(n_ * L_, kStateDim);
  for (int l = 1; l <= L_; ++l) {
    const Eigen::MatrixXd wfield = basis_->H() * state.wstar[l - 1];  // n x 8
    resid.middleRows((l - 1) * n_, n_) = state.beta[l] - state.beta[l - 1] - wfield;
  }
  const Eigen::MatrixXd lambda = hyp_.V + resid.transpose() * resid;
  const double df = static_cast<double>(n_) * L_ + hyp_.xi;
  state.Sigma_beta = draw_inverse_wishart(lambda, df, rng);
}

// Step 6: conjugate inverse-gamma update of one error variance.  The shape
// counts the actual residuals, sum_l T_l, for this site and variable.
void GibbsSampler::update_sigma2_eps(ModelState& state, Variable j, int site,
                                     RngStream& rng) const {
  const int jj = static_cast<int>(j);
  double rss = 0.0;
  double total_days = 0.0;
  for (int l = 1; l <= L_; ++l) {
    const Eigen::VectorXd coeffs = state.beta[l]
                                       .row(site)
                                       .segment(jj * kCoeffsPerVariable, kCoeffsPerVariable)
                                       .transpose();
    const Eigen::VectorXd xtz =
        xtz_[l - 1].row(site).segment(jj * kCoeffsPerVariable, kCoeffsPerVariable).transpose();
    const double year_rss =
        ztz_[l - 1](site, jj) - 2.0 * coeffs.dot(xtz) + coeffs.dot(xtx_[l - 1] * coeffs);
    rss += nonnegative_quad(year_rss, ztz_[l - 1](site, jj), "update_sigma2_eps");
    total_days += data_->year(l - 1).days;
  }
  const double shape = 0.5 * total_days + hyp_.a;
  const double rate = hyp_.b + 0.5 * rss;
  state.sigma2_eps(site, jj) = rng.inv_gamma(shape, rate);
}

void GibbsSampler::sweep(ModelState& state, std::uint64_t sweep_index) const {
  const std::uint64_t seed = cfg_.seed;
  const int width = cfg_.parallel_width;
  auto context = [&](const char* step, long long a, long long b, const std::exception& e) {
    std::ostringstream msg;
    msg << "sweep " << sweep_index << ", " << step;
    if (a >= 0) msg << " [" << a;
    if (b >= 0) msg << ", " << b;
    if (a >= 0) msg << "]";
    msg << ": " << e.what();
    return numerical_error(msg.str());
  };

  // Step 1: knot processes, conditionally independent across years.
  parallel_for(L_, width, [&](int l) {
    RngStream rng(seed, Block::wstar, {sweep_index, static_cast<std::uint64_t>(l + 1)});
    try {
      update_wstar(state, l + 1, rng);
    } catch (const numerical_error& e) {
      throw context("step 1 (wstar), year", l + 1, -1, e);
    }
  });

  // Step 2: process variances.
  for (int q = 0; q < kStateDim; ++q) {
    RngStream rng(seed, Block::sigma2_w, {sweep_index, static_cast<std::uint64_t>(q)});
    try {
      update_sigma2_w(state, q, rng);
    } catch (const numerical_error& e) {
      throw context("step 2 (sigma2_w), process", q, -1, e);
    }
  }

  // Step 3: initial fields, independent across sites.
  parallel_for(n_, width, [&](int i) {
    RngStream rng(seed, Block::beta0, {sweep_index, static_cast<std::uint64_t>(i)});
    try {
      update_beta0(state, i, rng);
    } catch (const numerical_error& e) {
      throw context("step 3 (beta0), site", i, -1, e);
    }
  });

  // Step 4: coefficient fields; sequential in years, independent across sites.
  for (int l = 1; l <= L_; ++l) {
    parallel_for(n_, width, [&](int i) {
      RngStream rng(seed, Block::beta,
                    {sweep_index, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(i)});
      try {
        update_beta(state, l, i, rng);
      } catch (const numerical_error& e) {
        throw context("step 4 (beta), year/site", l, i, e);
      }
    });
  }

  // Step 5: innovation covariance.
  {
    RngStream rng(seed, Block::sigma_beta, {sweep_index});
    try {
      update_Sigma_beta(state, rng);
    } catch (const numerical_error& e) {
      throw context("step 5 (Sigma_beta)", -1, -1, e);
    }
  }

  // Step 6: error variances, independent across (variable, site).
  parallel_for(2 * n_, width, [&](int idx) {
    const int j = idx / n_;
    const int i = idx % n_;
    RngStream rng(seed, Block::sigma2_eps,
                  {sweep_index, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i)});
    try {
      update_sigma2_eps(state, static_cast<Variable>(j), i, rng);
    } catch (const numerical_error& e) {
      throw context("step 6 (sigma2_eps), variable/site", j, i, e);
    }
  });
}

PosteriorDraws GibbsSampler::run() const {
  DrawsMeta meta;
  meta.sites = data_->sites();
  meta.years = data_->years();
  meta.knots = basis_->knot_locations();
  meta.config = cfg_;
  meta.hyp = hyp_;
  meta.jitter = basis_->jitter();
  PosteriorDraws draws(meta);

  ModelState state = init_state(cfg_.seed);
  for (int s = 0; s < cfg_.n_iter; ++s) {
    sweep(state, static_cast<std::uint64_t>(s));
    if (s >= cfg_.n_burn && (s - cfg_.n_burn) % cfg_.thin == 0) {
      DrawRecord record;
      record.beta = state.beta;
      record.Sigma_beta = state.Sigma_beta;
      record.sigma2_eps = state.sigma2_eps;
      record.sigma2_w = state.sigma2_w;
      draws.append(std::move(record));
    }
  }
  return draws;
}

PosteriorDraws run_sampler(const TemperatureDataset& data, const PredictiveBasis& basis,
                           const Hyperparameters& hyp, const SamplerConfig& cfg) {
  return GibbsSampler(data, basis, hyp, cfg).run();
}

}  // namespace harmdstm
