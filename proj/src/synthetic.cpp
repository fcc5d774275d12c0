#include "harmdstm/synthetic.hpp"

#include <cmath>

#include <json.hpp>

#include "harmdstm/io_util.hpp"
#include "harmdstm/rng.hpp"
#include "harmdstm/serialize.hpp"

namespace harmdstm {

using nlohmann::json;

namespace {

void require_spd8(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != kStateDim || m.cols() != kStateDim)
    throw std::invalid_argument(std::string(what) + ": must be 8x8");
  if (Eigen::LLT<Eigen::MatrixXd>(m).info() != Eigen::Success)
    throw std::invalid_argument(std::string(what) + ": not positive definite");
}

Eigen::MatrixXd broadcast_sigma2_eps(const Eigen::MatrixXd& given, int n) {
  if (given.rows() == n && given.cols() == 2) return given;
  if (given.rows() == 1 && given.cols() == 2)
    return given.replicate(n, 1);
  throw std::invalid_argument("TruthSpec: sigma2_eps must be n x 2 or 1 x 2");
}

std::vector<Site> build_site_grid(const Bounds& b, int nx, int ny) {
  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(nx) * ny);
  const double dx = (b.xmax - b.xmin) / nx;
  const double dy = (b.ymax - b.ymin) / ny;
  int k = 0;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      Site s;
      s.id = "s" + std::to_string(k++);
      s.x = b.xmin + (ix + 0.5) * dx;
      s.y = b.ymin + (iy + 0.5) * dy;
      s.row = iy;
      s.col = ix;
      sites.push_back(s);
    }
  return sites;
}

// Shared forward pass given realized parameters.  Fills record.beta/wstar and
// returns the uncentered data values.
std::array<std::vector<Eigen::MatrixXd>, 2> forward_fields(const TruthSpec& spec,
                                                           const PredictiveBasis& basis,
                                                           TruthRecord& record,
                                                           std::uint64_t seed) {
  const int n = spec.n_sites();
  const int m = spec.n_knots();
  const int L = spec.n_years();

  const Eigen::MatrixXd chol0 =
      Eigen::LLT<Eigen::MatrixXd>(record.Sigma0).matrixL();
  const Eigen::MatrixXd cholB =
      Eigen::LLT<Eigen::MatrixXd>(record.Sigma_beta).matrixL();

  record.beta.assign(L + 1, Eigen::MatrixXd(n, kStateDim));
  record.wstar.assign(L, Eigen::MatrixXd(m, kStateDim));

  for (int i = 0; i < n; ++i) {
    RngStream rng(seed, Block::sim_beta0, {static_cast<std::uint64_t>(i)});
    record.beta[0].row(i) = draw_mvn_from_cov_chol(record.mu0, chol0, rng).transpose();
  }

  for (int l = 1; l <= L; ++l) {
    Eigen::MatrixXd& w = record.wstar[l - 1];
    for (int q = 0; q < kStateDim; ++q) {
      RngStream rng(seed, Block::sim_wstar,
                    {static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(q)});
      Eigen::VectorXd z(m);
      for (int a = 0; a < m; ++a) z(a) = rng.normal();
      w.col(q) = std::sqrt(record.sigma2_w(q)) *
                 (basis.rstar_chol().triangularView<Eigen::Lower>() * z);
    }
    const Eigen::MatrixXd wfield = basis.H() * w;  // n x 8
    for (int i = 0; i < n; ++i) {
      RngStream rng(seed, Block::sim_rw,
                    {static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(i)});
      Eigen::VectorXd eta(kStateDim);
      for (int c = 0; c < kStateDim; ++c) eta(c) = rng.normal();
      record.beta[l].row(i) =
          record.beta[l - 1].row(i) + wfield.row(i) +
          (cholB.triangularView<Eigen::Lower>() * eta).transpose();
    }
  }

  std::array<std::vector<Eigen::MatrixXd>, 2> values;
  for (int j = 0; j < 2; ++j) values[j].resize(L);
  for (int l = 1; l <= L; ++l) {
    const int days = spec.years[l - 1].days;
    const DesignMatrix design(days);
    for (int j = 0; j < 2; ++j) values[j][l - 1].resize(n, days);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 2; ++j) {
        RngStream rng(seed, Block::sim_noise,
                      {static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(l),
                       static_cast<std::uint64_t>(i)});
        const Eigen::VectorXd coeffs =
            record.beta[l].row(i).segment(j * kCoeffsPerVariable, kCoeffsPerVariable);
        Eigen::VectorXd z = design.matrix() * coeffs;
        const double sd = std::sqrt(record.sigma2_eps(i, j));
        for (int t = 0; t < days; ++t) z(t) += sd * rng.normal();
        values[j][l - 1].row(i) = z.transpose();
      }
    }
  }
  return values;
}

// Synthetic min/max fields are independent draws, so the raw-panel ordering
// check does not apply; center directly.
TemperatureDataset centered_dataset(const TruthSpec& spec, const std::vector<Site>& sites,
                                    std::array<std::vector<Eigen::MatrixXd>, 2> values) {
  const int n = spec.n_sites();
  const int L = spec.n_years();
  std::array<std::vector<Eigen::MatrixXd>, 2> centered;
  std::array<Eigen::MatrixXd, 2> offsets;
  for (int j = 0; j < 2; ++j) {
    offsets[j].resize(n, L);
    centered[j].resize(L);
    for (int l = 0; l < L; ++l) {
      offsets[j].col(l) = values[j][l].rowwise().mean();
      centered[j][l] = values[j][l].colwise() - offsets[j].col(l);
    }
  }
  return TemperatureDataset(sites, spec.years, std::move(centered), std::move(offsets));
}

}  // namespace

void TruthSpec::validate() const {
  if (site_nx < 1 || site_ny < 1 || knot_nx < 1 || knot_ny < 1)
    throw std::invalid_argument("TruthSpec: grid counts must be >= 1");
  if (domain.degenerate()) throw std::invalid_argument("TruthSpec: degenerate domain");
  if (years.empty()) throw std::invalid_argument("TruthSpec: need at least one year");
  for (const YearInfo& y : years)
    if (y.days < 8) throw std::invalid_argument("TruthSpec: years must have at least 8 days");
  require_spd8(Sigma_beta, "TruthSpec::Sigma_beta");
  require_spd8(Sigma0, "TruthSpec::Sigma0");
  if (sigma2_w.size() != kStateDim || !(sigma2_w.array() > 0.0).all())
    throw std::invalid_argument("TruthSpec: sigma2_w must be positive with size 8");
  if (!(sigma2_eps.array() > 0.0).all())
    throw std::invalid_argument("TruthSpec: sigma2_eps must be positive");
  broadcast_sigma2_eps(sigma2_eps, n_sites());
  if (mu0.size() != kStateDim) throw std::invalid_argument("TruthSpec: mu0 must have size 8");
  if (!(phi > 0.0)) throw std::invalid_argument("TruthSpec: phi must be positive");
  if (!(jitter >= 0.0)) throw std::invalid_argument("TruthSpec: jitter must be >= 0");
}

TruthSpec TruthSpec::example() {
  TruthSpec spec;
  spec.domain = {0.0, 1.0, 0.0, 1.0};
  spec.site_nx = spec.site_ny = 3;
  spec.knot_nx = spec.knot_ny = 2;
  spec.years = {{1, 32}, {2, 32}, {3, 32}};
  spec.Sigma_beta = 0.01 * Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  spec.sigma2_w = Eigen::VectorXd::Constant(kStateDim, 0.01);
  spec.sigma2_eps = Eigen::MatrixXd::Constant(1, 2, 0.25);
  spec.mu0 = Eigen::VectorXd::Zero(kStateDim);
  spec.mu0(0) = 8.0;   // annual cosine, minimum temperature
  spec.mu0(4) = 10.0;  // annual cosine, maximum temperature
  spec.Sigma0 = Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  spec.phi = 0.5;
  spec.seed = 1;
  return spec;
}

std::pair<TemperatureDataset, TruthRecord> simulate(const TruthSpec& spec) {
  spec.validate();
  const std::vector<Site> sites = build_site_grid(spec.domain, spec.site_nx, spec.site_ny);
  const KnotSet knots = build_knot_grid(spec.domain, spec.knot_nx, spec.knot_ny);
  std::vector<Location> locs;
  for (const Site& s : sites) locs.push_back({s.x, s.y});
  const PredictiveBasis basis =
      PredictiveBasis::build(locs, knots, {1.0, spec.phi}, spec.jitter);

  TruthRecord record;
  record.Sigma_beta = spec.Sigma_beta;
  record.sigma2_w = spec.sigma2_w;
  record.sigma2_eps = broadcast_sigma2_eps(spec.sigma2_eps, spec.n_sites());
  record.mu0 = spec.mu0;
  record.Sigma0 = spec.Sigma0;
  record.phi = spec.phi;
  record.jitter = spec.jitter;
  record.seed = spec.seed;
  record.knots = knots.knots();

  auto values = forward_fields(spec, basis, record, spec.seed);
  return {centered_dataset(spec, sites, std::move(values)), std::move(record)};
}

std::pair<TruthRecord, TemperatureDataset> prior_predictive(const TruthSpec& spec,
                                                            const Hyperparameters& hyp,
                                                            std::uint64_t seed) {
  spec.validate();
  hyp.validate();

  TruthSpec draw_spec = spec;
  draw_spec.phi = hyp.phi;
  const int n = spec.n_sites();

  RngStream prior_rng(seed, Block::sim_prior, {0});
  draw_spec.Sigma_beta = draw_inverse_wishart(hyp.V, hyp.xi, prior_rng);
  draw_spec.sigma2_w.resize(kStateDim);
  for (int q = 0; q < kStateDim; ++q) {
    RngStream rng(seed, Block::sim_prior, {1, static_cast<std::uint64_t>(q)});
    draw_spec.sigma2_w(q) = rng.inv_gamma(hyp.a_w(q), hyp.b_w(q));
  }
  draw_spec.sigma2_eps.resize(n, 2);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < n; ++i) {
      RngStream rng(seed, Block::sim_prior,
                    {2, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i)});
      draw_spec.sigma2_eps(i, j) = rng.inv_gamma(hyp.a, hyp.b);
    }
  draw_spec.mu0 = hyp.mu0;
  draw_spec.Sigma0 = hyp.Sigma0;
  draw_spec.seed = seed;

  const std::vector<Site> sites =
      build_site_grid(draw_spec.domain, draw_spec.site_nx, draw_spec.site_ny);
  const KnotSet knots = build_knot_grid(draw_spec.domain, draw_spec.knot_nx, draw_spec.knot_ny);
  std::vector<Location> locs;
  for (const Site& s : sites) locs.push_back({s.x, s.y});
  const PredictiveBasis basis =
      PredictiveBasis::build(locs, knots, {1.0, draw_spec.phi}, draw_spec.jitter);

  TruthRecord record;
  record.Sigma_beta = draw_spec.Sigma_beta;
  record.sigma2_w = draw_spec.sigma2_w;
  record.sigma2_eps = draw_spec.sigma2_eps;
  record.mu0 = draw_spec.mu0;
  record.Sigma0 = draw_spec.Sigma0;
  record.phi = draw_spec.phi;
  record.jitter = draw_spec.jitter;
  record.seed = seed;
  record.knots = knots.knots();

  auto values = forward_fields(draw_spec, basis, record, seed);

  // Keep the exact joint draw: no centering, zero offsets.
  std::array<Eigen::MatrixXd, 2> offsets;
  for (int j = 0; j < 2; ++j)
    offsets[j] = Eigen::MatrixXd::Zero(n, draw_spec.n_years());
  TemperatureDataset data(sites, draw_spec.years, std::move(values), std::move(offsets));
  return {std::move(record), std::move(data)};
}

TemperatureDataset simulate_data_given(const TemperatureDataset& shape,
                                       const std::vector<Eigen::MatrixXd>& beta,
                                       const Eigen::MatrixXd& sigma2_eps, std::uint64_t seed,
                                       std::uint64_t round_id) {
  const int n = shape.n_sites();
  const int L = shape.n_years();
  if (static_cast<int>(beta.size()) != L + 1)
    throw std::invalid_argument("simulate_data_given: beta must hold L + 1 fields");
  if (sigma2_eps.rows() != n || sigma2_eps.cols() != 2)
    throw std::invalid_argument("simulate_data_given: sigma2_eps must be n x 2");

  std::array<std::vector<Eigen::MatrixXd>, 2> values;
  std::array<Eigen::MatrixXd, 2> offsets;
  for (int j = 0; j < 2; ++j) {
    values[j].resize(L);
    offsets[j] = Eigen::MatrixXd::Zero(n, L);
  }
  for (int l = 1; l <= L; ++l) {
    const int days = shape.year(l - 1).days;
    const DesignMatrix design(days);
    for (int j = 0; j < 2; ++j) values[j][l - 1].resize(n, days);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) {
        RngStream rng(seed, Block::data_redraw,
                      {round_id, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(l),
                       static_cast<std::uint64_t>(i)});
        const Eigen::VectorXd coeffs =
            beta[l].row(i).segment(j * kCoeffsPerVariable, kCoeffsPerVariable);
        Eigen::VectorXd z = design.matrix() * coeffs;
        const double sd = std::sqrt(sigma2_eps(i, j));
        for (int t = 0; t < days; ++t) z(t) += sd * rng.normal();
        values[j][l - 1].row(i) = z.transpose();
      }
  }
  return TemperatureDataset(shape.sites(), shape.years(), std::move(values), std::move(offsets));
}

void TruthRecord::save(const std::filesystem::path& path) const {
  json j;
  j["format"] = "harmdstm-truth-v1";
  j["Sigma_beta"] = to_json(Sigma_beta);
  j["sigma2_w"] = to_json(sigma2_w);
  j["sigma2_eps"] = to_json(sigma2_eps);
  j["mu0"] = to_json(mu0);
  j["Sigma0"] = to_json(Sigma0);
  j["phi"] = phi;
  j["jitter"] = jitter;
  j["seed"] = seed;
  json kn = json::array();
  for (const Location& k : knots) kn.push_back({{"x", k.x}, {"y", k.y}});
  j["knots"] = std::move(kn);
  json betas = json::array();
  for (const Eigen::MatrixXd& b : beta) betas.push_back(to_json(b));
  j["beta"] = std::move(betas);
  json ws = json::array();
  for (const Eigen::MatrixXd& w : wstar) ws.push_back(to_json(w));
  j["wstar"] = std::move(ws);
  write_text_file(path, j.dump(2) + "\n");
}

TruthRecord TruthRecord::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw io_error("cannot parse truth record: " + std::string(e.what()));
  }
  if (j.value("format", "") != "harmdstm-truth-v1")
    throw io_error("unrecognized truth-record format: " + path.string());
  TruthRecord r;
  r.Sigma_beta = matrix_from_json(j.at("Sigma_beta"));
  r.sigma2_w = vector_from_json(j.at("sigma2_w"));
  r.sigma2_eps = matrix_from_json(j.at("sigma2_eps"));
  r.mu0 = vector_from_json(j.at("mu0"));
  r.Sigma0 = matrix_from_json(j.at("Sigma0"));
  r.phi = j.at("phi").get<double>();
  r.jitter = j.at("jitter").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const json& k : j.at("knots")) r.knots.push_back({k.at("x").get<double>(), k.at("y").get<double>()});
  for (const json& b : j.at("beta")) r.beta.push_back(matrix_from_json(b));
  for (const json& w : j.at("wstar")) r.wstar.push_back(matrix_from_json(w));
  return r;
}

}  // namespace harmdstm
