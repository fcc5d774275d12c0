#include "harmdstm/serialize.hpp"

namespace harmdstm {

using nlohmann::json;

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols)
      throw io_error("serialize: ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

json to_json(const Hyperparameters& hyp) {
  json j;
  j["V"] = to_json(hyp.V);
  j["xi"] = hyp.xi;
  j["a"] = hyp.a;
  j["b"] = hyp.b;
  j["a_w"] = to_json(hyp.a_w);
  j["b_w"] = to_json(hyp.b_w);
  j["mu0"] = to_json(hyp.mu0);
  j["Sigma0"] = to_json(hyp.Sigma0);
  j["phi"] = hyp.phi;
  return j;
}

Hyperparameters hyperparameters_from_json(const json& j) {
  Hyperparameters hyp;
  hyp.V = matrix_from_json(j.at("V"));
  hyp.xi = j.at("xi").get<double>();
  hyp.a = j.at("a").get<double>();
  hyp.b = j.at("b").get<double>();
  hyp.a_w = vector_from_json(j.at("a_w"));
  hyp.b_w = vector_from_json(j.at("b_w"));
  hyp.mu0 = vector_from_json(j.at("mu0"));
  hyp.Sigma0 = matrix_from_json(j.at("Sigma0"));
  hyp.phi = j.at("phi").get<double>();
  return hyp;
}

json to_json(const SamplerConfig& cfg) {
  json j;
  j["n_iter"] = cfg.n_iter;
  j["n_burn"] = cfg.n_burn;
  j["thin"] = cfg.thin;
  j["seed"] = cfg.seed;
  j["parallel_width"] = cfg.parallel_width;
  j["chunk_draws"] = cfg.chunk_draws;
  return j;
}

SamplerConfig sampler_config_from_json(const json& j) {
  SamplerConfig cfg;
  cfg.n_iter = j.at("n_iter").get<int>();
  cfg.n_burn = j.at("n_burn").get<int>();
  cfg.thin = j.at("thin").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.parallel_width = j.at("parallel_width").get<int>();
  cfg.chunk_draws = j.at("chunk_draws").get<int>();
  return cfg;
}

json to_json(const Site& site) {
  return {{"id", site.id}, {"x", site.x}, {"y", site.y}, {"row", site.row}, {"col", site.col}};
}

Site site_from_json(const json& j) {
  return {j.at("id").get<std::string>(), j.at("x").get<double>(), j.at("y").get<double>(),
          j.value("row", -1), j.value("col", -1)};
}

json to_json(const std::vector<YearInfo>& years) {
  json out = json::array();
  for (const YearInfo& y : years) out.push_back({{"label", y.label}, {"days", y.days}});
  return out;
}

std::vector<YearInfo> years_from_json(const json& j) {
  std::vector<YearInfo> out;
  for (const json& y : j) out.push_back({y.at("label").get<int>(), y.at("days").get<int>()});
  return out;
}

}  // namespace harmdstm
