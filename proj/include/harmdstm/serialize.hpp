#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include "harmdstm/dataset.hpp"
#include "harmdstm/model.hpp"
#include "harmdstm/spatial_cov.hpp"

namespace harmdstm {

nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Hyperparameters& hyp);
Hyperparameters hyperparameters_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SamplerConfig& cfg);
SamplerConfig sampler_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Site& site);
Site site_from_json(const nlohmann::json& j);

nlohmann::json to_json(const std::vector<YearInfo>& years);
std::vector<YearInfo> years_from_json(const nlohmann::json& j);

}  // namespace harmdstm
