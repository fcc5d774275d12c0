#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmdstm/analysis.hpp"
#include "harmdstm/model.hpp"
#include "harmdstm/synthetic.hpp"

namespace harmdstm {

// Effective run configuration: built-in defaults, overlaid by an optional
// JSON config file, overlaid by --set/--seed/--out/--threads overrides.
// Every leaf remembers where its value came from.
class RunConfig {
 public:
  static RunConfig defaults();
  static RunConfig resolve(const std::optional<std::filesystem::path>& config_path,
                           const std::vector<std::string>& set_overrides,
                           const std::optional<std::uint64_t>& seed,
                           const std::optional<std::string>& out,
                           const std::optional<int>& threads);

  const nlohmann::json& doc() const { return doc_; }
  /// Leaf path -> "default" | "config" | "override".
  const std::map<std::string, std::string>& provenance() const { return provenance_; }

  /// FNV-1a hash of the canonical serialized document.
  std::string config_hash() const;
  std::string dump_with_provenance() const;

  // Typed, validated views.
  std::filesystem::path out_dir() const;
  std::string data_path() const;
  std::string data_format() const;  // "native" | "csv"
  std::pair<int, int> data_thin() const;
  std::optional<std::array<int, 4>> data_crop() const;
  std::pair<int, int> knot_counts() const;
  std::optional<double> phi() const;  // nullopt -> domain diagonal / 3
  double jitter() const;
  Hyperparameters hyperparameters(double resolved_phi) const;
  SamplerConfig sampler_config() const;
  PeriodSpec shift_periods() const;
  PeriodSpec explore_periods() const;
  std::vector<int> field_years() const;
  bool summarize_semiannual() const;
  std::optional<std::string> recovery_truth() const;
  TruthSpec truth_spec() const;

  /// phi fallback rule: fixed decay = domain diagonal / 3.
  static double default_phi(const Bounds& bounds);

 private:
  nlohmann::json doc_;
  std::map<std::string, std::string> provenance_;
};

}  // namespace harmdstm
