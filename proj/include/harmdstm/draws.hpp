#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "harmdstm/dataset.hpp"
#include "harmdstm/model.hpp"
#include "harmdstm/spatial_cov.hpp"

namespace harmdstm {

/// One retained sweep: the beta fields and the variance components.
struct DrawRecord {
  /// beta[l] is n x 8; index 0 = beta_0.
  std::vector<Eigen::MatrixXd> beta;
  Eigen::MatrixXd Sigma_beta;  // 8x8
  Eigen::MatrixXd sigma2_eps;  // n x 2
  Eigen::VectorXd sigma2_w;    // 8
};

struct DrawsMeta {
  std::vector<Site> sites;
  std::vector<YearInfo> years;
  std::vector<Location> knots;
  SamplerConfig config;
  Hyperparameters hyp;
  double jitter = 0.0;

  int n_sites() const { return static_cast<int>(sites.size()); }
  int n_years() const { return static_cast<int>(years.size()); }
  int n_knots() const { return static_cast<int>(knots.size()); }
  /// Doubles per serialized draw record.
  std::size_t doubles_per_draw() const;
};

// Retained post-burn-in sweeps plus the run metadata.  On disk: meta.json,
// fixed-size chunks of float64 little-endian records, and a manifest listing
// per-chunk checksums.  Record layout (doubles, in order): the beta fields
// draw-major, then year l = 0..L, then location-major, then the 8
// coefficients; Sigma_beta row-major; sigma2_eps variable-major (all sites
// for min, then max); sigma2_w q = 0..7.
class PosteriorDraws {
 public:
  explicit PosteriorDraws(DrawsMeta meta);

  const DrawsMeta& meta() const { return meta_; }
  int n_draws() const { return static_cast<int>(draws_.size()); }
  const DrawRecord& draw(int d) const { return draws_.at(d); }
  const std::vector<DrawRecord>& draws() const { return draws_; }

  void append(DrawRecord record);

  /// Year index (0-based, over fitted years 1..L) for a year label.
  int year_index(int label) const;

  void save(const std::filesystem::path& dir) const;
  static PosteriorDraws load(const std::filesystem::path& dir);

 private:
  DrawsMeta meta_;
  std::vector<DrawRecord> draws_;
};

}  // namespace harmdstm
