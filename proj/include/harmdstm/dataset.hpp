#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harmdstm/harmonic.hpp"
#include "harmdstm/spatial_cov.hpp"

namespace harmdstm {

/// A measurement site.  Grid row/col indices are -1 when the site set has no
/// known lattice structure; thinning and cropping require them.
struct Site {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  int row = -1;
  int col = -1;
};

struct YearInfo {
  int label = 0;  // calendar year, or a synthetic index
  int days = 365;
};

/// 366 for Gregorian leap years, else 365.
int calendar_days(int year);

// Uncentered daily min/max panel, dense over (site, year, day).
struct RawPanel {
  std::vector<Site> sites;
  std::vector<YearInfo> years;
  /// values[j][l] is an n x T_l matrix, j = 0 (min) / 1 (max).
  std::array<std::vector<Eigen::MatrixXd>, 2> values;

  int n_sites() const { return static_cast<int>(sites.size()); }
  int n_years() const { return static_cast<int>(years.size()); }
  void validate() const;
};

// Centered daily min/max series on a spatial grid with calendar metadata.
// Values are centered by (variable, site, year); the subtracted offsets are
// retained so the raw panel can be reconstructed.  Immutable by convention
// once built.
class TemperatureDataset {
 public:
  TemperatureDataset(std::vector<Site> sites, std::vector<YearInfo> years,
                     std::array<std::vector<Eigen::MatrixXd>, 2> centered_values,
                     std::array<Eigen::MatrixXd, 2> offsets);

  int n_sites() const { return static_cast<int>(sites_.size()); }
  int n_years() const { return static_cast<int>(years_.size()); }
  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<YearInfo>& years() const { return years_; }
  const YearInfo& year(int l) const { return years_.at(l); }

  /// Centered values for variable j in year index l, one row per site.
  const Eigen::MatrixXd& values(Variable j, int l) const {
    return values_[static_cast<int>(j)].at(l);
  }
  /// Per-(site, year) centering offsets (deg C) for variable j.
  const Eigen::MatrixXd& offsets(Variable j) const { return offsets_[static_cast<int>(j)]; }

  std::vector<Location> locations() const;
  Bounds bounding_box() const;
  bool has_grid_indices() const;

  /// Index of the year with the given label; throws if absent.
  int year_index(int label) const;

  void save(const std::filesystem::path& dir) const;
  static TemperatureDataset load(const std::filesystem::path& dir);

 private:
  std::vector<Site> sites_;
  std::vector<YearInfo> years_;
  std::array<std::vector<Eigen::MatrixXd>, 2> values_;
  std::array<Eigen::MatrixXd, 2> offsets_;
};

/// Column names for the CSV schema; defaults match the documented layout
/// (site_id, x, y, date, tmin, tmax).
struct CsvSchema {
  std::string site_id = "site_id";
  std::string x = "x";
  std::string y = "y";
  std::string date = "date";
  std::string tmin = "tmin";
  std::string tmax = "tmax";
};

/// Loads a dense (site, date) panel, validating completeness per site-year,
/// finiteness, and tmin <= tmax.  Dates are ISO-8601 (YYYY-MM-DD).
RawPanel load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Writes a panel in the same CSV schema; doubles round-trip exactly.
void write_csv(const RawPanel& panel, const std::filesystem::path& path,
               const CsvSchema& schema = {});

/// Subtracts the per-(variable, site, year) mean and keeps the offsets.
TemperatureDataset center_by_year(const RawPanel& panel);

/// Re-adds the offsets, reconstructing the raw panel.
RawPanel uncenter(const TemperatureDataset& dataset);

/// Keeps sites whose grid indices are divisible by the stride in both axes,
/// re-normalizing the kept indices to consecutive ranks.
TemperatureDataset thin_grid(const TemperatureDataset& dataset, int k_x, int k_y);

/// Keeps sites with row in [row0, row1] and col in [col0, col1] (inclusive),
/// re-normalizing indices.
TemperatureDataset crop_grid(const TemperatureDataset& dataset, int row0, int row1, int col0,
                             int col1);

}  // namespace harmdstm
