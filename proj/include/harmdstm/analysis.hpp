#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmdstm/dataset.hpp"
#include "harmdstm/draws.hpp"
#include "harmdstm/harmonic.hpp"

namespace harmdstm {

/// Two disjoint, non-empty sets of fitted year labels to compare.
struct PeriodSpec {
  std::vector<int> period1;
  std::vector<int> period2;

  void validate() const;
  void validate_against(const std::vector<YearInfo>& years) const;
  PeriodSpec swapped() const { return {period2, period1}; }
};

struct SummarySite {
  std::string site_id;
  double x = 0.0;
  double y = 0.0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool significant = false;
  /// Set when a degenerate cycle prevented the computation at this site.
  bool degenerate = false;
  /// Welch t statistic; only populated by the exploratory screen.
  double tstat = 0.0;
};

struct SummaryGrid {
  std::string quantity;
  std::string units;
  bool has_tstat = false;
  std::vector<SummarySite> sites;
  nlohmann::json provenance;
};

/// Posterior draws of one harmonic's amplitude and phase at every site,
/// obtained by pushing each retained coefficient draw through the polar
/// transform (composition sampling; no additional randomness).
struct FieldDraws {
  std::vector<Site> sites;
  int year_label = 0;
  Variable variable = Variable::min;
  Harmonic harmonic = Harmonic::annual;
  Eigen::MatrixXd amplitude;  // n_draws x n_sites
  Eigen::MatrixXd phase;      // n_draws x n_sites
};

FieldDraws harmonic_field(const PosteriorDraws& draws, int year_label, Variable variable,
                          Harmonic harmonic);

/// Posterior mean and equal-tailed 95% interval of the amplitude field.
SummaryGrid summarize_amplitude(const FieldDraws& field);

/// Same for the phase field; draws are unwrapped around the per-site circular
/// mean first, so reported values can exceed the principal range by the wrap
/// margin but always satisfy lower <= mean <= upper.
SummaryGrid summarize_phase(const FieldDraws& field);

/// Posterior summary of the period-2 minus period-1 change in the mean
/// peak/trough day, one value per draw and site, mapped circularly to
/// [-365/2, 365/2].  Negative means the extremum moved earlier in the year.
SummaryGrid decadal_shift(const PosteriorDraws& draws, Variable variable, ExtremumMode mode,
                          const PeriodSpec& periods,
                          CycleComponents components = CycleComponents::both);

/// Posterior summary of (shift with both harmonics) - (shift with the annual
/// component only), per draw and site; significant where the semi-annual
/// component contributes to the decadal shift.
SummaryGrid semiannual_contribution(const PosteriorDraws& draws, Variable variable,
                                    ExtremumMode mode, const PeriodSpec& periods);

/// Exploratory screen: per-site-year least-squares harmonic fits, then Welch
/// two-sample t statistics of the period-2 minus period-1 difference in each
/// of A1, phi1, A2, phi2, per variable.  Phase samples are unwrapped around
/// the pooled circular mean before the test.  Returns eight grids: the four
/// quantities for the minimum cycle, then the maximum.
std::vector<SummaryGrid> exploratory_tstats(const TemperatureDataset& data,
                                            const PeriodSpec& periods);

/// CSV (site_id,x,y,mean,lower,upper,significant[,tstat]) plus a JSON sidecar
/// at the same path with extension .json.
void write_summary(const SummaryGrid& grid, const std::filesystem::path& csv_path);

/// Type-7 (linear interpolation) quantile of an ascending-sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace harmdstm
