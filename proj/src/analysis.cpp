#include "harmdstm/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "harmdstm/io_util.hpp"

namespace harmdstm {

using nlohmann::json;

namespace {

constexpr double kShiftPeriod = 365.0;  // day differences are circular on this scale

bool zero_excluded(double lower, double upper) { return lower > 0.0 || upper < 0.0; }

std::string variable_name(Variable v) { return v == Variable::min ? "tmin" : "tmax"; }
std::string mode_name(ExtremumMode m) { return m == ExtremumMode::peak ? "peak" : "trough"; }
std::string components_name(CycleComponents c) {
  return c == CycleComponents::both ? "both" : "annual_only";
}

HarmonicCoefficients coeffs_at(const Eigen::MatrixXd& beta, int site, Variable v) {
  const int off = static_cast<int>(v) * kCoeffsPerVariable;
  HarmonicCoefficients c;
  c.a1 = beta(site, off + 0);
  c.b1 = beta(site, off + 1);
  c.a2 = beta(site, off + 2);
  c.b2 = beta(site, off + 3);
  c.variable = v;
  return c;
}

SummarySite summarize_site(const Site& site, std::vector<double>& values) {
  SummarySite out;
  out.site_id = site.id;
  out.x = site.x;
  out.y = site.y;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  out.lower = quantile_sorted(values, 0.025);
  out.upper = quantile_sorted(values, 0.975);
  out.significant = zero_excluded(out.lower, out.upper);
  return out;
}

SummarySite degenerate_site(const Site& site) {
  SummarySite out;
  out.site_id = site.id;
  out.x = site.x;
  out.y = site.y;
  out.mean = out.lower = out.upper = std::numeric_limits<double>::quiet_NaN();
  out.significant = false;
  out.degenerate = true;
  return out;
}

// Shift of the period-averaged extremum day, one row per draw, one column per
// site; degenerate sites are flagged and left as NaN.
Eigen::MatrixXd shift_draws(const PosteriorDraws& draws, Variable variable, ExtremumMode mode,
                            const PeriodSpec& periods, CycleComponents components,
                            std::vector<bool>& degenerate) {
  const DrawsMeta& meta = draws.meta();
  const int n = meta.n_sites();
  const int nd = draws.n_draws();
  degenerate.assign(n, false);

  std::vector<int> idx1, idx2;
  for (int label : periods.period1) idx1.push_back(draws.year_index(label));
  for (int label : periods.period2) idx2.push_back(draws.year_index(label));

  std::map<int, DesignMatrix> designs;
  for (const YearInfo& y : meta.years) designs.try_emplace(y.days, y.days);

  Eigen::MatrixXd shifts =
      Eigen::MatrixXd::Constant(nd, n, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < n; ++i) {
    try {
      for (int d = 0; d < nd; ++d) {
        const DrawRecord& rec = draws.draw(d);
        auto period_mean = [&](const std::vector<int>& idx) {
          double sum = 0.0;
          for (int l : idx) {
            const DesignMatrix& design = designs.at(meta.years[l].days);
            const HarmonicCoefficients c = coeffs_at(rec.beta[l + 1], i, variable);
            sum += peak_day(c, design, mode, components);
          }
          return sum / static_cast<double>(idx.size());
        };
        shifts(d, i) = wrap_day_difference(period_mean(idx2) - period_mean(idx1), kShiftPeriod);
      }
    } catch (const degenerate_cycle_error&) {
      degenerate[i] = true;
    }
  }
  return shifts;
}

SummaryGrid summarize_shift_matrix(const Eigen::MatrixXd& shifts,
                                   const std::vector<bool>& degenerate, const DrawsMeta& meta,
                                   std::string quantity, json provenance) {
  SummaryGrid grid;
  grid.quantity = std::move(quantity);
  grid.units = "days";
  grid.provenance = std::move(provenance);
  const int n = meta.n_sites();
  std::vector<double> values(static_cast<std::size_t>(shifts.rows()));
  for (int i = 0; i < n; ++i) {
    if (degenerate[i]) {
      grid.sites.push_back(degenerate_site(meta.sites[i]));
      continue;
    }
    for (Eigen::Index d = 0; d < shifts.rows(); ++d) values[d] = shifts(d, i);
    grid.sites.push_back(summarize_site(meta.sites[i], values));
  }
  return grid;
}

struct WelchResult {
  double diff = 0.0;
  double se = 0.0;
  double df = 1.0;
  double t = 0.0;
};

WelchResult welch_t(const std::vector<double>& s1, const std::vector<double>& s2) {
  const auto n1 = static_cast<double>(s1.size());
  const auto n2 = static_cast<double>(s2.size());
  double m1 = 0.0, m2 = 0.0;
  for (double v : s1) m1 += v;
  for (double v : s2) m2 += v;
  m1 /= n1;
  m2 /= n2;
  double v1 = 0.0, v2 = 0.0;
  for (double v : s1) v1 += (v - m1) * (v - m1);
  for (double v : s2) v2 += (v - m2) * (v - m2);
  v1 /= (n1 - 1.0);
  v2 /= (n2 - 1.0);

  WelchResult r;
  r.diff = m2 - m1;
  const double q1 = v1 / n1, q2 = v2 / n2;
  r.se = std::sqrt(q1 + q2);
  if (r.se == 0.0) {
    r.df = n1 + n2 - 2.0;
    r.t = (r.diff == 0.0) ? 0.0
                          : std::copysign(std::numeric_limits<double>::infinity(), r.diff);
    return r;
  }
  r.df = (q1 + q2) * (q1 + q2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
  r.t = r.diff / r.se;
  return r;
}

double circular_mean(const std::vector<double>& phases) {
  double s = 0.0, c = 0.0;
  for (double p : phases) {
    s += std::sin(p);
    c += std::cos(p);
  }
  if (s == 0.0 && c == 0.0) return 0.0;
  return std::atan2(s, c);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void PeriodSpec::validate() const {
  if (period1.empty() || period2.empty())
    throw std::invalid_argument("PeriodSpec: both periods must be non-empty");
  std::set<int> p1(period1.begin(), period1.end());
  for (int y : period2)
    if (p1.count(y)) throw std::invalid_argument("PeriodSpec: periods overlap at year " +
                                                 std::to_string(y));
}

void PeriodSpec::validate_against(const std::vector<YearInfo>& years) const {
  validate();
  std::set<int> labels;
  for (const YearInfo& y : years) labels.insert(y.label);
  for (int y : period1)
    if (!labels.count(y))
      throw std::invalid_argument("PeriodSpec: year " + std::to_string(y) + " not in the fit");
  for (int y : period2)
    if (!labels.count(y))
      throw std::invalid_argument("PeriodSpec: year " + std::to_string(y) + " not in the fit");
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile_sorted: p outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

FieldDraws harmonic_field(const PosteriorDraws& draws, int year_label, Variable variable,
                          Harmonic harmonic) {
  const DrawsMeta& meta = draws.meta();
  const int l = draws.year_index(year_label);
  const int n = meta.n_sites();
  const int nd = draws.n_draws();

  FieldDraws field;
  field.sites = meta.sites;
  field.year_label = year_label;
  field.variable = variable;
  field.harmonic = harmonic;
  field.amplitude.resize(nd, n);
  field.phase.resize(nd, n);
  for (int d = 0; d < nd; ++d) {
    const DrawRecord& rec = draws.draw(d);
    for (int i = 0; i < n; ++i) {
      const AmplitudePhase ap =
          to_amplitude_phase(coeffs_at(rec.beta[l + 1], i, variable), harmonic);
      field.amplitude(d, i) = ap.amplitude;
      field.phase(d, i) = ap.phase;
    }
  }
  return field;
}

namespace {

json field_provenance(const FieldDraws& field) {
  return {{"year", field.year_label},
          {"variable", variable_name(field.variable)},
          {"harmonic", static_cast<int>(field.harmonic)},
          {"n_draws", field.amplitude.rows()}};
}

}  // namespace

SummaryGrid summarize_amplitude(const FieldDraws& field) {
  SummaryGrid grid;
  grid.quantity = variable_name(field.variable) + "_amplitude" +
                  std::to_string(static_cast<int>(field.harmonic));
  grid.units = "deg C";
  grid.provenance = field_provenance(field);
  std::vector<double> values(static_cast<std::size_t>(field.amplitude.rows()));
  for (int i = 0; i < field.amplitude.cols(); ++i) {
    for (Eigen::Index d = 0; d < field.amplitude.rows(); ++d) values[d] = field.amplitude(d, i);
    grid.sites.push_back(summarize_site(field.sites[i], values));
  }
  return grid;
}

SummaryGrid summarize_phase(const FieldDraws& field) {
  SummaryGrid grid;
  grid.quantity =
      variable_name(field.variable) + "_phase" + std::to_string(static_cast<int>(field.harmonic));
  grid.units = "radians";
  grid.provenance = field_provenance(field);
  const auto nd = field.phase.rows();
  std::vector<double> values(static_cast<std::size_t>(nd));
  std::vector<double> raw(static_cast<std::size_t>(nd));
  for (int i = 0; i < field.phase.cols(); ++i) {
    for (Eigen::Index d = 0; d < nd; ++d) raw[d] = field.phase(d, i);
    const double center = circular_mean(raw);
    for (Eigen::Index d = 0; d < nd; ++d) values[d] = center + wrap_angle(raw[d] - center);
    grid.sites.push_back(summarize_site(field.sites[i], values));
  }
  return grid;
}

SummaryGrid decadal_shift(const PosteriorDraws& draws, Variable variable, ExtremumMode mode,
                          const PeriodSpec& periods, CycleComponents components) {
  periods.validate_against(draws.meta().years);
  if (draws.n_draws() == 0) throw std::invalid_argument("decadal_shift: no draws");
  std::vector<bool> degenerate;
  const Eigen::MatrixXd shifts =
      shift_draws(draws, variable, mode, periods, components, degenerate);
  json prov = {{"variable", variable_name(variable)},
               {"mode", mode_name(mode)},
               {"components", components_name(components)},
               {"period1", periods.period1},
               {"period2", periods.period2},
               {"n_draws", draws.n_draws()}};
  return summarize_shift_matrix(
      shifts, degenerate, draws.meta(),
      variable_name(variable) + "_" + mode_name(mode) + "_shift", std::move(prov));
}

SummaryGrid semiannual_contribution(const PosteriorDraws& draws, Variable variable,
                                    ExtremumMode mode, const PeriodSpec& periods) {
  periods.validate_against(draws.meta().years);
  if (draws.n_draws() == 0) throw std::invalid_argument("semiannual_contribution: no draws");
  std::vector<bool> degenerate_both, degenerate_annual;
  const Eigen::MatrixXd both =
      shift_draws(draws, variable, mode, periods, CycleComponents::both, degenerate_both);
  const Eigen::MatrixXd annual =
      shift_draws(draws, variable, mode, periods, CycleComponents::annual_only, degenerate_annual);
  std::vector<bool> degenerate(degenerate_both.size());
  for (std::size_t i = 0; i < degenerate.size(); ++i)
    degenerate[i] = degenerate_both[i] || degenerate_annual[i];

  Eigen::MatrixXd diff = both - annual;
  for (Eigen::Index d = 0; d < diff.rows(); ++d)
    for (Eigen::Index i = 0; i < diff.cols(); ++i)
      if (std::isfinite(diff(d, i))) diff(d, i) = wrap_day_difference(diff(d, i), kShiftPeriod);

  json prov = {{"variable", variable_name(variable)},
               {"mode", mode_name(mode)},
               {"period1", periods.period1},
               {"period2", periods.period2},
               {"n_draws", draws.n_draws()}};
  return summarize_shift_matrix(
      diff, degenerate, draws.meta(),
      variable_name(variable) + "_" + mode_name(mode) + "_semiannual_contribution",
      std::move(prov));
}

std::vector<SummaryGrid> exploratory_tstats(const TemperatureDataset& data,
                                            const PeriodSpec& periods) {
  periods.validate_against(data.years());
  if (periods.period1.size() < 2 || periods.period2.size() < 2)
    throw std::invalid_argument("exploratory_tstats: each period needs at least 2 years");

  const int n = data.n_sites();
  std::vector<int> idx1, idx2;
  for (int label : periods.period1) idx1.push_back(data.year_index(label));
  for (int label : periods.period2) idx2.push_back(data.year_index(label));

  std::map<int, DesignMatrix> designs;
  for (const YearInfo& y : data.years()) designs.try_emplace(y.days, y.days);

  // quantity index: 0 = A1, 1 = phi1, 2 = A2, 3 = phi2
  const char* kQuantity[4] = {"amplitude1", "phase1", "amplitude2", "phase2"};
  const char* kUnits[4] = {"deg C", "radians", "deg C", "radians"};
  const bool kIsPhase[4] = {false, true, false, true};

  std::vector<SummaryGrid> grids;
  for (int j = 0; j < 2; ++j) {
    const auto variable = static_cast<Variable>(j);
    for (int q = 0; q < 4; ++q) {
      SummaryGrid grid;
      grid.quantity = variable_name(variable) + "_" + kQuantity[q] + "_diff";
      grid.units = kUnits[q];
      grid.has_tstat = true;
      grid.provenance = {{"variable", variable_name(variable)},
                         {"quantity", kQuantity[q]},
                         {"period1", periods.period1},
                         {"period2", periods.period2},
                         {"test", "welch_t_95"}};
      grids.push_back(std::move(grid));
    }
  }

  auto fit_quantities = [&](int site, int year_idx, Variable variable) {
    const DesignMatrix& design = designs.at(data.year(year_idx).days);
    const Eigen::VectorXd series = data.values(variable, year_idx).row(site).transpose();
    const HarmonicFit fit = fit_harmonics(series, design, /*with_intercept=*/true);
    const AmplitudePhase h1 = to_amplitude_phase(fit.coeffs, Harmonic::annual);
    const AmplitudePhase h2 = to_amplitude_phase(fit.coeffs, Harmonic::semiannual);
    return std::array<double, 4>{h1.amplitude, h1.phase, h2.amplitude, h2.phase};
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 2; ++j) {
      const auto variable = static_cast<Variable>(j);
      std::array<std::vector<double>, 4> s1, s2;
      for (int l : idx1) {
        const auto qs = fit_quantities(i, l, variable);
        for (int q = 0; q < 4; ++q) s1[q].push_back(qs[q]);
      }
      for (int l : idx2) {
        const auto qs = fit_quantities(i, l, variable);
        for (int q = 0; q < 4; ++q) s2[q].push_back(qs[q]);
      }
      for (int q = 0; q < 4; ++q) {
        std::vector<double> a = s1[q];
        std::vector<double> b = s2[q];
        if (kIsPhase[q]) {
          // Unwrap both samples around the pooled circular mean so the test
          // sees the shortest-arc differences.
          std::vector<double> pooled = a;
          pooled.insert(pooled.end(), b.begin(), b.end());
          const double center = circular_mean(pooled);
          for (double& v : a) v = center + wrap_angle(v - center);
          for (double& v : b) v = center + wrap_angle(v - center);
        }
        const WelchResult w = welch_t(a, b);
        SummarySite site;
        site.site_id = data.sites()[i].id;
        site.x = data.sites()[i].x;
        site.y = data.sites()[i].y;
        site.mean = w.diff;
        site.tstat = w.t;
        if (w.se == 0.0) {
          site.lower = site.upper = w.diff;
        } else {
          const boost::math::students_t_distribution<double> dist(w.df);
          const double tcrit = boost::math::quantile(dist, 0.975);
          site.lower = w.diff - tcrit * w.se;
          site.upper = w.diff + tcrit * w.se;
        }
        site.significant = zero_excluded(site.lower, site.upper);
        grids[static_cast<std::size_t>(j) * 4 + q].sites.push_back(site);
      }
    }
  }
  return grids;
}

void write_summary(const SummaryGrid& grid, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + csv_path.string());
  out << "site_id,x,y,mean,lower,upper,significant";
  if (grid.has_tstat) out << ",tstat";
  out << '\n';
  for (const SummarySite& s : grid.sites) {
    out << s.site_id << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
        << format_double(s.mean) << ',' << format_double(s.lower) << ','
        << format_double(s.upper) << ',' << (s.significant ? 1 : 0);
    if (grid.has_tstat) out << ',' << format_double(s.tstat);
    out << '\n';
  }
  if (!out) throw io_error("short write: " + csv_path.string());

  json sidecar;
  sidecar["quantity"] = grid.quantity;
  sidecar["units"] = grid.units;
  sidecar["columns"] = grid.has_tstat ? "site_id,x,y,mean,lower,upper,significant,tstat"
                                      : "site_id,x,y,mean,lower,upper,significant";
  sidecar["significance_rule"] = "95% equal-tailed interval excludes zero";
  sidecar["provenance"] = grid.provenance;
  std::filesystem::path sidecar_path = csv_path;
  sidecar_path.replace_extension(".json");
  write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

}  // namespace harmdstm
