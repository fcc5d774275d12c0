#include "harmdstm/harmonic.hpp"

#include <cmath>

namespace harmdstm {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

void require_finite(const HarmonicCoefficients& c, const char* where) {
  if (!c.finite()) throw std::invalid_argument(std::string(where) + ": non-finite coefficient");
}
}  // namespace

bool HarmonicCoefficients::finite() const {
  return std::isfinite(a1) && std::isfinite(b1) && std::isfinite(a2) && std::isfinite(b2);
}

DesignMatrix::DesignMatrix(int days) : days_(days) {
  if (days < 4) throw std::invalid_argument("DesignMatrix: need at least 4 days");
  entries_.resize(days, 4);
  for (int t = 1; t <= days; ++t) {
    for (int h = 1; h <= 2; ++h) {
      const double arg = kTwoPi * h * (t - 1) / days;
      entries_(t - 1, 2 * (h - 1)) = std::cos(arg);
      entries_(t - 1, 2 * (h - 1) + 1) = std::sin(arg);
    }
  }
}

double DesignMatrix::cycle_value(const HarmonicCoefficients& c, int t) const {
  const int r = t - 1;
  return c.a1 * entries_(r, 0) + c.b1 * entries_(r, 1) + c.a2 * entries_(r, 2) +
         c.b2 * entries_(r, 3);
}

AmplitudePhase to_amplitude_phase(double a_h, double b_h, Harmonic h) {
  if (!std::isfinite(a_h) || !std::isfinite(b_h))
    throw std::invalid_argument("to_amplitude_phase: non-finite coefficient");
  AmplitudePhase ap;
  ap.harmonic = h;
  if (a_h == 0.0 && b_h == 0.0) return ap;  // amplitude 0, phase 0 by convention
  ap.amplitude = std::hypot(a_h, b_h);
  double phi = std::atan2(-b_h, a_h);
  if (phi <= -kPi) phi = kPi;  // atan2 can return -pi; the range is (-pi, pi]
  ap.phase = phi;
  return ap;
}

AmplitudePhase to_amplitude_phase(const HarmonicCoefficients& c, Harmonic h) {
  require_finite(c, "to_amplitude_phase");
  if (h == Harmonic::annual) return to_amplitude_phase(c.a1, c.b1, h);
  return to_amplitude_phase(c.a2, c.b2, h);
}

std::pair<double, double> from_amplitude_phase(const AmplitudePhase& ap) {
  if (!(ap.amplitude >= 0.0) || !std::isfinite(ap.amplitude) || !std::isfinite(ap.phase))
    throw std::invalid_argument("from_amplitude_phase: amplitude must be finite and >= 0");
  return {ap.amplitude * std::cos(ap.phase), -ap.amplitude * std::sin(ap.phase)};
}

Eigen::VectorXd reconstruct_cycle(const HarmonicCoefficients& c, int days) {
  require_finite(c, "reconstruct_cycle");
  const DesignMatrix design(days);
  Eigen::VectorXd out(days);
  for (int t = 1; t <= days; ++t) out(t - 1) = design.cycle_value(c, t);
  return out;
}

int peak_day(const HarmonicCoefficients& c, const DesignMatrix& design, ExtremumMode mode,
             CycleComponents components) {
  require_finite(c, "peak_day");
  HarmonicCoefficients use = c;
  if (components == CycleComponents::annual_only) {
    use.a2 = 0.0;
    use.b2 = 0.0;
  }
  if (use.all_zero()) throw degenerate_cycle_error("peak_day: all coefficients are zero");

  const int days = design.days();
  int best_day = 1;
  double best = design.cycle_value(use, 1);
  for (int t = 2; t <= days; ++t) {
    const double v = design.cycle_value(use, t);
    const bool better = (mode == ExtremumMode::peak) ? (v > best) : (v < best);
    if (better) {
      best = v;
      best_day = t;
    }
  }
  return best_day;
}

int peak_day(const HarmonicCoefficients& c, int days, ExtremumMode mode,
             CycleComponents components) {
  return peak_day(c, DesignMatrix(days), mode, components);
}

HarmonicFit fit_harmonics(const Eigen::VectorXd& series, const DesignMatrix& design,
                          bool with_intercept) {
  const int days = design.days();
  if (series.size() != days) throw std::invalid_argument("fit_harmonics: series length != days");
  if (!series.allFinite()) throw std::invalid_argument("fit_harmonics: non-finite series value");

  const int ncol = with_intercept ? 5 : 4;
  Eigen::MatrixXd x(days, ncol);
  int col = 0;
  if (with_intercept) x.col(col++).setOnes();
  x.rightCols(4) = design.matrix();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < ncol)
    throw std::invalid_argument("fit_harmonics: rank-deficient harmonic design");
  Eigen::VectorXd sol = qr.solve(series);

  HarmonicFit fit;
  col = 0;
  if (with_intercept) fit.intercept = sol(col++);
  fit.coeffs.a1 = sol(col);
  fit.coeffs.b1 = sol(col + 1);
  fit.coeffs.a2 = sol(col + 2);
  fit.coeffs.b2 = sol(col + 3);
  fit.rss = (series - x * sol).squaredNorm();
  return fit;
}

double wrap_angle(double phi) {
  double w = std::remainder(phi, kTwoPi);  // lands in [-pi, pi]
  if (w <= -kPi) w = kPi;
  return w;
}

double wrap_day_difference(double diff, double period) {
  if (!(period > 0.0)) throw std::invalid_argument("wrap_day_difference: period must be positive");
  double w = diff - period * std::round(diff / period);
  if (w < -period / 2.0) w += period;   // round-half-even can land on -period/2
  if (w > period / 2.0) w -= period;
  return w;
}

}  // namespace harmdstm
