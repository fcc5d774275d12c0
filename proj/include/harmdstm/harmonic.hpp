#pragma once

#include <utility>

#include <Eigen/Dense>

#include "harmdstm/errors.hpp"

namespace harmdstm {

/// Temperature variable index: 0 = daily minimum, 1 = daily maximum.
enum class Variable : int { min = 0, max = 1 };

/// Harmonic index: 1 = annual component, 2 = semi-annual component.
enum class Harmonic : int { annual = 1, semiannual = 2 };

enum class ExtremumMode { peak, trough };

/// Whether cycle geometry uses both harmonics or the annual component alone.
enum class CycleComponents { both, annual_only };

constexpr int kCoeffsPerVariable = 4;  // a1, b1, a2, b2
constexpr int kNumVariables = 2;
constexpr int kStateDim = kCoeffsPerVariable * kNumVariables;  // the 2p = 8 model dimension

/// Fourier coefficients of one variable's cycle at one location-year.
struct HarmonicCoefficients {
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
  Variable variable = Variable::min;

  bool finite() const;
  bool all_zero() const { return a1 == 0.0 && b1 == 0.0 && a2 == 0.0 && b2 == 0.0; }
};

/// Polar form of one harmonic: amplitude >= 0 (deg C), phase in (-pi, pi].
struct AmplitudePhase {
  double amplitude = 0.0;
  double phase = 0.0;
  Harmonic harmonic = Harmonic::annual;
};

// T x 4 design with columns cos(2*pi*(t-1)/T), sin(2*pi*(t-1)/T),
// cos(4*pi*(t-1)/T), sin(4*pi*(t-1)/T) for t = 1..T.
class DesignMatrix {
 public:
  explicit DesignMatrix(int days);

  int days() const { return days_; }
  const Eigen::MatrixXd& matrix() const { return entries_; }

  /// Cycle value a1*rho1 + b1*psi1 + a2*rho2 + b2*psi2 at day t (1-based).
  double cycle_value(const HarmonicCoefficients& c, int t) const;

 private:
  int days_;
  Eigen::MatrixXd entries_;
};

/// (a_h, b_h) -> amplitude sqrt(a^2 + b^2) and phase atan2(-b, a); (0,0) maps
/// to amplitude 0, phase 0.
AmplitudePhase to_amplitude_phase(double a_h, double b_h, Harmonic h);
AmplitudePhase to_amplitude_phase(const HarmonicCoefficients& c, Harmonic h);

/// Inverse map: a = A cos(phi), b = -A sin(phi).  Requires A >= 0.
std::pair<double, double> from_amplitude_phase(const AmplitudePhase& ap);

/// Daily series of length T: entry t is the two-harmonic cycle at day t.
Eigen::VectorXd reconstruct_cycle(const HarmonicCoefficients& c, int days);

/// Day (1-based) at which the cycle attains its extremum on the integer grid
/// 1..T; ties break toward the smallest day.  Throws degenerate_cycle_error
/// when every coefficient is zero.
int peak_day(const HarmonicCoefficients& c, const DesignMatrix& design, ExtremumMode mode,
             CycleComponents components = CycleComponents::both);
int peak_day(const HarmonicCoefficients& c, int days, ExtremumMode mode,
             CycleComponents components = CycleComponents::both);

/// Ordinary least-squares fit of the two-harmonic model to one year of data.
/// With `with_intercept` a constant column is estimated and reported
/// separately; the returned coefficients never include it.
struct HarmonicFit {
  HarmonicCoefficients coeffs;
  double intercept = 0.0;
  /// Residual sum of squares of the fit.
  double rss = 0.0;
};

HarmonicFit fit_harmonics(const Eigen::VectorXd& series, const DesignMatrix& design,
                          bool with_intercept);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double phi);

/// Map a day difference to the circular range [-period/2, period/2].
double wrap_day_difference(double diff, double period);

}  // namespace harmdstm
