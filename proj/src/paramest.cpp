#include "cvqkd/paramest.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "cvqkd/error.h"

namespace cvqkd {

namespace {

double normal_upper_quantile(double tail) {
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<>(), tail));
}

// Returns (q_{eps/2}, q_{1-eps/2}) of chi^2(dof).
std::pair<double, double> chi2_quantiles(double dof, double epsilon, bool approximate) {
  if (approximate) {
    const double z = normal_upper_quantile(epsilon / 2.0);
    const double sd = std::sqrt(2.0 * dof);
    return {dof - z * sd, dof + z * sd};
  }
  boost::math::chi_squared_distribution<> chi2(dof);
  return {boost::math::quantile(chi2, epsilon / 2.0),
          boost::math::quantile(boost::math::complement(chi2, epsilon / 2.0))};
}

// Interval for a variance s2 with m*s2/true ~ chi^2(m-1). Widened to contain
// the point estimate when epsilon is large enough to exclude it.
Interval variance_interval(double s2, std::size_t m, double epsilon) {
  const double dof = static_cast<double>(m - 1);
  const auto [q_lo, q_hi] = chi2_quantiles(dof, epsilon, m > kChi2NormalApproxAbove);
  const double scaled = static_cast<double>(m) * s2;
  Interval iv{scaled / q_hi, q_lo > 0.0 ? scaled / q_lo : std::numeric_limits<double>::infinity()};
  iv.low = std::min(iv.low, s2);
  iv.high = std::max(iv.high, s2);
  return iv;
}

bool off_center(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  double sum2 = 0.0;
  for (double a : v) {
    sum += a;
    sum2 += a * a;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  if (var == 0.0) return mean != 0.0;
  return std::abs(mean) > 5.0 * std::sqrt(var / n);
}

}  // namespace

MlEstimates ml_estimate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("ml_estimate: x and y lengths differ");
  if (x.size() < 2) throw InvalidInput("ml_estimate: need at least 2 samples");
  MlEstimates e;
  e.m = x.size();
  double sxy = 0.0;
  for (std::size_t i = 0; i < e.m; ++i) {
    e.sum_x2 += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (!(e.sum_x2 > 0.0)) throw Degenerate("ml_estimate: sum of x^2 is zero");
  e.t_hat = sxy / e.sum_x2;
  double rss = 0.0;
  for (std::size_t i = 0; i < e.m; ++i) {
    const double r = y[i] - e.t_hat * x[i];
    rss += r * r;
  }
  const double md = static_cast<double>(e.m);
  e.sigma2_hat = rss / md;
  e.va_hat = e.sum_x2 / md;
  e.x_off_center = off_center(x);
  e.y_off_center = off_center(y);
  return e;
}

ConfidenceBounds confidence_bounds(const MlEstimates& est, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("confidence_bounds: epsilon must be in (0,1)");
  if (est.m < 2) throw InvalidInput("confidence_bounds: need m >= 2");
  ConfidenceBounds b;
  const double half = normal_upper_quantile(epsilon / 2.0) * std::sqrt(est.sigma2_hat / est.sum_x2);
  b.t = {est.t_hat - half, est.t_hat + half};
  b.sigma2 = variance_interval(est.sigma2_hat, est.m, epsilon);
  b.va = variance_interval(est.va_hat, est.m, epsilon);
  return b;
}

ChannelInference infer_channel(const MlEstimates& est, double n0_assumed, double eta, double v_el) {
  if (!(eta > 0.0)) throw InvalidInput("infer_channel: eta must be > 0");
  if (est.t_hat == 0.0) throw Degenerate("infer_channel: t_hat = 0, excess noise undefined");
  const double t2 = est.t_hat * est.t_hat;
  return {t2 / eta, (est.sigma2_hat - n0_assumed - v_el) / t2};
}

double xi_standard_error(const MlEstimates& est, double n0_assumed, double v_el) {
  if (est.t_hat == 0.0) throw Degenerate("xi_standard_error: t_hat = 0");
  const double m = static_cast<double>(est.m);
  const double t2 = est.t_hat * est.t_hat;
  const double var_sigma2 = 2.0 * est.sigma2_hat * est.sigma2_hat / m;
  const double var_t = est.sigma2_hat / est.sum_x2;
  const double dxi_dt = -2.0 * (est.sigma2_hat - n0_assumed - v_el) / (t2 * est.t_hat);
  return std::sqrt(var_sigma2 / (t2 * t2) + dxi_dt * dxi_dt * var_t);
}

EstimationReport estimate(std::span<const double> x, std::span<const double> y, double n0_assumed,
                          double eta, double v_el, double epsilon) {
  EstimationReport r;
  r.estimates = ml_estimate(x, y);
  const auto ch = infer_channel(r.estimates, n0_assumed, eta, v_el);
  r.T_hat = ch.T_hat;
  r.xi_hat = ch.xi_hat;
  r.xi_stderr = xi_standard_error(r.estimates, n0_assumed, v_el);
  r.intervals = confidence_bounds(r.estimates, epsilon);
  r.epsilon = epsilon;
  r.n0_assumed = n0_assumed;
  return r;
}

double xi_under_calibration(double xi_true_snu, double n0_ratio, double t2) {
  if (!(n0_ratio > 0.0)) throw InvalidInput("xi_under_calibration: N0'/N0 must be > 0");
  if (!(t2 > 0.0)) throw InvalidInput("xi_under_calibration: t^2 must be > 0");
  return (xi_true_snu + (1.0 - n0_ratio) / t2) / n0_ratio;
}

double xi_pir(double xi_snu, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidInput("xi_pir: mu must be in [0,1]");
  return xi_snu + 2.0 * mu;
}

void write_key_values(std::ostream& os, const EstimationReport& r, const std::string& prefix) {
  const auto& e = r.estimates;
  const auto prec = os.precision(17);
  os << prefix << "m=" << e.m << '\n'
     << prefix << "t_hat=" << e.t_hat << '\n'
     << prefix << "sigma2_hat=" << e.sigma2_hat << '\n'
     << prefix << "va_hat=" << e.va_hat << '\n'
     << prefix << "T_hat=" << r.T_hat << '\n'
     << prefix << "xi_hat=" << r.xi_hat << '\n'
     << prefix << "xi_stderr=" << r.xi_stderr << '\n'
     << prefix << "n0_assumed=" << r.n0_assumed << '\n'
     << prefix << "epsilon=" << r.epsilon << '\n'
     << prefix << "t_low=" << r.intervals.t.low << '\n'
     << prefix << "t_high=" << r.intervals.t.high << '\n'
     << prefix << "sigma2_low=" << r.intervals.sigma2.low << '\n'
     << prefix << "sigma2_high=" << r.intervals.sigma2.high << '\n'
     << prefix << "va_low=" << r.intervals.va.low << '\n'
     << prefix << "va_high=" << r.intervals.va.high << '\n'
     << prefix << "x_off_center=" << (e.x_off_center ? 1 : 0) << '\n'
     << prefix << "y_off_center=" << (e.y_off_center ? 1 : 0) << '\n';
  os.precision(prec);
}

std::string estimation_csv_header() {
  return "m,t_hat,sigma2_hat,va_hat,T_hat,xi_hat,xi_stderr,n0_assumed,epsilon,"
         "t_low,t_high,sigma2_low,sigma2_high,va_low,va_high";
}

std::string estimation_csv_row(const EstimationReport& r) {
  std::ostringstream os;
  os.precision(17);
  const auto& e = r.estimates;
  const auto& iv = r.intervals;
  os << e.m << ',' << e.t_hat << ',' << e.sigma2_hat << ',' << e.va_hat << ',' << r.T_hat << ','
     << r.xi_hat << ',' << r.xi_stderr << ',' << r.n0_assumed << ',' << r.epsilon << ','
     << iv.t.low << ',' << iv.t.high << ',' << iv.sigma2.low << ',' << iv.sigma2.high << ','
     << iv.va.low << ',' << iv.va.high;
  return os.str();
}

}  // namespace cvqkd
