#include "cvqkd/pulsephys.h"

#include <cmath>
#include <random>
#include <string>

#include "cvqkd/error.h"
#include "cvqkd/rng.h"

namespace cvqkd {

namespace {

constexpr double kPowerRelTol = 1e-6;

std::size_t samples_for(double span_ns, double dt) {
  return static_cast<std::size_t>(std::llround(span_ns / dt));
}

}  // namespace

Waveform::Waveform(std::vector<double> samples, double dt_ns, double t0_ns)
    : samples_(std::move(samples)), dt_(dt_ns), t0_(t0_ns) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InvalidInput("waveform: dt must be > 0");
  if (!std::isfinite(t0_)) throw InvalidInput("waveform: t0 must be finite");
  if (samples_.size() < 2) throw InvalidInput("waveform: need at least 2 samples");
  for (double s : samples_) {
    if (!std::isfinite(s) || s < 0.0)
      throw InvalidInput("waveform: samples must be finite and non-negative");
  }
}

Waveform Waveform::scaled(double factor) const {
  if (!(factor >= 0.0)) throw InvalidInput("waveform: scale factor must be >= 0");
  std::vector<double> out(samples_);
  for (double& s : out) s *= factor;
  return Waveform(std::move(out), dt_, t0_);
}

void TriggerConfig::validate() const {
  if (!(delay_ns >= 0.0)) throw InvalidInput("trigger: delay r must be >= 0");
  if (kind == TriggerKind::kThreshold && !(threshold > 0.0))
    throw InvalidInput("trigger: threshold must be > 0");
  if (kind == TriggerKind::kDifferential && !(pulse_duration_ns > 0.0))
    throw InvalidInput("trigger: pulse duration must be > 0");
}

void PowerMeterConfig::validate() const {
  if (!(window_ns > 0.0)) throw InvalidInput("power meter: window must be > 0");
  if (!(decay_base >= 1.0)) throw InvalidInput("power meter: decay base must be >= 1");
}

double discharge_tau_for_ratio(double delay_ns, double ratio) {
  if (!(delay_ns > 0.0) || !(ratio > 1.0))
    throw InvalidInput("discharge tau: need delay > 0 and ratio > 1");
  return 2.0 * delay_ns / std::log(ratio);
}

void DetectorModel::validate() const {
  if (!(window_ns > 0.0)) throw InvalidInput("detector: integration window must be > 0");
  if (!(tau_ns > 0.0)) throw InvalidInput("detector: tau must be > 0");
  if (!(slope_cal > 0.0)) throw InvalidInput("detector: calibrated slope must be > 0");
  if (!(v_el >= 0.0)) throw InvalidInput("detector: v_el must be >= 0");
}

double measure_power(const Waveform& w, const PowerMeterConfig& cfg) {
  cfg.validate();
  if (cfg.window_ns > w.duration() * (1.0 + 1e-12))
    throw InvalidInput("measure_power: window longer than waveform");
  const std::size_t count = std::max<std::size_t>(1, samples_for(cfg.window_ns, w.dt()));
  const auto& s = w.samples();
  const std::size_t n = s.size();
  // Weight decays with age: the newest sample has weight 1.
  const double step = std::pow(cfg.decay_base, -w.dt());
  double weight = 1.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    acc += s[n - 1 - j] * weight;
    weight *= step;
  }
  return acc * w.dt();
}

std::optional<double> trigger_time(const Waveform& w, const TriggerConfig& cfg) {
  cfg.validate();
  const auto& s = w.samples();
  if (cfg.kind == TriggerKind::kThreshold) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] > cfg.threshold) return w.time_at(i) + cfg.delay_ns;
    }
    return std::nullopt;
  }
  const std::size_t lag = std::max<std::size_t>(1, samples_for(cfg.pulse_duration_ns, w.dt()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double earlier = i >= lag ? s[i - lag] : 0.0;
    if (s[i] - earlier > 0.0) return w.time_at(i) + cfg.delay_ns;
  }
  return std::nullopt;
}

double detector_gain(double t_m_ns, const DetectorModel& det) {
  det.validate();
  if (!(t_m_ns > 0.0)) throw InvalidInput("detector_gain: measurement time must be > 0");
  if (t_m_ns <= det.window_ns) {
    const double r = t_m_ns / det.window_ns;
    return r * r;
  }
  return std::exp(-2.0 * (t_m_ns - det.window_ns) / det.tau_ns);
}

CalibrationLine fit_calibration_line(std::span<const CalibrationPoint> points) {
  const std::size_t n = points.size();
  if (n < 2) throw Degenerate("calibration fit: need at least 2 points");
  double mean_p = 0.0;
  double mean_v = 0.0;
  for (const auto& pt : points) {
    mean_p += pt.power;
    mean_v += pt.variance;
  }
  mean_p /= static_cast<double>(n);
  mean_v /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& pt : points) {
    const double dp = pt.power - mean_p;
    sxx += dp * dp;
    sxy += dp * (pt.variance - mean_v);
  }
  if (!(sxx > 0.0)) throw Degenerate("calibration fit: all powers identical");

  CalibrationLine line;
  line.slope = sxy / sxx;
  line.intercept = mean_v - line.slope * mean_p;
  if (n > 2) {
    double rss = 0.0;
    for (const auto& pt : points) {
      const double r = pt.variance - line.predict(pt.power);
      rss += r * r;
    }
    const double s2 = rss / static_cast<double>(n - 2);
    line.slope_stderr = std::sqrt(s2 / sxx);
    line.intercept_stderr =
        std::sqrt(s2 * (1.0 / static_cast<double>(n) + mean_p * mean_p / sxx));
  }
  return line;
}

std::vector<CalibrationPoint> simulate_calibration(const DetectorModel& det,
                                                   std::span<const double> powers,
                                                   std::size_t samples_per_point,
                                                   double trigger_delay_ns,
                                                   std::uint64_t seed) {
  det.validate();
  if (samples_per_point < 2) throw InvalidInput("calibration: need >= 2 samples per point");
  if (!(trigger_delay_ns >= 0.0)) throw InvalidInput("calibration: trigger delay must be >= 0");
  const double gain = detector_gain(det.window_ns + trigger_delay_ns, det);

  std::vector<CalibrationPoint> out;
  out.reserve(powers.size());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double p = powers[i];
    if (!(p >= 0.0)) throw InvalidInput("calibration: powers must be >= 0");
    Engine eng = make_engine(seed, Stream::kCalibration, i);
    std::normal_distribution<double> noise(0.0, std::sqrt(gain * (det.slope_cal * p + det.v_el)));
    double sum2 = 0.0;
    for (std::size_t k = 0; k < samples_per_point; ++k) {
      const double v = noise(eng);
      sum2 += v * v;
    }
    out.push_back({p, sum2 / static_cast<double>(samples_per_point)});
  }
  return out;
}

Waveform attenuate_leading_edge(const Waveform& w, double alpha, double edge_ns,
                                bool preserve_power, const PowerMeterConfig& pm) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("attenuate: alpha must be in [0,1]");
  if (!(edge_ns >= 0.0) || edge_ns > w.duration() * (1.0 + 1e-12))
    throw InvalidInput("attenuate: edge length must be within the waveform");

  const std::size_t n = w.size();
  const std::size_t edge = std::min(n, samples_for(edge_ns, w.dt()));
  std::vector<double> head(w.samples());
  std::vector<double> tail(n, 0.0);
  for (std::size_t i = edge; i < n; ++i) {
    tail[i] = head[i];
    head[i] = 0.0;
  }
  for (std::size_t i = 0; i < edge; ++i) head[i] *= alpha;

  double tail_factor = 1.0;
  if (preserve_power && alpha != 1.0) {
    const double target = measure_power(w, pm);
    const double p_head = measure_power(Waveform(head, w.dt(), w.t0()), pm);
    const double p_tail = measure_power(Waveform(tail, w.dt(), w.t0()), pm);
    if (!(p_tail > 0.0))
      throw Infeasible("attenuate: remaining pulse carries no power-meter weight");
    tail_factor = (target - p_head) / p_tail;
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = head[i] + tail_factor * tail[i];
  return Waveform(std::move(out), w.dt(), w.t0());
}

Waveform craft_equal_power_pulse(const Waveform& base, double shift_ns,
                                 const TriggerConfig& trig, const PowerMeterConfig& pm) {
  if (!(shift_ns >= 0.0)) throw InvalidInput("craft pulse: shift must be >= 0");
  trig.validate();
  pm.validate();
  if (shift_ns == 0.0) return base;

  const auto t_base = trigger_time(base, trig);
  if (!t_base) throw Infeasible("craft pulse: base waveform never triggers");
  const double p_base = measure_power(base, pm);

  const auto accept = [&](const Waveform& w) {
    const auto t = trigger_time(w, trig);
    if (!t || *t < *t_base + shift_ns) return false;
    return std::abs(measure_power(w, pm) - p_base) <= kPowerRelTol * std::abs(p_base);
  };

  // 0.05 alpha grid; alpha = 1 is the identity and never shifts the trigger.
  constexpr int kAlphaSteps = 20;
  for (std::size_t k = 1; k <= base.size(); ++k) {
    const double edge_ns = static_cast<double>(k) * base.dt();
    for (int a = kAlphaSteps - 1; a >= 0; --a) {
      const double alpha = 0.05 * a;
      Waveform candidate = base;
      try {
        candidate = attenuate_leading_edge(base, alpha, edge_ns, true, pm);
      } catch (const Infeasible&) {
        continue;
      }
      if (accept(candidate)) return candidate;
    }
  }
  throw Infeasible("craft pulse: no power-preserving shaping delays the trigger by " +
                   std::to_string(shift_ns) + " ns");
}

Waveform make_trapezoid_pulse(double dt_ns, double pad_ns, double rise_ns, double flat_ns,
                              double fall_ns, double amplitude) {
  if (!(dt_ns > 0.0) || pad_ns < 0.0 || rise_ns < 0.0 || flat_ns < 0.0 || fall_ns < 0.0 ||
      !(amplitude > 0.0))
    throw InvalidInput("trapezoid: invalid shape parameters");
  const double total = 2.0 * pad_ns + rise_ns + flat_ns + fall_ns;
  const std::size_t n = std::max<std::size_t>(2, samples_for(total, dt_ns));
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt_ns - pad_ns;
    double v = 0.0;
    if (t < 0.0) {
      v = 0.0;
    } else if (t < rise_ns) {
      v = t / rise_ns;
    } else if (t < rise_ns + flat_ns) {
      v = 1.0;
    } else if (t < rise_ns + flat_ns + fall_ns) {
      v = 1.0 - (t - rise_ns - flat_ns) / fall_ns;
    }
    s[i] = amplitude * v;
  }
  return Waveform(std::move(s), dt_ns, 0.0);
}

}  // namespace cvqkd
