#include "cvqkd/countermeasure.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cvqkd/error.h"
#include "cvqkd/rng.h"

namespace cvqkd {

std::size_t MonitorPlan::count() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void SwitchModel::validate() const {
  if (!(loss_db >= 0.0)) throw InvalidInput("switch: loss must be >= 0 dB");
  if (!(extinction >= 0.0 && extinction < 1.0))
    throw InvalidInput("switch: extinction ratio must be in [0,1)");
}

MonitorPlan plan_monitor(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw InvalidInput("plan_monitor: fraction must be in [0,1]");
  MonitorPlan plan{std::vector<std::uint8_t>(n, 0), fraction};
  for_each_block(n, 1, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Engine eng = make_engine(seed, Stream::kMonitor, b);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t i = begin; i < end; ++i) plan.mask[i] = uniform(eng) < fraction ? 1 : 0;
  });
  return plan;
}

ShotNoiseEstimate realtime_shot_noise(double var_open, double var_closed, double extinction,
                                      double v_el) {
  if (extinction == 1.0) throw Degenerate("realtime_shot_noise: extinction 1 makes the system singular");
  const double s = (var_open - var_closed) / (1.0 - extinction);
  return {var_closed - extinction * s - v_el, s, 0, 0};
}

ShotNoiseEstimate realtime_shot_noise(std::span<const double> y_open,
                                      std::span<const double> y_closed, double extinction,
                                      double v_el) {
  if (y_open.size() < 2 || y_closed.size() < 2)
    throw InvalidInput("realtime_shot_noise: need at least 2 samples in each set");
  const auto mean_sq = [](std::span<const double> v) {
    double acc = 0.0;
    for (double a : v) acc += a * a;
    return acc / static_cast<double>(v.size());
  };
  auto est = realtime_shot_noise(mean_sq(y_open), mean_sq(y_closed), extinction, v_el);
  est.m_open = y_open.size();
  est.m_closed = y_closed.size();
  return est;
}

SecondDetectorEstimate second_hd_shot_noise(double var_hd2, double kappa, double v_el2) {
  if (!(kappa > 0.0)) throw InvalidInput("second_hd_shot_noise: kappa must be > 0");
  return {kappa * (var_hd2 - v_el2), var_hd2 < v_el2};
}

double effective_eta(double eta, double loss_db) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("effective_eta: eta must be in (0,1]");
  if (!(loss_db >= 0.0)) throw InvalidInput("effective_eta: loss must be >= 0 dB");
  return eta * std::pow(10.0, -loss_db / 10.0);
}

AttackDecision detect_attack(double n0_rt, double n0_line, std::size_t m_monitor,
                             double z_threshold) {
  if (m_monitor < 2) throw InvalidInput("detect_attack: need at least 2 monitoring pulses");
  const double se = std::abs(n0_rt) * std::sqrt(2.0 / static_cast<double>(m_monitor));
  double stat = 0.0;
  if (se > 0.0) {
    stat = (n0_line - n0_rt) / se;
  } else if (n0_line != n0_rt) {
    stat = n0_line > n0_rt ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
  }
  return {stat > z_threshold, stat};
}

}  // namespace cvqkd
