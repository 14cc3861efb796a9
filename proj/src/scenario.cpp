#include "cvqkd/scenario.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cvqkd/config.h"
#include "cvqkd/error.h"
#include "cvqkd/rng.h"

namespace cvqkd {

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// Key rate for a parameter set that may come from noisy estimates: T_hat is
// capped at 1, and an unphysical covariance matrix yields NaN (no key).
KeyRateBreakdown guarded_key_rate(KeyRateParams p) {
  p.transmittance = std::clamp(p.transmittance, 0.0, 1.0);
  try {
    return secret_key_rate(p);
  } catch (const NumericalDomain&) {
    KeyRateBreakdown nan;
    nan.k = std::numeric_limits<double>::quiet_NaN();
    return nan;
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  channel.validate();
  attack.validate();
  detector.validate();
  if (detector.v_el != channel.v_el) throw InvalidInput("detector and channel v_el differ");
  if (shaping.edge_ns > 0.0) {
    shaping.trigger.validate();
    shaping.power_meter.validate();
  }
  if (countermeasure) {
    countermeasure->switch_model.validate();
    if (!(countermeasure->fraction > 0.0 && countermeasure->fraction < 1.0))
      throw InvalidInput("countermeasure fraction must be in (0,1)");
    if (!(countermeasure->z_threshold > 0.0)) throw InvalidInput("z threshold must be > 0");
  }
  if (!(key_fraction > 0.0 && key_fraction < 1.0)) throw InvalidInput("key_fraction must be in (0,1)");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("beta must be in (0,1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must be in (0,1)");
  if (!(lo_power > 0.0)) throw InvalidInput("lo_power must be > 0");
  if (threads < 1) throw InvalidInput("threads must be >= 1");
  // 0 < n < N with at least two estimation pulses.
  const double usable = static_cast<double>(pulses) * (countermeasure ? 1.0 - countermeasure->fraction : 1.0);
  const double n = std::round(key_fraction * usable);
  if (!(n >= 1.0) || !(usable - n >= 2.0))
    throw InvalidInput("pulses too few for the key/estimation split");
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::kSecure:
      return "secure";
    case Verdict::kAbort:
      return "abort";
    case Verdict::kBreached:
      return "breached";
  }
  return "abort";
}

int exit_code(Verdict v) noexcept {
  switch (v) {
    case Verdict::kSecure:
      return 0;
    case Verdict::kAbort:
      return 2;
    case Verdict::kBreached:
      return 3;
  }
  return 1;
}

ScenarioReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  stage("config", [&] { cfg.validate(); });

  ScenarioReport rep;
  rep.seed = cfg.seed;
  rep.config_hash = config_hash(cfg);

  const AttackParams atk = stage("attack", [&] {
    if (cfg.shaping.edge_ns > 0.0)
      return with_pulse_delay(cfg.attack, reference_lo_pulse(), cfg.shaping.edge_ns, cfg.shaping.trigger,
                              cfg.shaping.power_meter);
    return cfg.attack;
  });
  rep.attack_delay_ns = atk.delay_ns;

  ChannelParams ch = cfg.channel;
  MonitorPlan plan;
  if (cfg.countermeasure) {
    stage("monitor", [&] {
      plan = plan_monitor(cfg.pulses, cfg.countermeasure->fraction, cfg.seed);
      ch.efficiency = effective_eta(ch.efficiency, cfg.countermeasure->switch_model.loss_db);
    });
  }
  rep.eta_run = ch.efficiency;

  const auto x = stage("alice", [&] { return generate_alice(cfg.pulses, ch.va, cfg.seed, cfg.threads); });
  auto records = stage("bob", [&] {
    SimOptions so;
    so.threads = cfg.threads;
    so.monitor.mask = plan.mask;
    if (cfg.countermeasure) so.monitor.extinction = cfg.countermeasure->switch_model.extinction;
    return simulate_bob(x, ch, atk, cfg.detector, cfg.seed, so);
  });

  // Random key/estimation split over the non-monitoring pulses.
  std::vector<double> x_est;
  std::vector<double> y_est;
  std::vector<double> y_closed;
  stage("partition", [&] {
    std::vector<std::size_t> usable;
    usable.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].monitored) {
        y_closed.push_back(records[i].y);
      } else {
        usable.push_back(i);
      }
    }
    const auto n_key = static_cast<std::size_t>(std::llround(cfg.key_fraction * static_cast<double>(usable.size())));
    if (n_key < 1 || usable.size() - n_key < 2) throw InvalidInput("too few usable pulses for the split");
    Engine eng = make_engine(cfg.seed, Stream::kPartition);
    std::vector<std::uint8_t> is_key(records.size(), 0);
    // Partial Fisher-Yates: the first n_key entries become the key set.
    for (std::size_t i = 0; i < n_key; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, usable.size() - 1);
      std::swap(usable[i], usable[pick(eng)]);
      is_key[usable[i]] = 1;
    }
    rep.key_pulses = n_key;
    x_est.reserve(usable.size() - n_key);
    y_est.reserve(usable.size() - n_key);
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!records[i].monitored && !is_key[i]) {
        x_est.push_back(records[i].x);
        y_est.push_back(records[i].y);
      }
    }
  });

  const CalibrationLine line{cfg.detector.slope_cal, cfg.detector.v_el};
  rep.shot_noise.n0_line = line.shot_noise(cfg.lo_power);
  rep.shot_noise.n0_true = population_moments(ch, atk, cfg.detector).mean_gain * ch.n0;

  double n0_assumed = rep.shot_noise.n0_line;
  if (cfg.countermeasure) {
    stage("countermeasure", [&] {
      const auto& cm = *cfg.countermeasure;
      const auto rt = realtime_shot_noise(y_est, y_closed, cm.switch_model.extinction, ch.v_el);
      rep.shot_noise.realtime = rt;
      rep.shot_noise.decision = detect_attack(rt.n0_rt, rep.shot_noise.n0_line, rt.m_closed, cm.z_threshold);
      n0_assumed = rt.n0_rt;
    });
  }

  rep.estimation = stage("estimate", [&] {
    return estimate(x_est, y_est, n0_assumed, ch.efficiency, ch.v_el, cfg.epsilon);
  });
  rep.xi_hat_n0p = rep.estimation.xi_hat * rep.shot_noise.n0_true / n0_assumed;

  stage("keyrate", [&] {
    auto& kr = rep.key_rate;
    const double keep = cfg.countermeasure ? 1.0 - cfg.countermeasure->fraction : 1.0;
    const auto& est = rep.estimation;
    kr.estimated = guarded_key_rate({est.estimates.va_hat, est.T_hat, ch.efficiency, est.xi_hat, ch.v_el, cfg.beta});
    kr.ground_truth = guarded_key_rate({ch.va, ch.transmittance, ch.efficiency,
                                        xi_pir(ch.xi, atk.mu) * ch.n0, ch.v_el, cfg.beta});
    kr.k_estimated = kr.estimated.k * keep;
    kr.k_true = kr.ground_truth.k * keep;

    const bool alarm = rep.shot_noise.decision && rep.shot_noise.decision->alarm;
    if (alarm || !(kr.k_estimated > 0.0)) {
      kr.verdict = Verdict::kAbort;
    } else if (!(kr.k_true > 0.0)) {
      kr.verdict = Verdict::kBreached;
    } else {
      kr.verdict = Verdict::kSecure;
    }
  });

  if (opts.keep_records) rep.records = std::move(records);
  return rep;
}

void write_report(std::ostream& os, const ScenarioReport& r) {
  const auto prec = os.precision(17);
  os << "seed=" << r.seed << '\n';
  os << "config_hash=" << std::hex << std::setw(16) << std::setfill('0') << r.config_hash << std::dec
     << std::setfill(' ') << '\n';
  os << "attack_delay_ns=" << r.attack_delay_ns << '\n';
  os << "eta_run=" << r.eta_run << '\n';
  os << "key_pulses=" << r.key_pulses << '\n';
  write_key_values(os, r.estimation);
  os << "xi_hat_n0p=" << r.xi_hat_n0p << '\n';
  os << "n0_line=" << r.shot_noise.n0_line << '\n';
  os << "n0_true=" << r.shot_noise.n0_true << '\n';
  if (r.shot_noise.realtime) {
    os << "n0_rt=" << r.shot_noise.realtime->n0_rt << '\n';
    os << "s_rt=" << r.shot_noise.realtime->s_rt << '\n';
    os << "m_closed=" << r.shot_noise.realtime->m_closed << '\n';
  }
  if (r.shot_noise.decision) {
    os << "alarm=" << (r.shot_noise.decision->alarm ? 1 : 0) << '\n';
    os << "statistic=" << r.shot_noise.decision->statistic << '\n';
  }
  os << "i_ab=" << r.key_rate.estimated.i_ab << '\n';
  os << "chi_be=" << r.key_rate.estimated.chi_be << '\n';
  os << "K=" << r.key_rate.k_estimated << '\n';
  os << "K_true=" << r.key_rate.k_true << '\n';
  os << "verdict=" << to_string(r.key_rate.verdict) << '\n';
  os.precision(prec);
}

std::string report_csv_header() {
  return "seed," + estimation_csv_header() +
         ",xi_hat_n0p,n0_line,n0_true,n0_rt,alarm,statistic,K,K_true,verdict";
}

std::string report_csv_row(const ScenarioReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.seed << ',' << estimation_csv_row(r.estimation) << ',' << r.xi_hat_n0p << ','
     << r.shot_noise.n0_line << ',' << r.shot_noise.n0_true << ',';
  if (r.shot_noise.realtime) os << r.shot_noise.realtime->n0_rt;
  os << ',';
  if (r.shot_noise.decision) os << (r.shot_noise.decision->alarm ? 1 : 0);
  os << ',';
  if (r.shot_noise.decision) os << r.shot_noise.decision->statistic;
  os << ',' << r.key_rate.k_estimated << ',' << r.key_rate.k_true << ',' << to_string(r.key_rate.verdict);
  return os.str();
}

Waveform reference_lo_pulse() { return make_trapezoid_pulse(1.0, 20.0, 10.0, 80.0, 10.0); }

PulseDemo make_pulse_demo(double shift_ns, const TriggerConfig& trig, const PowerMeterConfig& pm) {
  PulseDemo d{reference_lo_pulse(), reference_lo_pulse()};
  d.shaped = craft_equal_power_pulse(d.base, shift_ns, trig, pm);
  d.power_base = measure_power(d.base, pm);
  d.power_shaped = measure_power(d.shaped, pm);
  d.trigger_base = trigger_time(d.base, trig).value();
  d.trigger_shaped = trigger_time(d.shaped, trig).value();
  return d;
}

CalibrationDemo make_calibration_demo(const DetectorModel& det, std::size_t points,
                                      std::size_t samples_per_point, double delay_ns,
                                      std::uint64_t seed) {
  if (points < 3) throw InvalidInput("calibration demo: need at least 3 points");
  std::vector<double> powers(points);
  for (std::size_t i = 0; i < points; ++i)
    powers[i] = 0.05 + 1.95 * static_cast<double>(i) / static_cast<double>(points - 1);
  CalibrationDemo d;
  d.nominal = simulate_calibration(det, powers, samples_per_point, 0.0, derive_seed(seed, Stream::kCalibration, 0));
  d.delayed = simulate_calibration(det, powers, samples_per_point, delay_ns, derive_seed(seed, Stream::kCalibration, 1));
  d.nominal_line = fit_calibration_line(d.nominal);
  d.delayed_line = fit_calibration_line(d.delayed);
  d.slope_ratio = d.delayed_line.slope / d.nominal_line.slope;
  return d;
}

SweepConfig SweepConfig::defaults() {
  SweepConfig c;
  c.baseline = SweepSettings{};
  c.countermeasure = SweepSettings{};
  c.countermeasure.monitor_fraction = 0.1;
  c.countermeasure.switch_model = SwitchModel{2.7, 0.0};
  return c;
}

SweepResult sweep_keyrate(const SweepConfig& cfg) {
  SweepResult r;
  r.baseline = sweep_distance(cfg.baseline, cfg.d_max_km, cfg.step_km);
  r.countermeasure = sweep_distance(cfg.countermeasure, cfg.d_max_km, cfg.step_km);
  r.max_distance_baseline = max_secure_distance(cfg.baseline);
  r.max_distance_countermeasure = max_secure_distance(cfg.countermeasure);
  return r;
}

}  // namespace cvqkd
