// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cvqkd/keyrate.h"
#include "cvqkd/paramest.h"
#include "cvqkd/pulsephys.h"
#include "cvqkd/qkdsim.h"
#include "cvqkd/rng.h"
#include "cvqkd/scenario.h"
#include "cvqkd/waveform_csv.h"

using namespace cvqkd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Quantitative example of the attack: T = eta = 0.5, xi = 0.1 SNU, no electronic noise.
ScenarioConfig example(double mu, double nu, double delay_ns, std::uint64_t seed) {
  ScenarioConfig c;
  c.channel = ChannelParams{4.0, 0.5, 0.5, 0.1, 0.0, 1.0};
  c.attack.mu = mu;
  c.attack.nu = nu;
  c.attack.delay_ns = delay_ns;
  c.pulses = 2'000'000;  // m = 1e6 estimation pulses
  c.seed = seed;
  return c;
}

Outcome ac1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();

  const double pir = xi_pir(0.1, 1.0);
  o.require(std::abs(pir - 2.1) <= 1e-12, fmt("xi_pir formula %.12g", pir));

  const auto r_pir = run_scenario(example(1.0, 0.0, 0.0, 101));
  const auto& e = r_pir.estimation;
  o.require(std::abs(e.xi_hat - 2.1) <= 5.0 * e.xi_stderr,
            fmt("MC xi_pir %.4f (SE %.4f, m=%.0f)", e.xi_hat, e.xi_stderr, double(e.estimates.m)));

  const double ratio = 1.0 / detector_gain(DetectorModel{}.window_ns + 10.0, DetectorModel{});
  const double biased = xi_under_calibration(pir, ratio, 0.25);
  o.require(std::abs(biased - 0.1 / 1.5) <= 1e-12 && std::round(biased * 1e4) / 1e4 == 0.0667,
            fmt("biased formula %.6f (N0'/N0 = %.6f)", biased, ratio));

  const auto r_cal = run_scenario(example(1.0, 1.0, 10.0, 102));
  const double se = r_cal.estimation.xi_stderr * r_cal.shot_noise.n0_true / r_cal.shot_noise.n0_line;
  o.require(std::abs(r_cal.xi_hat_n0p - biased) <= 5.0 * se, fmt("MC biased %.4f (SE %.4f)", r_cal.xi_hat_n0p, se));

  const double dt = seconds_since(t0);
  o.require(dt < 30.0, fmt("%.1f s", dt));
  return o;
}

Outcome ac2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = SweepConfig::defaults();
  const auto a = sweep_keyrate(cfg);
  const auto b = sweep_keyrate(cfg);
  const double d0 = a.max_distance_baseline.value_or(-1.0);
  const double d1 = a.max_distance_countermeasure.value_or(-1.0);
  o.require(std::abs(d0 - 80.0) <= 5.0, fmt("no countermeasure %.1f km", d0));
  o.require(std::abs(d1 - 70.0) <= 5.0, fmt("countermeasure %.1f km", d1));
  o.require(std::abs(d0 - d1 - 10.0) <= 3.0, fmt("gap %.1f km", d0 - d1));

  std::ostringstream sa, sb;
  write_sweep_csv(sa, a.baseline);
  write_sweep_csv(sa, a.countermeasure);
  write_sweep_csv(sb, b.baseline);
  write_sweep_csv(sb, b.countermeasure);
  o.require(sa.str() == sb.str() && a.max_distance_baseline == b.max_distance_baseline &&
                a.max_distance_countermeasure == b.max_distance_countermeasure,
            "deterministic");
  const double dt = seconds_since(t0);
  o.require(dt < 5.0, fmt("%.2f s", dt));
  return o;
}

Outcome ac3() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const LinkModel link;
  const SweepSettings fig5;
  std::size_t evaluated = 0, positive = 0;
  double worst = -INFINITY;
  for (double xi : {2.0, 2.1, 2.5, 3.0, 5.0}) {
    for (int d = 0; d <= 200; ++d) {
      const double T = link.transmittance(d);
      std::vector<double> vas{0.5, 2.0, 4.0, 10.0, 40.0};
      vas.push_back(va_for_snr(fig5.snr_target, T, fig5.eta, xi, fig5.v_el));
      for (double va : vas) {
        const double k = secret_key_rate({va, T, fig5.eta, xi, fig5.v_el, fig5.beta}).k;
        ++evaluated;
        positive += k < 0.0 ? 0 : 1;
        worst = std::max(worst, k);
      }
    }
  }
  o.require(positive == 0, fmt("%.0f grid points, max K = %.3g", double(evaluated), worst));
  const double dt = seconds_since(t0);
  o.require(dt < 5.0, fmt("%.2f s", dt));
  return o;
}

Outcome ac4() {
  Outcome o;
  const std::size_t m = 10'000;
  const int trials = 1000;
  const double eps = 0.05;
  ChannelParams ch{4.0, 0.5, 0.5, 0.1, 0.01, 1.0};
  DetectorModel det;
  det.v_el = ch.v_el;
  const double t = std::sqrt(ch.gain());
  const double sigma2 = ch.noise_variance();

  double chi_sum = 0.0, t_sum = 0.0, t_sq = 0.0, var_t_model = 0.0;
  int cover_t = 0, cover_s = 0, cover_v = 0;
  for (int k = 0; k < trials; ++k) {
    const std::uint64_t seed = derive_seed(400, Stream::kTrial, k);
    const auto x = generate_alice(m, ch.va, seed);
    const auto rec = simulate_bob(x, ch, {}, det, seed);
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = rec[i].y;
    const auto e = ml_estimate(x, y);
    const auto b = confidence_bounds(e, eps);
    chi_sum += static_cast<double>(m) * e.sigma2_hat / sigma2;
    t_sum += e.t_hat;
    t_sq += e.t_hat * e.t_hat;
    var_t_model += sigma2 / e.sum_x2;
    cover_t += b.t.contains(t);
    cover_s += b.sigma2.contains(sigma2);
    cover_v += b.va.contains(ch.va);
  }
  const double n = trials;
  const double dof = static_cast<double>(m - 1);
  const double chi_mean = chi_sum / n;
  o.require(std::abs(chi_mean - dof) <= 4.0 * std::sqrt(2.0 * dof / n),
            fmt("mean m*s2/sigma2 = %.1f vs %.0f", chi_mean, dof));
  const double t_var = (t_sq - t_sum * t_sum / n) / (n - 1.0);
  const double t_model = var_t_model / n;
  o.require(std::abs(t_var / t_model - 1.0) <= 0.10, fmt("var(t_hat)/model = %.3f", t_var / t_model));
  const double sd = std::sqrt(eps * (1.0 - eps) / n);
  for (auto [name, hits] : {std::pair{"t", cover_t}, std::pair{"sigma2", cover_s}, std::pair{"V_A", cover_v}}) {
    const double c = hits / n;
    o.require(std::abs(c - (1.0 - eps)) <= 3.0 * sd, std::string("coverage ") + name + fmt(" %.3f", c));
  }
  return o;
}

Outcome ac5() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Waveform ref = reference_lo_pulse();
  TriggerConfig u1;
  PowerMeterConfig pm{ref.duration(), 1.01};
  const auto demo = make_pulse_demo(10.0, u1, pm);

  // Measure the waveforms as written to CSV, not the in-memory objects.
  std::stringstream a, b;
  write_waveform_csv(a, demo.base);
  write_waveform_csv(b, demo.shaped);
  const Waveform base = read_waveform_csv(a);
  const Waveform shaped = read_waveform_csv(b);
  const double p0 = measure_power(base, pm), p1 = measure_power(shaped, pm);
  const auto t_base = trigger_time(base, u1), t_shaped = trigger_time(shaped, u1);
  const double rel = std::abs(p1 - p0) / p0;
  o.require(rel <= 1e-6, fmt("power rel diff %.2e", rel));
  o.require(t_base && t_shaped && *t_shaped - *t_base >= 10.0,
            fmt("U1 triggers %.1f ns -> %.1f ns", t_base.value_or(NAN), t_shaped.value_or(NAN)));
  const double dt = seconds_since(t0);
  o.require(dt < 5.0, fmt("%.3f s", dt));
  return o;
}

Outcome ac6() {
  Outcome o;
  const DetectorModel det;
  const double g = detector_gain(det.window_ns + 10.0, det);
  o.require(std::abs(g - 1.0 / 1.5) <= 1e-12, fmt("g(D+10) = %.12f", g));
  const auto cal = make_calibration_demo(det, 1000, 10'000, 10.0, 600);
  o.require(std::abs(cal.slope_ratio - 0.667) <= 0.01, fmt("slope ratio %.4f over %.0f points", cal.slope_ratio,
                                                            double(cal.nominal.size())));
  return o;
}

Outcome ac7() {
  Outcome o;
  const int trials = 1000;
  // N = 1e5 with 10% monitoring gives about 1e4 monitoring pulses per trial.
  const auto config = [](double mu, double nu, double delay, std::uint64_t seed) {
    auto c = example(mu, nu, delay, seed);
    c.pulses = 100'000;
    c.countermeasure = CountermeasureConfig{0.1, SwitchModel{2.7, 0.0}, 5.0};
    return c;
  };
  int alarms = 0, aborted = 0, false_alarms = 0;
  double stat_min = INFINITY, stat_max_quiet = -INFINITY;
  for (int k = 0; k < trials; ++k) {
    const auto hit = run_scenario(config(1.0, 1.0, 10.0, derive_seed(700, Stream::kTrial, k)));
    alarms += hit.shot_noise.decision->alarm;
    aborted += hit.key_rate.verdict == Verdict::kAbort;
    stat_min = std::min(stat_min, hit.shot_noise.decision->statistic);

    const auto quiet = run_scenario(config(0.0, 0.0, 0.0, derive_seed(701, Stream::kTrial, k)));
    false_alarms += quiet.shot_noise.decision->alarm;
    stat_max_quiet = std::max(stat_max_quiet, quiet.shot_noise.decision->statistic);
  }
  const double rate = alarms / double(trials);
  const double fa = false_alarms / double(trials);
  o.require(rate >= 0.999, fmt("alarm rate %.3f (min statistic %.1f)", rate, stat_min));
  o.require(aborted == trials, fmt("aborted %.0f/1000", double(aborted)));
  o.require(fa <= 1e-3, fmt("false-alarm rate %.3f (max statistic %.2f)", fa, stat_max_quiet));
  return o;
}

Outcome ac8() {
  Outcome o;
  std::mt19937_64 eng(derive_seed(800, Stream::kTrial));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const DetectorModel det;
  int ok = 0;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double mu = unit(eng), nu = unit(eng), delay = 10.0 * unit(eng);
    auto c = example(mu, nu, delay, derive_seed(801, Stream::kTrial, k));
    c.channel.va = 2.0;
    const auto r = run_scenario(c);
    const double ratio = r.shot_noise.n0_line / r.shot_noise.n0_true;
    const double predicted = xi_under_calibration(xi_pir(c.channel.xi, mu), ratio, c.channel.gain());
    const double se = r.estimation.xi_stderr / ratio;
    const double z = std::abs(r.xi_hat_n0p - predicted) / se;
    worst = std::max(worst, z);
    ok += z <= 5.0;
  }
  o.require(ok == 20, fmt("%.0f/20 configs within 5 SE (worst %.2f SE)", double(ok), worst));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 quantitative example", ac1},   {"AC2 max secure distance", ac2},
      {"AC3 entanglement breaking", ac3},  {"AC4 estimator distributions", ac4},
      {"AC5 equal-power pulses", ac5},     {"AC6 detector gain anchor", ac6},
      {"AC7 countermeasure efficacy", ac7}, {"AC8 closure", ac8},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
