#include "cvqkd/qkdsim.h"

#include <cmath>
#include <ostream>
#include <random>

#include "cvqkd/error.h"
#include "cvqkd/rng.h"

namespace cvqkd {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void ChannelParams::validate() const {
  if (!(va >= 0.0)) throw InvalidInput("channel: V_A must be >= 0");
  if (!in_unit(transmittance)) throw InvalidInput("channel: T must be in [0,1]");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidInput("channel: eta must be in (0,1]");
  if (!(xi >= 0.0)) throw InvalidInput("channel: xi must be >= 0");
  if (!(v_el >= 0.0)) throw InvalidInput("channel: v_el must be >= 0");
  if (!(n0 > 0.0)) throw InvalidInput("channel: N0 must be > 0");
}

void AttackParams::validate() const {
  if (!in_unit(mu)) throw InvalidInput("attack: mu must be in [0,1]");
  if (!in_unit(nu)) throw InvalidInput("attack: nu must be in [0,1]");
  if (!in_unit(alpha)) throw InvalidInput("attack: alpha must be in [0,1]");
  if (!(delay_ns >= 0.0)) throw InvalidInput("attack: delay must be >= 0");
}

std::vector<double> generate_alice(std::size_t n, double va, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw InvalidInput("generate_alice: n must be >= 1");
  if (!(va >= 0.0)) throw InvalidInput("generate_alice: V_A must be >= 0");
  std::vector<double> x(n, 0.0);
  if (va == 0.0) return x;
  const double sd = std::sqrt(va);
  for_each_block(n, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Engine eng = make_engine(seed, Stream::kAlice, b);
    std::normal_distribution<double> normal(0.0, sd);
    for (std::size_t i = begin; i < end; ++i) x[i] = normal(eng);
  });
  return x;
}

double attacked_gain(const AttackParams& atk, const DetectorModel& det) {
  return detector_gain(det.window_ns + atk.delay_ns, det);
}

std::vector<PulseRecord> simulate_bob(std::span<const double> x, const ChannelParams& ch,
                                      const AttackParams& atk, const DetectorModel& det,
                                      std::uint64_t seed, const SimOptions& opts) {
  ch.validate();
  atk.validate();
  det.validate();
  const auto& mon = opts.monitor;
  if (!mon.mask.empty() && mon.mask.size() != x.size())
    throw InvalidInput("simulate_bob: monitor mask length must equal pulse count");
  if (!(mon.extinction >= 0.0 && mon.extinction < 1.0))
    throw InvalidInput("simulate_bob: extinction must be in [0,1)");

  const double amp = std::sqrt(ch.gain());
  const double sd_z = std::sqrt(ch.noise_variance());
  const double sd_w = std::sqrt(2.0 * ch.n0);
  // Closed switch: only the shot noise and electronic noise survive unscaled.
  const double amp_closed = std::sqrt(mon.extinction) * amp;
  const double sd_z_closed = std::sqrt(ch.n0 + mon.extinction * ch.gain() * ch.xi + ch.v_el);
  const double sqrt_g_attacked = std::sqrt(attacked_gain(atk, det));

  std::vector<PulseRecord> out(x.size());
  for_each_block(x.size(), opts.threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Engine eng = make_engine(seed, Stream::kBob, b);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t i = begin; i < end; ++i) {
      PulseRecord& r = out[i];
      r.x = x[i];
      r.intercepted = uniform(eng) < atk.mu;
      r.lo_attacked = uniform(eng) < atk.nu;
      r.monitored = !mon.mask.empty() && mon.mask[i] != 0;
      // Eve's heterodyne measurement and re-preparation add 2*N0 on the quadrature.
      const double w = normal(eng) * sd_w;
      const double z = normal(eng);
      const double quad = r.intercepted ? x[i] + w : x[i];
      const double y = r.monitored ? amp_closed * quad + sd_z_closed * z : amp * quad + sd_z * z;
      r.y = r.lo_attacked ? sqrt_g_attacked * y : y;
    }
  });
  return out;
}

AttackParams with_pulse_delay(AttackParams atk, const Waveform& lo_pulse, double edge_ns,
                              const TriggerConfig& trig, const PowerMeterConfig& pm) {
  const auto t0 = trigger_time(lo_pulse, trig);
  if (!t0) throw Infeasible("LO pulse never triggers");
  const Waveform shaped = attenuate_leading_edge(lo_pulse, atk.alpha, edge_ns, true, pm);
  const auto t1 = trigger_time(shaped, trig);
  if (!t1) throw Infeasible("shaped LO pulse never triggers");
  atk.delay_ns = std::max(0.0, *t1 - *t0);
  return atk;
}

PopulationMoments population_moments(const ChannelParams& ch, const AttackParams& atk,
                                     const DetectorModel& det) {
  const double g = attacked_gain(atk, det);
  PopulationMoments m{};
  m.mean_gain = atk.nu * g + (1.0 - atk.nu);
  m.mean_sqrt_gain = atk.nu * std::sqrt(g) + (1.0 - atk.nu);
  const double unscaled = ch.gain() * (ch.va + 2.0 * atk.mu * ch.n0) + ch.noise_variance();
  m.var_y = m.mean_gain * unscaled;
  m.cov_xy = m.mean_sqrt_gain * std::sqrt(ch.gain()) * ch.va;
  return m;
}

void write_pulse_csv(std::ostream& os, std::span<const PulseRecord> records) {
  os << "index,x,y,intercepted,lo_attacked\n";
  const auto prec = os.precision(17);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    os << i << ',' << r.x << ',' << r.y << ',' << (r.intercepted ? 1 : 0) << ','
       << (r.lo_attacked ? 1 : 0) << '\n';
  }
  os.precision(prec);
}

}  // namespace cvqkd
