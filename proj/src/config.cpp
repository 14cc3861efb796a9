#include "cvqkd/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "cvqkd/error.h"

namespace cvqkd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Value {
  std::string_view key;
  std::string_view text;
  std::size_t line;

  double number() const {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v))
      throw ConfigError(line, std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    return v;
  }

  std::uint64_t integer() const {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      // Accept integral values written in float notation (2e6).
      const double d = number();
      if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19)
        throw ConfigError(line, std::string(key) + ": expected a non-negative integer");
      return static_cast<std::uint64_t>(d);
    }
    return v;
  }

  bool boolean() const {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw ConfigError(line, std::string(key) + ": expected a boolean");
  }

  [[noreturn]] void range_error(const char* what) const {
    throw ConfigError(line, std::string(key) + " out of range: " + what + " (got " + std::string(text) + ")");
  }

  double in_range(double lo, double hi, bool lo_open, bool hi_open, const char* what) const {
    const double v = number();
    const bool lo_ok = lo_open ? v > lo : v >= lo;
    const bool hi_ok = hi_open ? v < hi : v <= hi;
    if (!lo_ok || !hi_ok) range_error(what);
    return v;
  }
  double unit() const { return in_range(0.0, 1.0, false, false, "must be in [0,1]"); }
  double positive() const { return in_range(0.0, HUGE_VAL, true, false, "must be > 0"); }
  double non_negative() const { return in_range(0.0, HUGE_VAL, false, false, "must be >= 0"); }
};

struct Entries {
  std::vector<Value> values;
};

Entries tokenize(std::string_view text, const std::set<std::string_view>& known) {
  Entries out;
  std::set<std::string_view> seen;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) throw ConfigError(lineno, "expected key=value");
    const auto key = trim(raw.substr(0, eq));
    const auto value = trim(raw.substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "empty key");
    if (!known.contains(key)) throw ConfigError(lineno, "unknown key '" + std::string(key) + "'");
    if (!seen.insert(key).second) throw ConfigError(lineno, "duplicate key '" + std::string(key) + "'");
    if (value.empty()) throw ConfigError(lineno, std::string(key) + ": missing value");
    out.values.push_back({key, value, lineno});
  }
  return out;
}

struct ScenarioDraft {
  ScenarioConfig cfg;
  CountermeasureConfig cm;
  bool cm_enabled = false;
};

struct Field {
  std::string_view key;
  std::function<void(ScenarioDraft&, const Value&)> set;
  std::function<std::string(const ScenarioConfig&)> get;  // empty string = omit
};

std::string trigger_name(TriggerKind k) { return k == TriggerKind::kThreshold ? "u1" : "u2"; }

const std::vector<Field>& scenario_fields() {
  using D = ScenarioDraft;
  using C = ScenarioConfig;
  static const std::vector<Field> fields = {
      {"seed", [](D& d, const Value& v) { d.cfg.seed = v.integer(); },
       [](const C& c) { return std::to_string(c.seed); }},
      {"pulses", [](D& d, const Value& v) { d.cfg.pulses = v.integer(); },
       [](const C& c) { return std::to_string(c.pulses); }},
      {"key_fraction",
       [](D& d, const Value& v) { d.cfg.key_fraction = v.in_range(0.0, 1.0, true, true, "must be in (0,1)"); },
       [](const C& c) { return format_double(c.key_fraction); }},
      {"beta", [](D& d, const Value& v) { d.cfg.beta = v.in_range(0.0, 1.0, true, false, "must be in (0,1]"); },
       [](const C& c) { return format_double(c.beta); }},
      {"epsilon",
       [](D& d, const Value& v) { d.cfg.epsilon = v.in_range(0.0, 1.0, true, true, "must be in (0,1)"); },
       [](const C& c) { return format_double(c.epsilon); }},
      {"lo_power", [](D& d, const Value& v) { d.cfg.lo_power = v.positive(); },
       [](const C& c) { return format_double(c.lo_power); }},
      {"threads",
       [](D& d, const Value& v) {
         const auto t = v.integer();
         if (t < 1 || t > 256) v.range_error("must be in [1,256]");
         d.cfg.threads = static_cast<unsigned>(t);
       },
       [](const C& c) { return std::to_string(c.threads); }},
      {"out_dir", [](D& d, const Value& v) { d.cfg.out_dir = std::string(v.text); },
       [](const C& c) { return c.out_dir; }},

      {"channel.va", [](D& d, const Value& v) { d.cfg.channel.va = v.non_negative(); },
       [](const C& c) { return format_double(c.channel.va); }},
      {"channel.transmittance", [](D& d, const Value& v) { d.cfg.channel.transmittance = v.unit(); },
       [](const C& c) { return format_double(c.channel.transmittance); }},
      {"channel.efficiency",
       [](D& d, const Value& v) { d.cfg.channel.efficiency = v.in_range(0.0, 1.0, true, false, "must be in (0,1]"); },
       [](const C& c) { return format_double(c.channel.efficiency); }},
      {"channel.xi", [](D& d, const Value& v) { d.cfg.channel.xi = v.non_negative(); },
       [](const C& c) { return format_double(c.channel.xi); }},
      {"channel.v_el", [](D& d, const Value& v) { d.cfg.channel.v_el = v.non_negative(); },
       [](const C& c) { return format_double(c.channel.v_el); }},
      {"channel.n0", [](D& d, const Value& v) { d.cfg.channel.n0 = v.positive(); },
       [](const C& c) { return format_double(c.channel.n0); }},

      {"attack.mu", [](D& d, const Value& v) { d.cfg.attack.mu = v.unit(); },
       [](const C& c) { return format_double(c.attack.mu); }},
      {"attack.nu", [](D& d, const Value& v) { d.cfg.attack.nu = v.unit(); },
       [](const C& c) { return format_double(c.attack.nu); }},
      {"attack.alpha", [](D& d, const Value& v) { d.cfg.attack.alpha = v.unit(); },
       [](const C& c) { return format_double(c.attack.alpha); }},
      {"attack.delay_ns", [](D& d, const Value& v) { d.cfg.attack.delay_ns = v.non_negative(); },
       [](const C& c) { return format_double(c.attack.delay_ns); }},

      {"shaping.edge_ns", [](D& d, const Value& v) { d.cfg.shaping.edge_ns = v.non_negative(); },
       [](const C& c) { return format_double(c.shaping.edge_ns); }},
      {"shaping.trigger",
       [](D& d, const Value& v) {
         if (v.text == "u1") {
           d.cfg.shaping.trigger.kind = TriggerKind::kThreshold;
         } else if (v.text == "u2") {
           d.cfg.shaping.trigger.kind = TriggerKind::kDifferential;
         } else {
           v.range_error("must be u1 or u2");
         }
       },
       [](const C& c) { return trigger_name(c.shaping.trigger.kind); }},
      {"shaping.threshold", [](D& d, const Value& v) { d.cfg.shaping.trigger.threshold = v.positive(); },
       [](const C& c) { return format_double(c.shaping.trigger.threshold); }},
      {"shaping.trigger_delay_ns",
       [](D& d, const Value& v) { d.cfg.shaping.trigger.delay_ns = v.non_negative(); },
       [](const C& c) { return format_double(c.shaping.trigger.delay_ns); }},
      {"shaping.pulse_duration_ns",
       [](D& d, const Value& v) { d.cfg.shaping.trigger.pulse_duration_ns = v.positive(); },
       [](const C& c) { return format_double(c.shaping.trigger.pulse_duration_ns); }},
      {"shaping.meter_window_ns",
       [](D& d, const Value& v) { d.cfg.shaping.power_meter.window_ns = v.positive(); },
       [](const C& c) { return format_double(c.shaping.power_meter.window_ns); }},
      {"shaping.meter_decay_base",
       [](D& d, const Value& v) {
         d.cfg.shaping.power_meter.decay_base = v.in_range(1.0, HUGE_VAL, false, false, "must be >= 1");
       },
       [](const C& c) { return format_double(c.shaping.power_meter.decay_base); }},

      {"detector.window_ns", [](D& d, const Value& v) { d.cfg.detector.window_ns = v.positive(); },
       [](const C& c) { return format_double(c.detector.window_ns); }},
      {"detector.tau_ns", [](D& d, const Value& v) { d.cfg.detector.tau_ns = v.positive(); },
       [](const C& c) { return format_double(c.detector.tau_ns); }},
      {"detector.slope", [](D& d, const Value& v) { d.cfg.detector.slope_cal = v.positive(); },
       [](const C& c) { return format_double(c.detector.slope_cal); }},

      {"countermeasure.enabled", [](D& d, const Value& v) { d.cm_enabled = v.boolean(); },
       [](const C& c) { return std::string(c.countermeasure ? "1" : "0"); }},
      {"countermeasure.fraction",
       [](D& d, const Value& v) { d.cm.fraction = v.in_range(0.0, 1.0, true, true, "must be in (0,1)"); },
       [](const C& c) { return c.countermeasure ? format_double(c.countermeasure->fraction) : ""; }},
      {"countermeasure.switch_loss_db",
       [](D& d, const Value& v) { d.cm.switch_model.loss_db = v.non_negative(); },
       [](const C& c) { return c.countermeasure ? format_double(c.countermeasure->switch_model.loss_db) : ""; }},
      {"countermeasure.extinction",
       [](D& d, const Value& v) {
         d.cm.switch_model.extinction = v.in_range(0.0, 1.0, false, true, "must be in [0,1)");
       },
       [](const C& c) { return c.countermeasure ? format_double(c.countermeasure->switch_model.extinction) : ""; }},
      {"countermeasure.z_threshold", [](D& d, const Value& v) { d.cm.z_threshold = v.positive(); },
       [](const C& c) { return c.countermeasure ? format_double(c.countermeasure->z_threshold) : ""; }},
  };
  return fields;
}

constexpr std::string_view kRequired[] = {"channel.va", "channel.transmittance", "channel.efficiency",
                                          "channel.xi"};

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  const auto& fields = scenario_fields();
  std::set<std::string_view> known;
  std::map<std::string_view, const Field*> by_key;
  for (const auto& f : fields) {
    known.insert(f.key);
    by_key[f.key] = &f;
  }
  const Entries entries = tokenize(text, known);

  std::set<std::string_view> present;
  ScenarioDraft draft;
  for (const auto& v : entries.values) {
    by_key.at(v.key)->set(draft, v);
    present.insert(v.key);
  }
  for (auto key : kRequired) {
    if (!present.contains(key)) throw ConfigError(0, "missing required key '" + std::string(key) + "'");
  }
  if (!draft.cm_enabled) {
    for (const auto& v : entries.values) {
      if (v.key.starts_with("countermeasure.") && v.key != "countermeasure.enabled")
        throw ConfigError(v.line, std::string(v.key) + " given but countermeasure.enabled is not set");
    }
  }
  draft.cfg.detector.v_el = draft.cfg.channel.v_el;
  if (draft.cm_enabled) draft.cfg.countermeasure = draft.cm;
  try {
    draft.cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(0, e.what());
  }
  return draft.cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  for (const auto& f : scenario_fields()) {
    const std::string v = f.get(cfg);
    if (!v.empty()) os << f.key << '=' << v << '\n';
  }
  return os.str();
}

SweepConfig parse_sweep_config(std::string_view text) {
  struct Draft {
    SweepConfig cfg = SweepConfig::defaults();
  };
  using Setter = std::function<void(Draft&, const Value&)>;
  const auto both = [](auto&& fn) {
    return [fn](Draft& d, const Value& v) {
      fn(d.cfg.baseline, v);
      fn(d.cfg.countermeasure, v);
    };
  };
  const std::map<std::string_view, Setter> setters = {
      {"beta", both([](SweepSettings& s, const Value& v) { s.beta = v.in_range(0.0, 1.0, true, false, "must be in (0,1]"); })},
      {"snr", both([](SweepSettings& s, const Value& v) { s.snr_target = v.positive(); })},
      {"xi_bob", both([](SweepSettings& s, const Value& v) { s.xi_bob = v.non_negative(); })},
      {"v_el", both([](SweepSettings& s, const Value& v) { s.v_el = v.non_negative(); })},
      {"eta", both([](SweepSettings& s, const Value& v) { s.eta = v.in_range(0.0, 1.0, true, false, "must be in (0,1]"); })},
      {"loss_db_per_km", both([](SweepSettings& s, const Value& v) { s.link.loss_db_per_km = v.positive(); })},
      {"switch_loss_db",
       [](Draft& d, const Value& v) { d.cfg.countermeasure.switch_model->loss_db = v.non_negative(); }},
      {"monitor_fraction",
       [](Draft& d, const Value& v) {
         d.cfg.countermeasure.monitor_fraction = v.in_range(0.0, 1.0, false, true, "must be in [0,1)");
       }},
      {"d_max_km", [](Draft& d, const Value& v) { d.cfg.d_max_km = v.non_negative(); }},
      {"step_km", [](Draft& d, const Value& v) { d.cfg.step_km = v.positive(); }},
  };
  std::set<std::string_view> known;
  for (const auto& [k, _] : setters) known.insert(k);
  Draft draft;
  for (const auto& v : tokenize(text, known).values) setters.at(v.key)(draft, v);
  return draft.cfg;
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace cvqkd
