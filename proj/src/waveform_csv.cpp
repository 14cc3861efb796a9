#include "cvqkd/waveform_csv.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "cvqkd/error.h"

namespace cvqkd {

void write_waveform_csv(std::ostream& os, const Waveform& w) {
  os << "time_ns,intensity\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < w.size(); ++i) os << w.time_at(i) << ',' << w.samples()[i] << '\n';
}

void write_waveform_csv(const std::string& path, const Waveform& w) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot open " + path + " for writing");
  write_waveform_csv(os, w);
}

Waveform read_waveform_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("waveform csv: empty input");
  std::vector<double> times;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    double t = 0.0;
    double v = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> v) || comma != ',')
      throw InvalidInput("waveform csv: malformed row at line " + std::to_string(lineno));
    times.push_back(t);
    values.push_back(v);
  }
  if (times.size() < 2) throw InvalidInput("waveform csv: need at least 2 samples");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw InvalidInput("waveform csv: times must be increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double expected = times[0] + static_cast<double>(i) * dt;
    if (std::abs(times[i] - expected) > 1e-6 * dt)
      throw InvalidInput("waveform csv: non-uniform sampling at row " + std::to_string(i + 2));
  }
  return Waveform(std::move(values), dt, times[0]);
}

Waveform read_waveform_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open " + path);
  return read_waveform_csv(is);
}

}  // namespace cvqkd
