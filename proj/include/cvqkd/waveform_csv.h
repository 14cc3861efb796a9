#pragma once

#include <iosfwd>
#include <string>

#include "cvqkd/pulsephys.h"

namespace cvqkd {

// Two-column CSV: header "time_ns,intensity", then one row per sample.
void write_waveform_csv(std::ostream& os, const Waveform& w);
void write_waveform_csv(const std::string& path, const Waveform& w);

// Times must be uniformly spaced (relative tolerance 1e-6 of dt).
Waveform read_waveform_csv(std::istream& is);
Waveform read_waveform_csv(const std::string& path);

}  // namespace cvqkd
