#pragma once

// key=value configuration files. One entry per line, '#' starts a comment,
// keys are dotted (channel.va). Unknown and duplicate keys are rejected.

#include <cstdint>
#include <string>
#include <string_view>

#include "cvqkd/scenario.h"

namespace cvqkd {

ScenarioConfig parse_config(std::string_view text);
std::string serialize_config(const ScenarioConfig& cfg);

SweepConfig parse_sweep_config(std::string_view text);

// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const ScenarioConfig& cfg);

std::string read_text_file(const std::string& path);

}  // namespace cvqkd
