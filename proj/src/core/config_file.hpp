// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "core/scenarios.hpp"

namespace dernet {

// Scenario config files are flat `key = value` lines. `#` starts a comment,
// blank lines are ignored, keys may appear once. `scenario` is required and
// selects the defaults every other key overrides. Vectors are three numbers
// separated by spaces or commas. Relative paths (`mesh`, `initial_state`)
// are resolved against the directory of the config file.

/// Parses a config. Throws ParseError (with line) for malformed lines and
/// unknown keys, InvalidConfigError when the result fails validation.
ScenarioConfig read_config(std::istream& in, const std::string& source = "<config>",
                           const std::string& base_dir = ".");

/// Opens `path` and parses it; Error(io) when it cannot be read.
ScenarioConfig load_config(const std::string& path);

/// Every key with its resolved value, one per line, in a fixed order.
/// read_config of the output reproduces `config` exactly.
std::string format_config(const ScenarioConfig& config);

/// The recognised keys in the order format_config writes them.
std::vector<std::string> config_keys();

}  // namespace dernet
