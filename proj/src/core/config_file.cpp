// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/config_file.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "core/error.hpp"

namespace dernet {
namespace {

namespace fs = std::filesystem;

// Thrown by value parsers; the caller adds source and line.
struct BadValue {
  std::string message;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw BadValue{fmt::format("expected a number, got '{}'", text)};
  }
  return v;
}

int parse_int(const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw BadValue{fmt::format("expected an integer, got '{}'", text)};
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "off" || text == "no" || text == "0") return false;
  throw BadValue{fmt::format("expected true or false, got '{}'", text)};
}

Vec3 parse_vec3(const std::string& text) {
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<std::string> parts;
  for (std::string w; in >> w;) parts.push_back(w);
  if (parts.size() != 3) throw BadValue{fmt::format("expected three numbers, got '{}'", text)};
  return {parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])};
}

std::string number(double v) { return fmt::format("{:.17g}", v); }

template <class E>
E parse_choice(const std::string& text, std::initializer_list<std::pair<const char*, E>> choices) {
  std::string names;
  for (const auto& [name, value] : choices) {
    if (text == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw BadValue{fmt::format("expected one of {}, got '{}'", names, text)};
}

template <class E>
std::string choice_name(E value, std::initializer_list<std::pair<const char*, E>> choices) {
  for (const auto& [name, v] : choices) {
    if (v == value) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, Scheme>> kSchemes = {
    {"euler", Scheme::implicit_euler}, {"newmark", Scheme::newmark_beta}};
const std::initializer_list<std::pair<const char*, CurvatureModel>> kCurvatures = {
    {"modified", CurvatureModel::modified}, {"exact", CurvatureModel::exact}};
const std::initializer_list<std::pair<const char*, VelocityReset>> kResets = {
    {"full", VelocityReset::full}, {"normal", VelocityReset::normal}};
const std::initializer_list<std::pair<const char*, ActivationRule>> kRules = {
    {"all", ActivationRule::all_nodes}, {"any", ActivationRule::any_node}};

struct Key {
  std::string name;
  std::function<void(ScenarioConfig&, const std::string&, const fs::path&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

Key real(const char* name, double ScenarioConfig::*field) {
  return {name, [field](ScenarioConfig& c, const std::string& v, const fs::path&) { c.*field = parse_double(v); },
          [field](const ScenarioConfig& c) { return number(c.*field); }};
}

Key integer(const char* name, int ScenarioConfig::*field) {
  return {name, [field](ScenarioConfig& c, const std::string& v, const fs::path&) { c.*field = parse_int(v); },
          [field](const ScenarioConfig& c) { return std::to_string(c.*field); }};
}

Key vector(const char* name, Vec3 ScenarioConfig::*field) {
  return {name, [field](ScenarioConfig& c, const std::string& v, const fs::path&) { c.*field = parse_vec3(v); },
          [field](const ScenarioConfig& c) {
            const Vec3& v = c.*field;
            return fmt::format("{} {} {}", number(v.x()), number(v.y()), number(v.z()));
          }};
}

Key path(const char* name, std::string ScenarioConfig::*field) {
  return {name,
          [field](ScenarioConfig& c, const std::string& v, const fs::path& base) {
            c.*field = v.empty() || fs::path(v).is_absolute() ? v : (base / v).lexically_normal().string();
          },
          [field](const ScenarioConfig& c) { return c.*field; }};
}

template <class E>
Key choice(const char* name, E ScenarioConfig::*field, std::initializer_list<std::pair<const char*, E>> choices) {
  return {name,
          [field, choices](ScenarioConfig& c, const std::string& v, const fs::path&) {
            c.*field = parse_choice(v, choices);
          },
          [field, choices](const ScenarioConfig& c) { return choice_name(c.*field, choices); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"scenario", [](ScenarioConfig&, const std::string&, const fs::path&) {},
                 [](const ScenarioConfig& c) { return std::string(to_string(c.kind)); }});
    k.push_back(path("mesh", &ScenarioConfig::mesh_path));
    k.push_back(real("side_length", &ScenarioConfig::side_length));
    k.push_back(real("grid_interval", &ScenarioConfig::grid_interval));
    k.push_back(integer("subdivisions", &ScenarioConfig::subdivisions));
    k.push_back(real("young_modulus", &ScenarioConfig::young_modulus));
    k.push_back(real("rod_radius", &ScenarioConfig::rod_radius));
    k.push_back(real("density", &ScenarioConfig::density));
    k.push_back(vector("gravity", &ScenarioConfig::gravity));
    k.push_back(real("mu", &ScenarioConfig::damping));
    k.push_back(real("duration", &ScenarioConfig::duration));
    k.push_back(real("h", &ScenarioConfig::time_step));
    k.push_back(real("tolerance", &ScenarioConfig::tolerance));
    k.push_back(choice("scheme", &ScenarioConfig::scheme, kSchemes));
    k.push_back(real("beta", &ScenarioConfig::beta));
    k.push_back(choice("curvature", &ScenarioConfig::curvature, kCurvatures));
    k.push_back(choice("velocity_reset", &ScenarioConfig::velocity_reset, kResets));
    k.push_back(integer("max_contact_passes", &ScenarioConfig::max_contact_passes));
    k.push_back(real("metric_interval", &ScenarioConfig::metric_interval));
    k.push_back({"surface",
                 [](ScenarioConfig& c, const std::string& v, const fs::path&) { c.surface = v; },
                 [](const ScenarioConfig& c) { return c.surface; }});
    k.push_back(real("start_height", &ScenarioConfig::start_height));
    k.push_back(real("fold_speed", &ScenarioConfig::fold_speed));
    k.push_back(real("target_scale", &ScenarioConfig::target_scale));
    k.push_back(real("fold_settle", &ScenarioConfig::fold_settle));
    k.push_back(path("initial_state", &ScenarioConfig::initial_state));
    k.push_back(real("corner_mass", &ScenarioConfig::corner_mass));
    k.push_back(real("shoot_speed", &ScenarioConfig::shoot_speed));
    k.push_back(real("shoot_angle", &ScenarioConfig::shoot_angle));
    k.push_back(choice("activation", &ScenarioConfig::activation, kRules));
    k.push_back(real("sphere_radius", &ScenarioConfig::sphere_radius));
    k.push_back(real("standoff", &ScenarioConfig::standoff));
    k.push_back(real("close_speed", &ScenarioConfig::close_speed));
    k.push_back(vector("destination", &ScenarioConfig::destination));
    k.push_back(real("trigger_time", &ScenarioConfig::trigger_time));
    k.push_back({"trigger",
                 [](ScenarioConfig& c, const std::string& v, const fs::path&) { c.trigger_enabled = parse_bool(v); },
                 [](const ScenarioConfig& c) { return std::string(c.trigger_enabled ? "true" : "false"); }});
    return k;
  }();
  return table;
}

struct Entry {
  std::string value;
  int line = 0;
};

}  // namespace

ScenarioConfig read_config(std::istream& in, const std::string& source, const std::string& base_dir) {
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
  std::string raw;
  for (int line = 1; std::getline(in, raw); ++line) {
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(source, line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line, "missing key");
    const auto& table = keys();
    if (std::none_of(table.begin(), table.end(), [&](const Key& k) { return k.name == key; })) {
      throw ParseError(source, line, fmt::format("unknown key '{}'", key));
    }
    if (auto it = entries.find(key); it != entries.end()) {
      throw ParseError(source, line, fmt::format("duplicate key '{}' (first on line {})", key, it->second.line));
    }
    entries[key] = {value, line};
    order.push_back(key);
  }

  const auto kind_it = entries.find("scenario");
  if (kind_it == entries.end()) throw InvalidConfigError(source + ": missing required key 'scenario'");
  ScenarioConfig config;
  try {
    config = ScenarioConfig::defaults(parse_scenario_kind(kind_it->second.value));
  } catch (const InvalidConfigError& e) {
    throw ParseError(source, kind_it->second.line, e.what());
  }

  const fs::path base(base_dir);
  for (const Key& key : keys()) {
    const auto it = entries.find(key.name);
    if (it == entries.end()) continue;
    try {
      key.set(config, it->second.value, base);
    } catch (const BadValue& e) {
      throw ParseError(source, it->second.line, fmt::format("{}: {}", key.name, e.message));
    }
  }
  try {
    config.validate();
  } catch (const InvalidConfigError& e) {
    throw InvalidConfigError(fmt::format("{}: {}", source, e.what()));
  }
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open config '{}'", path));
  const fs::path parent = fs::path(path).parent_path();
  return read_config(in, path, parent.empty() ? "." : parent.string());
}

std::string format_config(const ScenarioConfig& config) {
  std::string out;
  for (const Key& key : keys()) {
    out += fmt::format("{} = {}\n", key.name, key.get(config));
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> names;
  for (const Key& key : keys()) names.push_back(key.name);
  return names;
}

}  // namespace dernet
