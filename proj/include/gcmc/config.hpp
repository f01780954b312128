#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gcmc/text.hpp"

namespace gcmc {

enum class Strategy { all_pairs, cell_list, microcell };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::all_pairs: return "all_pairs";
    case Strategy::cell_list: return "cell_list";
    case Strategy::microcell: return "microcell";
  }
  return "?";
}

inline Strategy strategy_from_string(std::string_view s) {
  if (s == "all_pairs") return Strategy::all_pairs;
  if (s == "cell_list") return Strategy::cell_list;
  if (s == "microcell") return Strategy::microcell;
  throw std::runtime_error("unknown strategy '" + std::string(s) +
                           "' (expected all_pairs, cell_list or microcell)");
}

/// Thermodynamic and run parameters. Reduced units: k_B = 1, and epsilon /
/// sigma default to 1 so lengths and energies are in LJ units.
///
/// Geometry comes in two forms: an explicit box_length (simulation starts
/// from an empty box), or particles [+ density] (a random initial
/// configuration of that many particles is generated; the box side is then
/// (particles/density)^(1/3)).
struct RunConfig {
  double temperature = 0.0;        // required
  double chemical_potential = 0.0; // required
  double lambda = 1.0;             // thermal de Broglie wavelength
  double epsilon = 1.0;
  double sigma = 1.0;
  double r_cut = 2.5;

  double box_length = 0.0;           // resolved side length
  std::uint64_t initial_particles = 0;
  double density = 0.6;              // used only with the particles form

  double displace_percent = 0.30;
  std::uint64_t steps = 0;
  std::uint64_t seed = 1;
  std::uint64_t checkpoint_interval = 10000;
  Strategy strategy = Strategy::all_pairs;
  bool tail_corrections = false;
  int cell_capacity = 0;        // 0 = choose by cutoff (48, or 96 past 4 sigma)
  int microcell_capacity = 5;
  std::uint64_t equilibration_steps = 0;
  std::uint64_t sampling_interval = 1;
  double max_displacement = 0.0;  // 0 = propose anywhere in the box

  double beta() const { return 1.0 / temperature; }
  double volume() const { return box_length * box_length * box_length; }

  void validate() const {
    auto fail = [](const std::string& why) { throw std::runtime_error("config: " + why); };
    if (!(temperature > 0.0)) fail("temperature must be > 0");
    if (!(lambda > 0.0)) fail("lambda must be > 0");
    if (!(sigma > 0.0)) fail("sigma must be > 0");
    if (epsilon < 0.0) fail("epsilon must be >= 0");
    if (!(r_cut > 0.0)) fail("r_cut must be > 0");
    if (!(box_length > 0.0)) fail("box length must be > 0");
    if (r_cut > box_length / 2.0)
      fail("r_cut must be <= box_length/2 for the minimum image convention (r_cut=" +
           format_g17(r_cut) + ", L=" + format_g17(box_length) + ")");
    if (displace_percent < 0.0 || displace_percent > 1.0)
      fail("displace_percent must lie in [0, 1]");
    if (checkpoint_interval == 0) fail("checkpoint_interval must be >= 1");
    if (sampling_interval == 0) fail("sampling_interval must be >= 1");
    if (cell_capacity < 0) fail("cell_capacity must be >= 1 (or 0 for automatic)");
    if (microcell_capacity < 1) fail("microcell_capacity must be >= 1");
    if (max_displacement < 0.0) fail("max_displacement must be >= 0");
  }

  /// key=value lines in fixed order; parse_config_text() reads them back.
  std::string serialize() const {
    std::ostringstream os;
    os << "temperature=" << format_g17(temperature) << '\n'
       << "chemical_potential=" << format_g17(chemical_potential) << '\n'
       << "lambda=" << format_g17(lambda) << '\n'
       << "epsilon=" << format_g17(epsilon) << '\n'
       << "sigma=" << format_g17(sigma) << '\n'
       << "r_cut=" << format_g17(r_cut) << '\n'
       << "box_length=" << format_g17(box_length) << '\n'
       << "displace_percent=" << format_g17(displace_percent) << '\n'
       << "steps=" << steps << '\n'
       << "seed=" << seed << '\n'
       << "checkpoint_interval=" << checkpoint_interval << '\n'
       << "strategy=" << to_string(strategy) << '\n'
       << "tail_corrections=" << (tail_corrections ? "on" : "off") << '\n'
       << "cell_capacity=" << cell_capacity << '\n'
       << "microcell_capacity=" << microcell_capacity << '\n'
       << "equilibration_steps=" << equilibration_steps << '\n'
       << "sampling_interval=" << sampling_interval << '\n'
       << "max_displacement=" << format_g17(max_displacement) << '\n';
    return os.str();
  }
};

namespace detail {

inline bool parse_on_off(std::string_view v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw std::runtime_error("expected on/off, got '" + std::string(v) + "'");
}

}  // namespace detail

/// Parses key=value text, one entry per line, '#' starting a comment.
/// Unknown keys and duplicate keys are errors; temperature and
/// chemical_potential are mandatory, as is exactly one of box_length /
/// particles.
inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::string, std::less<>> entries;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value, got '" + std::string(line) + "'");
    std::string key{trim(line.substr(0, eq))};
    std::string value{trim(line.substr(eq + 1))};
    if (key.empty() || value.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key or value");
    if (!entries.emplace(key, value).second)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }

  auto take = [&entries](std::string_view key) -> const std::string* {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  static constexpr std::string_view known[] = {
      "temperature", "chemical_potential", "lambda", "epsilon", "sigma", "r_cut",
      "box_length", "particles", "density", "displace_percent", "steps", "seed",
      "checkpoint_interval", "strategy", "tail_corrections", "cell_capacity",
      "microcell_capacity", "equilibration_steps", "sampling_interval",
      "max_displacement"};
  for (const auto& [key, value] : entries) {
    bool ok = false;
    for (auto k : known) ok = ok || (key == k);
    if (!ok) throw std::runtime_error("config: unknown key '" + key + "'");
  }

  if (auto* v = take("temperature")) cfg.temperature = parse_double(*v);
  else throw std::runtime_error("config: temperature is required");
  if (auto* v = take("chemical_potential")) cfg.chemical_potential = parse_double(*v);
  else throw std::runtime_error("config: chemical_potential is required");
  if (auto* v = take("lambda")) cfg.lambda = parse_double(*v);
  if (auto* v = take("epsilon")) cfg.epsilon = parse_double(*v);
  if (auto* v = take("sigma")) cfg.sigma = parse_double(*v);
  if (auto* v = take("r_cut")) cfg.r_cut = parse_double(*v);
  if (auto* v = take("displace_percent")) cfg.displace_percent = parse_double(*v);
  if (auto* v = take("steps")) cfg.steps = parse_u64(*v);
  if (auto* v = take("seed")) cfg.seed = parse_u64(*v);
  if (auto* v = take("checkpoint_interval")) cfg.checkpoint_interval = parse_u64(*v);
  if (auto* v = take("strategy")) cfg.strategy = strategy_from_string(*v);
  if (auto* v = take("tail_corrections")) cfg.tail_corrections = detail::parse_on_off(*v);
  if (auto* v = take("cell_capacity")) cfg.cell_capacity = static_cast<int>(parse_u64(*v));
  if (auto* v = take("microcell_capacity")) cfg.microcell_capacity = static_cast<int>(parse_u64(*v));
  if (auto* v = take("equilibration_steps")) cfg.equilibration_steps = parse_u64(*v);
  if (auto* v = take("sampling_interval")) cfg.sampling_interval = parse_u64(*v);
  if (auto* v = take("max_displacement")) cfg.max_displacement = parse_double(*v);

  const std::string* box = take("box_length");
  const std::string* particles = take("particles");
  const std::string* density = take("density");
  if (box && particles)
    throw std::runtime_error("config: give either box_length or particles, not both");
  if (!box && !particles)
    throw std::runtime_error("config: one of box_length / particles is required");
  if (box) {
    if (density) throw std::runtime_error("config: density only applies with particles");
    cfg.box_length = parse_double(*box);
    cfg.initial_particles = 0;
  } else {
    cfg.initial_particles = parse_u64(*particles);
    if (density) cfg.density = parse_double(*density);
    if (!(cfg.density > 0.0)) throw std::runtime_error("config: density must be > 0");
    cfg.box_length = std::cbrt(static_cast<double>(cfg.initial_particles) / cfg.density);
  }

  cfg.validate();
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace gcmc
