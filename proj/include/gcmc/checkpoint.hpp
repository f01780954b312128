#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcmc/engine.hpp"
#include "gcmc/text.hpp"

namespace gcmc {

inline constexpr std::string_view k_checkpoint_magic = "gcmc-checkpoint 1";

/// Everything needed to continue a run bit for bit: the resolved config, the
/// step index, the running totals, the RNG state and the positions.
struct Checkpoint {
  RunConfig config;
  std::uint64_t step = 0;
  double energy = 0.0;
  double virial = 0.0;
  std::string rng_state_hex;
  std::vector<Vec3> positions;

  Simulation restore() const {
    return Simulation(config, ParticleStore(positions),
                      RngStream::deserialize_hex(rng_state_hex), step, energy, virial);
  }
};

inline Checkpoint snapshot(const Simulation& sim) {
  Checkpoint c;
  c.config = sim.config();
  c.step = sim.current_step();
  c.energy = sim.state().energy;
  c.virial = sim.state().virial;
  c.rng_state_hex = sim.rng().serialize_hex();
  c.positions.assign(sim.particles().positions().begin(), sim.particles().positions().end());
  return c;
}

inline std::string to_text(const Checkpoint& c) {
  std::ostringstream os;
  os << k_checkpoint_magic << '\n'
     << c.config.serialize()
     << "step=" << c.step << '\n'
     << "count=" << c.positions.size() << '\n'
     << "energy=" << format_g17(c.energy) << '\n'
     << "virial=" << format_g17(c.virial) << '\n'
     << "rng=" << c.rng_state_hex << '\n'
     << "positions\n";
  for (const Vec3& p : c.positions)
    os << format_g17(p.x) << ' ' << format_g17(p.y) << ' ' << format_g17(p.z) << '\n';
  return os.str();
}

inline Checkpoint checkpoint_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || trim(line) != k_checkpoint_magic)
    throw std::runtime_error("checkpoint: bad or missing format line");

  std::ostringstream config_lines;
  Checkpoint c;
  std::uint64_t count = 0;
  bool have_step = false, have_count = false, have_energy = false, have_virial = false,
       have_rng = false;
  while (std::getline(is, line)) {
    const auto l = trim(line);
    if (l == "positions") break;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("checkpoint: expected key=value, got '" + std::string(l) + "'");
    const auto key = l.substr(0, eq);
    const auto value = l.substr(eq + 1);
    if (key == "step") {
      c.step = parse_u64(value);
      have_step = true;
    } else if (key == "count") {
      count = parse_u64(value);
      have_count = true;
    } else if (key == "energy") {
      c.energy = parse_double(value);
      have_energy = true;
    } else if (key == "virial") {
      c.virial = parse_double(value);
      have_virial = true;
    } else if (key == "rng") {
      c.rng_state_hex = std::string(value);
      have_rng = true;
    } else {
      config_lines << l << '\n';
    }
  }
  if (!(have_step && have_count && have_energy && have_virial && have_rng))
    throw std::runtime_error("checkpoint: incomplete header");
  c.config = parse_config_text(config_lines.str());

  c.positions.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(is, line))
      throw std::runtime_error("checkpoint: truncated positions block");
    std::istringstream ls{line};
    std::string sx, sy, sz;
    if (!(ls >> sx >> sy >> sz))
      throw std::runtime_error("checkpoint: malformed position line " + std::to_string(i));
    c.positions.push_back({parse_double(sx), parse_double(sy), parse_double(sz)});
  }
  return c;
}

inline void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
    out << to_text(c);
    if (!out) throw std::runtime_error("short write for checkpoint '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_text(ss.str());
}

}  // namespace gcmc
