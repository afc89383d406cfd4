#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace omr {

using NodeId = std::uint32_t;
using TechId = std::uint8_t;
/// Bit counts. Signed so that differences never wrap.
using Bits = std::int64_t;
using Vec3 = Eigen::Vector3d;

inline constexpr NodeId kBroadcast = 0;
inline constexpr Bits kUnbounded = std::numeric_limits<Bits>::max() / 4;

/// A physical-layer technology available to multi-modal nodes.
///
/// The first five fields describe the modem class; the remaining ones
/// parameterise the spreading/absorption channel and the datagram size cap.
struct Technology {
  std::string name;
  double bit_rate = 0.0;         // bits/s
  double max_range = 0.0;        // m
  double noise_level_db = 0.0;   // dB re 1 uPa^2/Hz
  double source_level_db = 170;  // dB re 1 uPa at 1 m
  double bandwidth_hz = 0.0;
  double spreading_exponent = 1.5;
  double absorption_db_per_m = 0.0;
  Bits max_datagram_bits = 0;
};

using TechnologyCatalog = std::vector<Technology>;

enum class Mode { FF, PF };
enum class Protocol { OmrFF, OmrPF, Flooding };
enum class Mac { Ideal, Immediate };

std::string to_string(Protocol p);
std::string to_string(Mac m);
Protocol parse_protocol(const std::string& s);
Mac parse_mac(const std::string& s);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Bits floor_to_bytes(Bits b) { return b <= 0 ? 0 : (b / 8) * 8; }

}  // namespace omr
