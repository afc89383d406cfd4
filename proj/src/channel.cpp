#include "omr/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace omr {

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double bpsk_bit_error_rate(double snr_linear) {
  return q_function(std::sqrt(2.0 * std::max(0.0, snr_linear)));
}

double snr_db(const Technology& tech, double distance) {
  if (!(distance > 0.0)) throw std::invalid_argument("snr_db: distance must be positive");
  const double transmission_loss =
      10.0 * tech.spreading_exponent * std::log10(distance) + tech.absorption_db_per_m * distance;
  const double noise = tech.noise_level_db + 10.0 * std::log10(tech.bandwidth_hz);
  return tech.source_level_db - transmission_loss - noise;
}

double packet_error_rate(double snr_db_value, Bits bits) {
  if (bits <= 0) return 0.0;
  const double ber = bpsk_bit_error_rate(std::pow(10.0, snr_db_value / 10.0));
  // 1 - (1-ber)^bits, computed without cancellation for tiny ber.
  return -std::expm1(static_cast<double>(bits) * std::log1p(-ber));
}

double per_of_link(double distance, const Technology& tech, Bits bits) {
  return packet_error_rate(snr_db(tech, distance), bits);
}

double calibrate_absorption(Technology tech, Bits reference_bits) {
  auto per_at_range = [&](double alpha) {
    tech.absorption_db_per_m = alpha;
    return per_of_link(tech.max_range, tech, reference_bits);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (per_at_range(hi) < 0.5) hi *= 2.0;
  if (per_at_range(lo) >= 0.5) return 0.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (per_at_range(mid) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace omr
