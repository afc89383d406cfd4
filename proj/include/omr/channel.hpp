#pragma once

#include "omr/types.hpp"

namespace omr {

/// Gaussian tail probability Q(x) = P(Z > x).
double q_function(double x);

/// BPSK bit error rate for a linear SNR.
double bpsk_bit_error_rate(double snr_linear);

/// Passive-sonar SNR: SL - (10 k log10 d + a d) - (NL + 10 log10 B).
double snr_db(const Technology& tech, double distance);

double packet_error_rate(double snr_db_value, Bits bits);

/// PER of a `bits`-long packet over `distance` metres; distance > 0.
double per_of_link(double distance, const Technology& tech, Bits bits);

/// Absorption coefficient placing the 50% PER point of a `reference_bits`
/// packet exactly at the technology's max range.
double calibrate_absorption(Technology tech, Bits reference_bits);

struct ChannelModel {
  double sound_speed = 1500.0;  // m/s

  double propagation_delay(double distance) const { return distance / sound_speed; }
};

}  // namespace omr
