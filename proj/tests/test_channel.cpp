#include "oracles.hpp"

#include "omr/channel.hpp"
#include "omr/topology.hpp"

#include <doctest.h>

using namespace omr;

TEST_CASE("Q function against numeric integration") {
  for (double x : {-2.0, -0.5, 0.0, 0.3, 1.0, std::sqrt(2.0), 2.5, 4.0, 6.0})
    CHECK(q_function(x) == doctest::Approx(oracle::q_tail(x)).epsilon(1e-9));
}

TEST_CASE("BPSK packet error rate") {
  const double ber = oracle::q_tail(std::sqrt(2.0));
  CHECK(ber == doctest::Approx(0.0786).epsilon(1e-3));
  CHECK(bpsk_bit_error_rate(1.0) == doctest::Approx(ber).epsilon(1e-9));
  const double per = packet_error_rate(0.0, 100);
  CHECK(per == doctest::Approx(1.0 - std::pow(1.0 - ber, 100)).epsilon(1e-9));
  CHECK(per == doctest::Approx(0.99972).epsilon(1e-4));
  CHECK(packet_error_rate(0.0, 0) == 0.0);
  CHECK(packet_error_rate(60.0, 10000) < 1e-12);
}

TEST_CASE("SNR falls with distance and PER stays a probability") {
  for (const auto& t : default_catalog()) {
    double last_snr = snr_db(t, 1.0);
    for (double d = 2.0; d < 3 * t.max_range; d *= 1.3) {
      const double s = snr_db(t, d);
      CHECK(s < last_snr);
      last_snr = s;
      const double per = per_of_link(d, t, t.max_datagram_bits);
      CHECK(per >= 0.0);
      CHECK(per <= 1.0);
    }
    CHECK_THROWS(snr_db(t, 0.0));
  }
}

TEST_CASE("default technologies keep their nominal ranges") {
  for (const auto& t : default_catalog()) {
    CAPTURE(t.name);
    CHECK(per_of_link(0.5 * t.max_range, t, t.max_datagram_bits) < 0.01);
    CHECK(per_of_link(1.2 * t.max_range, t, t.max_datagram_bits) > 0.99);
    CHECK(per_of_link(t.max_range, t, t.max_datagram_bits) == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("propagation delay") {
  ChannelModel c;
  CHECK(c.propagation_delay(1500.0) == doctest::Approx(1.0));
}
