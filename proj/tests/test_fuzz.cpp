#include <random>
#include <string>

#include "doctest.h"
#include "vical/ingest.hpp"
#include "vical/photometric.hpp"
#include "vical/synth.hpp"

using namespace vical;

namespace {

// Every parser must either succeed or throw a typed vical::Error; anything
// else (std exceptions, crashes) fails the run.
template <typename Fn>
bool survives(Fn&& fn) {
  try {
    fn();
    return true;
  } catch (const Error&) {
    return true;
  } catch (...) {
    return false;
  }
}

std::string random_bytes(std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len_d(0, max_len);
  std::uniform_int_distribution<int> byte_d(0, 255);
  std::string s(len_d(rng), '\0');
  for (char& c : s) c = static_cast<char>(byte_d(rng));
  return s;
}

// structured mutation: valid prefix plus random tail, more likely to reach
// the row parsers than pure noise
std::string mutated(std::mt19937_64& rng, const std::string& prefix,
                    std::size_t max_tail) {
  return prefix + random_bytes(rng, max_tail);
}

constexpr const char* kPrefixes[] = {
    "#t_ns,gx,gy,gz,ax,ay,az,temp_c\n",
    "#t_ns,gx,gy,gz,ax,ay,az,temp_c\n100,1,2,3,4,5,6,\n",
    "#t_ns,tx,ty,tz,qw,qx,qy,qz\n",
    "#t_ns,tx,ty,tz,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n",
    "#t_ns,exposure_ns,lux\n",
    "[M_a]\nm = 1 0 0 0 1 0 0 0 1\n",
    "[sim]\nduration_s = 2\n",
    "P5\n4 4\n65535\n",
    "#view,exposure_ns,offset_x,offset_y\n",
};

}  // namespace

TEST_CASE("parsers never crash on arbitrary bytes") {
  std::mt19937_64 rng(20260809);
  const int rounds = 20000;  // x 7 parsers > 1e5 inputs
  int failures = 0;
  for (int i = 0; i < rounds; ++i) {
    std::string input;
    if (i % 3 == 0) {
      input = random_bytes(rng, 256);
    } else {
      const auto& prefix = kPrefixes[rng() % std::size(kPrefixes)];
      input = mutated(rng, prefix, 128);
    }
    if (!survives([&] { parse_imu_csv(input); })) ++failures;
    if (!survives([&] { parse_mocap_csv(input); })) ++failures;
    if (!survives([&] { parse_exposures_csv(input); })) ++failures;
    if (!survives([&] { parse_pairs_csv(input); })) ++failures;
    if (!survives([&] { parse_calibration(input); })) ++failures;
    if (!survives([&] { parse_rig_config(input); })) ++failures;
    if (!survives([&] { parse_pgm16(input); })) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("numeric fields with hostile values become typed errors") {
  // overflow, inf/nan spellings, embedded NULs, huge exponents
  const char* rows[] = {
      "99999999999999999999999999,0,0,0,0,0,0,\n",
      "100,nan,0,0,0,0,0,\n",
      "100,inf,0,0,0,0,0,\n",
      "100,1e999,0,0,0,0,0,\n",
      "100,0,0,0,0,0,0,1e400\n",
      "100,0\x00,0,0,0,0,0,\n",
  };
  for (const char* row : rows) {
    const std::string input =
        std::string("#t_ns,gx,gy,gz,ax,ay,az,temp_c\n") + row;
    CHECK(survives([&] { parse_imu_csv(input); }));
    CHECK_THROWS_AS(parse_imu_csv(input), Error);
  }
}
