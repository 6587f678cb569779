#include <doctest.h>

#include "celab/bits.hpp"
#include "celab/rng.hpp"

using celab::Bits;
using celab::Rng;

TEST_CASE("hex round trip is value-based and left-padded") {
  const Bits b = Bits::from_hex("1a2b", 13);
  CHECK(b.size() == 13);
  CHECK(b.to_hex() == "1a2b");
  CHECK(b.to_u64() == 0x1a2b);

  CHECK(Bits::from_u64(0, 8).to_hex() == "00");
  CHECK(Bits::from_u64(0x65437958, 64).to_hex() == "0000000065437958");
  CHECK_THROWS(Bits::from_hex("ffff", 13));  // value wider than width
  CHECK_THROWS(Bits::from_hex("1a2b", 12));  // digit count mismatch
}

TEST_CASE("byte round trip") {
  const std::vector<std::uint8_t> bytes = {0xaa, 0xbb, 0xcc};
  const Bits b = Bits::from_bytes(bytes);
  CHECK(b.size() == 24);
  CHECK(b.to_bytes() == bytes);
  CHECK(b.to_hex() == "aabbcc");
}

TEST_CASE("slice and append invert") {
  Rng rng(7);
  const Bits b = Bits::random(57, rng);
  Bits joined = b.slice(0, 20);
  joined.append(b.slice(20, 37));
  CHECK(joined == b);
}

TEST_CASE("xor algebra") {
  Rng rng(9);
  const Bits a = Bits::random(40, rng);
  const Bits b = Bits::random(40, rng);
  CHECK(((a ^ b) ^ b) == a);
  CHECK((a ^ a).all_zero());
  CHECK_THROWS(a ^ Bits(39));
}

TEST_CASE("hamming distance counts differing positions") {
  const Bits a = Bits::from_u64(0b1010, 4);
  const Bits b = Bits::from_u64(0b0110, 4);
  CHECK(a.hamming_distance(b) == 2);
  CHECK(a.count_ones() == 2);
}
