#include <doctest.h>

#include "celab/codec.hpp"
#include "celab/rng.hpp"

using namespace celab;
using codec::CodecSpec;
using codec::DecodeStatus;

TEST_CASE("code widths follow the slice table and the 260-bit budget") {
  CHECK(CodecSpec::hamming_secded(13).code_width == 19);
  CHECK(CodecSpec::hamming_secded(12).code_width == 18);
  CHECK(CodecSpec::hamming_secded(11).code_width == 16);
  CHECK(CodecSpec::identity(13).code_width == 13);

  const std::size_t frames[] = {13, 14, 15};
  const std::size_t widths[] = {13, 12, 11};
  for (int i = 0; i < 3; ++i) {
    const auto spec = CodecSpec::hamming_secded(widths[i]);
    CHECK(frames[i] * spec.code_width <= 260);
    CHECK(160.0 / static_cast<double>(frames[i] * spec.code_width) >= 160.0 / 260.0);
  }
}

TEST_CASE("all-zero data encodes to the all-zero codeword") {
  const auto spec = CodecSpec::hamming_secded(11);
  CHECK(codec::encode_slice(Bits(11), spec).all_zero());
}

TEST_CASE("identity codec passes data through") {
  Rng rng(3);
  const auto spec = CodecSpec::identity(13);
  const Bits data = Bits::random(13, rng);
  CHECK(codec::encode_slice(data, spec) == data);
  const auto dec = codec::decode_slice(data, spec);
  CHECK(dec.data == data);
  CHECK(dec.status == DecodeStatus::clean);
}

TEST_CASE("width mismatches are rejected") {
  const auto spec = CodecSpec::hamming_secded(11);
  CHECK_THROWS(codec::encode_slice(Bits(12), spec));
  CHECK_THROWS(codec::decode_slice(Bits(15), spec));
}

TEST_CASE("k=11 exhaustive: clean, single-error correction, double-error detection") {
  const auto spec = CodecSpec::hamming_secded(11);
  for (std::uint64_t v = 0; v < (1u << 11); ++v) {
    const Bits data = Bits::from_u64(v, 11);
    const Bits word = codec::encode_slice(data, spec);

    const auto clean = codec::decode_slice(word, spec);
    REQUIRE(clean.status == DecodeStatus::clean);
    REQUIRE(clean.data == data);

    for (std::size_t i = 0; i < 16; ++i) {
      Bits flipped = word;
      flipped.flip(i);
      const auto dec = codec::decode_slice(flipped, spec);
      REQUIRE(dec.status == DecodeStatus::corrected);
      REQUIRE(dec.data == data);
    }
    for (std::size_t i = 0; i < 16; ++i) {
      for (std::size_t j = i + 1; j < 16; ++j) {
        Bits flipped = word;
        flipped.flip(i);
        flipped.flip(j);
        const auto dec = codec::decode_slice(flipped, spec);
        REQUIRE(dec.status == DecodeStatus::detected_uncorrectable);
      }
    }
  }
}

TEST_CASE("k=13 and k=12 spot checks with random single errors") {
  Rng rng(11);
  for (std::size_t k : {13u, 12u}) {
    const auto spec = CodecSpec::hamming_secded(k);
    for (int trial = 0; trial < 400; ++trial) {
      const Bits data = Bits::random(k, rng);
      Bits word = codec::encode_slice(data, spec);
      word.flip(rng.next_below(spec.code_width));
      const auto dec = codec::decode_slice(word, spec);
      CHECK(dec.status == DecodeStatus::corrected);
      CHECK(dec.data == data);
    }
  }
}

TEST_CASE("linearity: encode(x ^ y) == encode(x) ^ encode(y)") {
  Rng rng(13);
  const auto spec = CodecSpec::hamming_secded(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Bits x = Bits::random(13, rng);
    const Bits y = Bits::random(13, rng);
    CHECK(codec::encode_slice(x ^ y, spec) ==
          (codec::encode_slice(x, spec) ^ codec::encode_slice(y, spec)));
  }
}

TEST_CASE("minimum distance 4 at k=11") {
  const auto spec = CodecSpec::hamming_secded(11);
  std::size_t min_weight = 16;
  for (std::uint64_t v = 1; v < (1u << 11); ++v) {
    const Bits word = codec::encode_slice(Bits::from_u64(v, 11), spec);
    min_weight = std::min(min_weight, word.count_ones());
  }
  CHECK(min_weight == 4);
}
