// Channel coding for signature slices: identity passthrough and a shortened
// systematic Hamming code with an overall parity bit (SECDED). Codeword
// layout is [data | hamming parity | overall parity]; data columns take the
// non-power-of-two syndrome values in increasing order.
#pragma once

#include <cstddef>
#include <string>

#include "celab/bits.hpp"

namespace celab::codec {

enum class Kind { identity, hamming_secded };

enum class DecodeStatus { clean, corrected, detected_uncorrectable };

struct CodecSpec {
  Kind kind = Kind::identity;
  std::size_t data_width = 0;  // k
  std::size_t code_width = 0;  // n

  static CodecSpec identity(std::size_t k);
  static CodecSpec hamming_secded(std::size_t k);
  static CodecSpec make(Kind kind, std::size_t k);
};

struct DecodeResult {
  Bits data;
  DecodeStatus status = DecodeStatus::clean;
};

// Number of Hamming parity bits for k data bits (excludes the overall bit).
std::size_t hamming_parity_bits(std::size_t k);

Bits encode_slice(const Bits& data, const CodecSpec& spec);
DecodeResult decode_slice(const Bits& word, const CodecSpec& spec);

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);

}  // namespace celab::codec
