#include "celab/codec.hpp"

#include <stdexcept>
#include <vector>

namespace celab::codec {

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Syndrome values assigned to the k data columns: the non-power-of-two
// positions of the underlying Hamming code, in increasing order.
std::vector<std::size_t> data_syndromes(std::size_t k) {
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t v = 3; out.size() < k; ++v) {
    if (!is_power_of_two(v)) out.push_back(v);
  }
  return out;
}

}  // namespace

std::size_t hamming_parity_bits(std::size_t k) {
  std::size_t m = 2;
  while ((std::size_t{1} << m) < k + m + 1) ++m;
  return m;
}

CodecSpec CodecSpec::identity(std::size_t k) { return {Kind::identity, k, k}; }

CodecSpec CodecSpec::hamming_secded(std::size_t k) {
  if (k == 0) throw std::invalid_argument("CodecSpec: k == 0");
  return {Kind::hamming_secded, k, k + hamming_parity_bits(k) + 1};
}

CodecSpec CodecSpec::make(Kind kind, std::size_t k) {
  return kind == Kind::identity ? identity(k) : hamming_secded(k);
}

Bits encode_slice(const Bits& data, const CodecSpec& spec) {
  if (data.size() != spec.data_width) {
    throw std::invalid_argument("encode_slice: data width mismatch");
  }
  if (spec.kind == Kind::identity) return data;

  const std::size_t k = spec.data_width;
  const std::size_t m = hamming_parity_bits(k);
  const auto syn = data_syndromes(k);

  Bits word(spec.code_width);
  for (std::size_t i = 0; i < k; ++i) word.set(i, data.get(i));
  for (std::size_t j = 0; j < m; ++j) {
    bool p = false;
    for (std::size_t i = 0; i < k; ++i) {
      if ((syn[i] >> j) & 1u) p ^= data.get(i);
    }
    word.set(k + j, p);
  }
  bool overall = false;
  for (std::size_t i = 0; i + 1 < spec.code_width; ++i) overall ^= word.get(i);
  word.set(spec.code_width - 1, overall);
  return word;
}

DecodeResult decode_slice(const Bits& word, const CodecSpec& spec) {
  if (word.size() != spec.code_width) {
    throw std::invalid_argument("decode_slice: word width mismatch");
  }
  if (spec.kind == Kind::identity) return {word, DecodeStatus::clean};

  const std::size_t k = spec.data_width;
  const std::size_t m = hamming_parity_bits(k);
  const auto syn = data_syndromes(k);

  std::size_t s = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (word.get(i)) s ^= syn[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (word.get(k + j)) s ^= (std::size_t{1} << j);
  }
  bool overall = false;
  for (std::size_t i = 0; i < spec.code_width; ++i) overall ^= word.get(i);

  Bits data = word.slice(0, k);
  if (s == 0 && !overall) return {data, DecodeStatus::clean};
  if (s == 0 && overall) {
    // Error confined to the overall parity bit; data intact.
    return {data, DecodeStatus::corrected};
  }
  if (!overall) {
    // Nonzero syndrome with even parity: two bit errors.
    return {data, DecodeStatus::detected_uncorrectable};
  }
  // Single error at the column whose syndrome equals s.
  for (std::size_t i = 0; i < k; ++i) {
    if (syn[i] == s) {
      data.flip(i);
      return {data, DecodeStatus::corrected};
    }
  }
  if (is_power_of_two(s) && (s >> m) == 0) {
    // Parity column; data untouched.
    return {data, DecodeStatus::corrected};
  }
  // Syndrome points at a column the shortened code does not use.
  return {data, DecodeStatus::detected_uncorrectable};
}

std::string to_string(Kind kind) {
  return kind == Kind::identity ? "identity" : "hamming_secded";
}

Kind kind_from_string(const std::string& name) {
  if (name == "identity") return Kind::identity;
  if (name == "hamming_secded") return Kind::hamming_secded;
  throw std::invalid_argument("unknown codec kind: " + name);
}

}  // namespace celab::codec
