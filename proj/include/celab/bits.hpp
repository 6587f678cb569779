// Variable-length bit strings with value semantics. Bit 0 is the most
// significant bit; hex/byte conversions treat the string as a big-endian
// integer left-padded with zeros to the nibble/byte boundary.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace celab {

class Rng;

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n_bits) : bits_(n_bits, 0) {}

  static Bits from_hex(std::string_view hex, std::size_t width);
  static Bits from_u64(std::uint64_t value, std::size_t width);
  static Bits from_bytes(const std::vector<std::uint8_t>& bytes);
  static Bits random(std::size_t n_bits, Rng& rng);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  bool get(std::size_t i) const { return bits_.at(i) != 0; }
  void set(std::size_t i, bool v) { bits_.at(i) = v ? 1 : 0; }
  void flip(std::size_t i) { bits_.at(i) ^= 1; }

  void append(const Bits& other);
  void append_bit(bool v) { bits_.push_back(v ? 1 : 0); }
  Bits slice(std::size_t pos, std::size_t len) const;

  Bits& operator^=(const Bits& other);
  friend Bits operator^(Bits a, const Bits& b) { return a ^= b; }

  bool operator==(const Bits& other) const = default;

  bool all_zero() const;
  std::size_t count_ones() const;
  std::size_t hamming_distance(const Bits& other) const;

  std::string to_hex() const;
  std::vector<std::uint8_t> to_bytes() const;
  std::uint64_t to_u64() const;
  std::string to_bin() const;

 private:
  std::vector<std::uint8_t> bits_;  // one bit per element, MSB first
};

}  // namespace celab
