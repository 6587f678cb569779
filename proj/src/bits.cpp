#include "celab/bits.hpp"

#include <algorithm>
#include <stdexcept>

#include "celab/rng.hpp"

namespace celab {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bits Bits::from_hex(std::string_view hex, std::size_t width) {
  const std::size_t want_digits = (width + 3) / 4;
  if (hex.size() != want_digits) {
    throw std::invalid_argument("Bits::from_hex: expected " +
                                std::to_string(want_digits) + " hex digits for width " +
                                std::to_string(width) + ", got " +
                                std::to_string(hex.size()));
  }
  Bits out(width);
  // Total nibble bits minus width leading pad bits.
  const std::size_t pad = want_digits * 4 - width;
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const int v = hex_digit(hex[d]);
    if (v < 0) throw std::invalid_argument("Bits::from_hex: bad hex digit");
    for (int b = 0; b < 4; ++b) {
      const std::size_t pos = d * 4 + static_cast<std::size_t>(b);
      const bool bit = (v >> (3 - b)) & 1;
      if (pos < pad) {
        if (bit) throw std::invalid_argument("Bits::from_hex: value wider than width");
      } else {
        out.set(pos - pad, bit);
      }
    }
  }
  return out;
}

Bits Bits::from_u64(std::uint64_t value, std::size_t width) {
  if (width > 64) throw std::invalid_argument("Bits::from_u64: width > 64");
  if (width < 64 && (value >> width) != 0) {
    throw std::invalid_argument("Bits::from_u64: value wider than width");
  }
  Bits out(width);
  for (std::size_t i = 0; i < width; ++i) {
    out.set(i, (value >> (width - 1 - i)) & 1u);
  }
  return out;
}

Bits Bits::from_bytes(const std::vector<std::uint8_t>& bytes) {
  Bits out(bytes.size() * 8);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    for (int b = 0; b < 8; ++b) {
      out.set(i * 8 + static_cast<std::size_t>(b), (bytes[i] >> (7 - b)) & 1u);
    }
  }
  return out;
}

Bits Bits::random(std::size_t n_bits, Rng& rng) {
  Bits out(n_bits);
  for (std::size_t i = 0; i < n_bits; ++i) out.set(i, rng.next_u64() & 1u);
  return out;
}

void Bits::append(const Bits& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

Bits Bits::slice(std::size_t pos, std::size_t len) const {
  if (pos + len > bits_.size()) throw std::out_of_range("Bits::slice: out of range");
  Bits out(len);
  std::copy(bits_.begin() + static_cast<std::ptrdiff_t>(pos),
            bits_.begin() + static_cast<std::ptrdiff_t>(pos + len), out.bits_.begin());
  return out;
}

Bits& Bits::operator^=(const Bits& other) {
  if (other.bits_.size() != bits_.size()) {
    throw std::invalid_argument("Bits::operator^=: width mismatch");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] ^= other.bits_[i];
  return *this;
}

bool Bits::all_zero() const {
  return std::all_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b == 0; });
}

std::size_t Bits::count_ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::size_t Bits::hamming_distance(const Bits& other) const {
  if (other.size() != size()) throw std::invalid_argument("hamming_distance: width mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) d += bits_[i] != other.bits_[i];
  return d;
}

std::string Bits::to_hex() const {
  static const char* kDigits = "0123456789abcdef";
  const std::size_t digits = (size() + 3) / 4;
  const std::size_t pad = digits * 4 - size();
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    int v = 0;
    for (int b = 0; b < 4; ++b) {
      const std::size_t pos = d * 4 + static_cast<std::size_t>(b);
      const bool bit = pos >= pad && get(pos - pad);
      v = (v << 1) | (bit ? 1 : 0);
    }
    out[d] = kDigits[v];
  }
  return out;
}

std::vector<std::uint8_t> Bits::to_bytes() const {
  const std::size_t n_bytes = (size() + 7) / 8;
  const std::size_t pad = n_bytes * 8 - size();
  std::vector<std::uint8_t> out(n_bytes, 0);
  for (std::size_t i = 0; i < size(); ++i) {
    if (!get(i)) continue;
    const std::size_t pos = i + pad;
    out[pos / 8] |= static_cast<std::uint8_t>(1u << (7 - pos % 8));
  }
  return out;
}

std::uint64_t Bits::to_u64() const {
  if (size() > 64) throw std::invalid_argument("Bits::to_u64: width > 64");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < size(); ++i) v = (v << 1) | (get(i) ? 1u : 0u);
  return v;
}

std::string Bits::to_bin() const {
  std::string out(size(), '0');
  for (std::size_t i = 0; i < size(); ++i) out[i] = get(i) ? '1' : '0';
  return out;
}

}  // namespace celab
