// Signature chaining across connection-establishment frame preambles:
// message construction, signing, slicing, last-slice masking with hashed
// channel/sequence numbers, channel-switch XOR tracking, reassembly and
// verification, roaming spot checks, and the slice-guessing probability.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "celab/bits.hpp"

namespace celab {
class Rng;
}

namespace celab::sigchain {

inline constexpr std::size_t kSignatureBits = 160;
inline constexpr std::size_t kMessageBits = 112;
inline constexpr int kDefaultAttemptLimit = 3;
inline constexpr std::size_t kRoamingFrames = 13;

struct Location {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;
};

struct ApIdentity {
  std::array<std::uint8_t, 6> mac{};  // 48-bit identifier
  Location location;
  std::string key_handle;

  static std::array<std::uint8_t, 6> parse_mac(const std::string& text);
};

struct KeyMaterial {
  std::vector<std::uint8_t> public_key;
  std::vector<std::uint8_t> private_key;
  std::vector<std::uint8_t> ptk;  // pairwise transient key, >= 16 bytes
  std::vector<std::uint8_t> pmk;

  static KeyMaterial generate(Rng& rng);
  void validate() const;
};

struct SignMessage {
  Bits bits;  // mac(48) || utc_time(64), big-endian field order
};

struct Signature {
  Bits bits;  // exactly 160 bits
};

struct Slice {
  std::size_t index = 0;  // 1..N
  Bits bits;
  bool is_last = false;
  bool masked = false;
};

struct SliceSet {
  std::size_t n_frames = 0;  // N in {13, 14, 15}
  std::size_t width = 0;     // bits per slice
  std::vector<Slice> slices;
  std::size_t pad_bits = 0;
  // Plaintext frame claims the chain travels with: the channel the frames
  // are transmitted on and the sequence number of the final frame. The
  // last-slice mask binds them cryptographically.
  int claimed_channel = 0;
  int claimed_seq = 0;
};

struct ChannelSwitch {
  std::size_t after_index = 0;
  int new_channel = 0;
  bool valid = false;
};

struct ChainContext {
  int channel = 1;        // operating channel number
  int last_seq = 0;       // sequence number of EAPOL3
  int attempts_left = kDefaultAttemptLimit;
  std::vector<ChannelSwitch> switch_log;
};

enum class FailReason { none, channel, sequence, signature };

struct VerifyResult {
  bool ok = false;
  FailReason reason = FailReason::none;

  static VerifyResult success() { return {true, FailReason::none}; }
  static VerifyResult failure(FailReason r) { return {false, r}; }
};

std::string to_string(FailReason reason);

// --- signature scheme -------------------------------------------------------

class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual Signature sign(const SignMessage& m, const KeyMaterial& key) const = 0;
  virtual bool verify(const SignMessage& m, const Signature& sig,
                      const std::vector<std::uint8_t>& public_key) const = 0;
  virtual std::string name() const = 0;
};

// Deterministic keyed-tag stand-in: 160-bit tag over the message, verified
// with the paired public half. A pairing-based scheme can drop in behind
// the same interface.
class KeyedTagScheme final : public SignatureScheme {
 public:
  Signature sign(const SignMessage& m, const KeyMaterial& key) const override;
  bool verify(const SignMessage& m, const Signature& sig,
              const std::vector<std::uint8_t>& public_key) const override;
  std::string name() const override { return "keyed-tag"; }
};

const SignatureScheme& default_scheme();

// --- Pearson hash variant ----------------------------------------------------

// Keyed byte-oriented hash: output byte j absorbs (j) || key || input through
// the fixed permutation pi(i) = (167*i + 13) mod 256; the concatenated bytes
// are truncated to the w highest-order bits. 1 <= w <= 64.
Bits pearson_hash(std::span<const std::uint8_t> input,
                  std::span<const std::uint8_t> key, std::size_t w);

// --- operations --------------------------------------------------------------

SignMessage build_message(const ApIdentity& ap, std::uint64_t utc_time);

Signature sign(const SignMessage& m, const KeyMaterial& key);
bool verify_sig(const SignMessage& m, const Signature& sig,
                const std::vector<std::uint8_t>& public_key);

std::size_t slice_width_for_frames(std::size_t n_frames);
SliceSet slice_signature(const Bits& bits, std::size_t n_frames);
Bits reassemble(const SliceSet& set);  // strips tail padding, checks zeros

Slice mask_last_slice(const Slice& s, const ChainContext& ctx, const KeyMaterial& key);
Slice switch_xor_transform(std::span<const Slice> remaining);
Slice last_frame_switch(const Slice& p_last, const KeyMaterial& key);

VerifyResult reassemble_and_verify(const SliceSet& slices,
                                   const std::vector<std::uint8_t>& public_key,
                                   const ChainContext& ctx, const KeyMaterial& key,
                                   const SignMessage& m);

// AP-side helper: sign, slice and mask a full chain bound to ctx.
SliceSet build_chain(const SignMessage& m, const KeyMaterial& key,
                     const ChainContext& ctx, std::size_t n_frames);

// Roaming: HMAC chain over the PMK, checked by offering two slices.
SliceSet roaming_slices(const SignMessage& m, const KeyMaterial& key);
bool roaming_verify(const std::vector<Slice>& offered, const SliceSet& local_hmac_slices);

double guess_success_probability(std::size_t num_slices, std::size_t width, int limit);

}  // namespace celab::sigchain
