#include "celab/sigchain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "celab/rng.hpp"

namespace celab::sigchain {

namespace {

constexpr std::array<std::uint8_t, 256> make_perm() {
  std::array<std::uint8_t, 256> t{};
  for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((167 * i + 13) & 0xff);
  return t;
}

constexpr std::array<std::uint8_t, 256> kPerm = make_perm();

std::uint8_t byte_chain(std::uint8_t prefix, std::span<const std::uint8_t> key,
                        std::span<const std::uint8_t> input) {
  std::uint8_t h = kPerm[prefix];  // h = 0 absorbed over the prefix byte
  for (std::uint8_t b : key) h = kPerm[static_cast<std::uint8_t>(h ^ b)];
  for (std::uint8_t b : input) h = kPerm[static_cast<std::uint8_t>(h ^ b)];
  return h;
}

std::vector<std::uint8_t> hash_bytes(std::span<const std::uint8_t> input,
                                     std::span<const std::uint8_t> key,
                                     std::size_t n_bytes) {
  std::vector<std::uint8_t> out(n_bytes);
  for (std::size_t j = 0; j < n_bytes; ++j) {
    out[j] = byte_chain(static_cast<std::uint8_t>(j), key, input);
  }
  return out;
}

Bits mask_for_context(const ChainContext& ctx, const KeyMaterial& key, std::size_t width) {
  const std::vector<std::uint8_t> input = {
      static_cast<std::uint8_t>(ctx.channel & 0xff),
      static_cast<std::uint8_t>((ctx.last_seq >> 8) & 0xff),
      static_cast<std::uint8_t>(ctx.last_seq & 0xff)};
  return pearson_hash(input, key.ptk, width);
}

}  // namespace

std::string to_string(FailReason reason) {
  switch (reason) {
    case FailReason::none: return "none";
    case FailReason::channel: return "channel";
    case FailReason::sequence: return "sequence";
    case FailReason::signature: return "signature";
  }
  return "unknown";
}

std::array<std::uint8_t, 6> ApIdentity::parse_mac(const std::string& text) {
  std::array<std::uint8_t, 6> mac{};
  unsigned v[6];
  if (std::sscanf(text.c_str(), "%x:%x:%x:%x:%x:%x", &v[0], &v[1], &v[2], &v[3],
                  &v[4], &v[5]) != 6) {
    throw std::invalid_argument("bad MAC address: " + text);
  }
  for (int i = 0; i < 6; ++i) {
    if (v[i] > 0xff) throw std::invalid_argument("bad MAC octet in: " + text);
    mac[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v[i]);
  }
  return mac;
}

KeyMaterial KeyMaterial::generate(Rng& rng) {
  auto bytes = [&rng](std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
    return out;
  };
  KeyMaterial key;
  key.private_key = bytes(32);
  key.public_key = key.private_key;  // keyed-tag stand-in: shared secret halves
  key.ptk = bytes(16);
  key.pmk = bytes(32);
  return key;
}

void KeyMaterial::validate() const {
  if (ptk.size() < 16) throw std::invalid_argument("KeyMaterial: ptk shorter than 16 bytes");
}

Bits pearson_hash(std::span<const std::uint8_t> input,
                  std::span<const std::uint8_t> key, std::size_t w) {
  if (w < 1 || w > 64) throw std::invalid_argument("pearson_hash: width out of [1, 64]");
  const std::size_t n_bytes = (w + 7) / 8;
  const auto bytes = hash_bytes(input, key, n_bytes);
  return Bits::from_bytes(bytes).slice(0, w);
}

SignMessage build_message(const ApIdentity& ap, std::uint64_t utc_time) {
  Bits bits;
  bits.append(Bits::from_bytes({ap.mac.begin(), ap.mac.end()}));
  bits.append(Bits::from_u64(utc_time, 64));
  return {bits};
}

Signature KeyedTagScheme::sign(const SignMessage& m, const KeyMaterial& key) const {
  if (key.private_key.empty()) throw std::invalid_argument("sign: missing private key");
  if (m.bits.size() != kMessageBits) throw std::invalid_argument("sign: message must be 112 bits");
  const auto msg = m.bits.to_bytes();
  return {Bits::from_bytes(hash_bytes(msg, key.private_key, kSignatureBits / 8))};
}

bool KeyedTagScheme::verify(const SignMessage& m, const Signature& sig,
                            const std::vector<std::uint8_t>& public_key) const {
  if (sig.bits.size() != kSignatureBits) {
    throw std::invalid_argument("verify: signature must be 160 bits");
  }
  if (public_key.empty()) throw std::invalid_argument("verify: missing public key");
  const auto msg = m.bits.to_bytes();
  const Bits expect = Bits::from_bytes(hash_bytes(msg, public_key, kSignatureBits / 8));
  return expect == sig.bits;
}

const SignatureScheme& default_scheme() {
  static const KeyedTagScheme scheme;
  return scheme;
}

Signature sign(const SignMessage& m, const KeyMaterial& key) {
  return default_scheme().sign(m, key);
}

bool verify_sig(const SignMessage& m, const Signature& sig,
                const std::vector<std::uint8_t>& public_key) {
  return default_scheme().verify(m, sig, public_key);
}

std::size_t slice_width_for_frames(std::size_t n_frames) {
  switch (n_frames) {
    case 13: return 13;
    case 14: return 12;
    case 15: return 11;
    default:
      throw std::invalid_argument("unsupported frame count: " + std::to_string(n_frames));
  }
}

SliceSet slice_signature(const Bits& bits, std::size_t n_frames) {
  const std::size_t width = slice_width_for_frames(n_frames);
  const std::size_t total = n_frames * width;
  if (bits.size() > total) {
    throw std::invalid_argument("slice_signature: input exceeds " + std::to_string(total) + " bits");
  }
  Bits padded = bits;
  const std::size_t pad = total - bits.size();
  padded.append(Bits(pad));

  SliceSet set;
  set.n_frames = n_frames;
  set.width = width;
  set.pad_bits = pad;
  set.slices.reserve(n_frames);
  for (std::size_t i = 1; i <= n_frames; ++i) {
    set.slices.push_back({i, padded.slice((i - 1) * width, width), i == n_frames, false});
  }
  return set;
}

Bits reassemble(const SliceSet& set) {
  if (set.slices.size() != set.n_frames) {
    throw std::invalid_argument("reassemble: slice count mismatch");
  }
  Bits all;
  for (std::size_t i = 0; i < set.n_frames; ++i) {
    const Slice& s = set.slices[i];
    if (s.index != i + 1) throw std::invalid_argument("reassemble: slices out of order");
    if (s.bits.size() != set.width) throw std::invalid_argument("reassemble: slice width mismatch");
    all.append(s.bits);
  }
  const std::size_t payload = all.size() - set.pad_bits;
  if (!all.slice(payload, set.pad_bits).all_zero()) {
    throw std::invalid_argument("reassemble: nonzero padding");
  }
  return all.slice(0, payload);
}

Slice mask_last_slice(const Slice& s, const ChainContext& ctx, const KeyMaterial& key) {
  if (!s.is_last) throw std::invalid_argument("mask_last_slice: not the last slice");
  if (s.masked) throw std::invalid_argument("mask_last_slice: already masked");
  Slice out = s;
  out.bits ^= mask_for_context(ctx, key, s.bits.size());
  out.masked = true;
  return out;
}

Slice switch_xor_transform(std::span<const Slice> remaining) {
  if (remaining.size() < 2) {
    throw std::invalid_argument("switch_xor_transform: needs >= 2 remaining slices");
  }
  Slice out = remaining[0];
  for (std::size_t i = 1; i < remaining.size(); ++i) {
    out.bits ^= remaining[i].bits;
  }
  return out;
}

Slice last_frame_switch(const Slice& p_last, const KeyMaterial& key) {
  if (!p_last.is_last) throw std::invalid_argument("last_frame_switch: not the last slice");
  Slice out = p_last;
  out.bits ^= pearson_hash({}, key.ptk, p_last.bits.size());
  return out;
}

VerifyResult reassemble_and_verify(const SliceSet& slices,
                                   const std::vector<std::uint8_t>& public_key,
                                   const ChainContext& ctx, const KeyMaterial& key,
                                   const SignMessage& m) {
  if (slices.slices.size() != slices.n_frames) {
    throw std::invalid_argument("verify: expected " + std::to_string(slices.n_frames) +
                                " slices, got " + std::to_string(slices.slices.size()));
  }
  std::vector<bool> seen(slices.n_frames + 1, false);
  for (const Slice& s : slices.slices) {
    if (s.index < 1 || s.index > slices.n_frames) {
      throw std::invalid_argument("verify: slice index out of range");
    }
    if (seen[s.index]) throw std::invalid_argument("verify: duplicate slice index");
    seen[s.index] = true;
  }

  if (slices.claimed_channel != ctx.channel) {
    return VerifyResult::failure(FailReason::channel);
  }
  if (slices.claimed_seq != ctx.last_seq) {
    return VerifyResult::failure(FailReason::sequence);
  }

  SliceSet unmasked = slices;
  std::sort(unmasked.slices.begin(), unmasked.slices.end(),
            [](const Slice& a, const Slice& b) { return a.index < b.index; });
  Slice& last = unmasked.slices.back();
  last.bits ^= mask_for_context(ctx, key, last.bits.size());
  last.masked = false;

  Bits payload;
  try {
    payload = reassemble(unmasked);
  } catch (const std::invalid_argument&) {
    // Nonzero padding or malformed layout: not a valid signature encoding.
    return VerifyResult::failure(FailReason::signature);
  }
  if (payload.size() != kSignatureBits) {
    return VerifyResult::failure(FailReason::signature);
  }
  if (!verify_sig(m, Signature{payload}, public_key)) {
    return VerifyResult::failure(FailReason::signature);
  }
  return VerifyResult::success();
}

SliceSet build_chain(const SignMessage& m, const KeyMaterial& key,
                     const ChainContext& ctx, std::size_t n_frames) {
  key.validate();
  const Signature sig = sign(m, key);
  SliceSet set = slice_signature(sig.bits, n_frames);
  set.slices.back() = mask_last_slice(set.slices.back(), ctx, key);
  set.claimed_channel = ctx.channel;
  set.claimed_seq = ctx.last_seq;
  return set;
}

SliceSet roaming_slices(const SignMessage& m, const KeyMaterial& key) {
  if (key.pmk.empty()) throw std::invalid_argument("roaming_slices: missing pmk");
  const auto msg = m.bits.to_bytes();
  const Bits tag = Bits::from_bytes(hash_bytes(msg, key.pmk, kSignatureBits / 8));
  return slice_signature(tag, kRoamingFrames);
}

bool roaming_verify(const std::vector<Slice>& offered, const SliceSet& local_hmac_slices) {
  if (offered.size() != 2) throw std::invalid_argument("roaming_verify: expected 2 slices");
  if (offered[0].index == offered[1].index) {
    throw std::invalid_argument("roaming_verify: duplicate indices");
  }
  for (const Slice& s : offered) {
    if (s.index < 1 || s.index > local_hmac_slices.n_frames) {
      throw std::invalid_argument("roaming_verify: index out of range");
    }
    if (local_hmac_slices.slices[s.index - 1].bits != s.bits) return false;
  }
  return true;
}

double guess_success_probability(std::size_t num_slices, std::size_t width, int limit) {
  if (limit < 1) throw std::invalid_argument("guess_success_probability: limit < 1");
  if (width < 1) throw std::invalid_argument("guess_success_probability: width < 1");
  const double per_slice = std::min(1.0, static_cast<double>(limit) * std::ldexp(1.0, -static_cast<int>(width)));
  return 1.0 - std::pow(1.0 - per_slice, static_cast<double>(num_slices));
}

}  // namespace celab::sigchain
