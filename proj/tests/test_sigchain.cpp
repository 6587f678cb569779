#include <doctest.h>

#include <cmath>

#include "celab/rng.hpp"
#include "celab/sigchain.hpp"

using namespace celab;
using namespace celab::sigchain;

namespace {

KeyMaterial test_key(std::uint64_t seed = 1) {
  Rng rng(seed);
  return KeyMaterial::generate(rng);
}

ApIdentity test_ap() {
  ApIdentity ap;
  ap.mac = ApIdentity::parse_mac("aa:bb:cc:dd:ee:ff");
  ap.location = {43.08, -77.67, 150.0};
  return ap;
}

ChainContext test_ctx() {
  ChainContext ctx;
  ctx.channel = 6;
  ctx.last_seq = 1200;
  return ctx;
}

}  // namespace

TEST_CASE("build_message layout") {
  ApIdentity zero;
  CHECK(build_message(zero, 0).bits == Bits(112));

  ApIdentity ones;
  ones.mac = {0xff, 0xff, 0xff, 0xff, 0xff, 0xff};
  const Bits m1 = build_message(ones, 0).bits;
  CHECK(m1.size() == 112);
  CHECK(m1.slice(0, 48).count_ones() == 48);
  CHECK(m1.slice(48, 64).all_zero());

  // Independent oracle: concatenate the hex strings by hand
  // (1700000000 = 0x6553f100).
  const Bits expect = Bits::from_hex("aabbccddeeff000000006553f100", 112);
  CHECK(build_message(test_ap(), 1700000000).bits == expect);
}

TEST_CASE("sign is deterministic, 160 bits, and verifies") {
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);
  const Signature s1 = sign(m, key);
  const Signature s2 = sign(m, key);
  CHECK(s1.bits.size() == 160);
  CHECK(s1.bits == s2.bits);
  CHECK(verify_sig(m, s1, key.public_key));

  KeyMaterial no_priv = key;
  no_priv.private_key.clear();
  CHECK_THROWS(sign(m, no_priv));
  CHECK_THROWS(verify_sig(m, Signature{Bits(80)}, key.public_key));
}

TEST_CASE("every single-bit message perturbation breaks verification") {
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);
  const Signature sig = sign(m, key);
  for (std::size_t i = 0; i < 112; ++i) {
    SignMessage perturbed = m;
    perturbed.bits.flip(i);
    CHECK_FALSE(verify_sig(perturbed, sig, key.public_key));
  }
}

TEST_CASE("pearson hash fixed points from the permutation walk") {
  // pi(0) = 13
  CHECK(pearson_hash({}, {}, 8).to_u64() == 0x0d);
  // pi(13 ^ 1) = pi(12) = 225
  const std::vector<std::uint8_t> one = {0x01};
  CHECK(pearson_hash(one, {}, 8).to_u64() == 0xe1);

  const std::vector<std::uint8_t> input = {0x42, 0x17};
  const std::vector<std::uint8_t> key = {0x99};
  CHECK(pearson_hash(input, key, 13).size() == 13);
  CHECK(pearson_hash(input, key, 64).size() == 64);
  CHECK_THROWS(pearson_hash(input, key, 0));
  CHECK_THROWS(pearson_hash(input, key, 65));
  // High-order truncation: width w is a prefix of width 64.
  const Bits full = pearson_hash(input, key, 64);
  CHECK(pearson_hash(input, key, 13) == full.slice(0, 13));
}

TEST_CASE("slice widths and padding follow the frame table") {
  Rng rng(5);
  const Bits sig = Bits::random(160, rng);

  const SliceSet s13 = slice_signature(sig, 13);
  CHECK(s13.width == 13);
  CHECK(s13.slices.size() == 13);
  CHECK(s13.pad_bits == 9);

  const SliceSet s14 = slice_signature(sig, 14);
  CHECK(s14.width == 12);
  CHECK(s14.pad_bits == 8);

  const SliceSet s15 = slice_signature(sig, 15);
  CHECK(s15.width == 11);
  CHECK(s15.pad_bits == 5);

  CHECK(s13.slices.back().is_last);
  CHECK_FALSE(s13.slices.front().is_last);
  CHECK_THROWS(slice_signature(sig, 12));
  CHECK_THROWS(slice_signature(Bits(170), 13));
}

TEST_CASE("reassemble inverts slicing for every N") {
  Rng rng(6);
  for (std::size_t n : {13u, 14u, 15u}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Bits sig = Bits::random(160, rng);
      CHECK(reassemble(slice_signature(sig, n)) == sig);
    }
  }
}

TEST_CASE("mask_last_slice is a keyed involution") {
  Rng rng(8);
  const auto key = test_key();
  const auto ctx = test_ctx();
  SliceSet set = slice_signature(Bits::random(160, rng), 13);

  const Slice masked = mask_last_slice(set.slices.back(), ctx, key);
  CHECK(masked.masked);
  CHECK(masked.bits != set.slices.back().bits);

  Slice unmasked = masked;
  unmasked.masked = false;
  const Slice twice = mask_last_slice(unmasked, ctx, key);
  CHECK(twice.bits == set.slices.back().bits);

  CHECK_THROWS(mask_last_slice(set.slices.front(), ctx, key));
  CHECK_THROWS(mask_last_slice(masked, ctx, key));
}

TEST_CASE("honest chain verifies; wrong verifier context fails") {
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);
  const auto ctx = test_ctx();
  const SliceSet chain = build_chain(m, key, ctx, 13);

  CHECK(reassemble_and_verify(chain, key.public_key, ctx, key, m).ok);

  // Sweep all channel numbers and nearby sequence offsets at the verifier.
  for (int ch = 1; ch <= 14; ++ch) {
    if (ch == ctx.channel) continue;
    ChainContext wrong = ctx;
    wrong.channel = ch;
    const auto r = reassemble_and_verify(chain, key.public_key, wrong, key, m);
    CHECK_FALSE(r.ok);
    CHECK(r.reason == FailReason::channel);
  }
  for (int off = -5; off <= 5; ++off) {
    if (off == 0) continue;
    ChainContext wrong = ctx;
    wrong.last_seq += off;
    const auto r = reassemble_and_verify(chain, key.public_key, wrong, key, m);
    CHECK_FALSE(r.ok);
    CHECK(r.reason == FailReason::sequence);
  }
}

TEST_CASE("a relabeled chain fails the signature even when claims match") {
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);
  const auto ctx = test_ctx();
  SliceSet chain = build_chain(m, key, ctx, 13);
  // Adversary rewrites the plaintext claims to match a lured station.
  ChainContext lured = ctx;
  lured.channel = 11;
  chain.claimed_channel = 11;
  const auto r = reassemble_and_verify(chain, key.public_key, lured, key, m);
  CHECK_FALSE(r.ok);
  CHECK(r.reason == FailReason::signature);
}

TEST_CASE("per-slice corruption at every position fails verification") {
  Rng rng(10);
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);
  const auto ctx = test_ctx();
  const SliceSet chain = build_chain(m, key, ctx, 13);

  for (std::size_t i = 0; i < 13; ++i) {
    SliceSet corrupted = chain;
    Bits replacement;
    do {
      replacement = Bits::random(chain.width, rng);
    } while (replacement == chain.slices[i].bits);
    corrupted.slices[i].bits = replacement;
    const auto r = reassemble_and_verify(corrupted, key.public_key, ctx, key, m);
    CHECK_FALSE(r.ok);
    CHECK(r.reason == FailReason::signature);
  }
}

TEST_CASE("single bit flips, swaps, deletions, duplications all fail") {
  Rng rng(12);
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);
  const auto ctx = test_ctx();
  const SliceSet chain = build_chain(m, key, ctx, 13);

  for (std::size_t i = 0; i < 13; ++i) {
    SliceSet flipped = chain;
    flipped.slices[i].bits.flip(rng.next_below(chain.width));
    CHECK_FALSE(reassemble_and_verify(flipped, key.public_key, ctx, key, m).ok);
  }

  SliceSet swapped = chain;
  std::swap(swapped.slices[2].bits, swapped.slices[7].bits);
  CHECK_FALSE(reassemble_and_verify(swapped, key.public_key, ctx, key, m).ok);

  SliceSet missing = chain;
  missing.slices.erase(missing.slices.begin() + 4);
  CHECK_THROWS(reassemble_and_verify(missing, key.public_key, ctx, key, m));

  SliceSet duplicated = chain;
  duplicated.slices[4] = duplicated.slices[3];
  CHECK_THROWS(reassemble_and_verify(duplicated, key.public_key, ctx, key, m));
}

TEST_CASE("switch_xor_transform recovers the original slice at every position") {
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);

  for (std::size_t n : {13u, 14u, 15u}) {
    const Signature sig = sign(m, key);
    const SliceSet original = slice_signature(sig.bits, n);

    // Two-element sanity: P'_{N-1} = P_{N-1} ^ P_N.
    {
      std::vector<Slice> tail(original.slices.end() - 2, original.slices.end());
      const Slice combined = switch_xor_transform(tail);
      CHECK(combined.index == n - 1);
      CHECK(combined.bits == (tail[0].bits ^ tail[1].bits));
    }

    // Switch after slice `sw` (1-based); sw in 1..N-2 uses the XOR transform.
    for (std::size_t sw = 1; sw + 2 <= n; ++sw) {
      std::vector<Slice> transmitted = original.slices;
      const std::span<const Slice> remaining{original.slices.data() + sw,
                                             original.slices.size() - sw};
      transmitted[sw] = switch_xor_transform(remaining);

      // Station side: recover P_{sw+1} from the XOR of the later slices.
      Slice recovered = transmitted[sw];
      for (std::size_t j = sw + 1; j < n; ++j) recovered.bits ^= transmitted[j].bits;
      CHECK(recovered.bits == original.slices[sw].bits);
    }

    CHECK_THROWS(switch_xor_transform(
        std::span<const Slice>{original.slices.data() + n - 1, 1}));
  }
}

TEST_CASE("last_frame_switch hides and recovers the final slice with the PTK") {
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);
  ChainContext ctx = test_ctx();
  const SliceSet chain = build_chain(m, key, ctx, 13);

  const Slice hidden = last_frame_switch(chain.slices.back(), key);
  CHECK(hidden.bits != chain.slices.back().bits);
  CHECK(last_frame_switch(hidden, key).bits == chain.slices.back().bits);
  CHECK_THROWS(last_frame_switch(chain.slices.front(), key));

  // Honest station: undo the switch hash, then run normal verification.
  SliceSet received = chain;
  received.slices.back() = last_frame_switch(hidden, key);
  CHECK(reassemble_and_verify(received, key.public_key, ctx, key, m).ok);

  // A station holding the wrong PTK cannot recover the slice.
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    KeyMaterial wrong = key;
    wrong.ptk.clear();
    for (int i = 0; i < 16; ++i) {
      wrong.ptk.push_back(static_cast<std::uint8_t>(rng.next_u64() & 0xff));
    }
    if (wrong.ptk == key.ptk) continue;
    SliceSet bad = chain;
    bad.slices.back() = last_frame_switch(hidden, wrong);
    CHECK_FALSE(reassemble_and_verify(bad, key.public_key, ctx, key, m).ok);
  }
}

TEST_CASE("roaming verification accepts matching slices and rejects others") {
  Rng rng(22);
  const auto key = test_key();
  const auto m = build_message(test_ap(), 1700000000);
  const SliceSet local = roaming_slices(m, key);
  CHECK(local.n_frames == 13);

  std::vector<Slice> offered = {local.slices[2], local.slices[9]};
  CHECK(roaming_verify(offered, local));

  offered[1].bits.flip(3);
  CHECK_FALSE(roaming_verify(offered, local));

  std::vector<Slice> duplicate = {local.slices[4], local.slices[4]};
  CHECK_THROWS(roaming_verify(duplicate, local));

  // Adversarial pairs: expected success rate 2^-26; with 1e6 trials the
  // Poisson mean is ~0.015, so more than two hits flags a defect.
  std::size_t hits = 0;
  for (int trial = 0; trial < 1000000; ++trial) {
    std::vector<Slice> guess = {{3, Bits::random(13, rng), false, false},
                                {9, Bits::random(13, rng), false, false}};
    hits += roaming_verify(guess, local) ? 1 : 0;
  }
  CHECK(hits <= 2);
}

TEST_CASE("guess probability closed form") {
  // 12 slices of 20 bits, limit 3: the published 3.4e-5 operating point.
  const double p20 = guess_success_probability(12, 20, 3);
  CHECK(p20 == doctest::Approx(3.43e-5).epsilon(0.002));

  CHECK(guess_success_probability(1, 1, 1) == doctest::Approx(0.5));

  const double p13 = guess_success_probability(12, 13, 3);
  CHECK(p13 == doctest::Approx(4.39e-3).epsilon(0.002));

  CHECK_THROWS(guess_success_probability(12, 0, 3));
  CHECK_THROWS(guess_success_probability(12, 13, 0));
}

TEST_CASE("monte carlo guessing matches the closed form within 3 sigma") {
  // Value-level oracle: the adversary draws three distinct guesses per slice
  // and wins if any slice is hit.
  Rng rng(31);
  const std::size_t slices = 12;
  const std::size_t width = 13;
  const std::uint64_t trials = 10000000;
  const std::uint64_t space = 1ull << width;

  std::uint64_t wins = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    bool win = false;
    for (std::size_t s = 0; s < slices && !win; ++s) {
      const std::uint64_t target = rng.next_below(space);
      const std::uint64_t g1 = rng.next_below(space);
      std::uint64_t g2, g3;
      do { g2 = rng.next_below(space); } while (g2 == g1);
      do { g3 = rng.next_below(space); } while (g3 == g1 || g3 == g2);
      win = target == g1 || target == g2 || target == g3;
    }
    wins += win ? 1 : 0;
  }
  const double expect = guess_success_probability(slices, width, 3);
  const double mc = static_cast<double>(wins) / static_cast<double>(trials);
  const double sigma = std::sqrt(expect * (1.0 - expect) / static_cast<double>(trials));
  CHECK(std::fabs(mc - expect) <= 3.0 * sigma);
}
