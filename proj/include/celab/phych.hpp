// Bit-level channel abstraction for preamble-embedded bits: AWGN and
// Rayleigh flip probabilities, seeded bit transmission, and Monte Carlo
// BER / signature success-rate sweeps over the sliced-signature pipeline.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "celab/bits.hpp"
#include "celab/codec.hpp"

namespace celab::phych {

inline constexpr std::size_t kCapacityBitsPerPreamble = 20;

enum class ChannelKind { awgn, rayleigh };

struct ChannelModel {
  ChannelKind kind = ChannelKind::awgn;
  double snr_db = 0.0;
};

struct SweepRow {
  double snr_db = 0.0;
  bool coded = false;
  double ber = 0.0;
  double sr = 0.0;
  std::uint64_t trials = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Per-bit flip probability at the model's SNR.
double flip_probability(const ChannelModel& model);

// Each bit flipped independently with probability p.
Bits transmit_bits(const Bits& bits, double p, Rng& rng);
Bits transmit_bits(const Bits& bits, const ChannelModel& model, Rng& rng);

// Monte Carlo sweep: per SNR point, `trials` random 160-bit signatures are
// sliced, coded per `spec`, sent through the channel, decoded and
// reassembled. BER counts post-decode data-bit errors; SR counts chains with
// every data bit exact. n_frames empty averages over N in {13, 14, 15}.
SweepResult ber_sr_sweep(const std::vector<double>& snrs_db, ChannelKind kind,
                         std::optional<std::size_t> n_frames, codec::Kind codec_kind,
                         std::uint64_t trials, std::uint64_t rng_seed);

std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& name);

std::string render_sweep_csv(const SweepResult& result);

}  // namespace celab::phych
