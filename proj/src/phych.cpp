#include "celab/phych.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "celab/rng.hpp"
#include "celab/sigchain.hpp"

namespace celab::phych {

double flip_probability(const ChannelModel& model) {
  if (!std::isfinite(model.snr_db)) throw std::invalid_argument("flip_probability: snr not finite");
  const double gamma = std::pow(10.0, model.snr_db / 10.0);
  if (model.kind == ChannelKind::awgn) {
    // Q(sqrt(gamma)) = 0.5 erfc(sqrt(gamma/2))
    return 0.5 * std::erfc(std::sqrt(gamma / 2.0));
  }
  return 0.5 * (1.0 - std::sqrt(gamma / (2.0 + gamma)));
}

Bits transmit_bits(const Bits& bits, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("transmit_bits: p out of [0,1]");
  Bits out = bits;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.bernoulli(p)) out.flip(i);
  }
  return out;
}

Bits transmit_bits(const Bits& bits, const ChannelModel& model, Rng& rng) {
  return transmit_bits(bits, flip_probability(model), rng);
}

namespace {

struct PointStats {
  std::uint64_t data_bits = 0;
  std::uint64_t bit_errors = 0;
  std::uint64_t chains = 0;
  std::uint64_t chains_ok = 0;
};

void run_point(double p, std::size_t n_frames, codec::Kind codec_kind,
               std::uint64_t trials, Rng rng, PointStats& stats) {
  const std::size_t width = sigchain::slice_width_for_frames(n_frames);
  const auto spec = codec::CodecSpec::make(codec_kind, width);
  if (spec.code_width > kCapacityBitsPerPreamble) {
    throw std::invalid_argument("codeword exceeds preamble capacity");
  }
  for (std::uint64_t t = 0; t < trials; ++t) {
    const Bits sig = Bits::random(sigchain::kSignatureBits, rng);
    const auto set = sigchain::slice_signature(sig, n_frames);
    bool chain_ok = true;
    for (const auto& slice : set.slices) {
      const Bits sent = codec::encode_slice(slice.bits, spec);
      const Bits received = transmit_bits(sent, p, rng);
      const auto decoded = codec::decode_slice(received, spec);
      stats.data_bits += width;
      stats.bit_errors += decoded.data.hamming_distance(slice.bits);
      // An uncorrectable slice rejects the chain even if its data survived.
      if (decoded.status == codec::DecodeStatus::detected_uncorrectable ||
          decoded.data != slice.bits) {
        chain_ok = false;
      }
    }
    stats.chains += 1;
    stats.chains_ok += chain_ok ? 1 : 0;
  }
}

}  // namespace

SweepResult ber_sr_sweep(const std::vector<double>& snrs_db, ChannelKind kind,
                         std::optional<std::size_t> n_frames, codec::Kind codec_kind,
                         std::uint64_t trials, std::uint64_t rng_seed) {
  if (trials < 1) throw std::invalid_argument("ber_sr_sweep: trials < 1");
  SweepResult result;
  const Rng base(rng_seed);
  std::vector<std::size_t> frame_counts;
  if (n_frames) {
    frame_counts.push_back(*n_frames);
  } else {
    frame_counts = {13, 14, 15};
  }
  for (std::size_t si = 0; si < snrs_db.size(); ++si) {
    const double p = flip_probability({kind, snrs_db[si]});
    PointStats stats;
    for (std::size_t fi = 0; fi < frame_counts.size(); ++fi) {
      run_point(p, frame_counts[fi], codec_kind, trials,
                base.substream(si * 16 + fi), stats);
    }
    SweepRow row;
    row.snr_db = snrs_db[si];
    row.coded = codec_kind != codec::Kind::identity;
    row.ber = stats.data_bits ? static_cast<double>(stats.bit_errors) /
                                    static_cast<double>(stats.data_bits)
                              : 0.0;
    row.sr = stats.chains ? static_cast<double>(stats.chains_ok) /
                                static_cast<double>(stats.chains)
                          : 0.0;
    row.trials = stats.chains;
    result.rows.push_back(row);
  }
  return result;
}

std::string to_string(ChannelKind kind) {
  return kind == ChannelKind::awgn ? "awgn" : "rayleigh";
}

ChannelKind channel_kind_from_string(const std::string& name) {
  if (name == "awgn") return ChannelKind::awgn;
  if (name == "rayleigh") return ChannelKind::rayleigh;
  throw std::invalid_argument("unknown channel kind: " + name);
}

std::string render_sweep_csv(const SweepResult& result) {
  std::string out = "snr_db,coded,ber,sr,trials\n";
  char line[128];
  for (const auto& row : result.rows) {
    std::snprintf(line, sizeof(line), "%.6g,%d,%.6g,%.6g,%llu\n", row.snr_db,
                  row.coded ? 1 : 0, row.ber, row.sr,
                  static_cast<unsigned long long>(row.trials));
    out += line;
  }
  return out;
}

}  // namespace celab::phych
