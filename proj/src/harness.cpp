#include "celab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "celab/rng.hpp"

namespace celab::harness {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// --- config parsing ----------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config." + path + ": " + what);
}

const json* find(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& path, double fallback) {
  if (!j.is_number()) fail(path, "expected a number");
  (void)fallback;
  return j.get<double>();
}

void parse_jitter(const json& j, const std::string& path, timebound::JitterDist& out) {
  if (!j.is_object()) fail(path, "expected an object");
  if (const json* v = find(j, "mean_ms")) out.mean_ms = get_number(*v, path + ".mean_ms", 0);
  if (const json* v = find(j, "stddev_ms")) out.stddev_ms = get_number(*v, path + ".stddev_ms", 0);
  if (const json* v = find(j, "min_ms")) out.min_ms = get_number(*v, path + ".min_ms", 0);
  if (const json* v = find(j, "max_ms")) out.max_ms = get_number(*v, path + ".max_ms", 0);
}

void parse_timing(const json& j, timebound::TimingParams& out) {
  if (!j.is_object()) fail("timing", "expected an object");
  if (const json* v = find(j, "d_m")) out.d_m = get_number(*v, "timing.d_m", 0);
  if (const json* v = find(j, "d_a1_m")) out.d_a1_m = get_number(*v, "timing.d_a1_m", 0);
  if (const json* v = find(j, "d_a2_m")) out.d_a2_m = get_number(*v, "timing.d_a2_m", 0);
  if (const json* v = find(j, "t_other")) parse_jitter(*v, "timing.t_other", out.t_other);
  if (const json* v = find(j, "t_other_adv")) {
    parse_jitter(*v, "timing.t_other_adv", out.t_other_adv);
  }
  if (const json* v = find(j, "t_alter_ms")) out.t_alter_ms = get_number(*v, "timing.t_alter_ms", 0);
  if (const json* v = find(j, "t_in_ms")) out.t_in_ms = get_number(*v, "timing.t_in_ms", 0);
  if (const json* v = find(j, "inter_frame_mean_ms")) {
    out.inter_frame_mean_ms = get_number(*v, "timing.inter_frame_mean_ms", 0);
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n_frames != 0 && (n_frames < 13 || n_frames > 15)) {
    fail("n_frames", "must be 13, 14, 15, or 0 for the averaged sweep");
  }
  if (n_frames != 0 && effective_frames() > 15) {
    fail("extra_eap_frames", "n_frames + 1 exceeds the 15-frame slice table");
  }
  if (trials < 1) fail("trials", "must be >= 1");
  if (snrs_db.empty()) fail("snrs_db", "must not be empty");
  for (double s : snrs_db) {
    if (!std::isfinite(s)) fail("snrs_db", "entries must be finite");
  }
  if (!std::isfinite(channel.snr_db)) fail("channel.snr_db", "must be finite");
  if (costs.sign_ms < 0 || costs.verify_ms < 0 || costs.extract_per_slice_ms < 0 ||
      costs.base_ce_ms < 0) {
    fail("costs", "constants must be >= 0");
  }
  if (channel_number < 1 || channel_number > 14) fail("channel_number", "must be in 1..14");
  if (eapol3_seq < 0 || eapol3_seq > 0xffff) fail("eapol3_seq", "must fit 16 bits");
  if (fsm.max_depth < 1) fail("fsm.max_depth", "must be >= 1");
  if (pca.k < 1) fail("pca.k", "must be >= 1");
  if (detector.train_per_class < 2 || detector.test_per_class < 1) {
    fail("detector", "train_per_class >= 2 and test_per_class >= 1 required");
  }
  try {
    timing.validate();
  } catch (const std::invalid_argument& e) {
    fail("timing", e.what());
  }
  if (adversary) {
    if (adversary->d_a1_m + adversary->d_a2_m < timing.d_m) {
      fail("adversary", "relay path shorter than direct path");
    }
    if (adversary->t_alter_ms < 0) fail("adversary.t_alter_ms", "must be >= 0");
  }
  // Coded slices must still fit the preamble budget.
  if (n_frames != 0) {
    const auto width = sigchain::slice_width_for_frames(effective_frames());
    const auto spec = codec::CodecSpec::make(codec_kind, width);
    if (spec.code_width > phych::kCapacityBitsPerPreamble) {
      fail("codec", "codeword exceeds the 20-bit preamble capacity");
    }
    if (effective_frames() * spec.code_width > 260) {
      fail("codec", "coded chain exceeds the 260-bit budget");
    }
  }
}

ScenarioConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ScenarioConfig cfg;
  if (const json* v = find(j, "n_frames")) {
    if (!v->is_number_unsigned()) fail("n_frames", "expected an unsigned integer");
    cfg.n_frames = v->get<std::size_t>();
  }
  if (const json* v = find(j, "extra_eap_frames")) {
    if (!v->is_boolean()) fail("extra_eap_frames", "expected a boolean");
    cfg.extra_eap_frames = v->get<bool>();
  }
  if (const json* v = find(j, "codec")) {
    if (!v->is_object()) fail("codec", "expected an object");
    if (const json* k = find(*v, "kind")) {
      if (!k->is_string()) fail("codec.kind", "expected a string");
      try {
        cfg.codec_kind = codec::kind_from_string(k->get<std::string>());
      } catch (const std::invalid_argument& e) {
        fail("codec.kind", e.what());
      }
    }
  }
  if (const json* v = find(j, "channel")) {
    if (!v->is_object()) fail("channel", "expected an object");
    if (const json* k = find(*v, "kind")) {
      if (!k->is_string()) fail("channel.kind", "expected a string");
      try {
        cfg.channel.kind = phych::channel_kind_from_string(k->get<std::string>());
      } catch (const std::invalid_argument& e) {
        fail("channel.kind", e.what());
      }
    }
    if (const json* s = find(*v, "snr_db")) cfg.channel.snr_db = get_number(*s, "channel.snr_db", 0);
  }
  if (const json* v = find(j, "snrs_db")) {
    if (!v->is_array()) fail("snrs_db", "expected an array");
    cfg.snrs_db.clear();
    for (const auto& s : *v) cfg.snrs_db.push_back(get_number(s, "snrs_db[]", 0));
  }
  if (const json* v = find(j, "trials")) {
    if (!v->is_number_unsigned()) fail("trials", "expected an unsigned integer");
    cfg.trials = v->get<std::uint64_t>();
  }
  if (const json* v = find(j, "timing")) parse_timing(*v, cfg.timing);
  if (const json* v = find(j, "adversary"); v && !v->is_null()) {
    if (!v->is_object()) fail("adversary", "expected an object or null");
    AdversaryConfig adv;
    if (const json* a = find(*v, "action")) {
      if (!a->is_string()) fail("adversary.action", "expected a string");
      try {
        adv.action = protofsm::action_from_string(a->get<std::string>());
      } catch (const std::invalid_argument& e) {
        fail("adversary.action", e.what());
      }
    }
    if (const json* a = find(*v, "d_a1_m")) adv.d_a1_m = get_number(*a, "adversary.d_a1_m", 0);
    if (const json* a = find(*v, "d_a2_m")) adv.d_a2_m = get_number(*a, "adversary.d_a2_m", 0);
    if (const json* a = find(*v, "t_alter_ms")) {
      adv.t_alter_ms = get_number(*a, "adversary.t_alter_ms", 0);
    }
    cfg.adversary = adv;
  }
  if (const json* v = find(j, "detector")) {
    if (!v->is_object()) fail("detector", "expected an object");
    if (const json* k = find(*v, "kind")) {
      if (!k->is_string()) fail("detector.kind", "expected a string");
      const auto name = k->get<std::string>();
      if (name == "threshold") cfg.detector.kind = timebound::DetectorKind::threshold;
      else if (name == "forest") cfg.detector.kind = timebound::DetectorKind::forest;
      else fail("detector.kind", "expected 'threshold' or 'forest'");
    }
    if (const json* t = find(*v, "trees")) {
      if (!t->is_number_unsigned()) fail("detector.trees", "expected an unsigned integer");
      cfg.detector.forest.trees = t->get<std::size_t>();
    }
    if (const json* t = find(*v, "max_depth")) {
      if (!t->is_number_unsigned()) fail("detector.max_depth", "expected an unsigned integer");
      cfg.detector.forest.max_depth = t->get<std::size_t>();
    }
    if (const json* t = find(*v, "train_per_class")) {
      if (!t->is_number_unsigned()) fail("detector.train_per_class", "expected an unsigned integer");
      cfg.detector.train_per_class = t->get<std::size_t>();
    }
    if (const json* t = find(*v, "test_per_class")) {
      if (!t->is_number_unsigned()) fail("detector.test_per_class", "expected an unsigned integer");
      cfg.detector.test_per_class = t->get<std::size_t>();
    }
  }
  if (const json* v = find(j, "fsm")) {
    if (!v->is_object()) fail("fsm", "expected an object");
    if (const json* d = find(*v, "max_depth")) {
      if (!d->is_number_unsigned()) fail("fsm.max_depth", "expected an unsigned integer");
      cfg.fsm.max_depth = d->get<std::size_t>();
    }
    if (const json* d = find(*v, "defenses")) {
      if (!d->is_array()) fail("fsm.defenses", "expected an array of names");
      cfg.fsm.defenses = {false, false, false, false};
      for (const auto& name : *d) {
        if (!name.is_string()) fail("fsm.defenses[]", "expected a string");
        const auto s = name.get<std::string>();
        if (s == "signature") cfg.fsm.defenses.signature = true;
        else if (s == "time_bound") cfg.fsm.defenses.time_bound = true;
        else if (s == "seq_check") cfg.fsm.defenses.seq_check = true;
        else if (s == "channel_check") cfg.fsm.defenses.channel_check = true;
        else fail("fsm.defenses[]", "unknown defense: " + s);
      }
    }
    if (const json* d = find(*v, "actions")) {
      if (!d->is_array()) fail("fsm.actions", "expected an array of names");
      cfg.fsm.actions.clear();
      for (const auto& name : *d) {
        if (!name.is_string()) fail("fsm.actions[]", "expected a string");
        try {
          cfg.fsm.actions.push_back(protofsm::action_from_string(name.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          fail("fsm.actions[]", e.what());
        }
      }
    }
    if (const json* d = find(*v, "pairs")) {
      if (!d->is_boolean()) fail("fsm.pairs", "expected a boolean");
      cfg.fsm.pairs = d->get<bool>();
    }
  }
  if (const json* v = find(j, "pca")) {
    if (!v->is_object()) fail("pca", "expected an object");
    if (const json* k = find(*v, "k")) {
      if (!k->is_number_unsigned()) fail("pca.k", "expected an unsigned integer");
      cfg.pca.k = k->get<std::size_t>();
    }
    if (const json* k = find(*v, "input_csv")) {
      if (!k->is_string()) fail("pca.input_csv", "expected a string path");
      cfg.pca.input_csv = k->get<std::string>();
    }
    if (const json* k = find(*v, "per_ap")) {
      if (!k->is_number_unsigned()) fail("pca.per_ap", "expected an unsigned integer");
      cfg.pca.per_ap = k->get<std::size_t>();
    }
    if (const json* k = find(*v, "target")) {
      if (!k->is_string()) fail("pca.target", "expected a string");
      const auto t = k->get<std::string>();
      if (t != "ap" && t != "frame_class") fail("pca.target", "expected 'ap' or 'frame_class'");
      cfg.pca.target = t;
    }
  }
  if (const json* v = find(j, "costs")) {
    if (!v->is_object()) fail("costs", "expected an object");
    if (const json* c = find(*v, "sign_ms")) cfg.costs.sign_ms = get_number(*c, "costs.sign_ms", 0);
    if (const json* c = find(*v, "verify_ms")) cfg.costs.verify_ms = get_number(*c, "costs.verify_ms", 0);
    if (const json* c = find(*v, "extract_per_slice_ms")) {
      cfg.costs.extract_per_slice_ms = get_number(*c, "costs.extract_per_slice_ms", 0);
    }
    if (const json* c = find(*v, "base_ce_ms")) cfg.costs.base_ce_ms = get_number(*c, "costs.base_ce_ms", 0);
  }
  if (const json* v = find(j, "seed")) {
    if (!v->is_number_unsigned()) fail("seed", "expected an unsigned integer");
    cfg.seed = v->get<std::uint64_t>();
  }
  if (const json* v = find(j, "ap")) {
    if (!v->is_object()) fail("ap", "expected an object");
    if (const json* m = find(*v, "mac")) {
      if (!m->is_string()) fail("ap.mac", "expected a string");
      try {
        cfg.ap.mac = sigchain::ApIdentity::parse_mac(m->get<std::string>());
      } catch (const std::invalid_argument& e) {
        fail("ap.mac", e.what());
      }
    }
    if (const json* m = find(*v, "latitude_deg")) {
      cfg.ap.location.latitude_deg = get_number(*m, "ap.latitude_deg", 0);
    }
    if (const json* m = find(*v, "longitude_deg")) {
      cfg.ap.location.longitude_deg = get_number(*m, "ap.longitude_deg", 0);
    }
    if (const json* m = find(*v, "altitude_m")) {
      cfg.ap.location.altitude_m = get_number(*m, "ap.altitude_m", 0);
    }
  }
  if (const json* v = find(j, "utc_time")) {
    if (!v->is_number_unsigned()) fail("utc_time", "expected an unsigned integer");
    cfg.utc_time = v->get<std::uint64_t>();
  }
  if (const json* v = find(j, "channel_number")) {
    if (!v->is_number_integer()) fail("channel_number", "expected an integer");
    cfg.channel_number = v->get<int>();
  }
  if (const json* v = find(j, "eapol3_seq")) {
    if (!v->is_number_integer()) fail("eapol3_seq", "expected an integer");
    cfg.eapol3_seq = v->get<int>();
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config file not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

// --- ce_run -------------------------------------------------------------------

namespace {

struct GapSampler {
  const ScenarioConfig& cfg;
  timebound::TimingParams params;
  bool relayed_timing = false;

  explicit GapSampler(const ScenarioConfig& config) : cfg(config), params(config.timing) {
    if (cfg.adversary) {
      params.d_a1_m = cfg.adversary->d_a1_m;
      params.d_a2_m = cfg.adversary->d_a2_m;
      params.t_alter_ms = cfg.adversary->t_alter_ms;
      using A = protofsm::AdversaryAction;
      switch (cfg.adversary->action) {
        case A::fake_csa_to_sta:
        case A::jam_and_force_ap_switch:
        case A::dual_channel_csa_mitm:
        case A::spoof_element_keep_preamble:
          relayed_timing = true;
          break;
        case A::spoof_preamble_bits:
        case A::replay_slice_chain:
          relayed_timing = false;  // prompt injection keeps the schedule
          break;
      }
    }
  }

  double sample(Rng& rng) const {
    if (relayed_timing) {
      return params.relay_path_ms() + params.t_other_adv.sample(rng) + params.t_alter_ms;
    }
    return params.prop_delay_ms() + params.t_other.sample(rng);
  }
};

std::string status_name(codec::DecodeStatus status, bool bits_match) {
  if (!bits_match) return "corrupt";
  switch (status) {
    case codec::DecodeStatus::clean: return "ok";
    case codec::DecodeStatus::corrected: return "corrected";
    case codec::DecodeStatus::detected_uncorrectable: return "corrupt";
  }
  return "corrupt";
}

}  // namespace

CeReport ce_run(const ScenarioConfig& config) {
  config.validate();
  if (config.n_frames == 0) fail("n_frames", "ce-run needs a concrete frame count");

  const std::size_t n = config.effective_frames();
  const std::size_t width = sigchain::slice_width_for_frames(n);
  const auto codec_spec = codec::CodecSpec::make(config.codec_kind, width);
  const double p = phych::flip_probability(config.channel);

  Rng rng(config.seed);
  Rng key_rng = rng.substream(1);
  Rng gap_rng = rng.substream(2);
  Rng chan_rng = rng.substream(3);
  Rng adv_rng = rng.substream(4);

  auto key = sigchain::KeyMaterial::generate(key_rng);
  const auto m = sigchain::build_message(config.ap, config.utc_time);

  sigchain::ChainContext ap_ctx;
  ap_ctx.channel = config.channel_number;
  ap_ctx.last_seq = config.eapol3_seq;
  auto chain = sigchain::build_chain(m, key, ap_ctx, n);

  // Adversary manipulation of the transmitted chain and of the station's
  // vantage point.
  sigchain::ChainContext sta_ctx;
  sta_ctx.channel = config.channel_number;
  sta_ctx.last_seq = config.eapol3_seq;
  if (config.adversary) {
    using A = protofsm::AdversaryAction;
    switch (config.adversary->action) {
      case A::fake_csa_to_sta:
      case A::dual_channel_csa_mitm:
        // Station lured onto a different channel than the chain binds.
        sta_ctx.channel = config.channel_number == 1 ? 6 : 1;
        sta_ctx.switch_log.push_back({0, sta_ctx.channel, false});
        break;
      case A::jam_and_force_ap_switch:
        // AP forced to move; its announcement never reached the station.
        ap_ctx.channel = config.channel_number == 11 ? 3 : 11;
        chain = sigchain::build_chain(m, key, ap_ctx, n);
        sta_ctx.switch_log.push_back({0, ap_ctx.channel, false});
        break;
      case A::spoof_element_keep_preamble:
        break;  // slices and claims intact; only timing shifts
      case A::spoof_preamble_bits:
        for (auto& slice : chain.slices) {
          slice.bits = Bits::random(slice.bits.size(), adv_rng);
        }
        break;
      case A::replay_slice_chain: {
        // A chain recorded in an earlier session: same AP, older timestamp.
        const auto stale = sigchain::build_message(config.ap, config.utc_time - 7200);
        chain = sigchain::build_chain(stale, key, ap_ctx, n);
        break;
      }
    }
  }

  const GapSampler gaps(config);

  CeReport report;
  report.t_extract_ms = static_cast<double>(n) * config.costs.extract_per_slice_ms;
  report.t_ce_ms = config.costs.base_ce_ms + config.costs.sign_ms + config.costs.verify_ms +
                   report.t_extract_ms;
  report.overhead_percent = config.costs.base_ce_ms > 0
                                ? (report.t_ce_ms - config.costs.base_ce_ms) /
                                      config.costs.base_ce_ms * 100.0
                                : 0.0;

  sigchain::SliceSet received = chain;
  bool time_rejected = false;
  for (std::size_t i = 0; i < n; ++i) {
    sigchain::ChainContext frame_budget;  // per-frame retransmission limit
    FrameLog log;
    log.index = i + 1;
    log.channel = sta_ctx.channel;
    bool delivered = false;
    while (!delivered) {
      log.attempts_used += 1;
      const double gap = gaps.sample(gap_rng);
      log.gap_ms = gap;
      if (gap < config.timing.t_in_ms) {
        delivered = true;
        break;
      }
      if (!protofsm::enforce_limit(frame_budget)) {
        time_rejected = true;
        break;
      }
    }
    if (time_rejected) {
      log.slice_status = "missing";
      report.frames.push_back(log);
      break;
    }
    const Bits sent = codec::encode_slice(chain.slices[i].bits, codec_spec);
    const Bits arrived = phych::transmit_bits(sent, p, chan_rng);
    const auto decoded = codec::decode_slice(arrived, codec_spec);
    log.slice_status = status_name(decoded.status, decoded.data == chain.slices[i].bits);
    received.slices[i].bits = decoded.data;
    report.frames.push_back(log);
  }

  if (time_rejected) {
    report.outcome = CeOutcome::rejected;
    report.reject_reason = "time_bound_violation";
    return report;
  }

  const auto verdict = sigchain::reassemble_and_verify(received, key.public_key, sta_ctx,
                                                       key, m);
  if (verdict.ok) {
    report.outcome = CeOutcome::connected;
  } else {
    report.outcome = CeOutcome::rejected;
    switch (verdict.reason) {
      case sigchain::FailReason::channel: report.reject_reason = "channel_mismatch"; break;
      case sigchain::FailReason::sequence: report.reject_reason = "sequence_mismatch"; break;
      default: report.reject_reason = "signature_failure"; break;
    }
  }
  return report;
}

// --- renderers ----------------------------------------------------------------

std::string slice_to_json(const sigchain::Slice& slice) {
  std::ostringstream out;
  out << "{\"index\":" << slice.index << ",\"width\":" << slice.bits.size()
      << ",\"bits_hex\":\"" << slice.bits.to_hex() << "\",\"is_last\":"
      << (slice.is_last ? "true" : "false") << "}";
  return out.str();
}

std::string render_ce_report_json(const CeReport& report) {
  std::ostringstream out;
  out << "{\"outcome\":\""
      << (report.outcome == CeOutcome::connected ? "connected" : "rejected") << "\"";
  if (report.outcome == CeOutcome::rejected) {
    out << ",\"reason\":\"" << report.reject_reason << "\"";
  }
  out << ",\"t_ce_ms\":" << fmt(report.t_ce_ms)
      << ",\"t_extract_ms\":" << fmt(report.t_extract_ms)
      << ",\"overhead_percent\":" << fmt(report.overhead_percent) << ",\"frames\":[";
  for (std::size_t i = 0; i < report.frames.size(); ++i) {
    const auto& f = report.frames[i];
    if (i) out << ",";
    out << "{\"index\":" << f.index << ",\"channel\":" << f.channel
        << ",\"gap_ms\":" << fmt(f.gap_ms) << ",\"slice_status\":\"" << f.slice_status
        << "\",\"attempts\":" << f.attempts_used << "}";
  }
  out << "]}\n";
  return out.str();
}

namespace {

std::string render_ce_report_csv(const CeReport& report) {
  std::string out = "index,channel,gap_ms,slice_status,attempts\n";
  char line[160];
  for (const auto& f : report.frames) {
    std::snprintf(line, sizeof(line), "%zu,%d,%.6g,%s,%d\n", f.index, f.channel, f.gap_ms,
                  f.slice_status.c_str(), f.attempts_used);
    out += line;
  }
  return out;
}

std::string render_sweep_json(const phych::SweepResult& result) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    if (i) out << ",";
    out << "{\"snr_db\":" << fmt(r.snr_db) << ",\"coded\":" << (r.coded ? "true" : "false")
        << ",\"ber\":" << fmt(r.ber) << ",\"sr\":" << fmt(r.sr) << ",\"trials\":" << r.trials
        << "}";
  }
  out << "]\n";
  return out.str();
}

std::string render_metrics_json(const timebound::DetectionMetrics& m, const std::string& kind) {
  std::ostringstream out;
  out << "{\"detector\":\"" << kind << "\",\"Accuracy\":" << fmt(m.accuracy)
      << ",\"F1-score\":" << fmt(m.f1) << ",\"TPR\":" << fmt(m.tpr) << ",\"TNR\":" << fmt(m.tnr)
      << ",\"PPV\":" << fmt(m.ppv) << ",\"NPV\":" << fmt(m.npv) << "}\n";
  return out.str();
}

std::string render_metrics_csv(const timebound::DetectionMetrics& m, const std::string& kind) {
  std::ostringstream out;
  out << "detector,accuracy,f1,tpr,tnr,ppv,npv\n"
      << kind << "," << fmt(m.accuracy) << "," << fmt(m.f1) << "," << fmt(m.tpr) << ","
      << fmt(m.tnr) << "," << fmt(m.ppv) << "," << fmt(m.npv) << "\n";
  return out.str();
}

std::string render_confusion_json(const sigpca::ClassifyResult& result,
                                  const std::string& target) {
  std::ostringstream out;
  out << "{\"target\":\"" << target << "\",\"labels\":[";
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    if (i) out << ",";
    out << "\"" << result.labels[i] << "\"";
  }
  out << "],\"matrix\":[";
  for (std::size_t i = 0; i < result.confusion.size(); ++i) {
    if (i) out << ",";
    out << "[";
    for (std::size_t j = 0; j < result.confusion[i].size(); ++j) {
      if (j) out << ",";
      out << result.confusion[i][j];
    }
    out << "]";
  }
  out << "],\"accuracy\":" << fmt(result.accuracy) << "}\n";
  return out.str();
}

std::string render_confusion_csv(const sigpca::ClassifyResult& result) {
  std::string out = "actual\\predicted";
  for (const auto& l : result.labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < result.confusion.size(); ++i) {
    out += result.labels[i];
    for (std::size_t j = 0; j < result.confusion[i].size(); ++j) {
      out += "," + std::to_string(result.confusion[i][j]);
    }
    out += "\n";
  }
  return out;
}

struct FsmRunRecord {
  std::string actions;
  protofsm::Verdict verdict;
};

std::string render_fsm_json(const std::vector<FsmRunRecord>& runs, bool safe) {
  std::ostringstream out;
  out << "{\"safe\":" << (safe ? "true" : "false") << ",\"runs\":[";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (i) out << ",";
    out << "{\"actions\":\"" << r.actions << "\",\"safe\":"
        << (r.verdict.safe ? "true" : "false")
        << ",\"connected_reached\":" << (r.verdict.connected_reached ? "true" : "false")
        << ",\"states_explored\":" << r.verdict.states_explored;
    if (r.verdict.counterexample) {
      out << ",\"counterexample\":" << protofsm::trace_to_json(*r.verdict.counterexample);
    }
    out << "}";
  }
  out << "]}\n";
  return out.str();
}

std::string render_fsm_csv(const std::vector<FsmRunRecord>& runs) {
  std::string out = "actions,safe,connected_reached,states_explored,counterexample_steps\n";
  for (const auto& r : runs) {
    out += r.actions + "," + (r.verdict.safe ? "1" : "0") + "," +
           (r.verdict.connected_reached ? "1" : "0") + "," +
           std::to_string(r.verdict.states_explored) + "," +
           std::to_string(r.verdict.counterexample ? r.verdict.counterexample->size() : 0) +
           "\n";
  }
  return out;
}

std::string action_set_name(const std::vector<protofsm::AdversaryAction>& actions) {
  if (actions.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += "+";
    out += protofsm::to_string(actions[i]);
  }
  return out;
}

}  // namespace

SubcommandResult run_subcommand(const std::string& name, const ScenarioConfig& config,
                                const std::string& format) {
  config.validate();
  SubcommandResult result;
  const bool want_json = format == "json";
  const bool want_csv = format == "csv";
  if (!format.empty() && !want_json && !want_csv) {
    throw ConfigError("format: expected 'csv' or 'json', got '" + format + "'");
  }

  if (name == "ber-sweep" || name == "sr-sweep") {
    std::optional<std::size_t> frames;
    if (config.n_frames != 0) frames = config.effective_frames();
    auto uncoded = phych::ber_sr_sweep(config.snrs_db, config.channel.kind, frames,
                                       codec::Kind::identity, config.trials, config.seed);
    const auto coded = phych::ber_sr_sweep(config.snrs_db, config.channel.kind, frames,
                                           codec::Kind::hamming_secded, config.trials,
                                           config.seed + 1);
    uncoded.rows.insert(uncoded.rows.end(), coded.rows.begin(), coded.rows.end());
    result.default_format = "csv";
    result.report = want_json ? render_sweep_json(uncoded) : phych::render_sweep_csv(uncoded);
    return result;
  }

  if (name == "relay-sim") {
    timebound::TimingParams params = config.timing;
    if (config.adversary) {
      params.d_a1_m = config.adversary->d_a1_m;
      params.d_a2_m = config.adversary->d_a2_m;
      params.t_alter_ms = config.adversary->t_alter_ms;
    }
    const std::size_t count = config.detector.train_per_class + config.detector.test_per_class;
    auto benign = timebound::sample_benign(params, count, config.seed, "D1");
    const auto relayed = timebound::sample_relayed(params, count, config.seed + 1, "D1");
    benign.insert(benign.end(), relayed.begin(), relayed.end());
    result.default_format = "csv";
    if (want_json) {
      std::ostringstream out;
      out << "[";
      for (std::size_t i = 0; i < benign.size(); ++i) {
        if (i) out << ",";
        out << "{\"duration_ms\":" << fmt(benign[i].duration_ms) << ",\"label\":\""
            << timebound::label_to_string(benign[i].label) << "\",\"location\":\""
            << benign[i].location << "\"}";
      }
      out << "]\n";
      result.report = out.str();
    } else {
      result.report = timebound::render_samples_csv(benign);
    }
    return result;
  }

  if (name == "detect") {
    timebound::TimingParams params = config.timing;
    if (config.adversary) {
      params.d_a1_m = config.adversary->d_a1_m;
      params.d_a2_m = config.adversary->d_a2_m;
      params.t_alter_ms = config.adversary->t_alter_ms;
    }
    auto train = timebound::sample_benign(params, config.detector.train_per_class,
                                          config.seed, "D1");
    {
      const auto r = timebound::sample_relayed(params, config.detector.train_per_class,
                                               config.seed + 1, "D1");
      train.insert(train.end(), r.begin(), r.end());
    }
    auto test = timebound::sample_benign(params, config.detector.test_per_class,
                                         config.seed + 2, "D1");
    {
      const auto r = timebound::sample_relayed(params, config.detector.test_per_class,
                                               config.seed + 3, "D1");
      test.insert(test.end(), r.begin(), r.end());
    }
    const auto detector = timebound::train_detector(train, config.detector.kind, config.seed,
                                                    config.detector.forest);
    const auto metrics = timebound::evaluate_detector(*detector, test);
    result.default_format = "json";
    result.report = want_csv ? render_metrics_csv(metrics, detector->kind())
                             : render_metrics_json(metrics, detector->kind());
    return result;
  }

  if (name == "fsm-check") {
    std::vector<FsmRunRecord> runs;
    bool safe = true;
    auto run_one = [&](const std::vector<protofsm::AdversaryAction>& actions) {
      protofsm::CheckerConfig cc;
      cc.max_depth = config.fsm.max_depth;
      cc.n_frames = config.n_frames == 0 ? 13 : config.effective_frames();
      cc.defenses = config.fsm.defenses;
      cc.actions = actions;
      FsmRunRecord record{action_set_name(actions), protofsm::model_check(cc)};
      safe = safe && record.verdict.safe;
      runs.push_back(std::move(record));
    };
    if (config.fsm.pairs) {
      for (std::size_t i = 0; i < config.fsm.actions.size(); ++i) {
        run_one({config.fsm.actions[i]});
      }
      for (std::size_t i = 0; i < config.fsm.actions.size(); ++i) {
        for (std::size_t j = i + 1; j < config.fsm.actions.size(); ++j) {
          run_one({config.fsm.actions[i], config.fsm.actions[j]});
        }
      }
    } else {
      run_one(config.fsm.actions);
    }
    result.default_format = "json";
    result.report = want_csv ? render_fsm_csv(runs) : render_fsm_json(runs, safe);
    result.exit_code = safe ? 0 : 1;
    return result;
  }

  if (name == "pca") {
    std::vector<sigpca::SigRecord> records;
    if (!config.pca.input_csv.empty()) {
      try {
        records = sigpca::ingest_csv(config.pca.input_csv);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("pca.input_csv: ") + e.what());
      }
    } else {
      records = sigpca::synthetic_corpus(config.pca.per_ap, config.seed);
    }
    auto label_of = [&](const sigpca::SigRecord& r) -> std::string {
      if (config.pca.target == "ap") return r.ap;
      return r.frame_class == "CE" ? "CE" : "non-CE";
    };
    std::vector<sigpca::SigRecord> train, test;
    std::vector<std::string> train_labels, test_labels;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto label = label_of(records[i]);
      if (label.empty()) {
        throw ConfigError("pca: record " + std::to_string(i + 1) + " lacks a '" +
                          config.pca.target + "' label");
      }
      if (i % 2 == 0) {
        train.push_back(records[i]);
        train_labels.push_back(label);
      } else {
        test.push_back(records[i]);
        test_labels.push_back(label);
      }
    }
    if (test.empty()) {
      test = train;
      test_labels = train_labels;
    }
    const auto model = sigpca::fit_pca(sigpca::feature_matrix(train), config.pca.k);
    const auto centroids = sigpca::fit_centroids(
        sigpca::standardize_and_project(sigpca::feature_matrix(train), model), train_labels);
    const auto classified = sigpca::classify(test, model, centroids, test_labels);
    result.default_format = "json";
    result.report = want_csv ? render_confusion_csv(classified)
                             : render_confusion_json(classified, config.pca.target);
    return result;
  }

  if (name == "ce-run") {
    const auto report = ce_run(config);
    result.default_format = "json";
    result.report = want_csv ? render_ce_report_csv(report) : render_ce_report_json(report);
    result.exit_code = report.outcome == CeOutcome::connected ? 0 : 1;
    return result;
  }

  throw ConfigError("unknown subcommand: " + name);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write: " + tmp.string());
    out << contents;
  }
  fs::rename(tmp, target);
}

}  // namespace celab::harness
