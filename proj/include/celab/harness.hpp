// Scenario engine behind the CLI: JSON config parsing/validation, the
// seeded end-to-end connection-establishment run with timing-overhead
// accounting, and the report renderers for every subcommand.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "celab/codec.hpp"
#include "celab/phych.hpp"
#include "celab/protofsm.hpp"
#include "celab/sigchain.hpp"
#include "celab/sigpca.hpp"
#include "celab/timebound.hpp"

namespace celab::harness {

// Configuration problems carry the offending field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct CostConstants {
  double sign_ms = 0.65;
  double verify_ms = 5.63;
  double extract_per_slice_ms = 0.02;
  double base_ce_ms = 300.0;
};

struct AdversaryConfig {
  protofsm::AdversaryAction action = protofsm::AdversaryAction::spoof_element_keep_preamble;
  double d_a1_m = 40.0;
  double d_a2_m = 40.0;
  double t_alter_ms = 0.0;
};

struct FsmConfig {
  std::size_t max_depth = 40;
  protofsm::Defenses defenses;
  std::vector<protofsm::AdversaryAction> actions{std::begin(protofsm::kAllActions),
                                                 std::end(protofsm::kAllActions)};
  bool pairs = false;
};

struct PcaConfig {
  std::size_t k = 2;
  std::string input_csv;     // empty -> synthetic corpus
  std::size_t per_ap = 40;
  std::string target = "ap"; // "ap" or "frame_class"
};

struct DetectorConfig {
  timebound::DetectorKind kind = timebound::DetectorKind::forest;
  timebound::ForestOptions forest;
  std::size_t train_per_class = 2000;
  std::size_t test_per_class = 1000;
};

struct ScenarioConfig {
  std::size_t n_frames = 13;
  bool extra_eap_frames = false;
  codec::Kind codec_kind = codec::Kind::identity;
  phych::ChannelModel channel{phych::ChannelKind::awgn, 200.0};  // near-noiseless default
  std::vector<double> snrs_db{0, 3, 6, 9, 12, 15};
  std::uint64_t trials = 10000;
  timebound::TimingParams timing;
  std::optional<AdversaryConfig> adversary;
  DetectorConfig detector;
  FsmConfig fsm;
  PcaConfig pca;
  CostConstants costs;
  std::uint64_t seed = 1;
  sigchain::ApIdentity ap;
  std::uint64_t utc_time = 1700000000;
  int channel_number = 6;   // operating channel
  int eapol3_seq = 1200;    // sequence number of the AP's final CE frame

  std::size_t effective_frames() const {
    return n_frames + (extra_eap_frames ? 1 : 0);
  }
  void validate() const;
};

ScenarioConfig parse_config_json(const std::string& text);
ScenarioConfig load_config(const std::string& path);

enum class CeOutcome { connected, rejected };

struct FrameLog {
  std::size_t index = 0;
  int channel = 0;
  double gap_ms = 0.0;
  std::string slice_status;  // ok / corrected / corrupt
  int attempts_used = 0;
};

struct CeReport {
  CeOutcome outcome = CeOutcome::rejected;
  std::string reject_reason;  // time_bound_violation, signature_failure, frame_limit_exceeded, ...
  double t_ce_ms = 0.0;
  double t_extract_ms = 0.0;
  double overhead_percent = 0.0;
  std::vector<FrameLog> frames;
};

CeReport ce_run(const ScenarioConfig& config);

struct SubcommandResult {
  int exit_code = 0;          // 0 ok, 1 check failure, 2 config error
  std::string report;         // rendered payload
  std::string default_format; // "csv" or "json"
};

// Shared engine behind the CLI subcommands; `format` is "csv", "json", or
// empty for the subcommand default.
SubcommandResult run_subcommand(const std::string& name, const ScenarioConfig& config,
                                const std::string& format);

std::string render_ce_report_json(const CeReport& report);

// Serializes a slice as {"index":..,"width":..,"bits_hex":"..","is_last":..}.
std::string slice_to_json(const sigchain::Slice& slice);

// Writes via a temp file + rename so readers never see partial output.
void write_file_atomic(const std::string& path, const std::string& contents);

inline const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> kNames = {
      "ber-sweep", "sr-sweep", "relay-sim", "detect", "fsm-check", "pca", "ce-run"};
  return kNames;
}

}  // namespace celab::harness
