// Executable station/AP finite state machines for the connection
// establishment phase, a six-action adversary, and a bounded exhaustive
// model checker over the composed STA x AP x channel/adversary state graph.
// The safety property: the station never reaches `connected` on a chain that
// accepted adversary-originated frames.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "celab/sigchain.hpp"

namespace celab::protofsm {

enum class StaState { disconnected, ce, connected };

struct Observation {
  bool c_as1 = false;      // received the AP's first CE frame
  bool c_asN = false;      // received the AP's final CE frame
  bool c_saN = false;      // station sent its own final frame
  bool within_t_in = true; // frame arrived inside the acceptance window
  bool limit_ok = true;    // attempts_left > 0
  bool ch_ok = true;       // operating channel matches the bound one
  bool seq_ok = true;      // final-frame sequence number matches
  bool slice_ok = true;    // chain carries the correct signature slices
};

// Station transition table: tau1 starts CE, tau2 retries inside CE, tau3
// drops back to disconnected, tau4 connects; `connected` is absorbing and
// any unmatched observation leaves the state unchanged.
StaState sta_step(StaState state, const Observation& obs);

enum class ApEvent { send_first_ce, retransmit, handshake_complete, limit_exhausted };

StaState ap_step(StaState state, ApEvent event);

// Decrements the retransmission budget; false once the temporal limit is hit.
bool enforce_limit(sigchain::ChainContext& ctx);

enum class AdversaryAction {
  fake_csa_to_sta,
  jam_and_force_ap_switch,
  dual_channel_csa_mitm,
  spoof_element_keep_preamble,
  spoof_preamble_bits,
  replay_slice_chain,
};

inline constexpr AdversaryAction kAllActions[] = {
    AdversaryAction::fake_csa_to_sta,
    AdversaryAction::jam_and_force_ap_switch,
    AdversaryAction::dual_channel_csa_mitm,
    AdversaryAction::spoof_element_keep_preamble,
    AdversaryAction::spoof_preamble_bits,
    AdversaryAction::replay_slice_chain,
};

struct Defenses {
  bool signature = true;
  bool time_bound = true;
  bool seq_check = true;
  bool channel_check = true;
};

struct TraceStep {
  std::string state;   // station state before the step
  std::string actor;   // "ap", "adversary", or "environment"
  std::string action;
  Observation obs;     // observation delivered to the station, if any
  bool has_obs = false;
};

struct Verdict {
  bool safe = true;
  std::optional<std::vector<TraceStep>> counterexample;
  bool connected_reached = false;  // any connect, tainted or not
  std::uint64_t states_explored = 0;
};

struct CheckerConfig {
  std::size_t max_depth = 40;
  std::size_t n_frames = 13;
  Defenses defenses;
  std::vector<AdversaryAction> actions;
};

// Breadth-first search over all interleavings; a counterexample, when found,
// is a minimal-length trace ending in a tainted connect.
Verdict model_check(const CheckerConfig& config);

// Re-runs a counterexample trace through sta_step, returning true when it
// ends in `connected`. Used to pin found traces as regressions.
bool replay_trace(const std::vector<TraceStep>& trace);

std::string to_string(StaState state);
std::string to_string(AdversaryAction action);
AdversaryAction action_from_string(const std::string& name);
std::string trace_to_json(const std::vector<TraceStep>& trace);

}  // namespace celab::protofsm
