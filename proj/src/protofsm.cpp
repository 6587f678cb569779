#include "celab/protofsm.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace celab::protofsm {

StaState sta_step(StaState state, const Observation& o) {
  switch (state) {
    case StaState::disconnected:
      // tau1
      return o.c_as1 ? StaState::ce : StaState::disconnected;
    case StaState::ce: {
      const bool bad = !o.ch_ok || !o.seq_ok || !o.slice_ok;
      const bool tau2 = (!o.c_asN && o.limit_ok && bad) ||
                        (!o.c_saN && o.within_t_in && o.limit_ok && bad);
      const bool tau3 = (!o.c_saN && !o.within_t_in && !o.limit_ok && bad) ||
                        (!o.c_asN && !o.limit_ok && bad);
      const bool tau4 = o.c_saN && o.limit_ok && o.ch_ok && o.seq_ok && o.slice_ok;
      if (tau4) return StaState::connected;
      if (tau3) return StaState::disconnected;
      if (tau2) return StaState::ce;
      return StaState::ce;
    }
    case StaState::connected:
      return StaState::connected;
  }
  return state;
}

StaState ap_step(StaState state, ApEvent event) {
  switch (state) {
    case StaState::disconnected:
      return event == ApEvent::send_first_ce ? StaState::ce : StaState::disconnected;
    case StaState::ce:
      if (event == ApEvent::handshake_complete) return StaState::connected;
      if (event == ApEvent::limit_exhausted) return StaState::disconnected;
      return StaState::ce;
    case StaState::connected:
      return StaState::connected;
  }
  return state;
}

bool enforce_limit(sigchain::ChainContext& ctx) {
  if (ctx.attempts_left <= 0) return false;
  ctx.attempts_left -= 1;
  return true;
}

namespace {

constexpr int kChannelOriginal = 0;
constexpr int kChannelY = 1;
constexpr int kChannelZ = 2;

struct World {
  StaState sta = StaState::disconnected;
  StaState ap = StaState::disconnected;
  std::uint8_t accepted = 0;       // slices the station has taken in
  std::uint8_t attempts = 3;       // retransmission budget for the pending frame
  std::uint8_t sta_ch = kChannelOriginal;
  std::uint8_t ap_ch = kChannelOriginal;
  bool tainted = false;            // accepted an adversary-originated frame
  bool chain_ok = true;            // accepted bits still form a fresh valid chain

  std::uint32_t key() const {
    return static_cast<std::uint32_t>(sta) | (static_cast<std::uint32_t>(ap) << 2) |
           (static_cast<std::uint32_t>(accepted) << 4) |
           (static_cast<std::uint32_t>(attempts) << 9) |
           (static_cast<std::uint32_t>(sta_ch) << 11) |
           (static_cast<std::uint32_t>(ap_ch) << 13) |
           (static_cast<std::uint32_t>(tainted) << 15) |
           (static_cast<std::uint32_t>(chain_ok) << 16);
  }
};

// How a delivered frame looks before the station's enabled checks run.
struct Delivery {
  const char* actor;
  const char* action;
  bool timely = true;       // physical arrival inside t_in
  bool seq_match = true;    // sequence number consistent with the bound one
  bool bits_valid = true;   // slice bits belong to this fresh session
  bool adv_origin = false;
  bool replayed_channel = false;  // channel binding from the old recorded chain
};

struct Edge {
  World from;
  World to;
  TraceStep step;
};

class Checker {
 public:
  explicit Checker(const CheckerConfig& config) : cfg_(config) {
    for (auto a : cfg_.actions) enabled_.insert(a);
  }

  Verdict run() {
    Verdict verdict;
    World init;
    std::unordered_map<std::uint32_t, std::uint32_t> parent;  // state -> edge index
    std::vector<Edge> edges;
    std::deque<std::pair<World, std::size_t>> queue;  // state, depth
    parent.emplace(init.key(), UINT32_MAX);
    queue.emplace_back(init, 0);

    while (!queue.empty()) {
      auto [world, depth] = queue.front();
      queue.pop_front();
      ++verdict.states_explored;
      if (world.sta == StaState::connected) {
        verdict.connected_reached = true;
        if (world.tainted) {
          verdict.safe = false;
          verdict.counterexample = unwind(world, parent, edges);
          return verdict;
        }
        continue;  // absorbing
      }
      if (depth >= cfg_.max_depth) continue;
      for (Edge& e : successors(world)) {
        const auto key = e.to.key();
        if (parent.contains(key)) continue;
        edges.push_back(e);
        parent.emplace(key, static_cast<std::uint32_t>(edges.size() - 1));
        queue.emplace_back(e.to, depth + 1);
      }
    }
    return verdict;
  }

 private:
  bool enabled(AdversaryAction a) const { return enabled_.contains(a); }

  bool session_live(const World& w) const {
    return w.sta != StaState::connected && w.accepted < cfg_.n_frames &&
           !(w.sta == StaState::disconnected && w.accepted > 0);
  }

  std::vector<Edge> successors(const World& w) {
    std::vector<Edge> out;
    const bool dead = w.sta == StaState::disconnected && w.accepted > 0;  // tau3 sink
    if (dead || w.sta == StaState::connected) return out;

    // Honest AP frame, deliverable only when both sides share a channel.
    if (session_live(w) && w.sta_ch == w.ap_ch && w.ap != StaState::connected) {
      deliver(out, w, {"ap", "deliver_slice"});
    }
    // Frame loss / jamming: consumes a retransmission.
    if (w.sta == StaState::ce && w.accepted < cfg_.n_frames) {
      timeout(out, w);
    }

    if (w.sta == StaState::ce || w.sta == StaState::disconnected) {
      if (enabled(AdversaryAction::fake_csa_to_sta)) {
        setup(out, w, "fake_csa_to_sta", kChannelY, w.ap_ch);
      }
      if (enabled(AdversaryAction::jam_and_force_ap_switch)) {
        setup(out, w, "jam_and_force_ap_switch", w.sta_ch, kChannelZ);
      }
      if (enabled(AdversaryAction::dual_channel_csa_mitm)) {
        setup(out, w, "dual_channel_csa_mitm", kChannelY, kChannelZ);
      }
    }

    const bool mitm_enabled = enabled(AdversaryAction::fake_csa_to_sta) ||
                              enabled(AdversaryAction::jam_and_force_ap_switch) ||
                              enabled(AdversaryAction::dual_channel_csa_mitm);
    if (w.sta == StaState::ce && session_live(w)) {
      if (mitm_enabled && w.sta_ch != w.ap_ch && w.ap == StaState::ce) {
        // Cross-channel relay of the AP's next frame; the relay may or may
        // not beat the acceptance window.
        deliver(out, w, {"adversary", "relay_frame_fast", true, true, true, true});
        deliver(out, w, {"adversary", "relay_frame_late", false, true, true, true});
      }
      if (enabled(AdversaryAction::spoof_element_keep_preamble) && w.ap == StaState::ce) {
        // Replace mode blocks the real frame and forwards an altered copy;
        // the alteration costs time. Insert mode races the real frame with a
        // fresh sequence number.
        deliver(out, w, {"adversary", "spoof_element_replace", false, true, true, true});
        deliver(out, w, {"adversary", "spoof_element_insert", true, false, true, true});
      }
      if (enabled(AdversaryAction::spoof_preamble_bits)) {
        deliver(out, w, {"adversary", "spoof_preamble_bits", true, true, false, true});
      }
    }
    if (enabled(AdversaryAction::replay_slice_chain) && session_live(w) &&
        w.sta != StaState::connected) {
      // Replays the next slice of a chain recorded in an earlier session on
      // the original channel; bits are internally consistent but stale.
      deliver(out, w, {"adversary", "replay_slice_chain", true, true, false, true, true});
    }
    return out;
  }

  void setup(std::vector<Edge>& out, const World& w, const char* action, int sta_ch,
             int ap_ch) {
    World next = w;
    next.sta_ch = static_cast<std::uint8_t>(sta_ch);
    next.ap_ch = static_cast<std::uint8_t>(ap_ch);
    if (next.key() == w.key()) return;
    TraceStep step;
    step.state = to_string(w.sta);
    step.actor = "adversary";
    step.action = action;
    out.push_back({w, next, step});
  }

  void timeout(std::vector<Edge>& out, const World& w) {
    Observation obs;
    obs.c_as1 = false;
    obs.c_asN = false;
    obs.c_saN = false;
    obs.within_t_in = false;
    obs.limit_ok = w.attempts > 0;
    obs.ch_ok = true;
    obs.seq_ok = true;
    obs.slice_ok = false;  // the expected slice never arrived
    World next = w;
    next.sta = sta_step(w.sta, obs);
    if (w.attempts > 0) {
      next.attempts = static_cast<std::uint8_t>(w.attempts - 1);
    } else {
      next.ap = ap_step(w.ap, ApEvent::limit_exhausted);
    }
    TraceStep step;
    step.state = to_string(w.sta);
    step.actor = "environment";
    step.action = "frame_lost";
    step.obs = obs;
    step.has_obs = true;
    out.push_back({w, next, step});
  }

  void deliver(std::vector<Edge>& out, const World& w, const Delivery& d) {
    const bool is_first = w.accepted == 0;
    const bool is_final = static_cast<std::size_t>(w.accepted) + 1 == cfg_.n_frames;

    const bool ch_raw = d.replayed_channel ? w.sta_ch == kChannelOriginal
                                           : w.sta_ch == w.ap_ch;
    const bool eff_tin = cfg_.defenses.time_bound ? d.timely : true;
    const bool eff_ch = cfg_.defenses.channel_check ? ch_raw : true;
    const bool eff_seq = cfg_.defenses.seq_check ? d.seq_match : true;
    const bool slice_raw = is_final ? (w.chain_ok && d.bits_valid) : true;
    const bool eff_slice = cfg_.defenses.signature ? slice_raw : true;
    const bool checks_pass = eff_tin && eff_ch && eff_seq && eff_slice;

    Observation obs;
    obs.c_as1 = is_first && w.sta == StaState::disconnected;
    obs.c_asN = is_final;
    obs.c_saN = is_final && checks_pass && w.attempts > 0;
    obs.within_t_in = eff_tin;
    obs.limit_ok = w.attempts > 0;
    obs.ch_ok = eff_ch;
    obs.seq_ok = eff_seq;
    obs.slice_ok = eff_slice;

    World next = w;
    next.sta = sta_step(w.sta, obs);

    if (w.sta == StaState::disconnected && next.sta == StaState::ce) {
      // tau1 accepts the opening frame as slice 1.
      next.accepted = 1;
      next.attempts = 3;
      next.tainted = w.tainted || d.adv_origin;
      next.chain_ok = w.chain_ok && d.bits_valid;
      if (!d.adv_origin) next.ap = ap_step(w.ap, ApEvent::send_first_ce);
    } else if (next.sta == StaState::connected) {
      next.tainted = w.tainted || d.adv_origin;
      if (!next.tainted) next.ap = ap_step(w.ap, ApEvent::handshake_complete);
    } else if (w.sta == StaState::ce && next.sta == StaState::ce) {
      if (checks_pass && !is_final) {
        next.accepted = static_cast<std::uint8_t>(w.accepted + 1);
        next.attempts = 3;
        next.tainted = w.tainted || d.adv_origin;
        next.chain_ok = w.chain_ok && d.bits_valid;
      } else {
        // Rejected (or final-with-exhausted-budget). A blocked/relayed frame
        // costs the AP a retransmission; a raced insert does not.
        const bool consumes = !(d.seq_match == false && d.timely);
        if (consumes && w.attempts > 0) {
          next.attempts = static_cast<std::uint8_t>(w.attempts - 1);
        }
      }
    } else if (next.sta == StaState::disconnected) {
      next.ap = ap_step(w.ap, ApEvent::limit_exhausted);
    }

    if (next.key() == w.key()) return;
    TraceStep step;
    step.state = to_string(w.sta);
    step.actor = d.actor;
    step.action = d.action;
    step.obs = obs;
    step.has_obs = true;
    out.push_back({w, next, step});
  }

  std::vector<TraceStep> unwind(const World& end,
                                const std::unordered_map<std::uint32_t, std::uint32_t>& parent,
                                const std::vector<Edge>& edges) const {
    std::vector<TraceStep> trace;
    std::uint32_t key = end.key();
    while (true) {
      const auto it = parent.find(key);
      if (it == parent.end() || it->second == UINT32_MAX) break;
      const Edge& e = edges[it->second];
      trace.push_back(e.step);
      key = e.from.key();
    }
    std::reverse(trace.begin(), trace.end());
    return trace;
  }

  CheckerConfig cfg_;
  std::set<AdversaryAction> enabled_;
};

}  // namespace

Verdict model_check(const CheckerConfig& config) {
  if (config.max_depth < 1) throw std::invalid_argument("model_check: max_depth < 1");
  if (config.n_frames < 2 || config.n_frames > 15) {
    throw std::invalid_argument("model_check: n_frames out of range");
  }
  return Checker(config).run();
}

bool replay_trace(const std::vector<TraceStep>& trace) {
  StaState state = StaState::disconnected;
  for (const auto& step : trace) {
    if (step.has_obs) state = sta_step(state, step.obs);
  }
  return state == StaState::connected;
}

std::string to_string(StaState state) {
  switch (state) {
    case StaState::disconnected: return "disconnected";
    case StaState::ce: return "ce";
    case StaState::connected: return "connected";
  }
  return "unknown";
}

std::string to_string(AdversaryAction action) {
  switch (action) {
    case AdversaryAction::fake_csa_to_sta: return "fake_csa_to_sta";
    case AdversaryAction::jam_and_force_ap_switch: return "jam_and_force_ap_switch";
    case AdversaryAction::dual_channel_csa_mitm: return "dual_channel_csa_mitm";
    case AdversaryAction::spoof_element_keep_preamble: return "spoof_element_keep_preamble";
    case AdversaryAction::spoof_preamble_bits: return "spoof_preamble_bits";
    case AdversaryAction::replay_slice_chain: return "replay_slice_chain";
  }
  return "unknown";
}

AdversaryAction action_from_string(const std::string& name) {
  for (AdversaryAction a : kAllActions) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown adversary action: " + name);
}

std::string trace_to_json(const std::vector<TraceStep>& trace) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& s = trace[i];
    if (i) out << ",";
    out << "{\"state\":\"" << s.state << "\",\"actor\":\"" << s.actor
        << "\",\"action\":\"" << s.action << "\"";
    if (s.has_obs) {
      const auto& o = s.obs;
      out << ",\"obs\":{"
          << "\"c_as1\":" << (o.c_as1 ? "true" : "false")
          << ",\"c_asN\":" << (o.c_asN ? "true" : "false")
          << ",\"c_saN\":" << (o.c_saN ? "true" : "false")
          << ",\"within_t_in\":" << (o.within_t_in ? "true" : "false")
          << ",\"limit_ok\":" << (o.limit_ok ? "true" : "false")
          << ",\"ch_ok\":" << (o.ch_ok ? "true" : "false")
          << ",\"seq_ok\":" << (o.seq_ok ? "true" : "false")
          << ",\"slice_ok\":" << (o.slice_ok ? "true" : "false") << "}";
    }
    out << "}";
  }
  out << "]";
  return out.str();
}

}  // namespace celab::protofsm
