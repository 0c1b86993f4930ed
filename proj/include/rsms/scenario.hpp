#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rsms/group_protocol.hpp"
#include "rsms/pool_protocol.hpp"
#include "rsms/sim_network.hpp"

namespace rsms {

// Stable identity derivation so scenarios can reference entities by name.
inline Bytes rid_for_name(const std::string& name) {
  Bytes d = sha256({str_bytes("rid:"), str_bytes(name)});
  d.resize(kPidBytes);
  return d;
}

struct DriverConfig {
  MsrpState::Config msrp;
  std::string ledger_path;  // empty = in-memory ledger
};

// Wires MSRP, RPMs, RNs and users over the simulated network and runs whole
// protocol flows, recording every message and verdict. All randomness comes
// from the seed, so a run is reproducible bit for bit.
class ProtocolDriver {
 public:
  explicit ProtocolDriver(std::uint64_t seed, DriverConfig cfg = {})
      : rng_(seed),
        net_(&transcript_),
        ledger_(cfg.ledger_path.empty()
                    ? std::make_shared<Ledger>()
                    : std::make_shared<Ledger>(cfg.ledger_path)),
        msrp_(MsrpState::setup(128, rng_, ledger_, cfg.msrp)),
        authority_(msrp_) {}

  // --- setup & registration (secure channel) ---

  void add_pool(std::uint32_t pool_id) {
    std::string rpm_name = "rpm:" + std::to_string(pool_id);
    RpmProvision prov = msrp_.register_rpm(rid_for_name(rpm_name), pool_id, rng_);
    net_.transmit("msrp", rpm_name, MsgKind::Provision, serialize_rpm(prov),
                  "rpm-setup/2", /*secure=*/true);
    rpms_.emplace(pool_id, RpmState(msrp_.params(), prov, ledger_));
  }

  void register_rn(const std::string& name, std::uint32_t pool_id) {
    RnProvision prov = msrp_.register_rn(rid_for_name(name), pool_id, rng_);
    net_.transmit("msrp", name, MsgKind::Provision, serialize_rn(prov),
                  "rn-setup/2", /*secure=*/true);
    if (prov.early_epoch) deliver_epoch(pool_id, *prov.early_epoch);
    creds_.emplace(name, Credential::from_provision(rid_for_name(name), prov));
  }

  void register_user(const std::string& name) {
    UserProvision prov = msrp_.register_user(rid_for_name(name), rng_);
    net_.transmit("msrp", name, MsgKind::Provision, serialize_user(prov),
                  "user-register", /*secure=*/true);
    users_.emplace(name, prov);
  }

  void handoff(std::uint32_t pool_id) {
    auto epoch = msrp_.seal_bf_epoch(pool_id);
    if (!epoch) {
      transcript_.note("bf-handoff: pool " + std::to_string(pool_id) +
                       " pending filter empty, nothing to hand off");
      return;
    }
    deliver_epoch(pool_id, *epoch);
  }

  // --- mutual authentication flows ---

  struct AuthRun {
    bool accepted = false;
    RejectReason reason = RejectReason::none;
    bool joined = false;
    bool reported = false;
    Bytes msg1_wire;  // as delivered (post adversary)
  };

  AuthRun run_initial_auth(const std::string& rn, std::uint32_t pool_id) {
    Credential& cred = credential(rn);
    RpmState& pool_rpm = rpm(pool_id);
    std::string rpm_name = "rpm:" + std::to_string(pool_id);
    InitialAuthMsg1 msg1 =
        initial_auth_request(cred, pool_rpm.public_info(), msrp_.params(), rng_);
    AuthRun run;
    auto wire = net_.transmit(rn, rpm_name, MsgKind::InitialAuth1,
                              msg1.to_bytes(), "initial-auth/1");
    if (!wire) return run;
    run.msg1_wire = *wire;
    AuthDecision decision;
    try {
      decision = pool_rpm.initial_auth_verify(InitialAuthMsg1::from_bytes(*wire), rng_);
    } catch (const std::invalid_argument&) {
      decision = {false, RejectReason::malformed, {}, {}};
    }
    transcript_.verdict(rpm_name, "initial-auth/2", decision.accepted,
                        to_string(decision.reason));
    run.accepted = decision.accepted;
    run.reason = decision.reason;
    if (!decision.accepted) return run;
    finish_accepted_auth(rn, rpm_name, cred, decision, "initial-auth", run);
    return run;
  }

  AuthRun run_reauth(const std::string& rn, std::uint32_t pool_id) {
    Credential& cred = credential(rn);
    RpmState& pool_rpm = rpm(pool_id);
    std::string rpm_name = "rpm:" + std::to_string(pool_id);
    ReauthMsg1 msg1 =
        reauth_request(cred, pool_rpm.public_info(), msrp_.params(), rng_);
    AuthRun run;
    auto wire = net_.transmit(rn, rpm_name, MsgKind::Reauth1, msg1.to_bytes(),
                              "re-auth/1");
    if (!wire) return run;
    run.msg1_wire = *wire;
    AuthDecision decision;
    try {
      decision = pool_rpm.reauth_verify(ReauthMsg1::from_bytes(*wire), rng_);
    } catch (const std::invalid_argument&) {
      decision = {false, RejectReason::malformed, {}, {}};
    }
    transcript_.verdict(rpm_name, "re-auth/2", decision.accepted,
                        to_string(decision.reason));
    run.accepted = decision.accepted;
    run.reason = decision.reason;
    if (!decision.accepted) return run;
    finish_accepted_auth(rn, rpm_name, cred, decision, "re-auth", run);
    return run;
  }

  struct ReplayOutcome {
    bool accepted = false;
    RejectReason reason = RejectReason::none;
  };

  // Adversary re-injects a recorded first message at the pool manager.
  ReplayOutcome replay_msg1(std::uint32_t pool_id, ByteView recorded) {
    RpmState& pool_rpm = rpm(pool_id);
    std::string rpm_name = "rpm:" + std::to_string(pool_id);
    NetMessage msg{0, "adversary", rpm_name,
                   recorded.empty() || recorded[0] != kTagReauthMsg1
                       ? MsgKind::InitialAuth1
                       : MsgKind::Reauth1,
                   to_bytes(recorded), false};
    transcript_.message("replay-injection", msg, false);
    AuthDecision decision;
    try {
      if (msg.kind == MsgKind::Reauth1)
        decision = pool_rpm.reauth_verify(ReauthMsg1::from_bytes(recorded), rng_);
      else
        decision =
            pool_rpm.initial_auth_verify(InitialAuthMsg1::from_bytes(recorded), rng_);
    } catch (const std::invalid_argument&) {
      decision = {false, RejectReason::malformed, {}, {}};
    }
    transcript_.verdict(rpm_name, "replayed-msg1", decision.accepted,
                        to_string(decision.reason));
    return {decision.accepted, decision.reason};
  }

  // --- group flows ---

  struct GroupRun {
    bool ok = false;
    std::uint32_t session_id = 0;
    RejectReason reason = RejectReason::none;
  };

  GroupRun run_group_session(const std::string& user,
                             const std::vector<std::string>& rns) {
    const UserProvision& up = user_info(user);
    std::vector<Bytes> rn_pids;
    std::vector<std::string> names{user};
    for (const auto& rn : rns) {
      rn_pids.push_back(credential(rn).pid);
      names.push_back(rn);
    }
    auto alloc = authority_.allocate(up.pid, rn_pids, rng_);
    GroupRun run;
    run.session_id = alloc.session_id;

    // step 2: MSRP -> each party (RPM-forwarded in deployment; direct here)
    std::vector<GroupParty> parties;
    for (std::size_t i = 0; i < alloc.messages.size(); ++i) {
      auto wire = net_.transmit("msrp", names[i], MsgKind::Allocation,
                                alloc.messages[i].to_bytes(), "group-membership/2");
      if (!wire) {
        run.reason = RejectReason::malformed;
        return run;
      }
      auto party = GroupParty::from_allocation(
          party_keys(names[i]), party_pid(names[i]), msrp_.params(),
          AllocationMsg::from_bytes(*wire));
      if (!party) {
        transcript_.verdict(names[i], "group-membership/2", false,
                            to_string(RejectReason::malformed));
        run.reason = RejectReason::malformed;
        return run;
      }
      parties.push_back(std::move(*party));
    }

    // step 3: share points, point to point
    std::vector<SharePointMsg> broadcasts;
    for (auto& p : parties) broadcasts.push_back(p.membership_broadcast());
    for (std::size_t i = 0; i < parties.size(); ++i) {
      for (std::size_t j = 0; j < parties.size(); ++j) {
        if (i == j) continue;
        auto wire = net_.transmit(names[i], names[j], MsgKind::SharePoint,
                                  broadcasts[i].to_bytes(), "group-membership/3");
        if (!wire) continue;
        try {
          parties[j].receive_share_point(SharePointMsg::from_bytes(*wire));
        } catch (const std::invalid_argument&) {
        }
      }
    }

    // steps 4-5: aggregate check at every party
    bool all_verified = true;
    for (std::size_t i = 0; i < parties.size(); ++i) {
      GroupParty::VerifyOutcome v;
      try {
        v = parties[i].membership_verify();
      } catch (const std::logic_error&) {
        v = {false, RejectReason::membership_failed};
      }
      transcript_.verdict(names[i], "group-membership/5", v.verified,
                          to_string(v.reason));
      if (!v.verified) {
        all_verified = false;
        run.reason = v.reason;
      }
    }
    if (!all_verified) return run;

    // key agreement step 1: pairwise masked shares
    for (std::size_t i = 0; i < parties.size(); ++i) {
      for (auto& msg : parties[i].key_agree_send()) {
        auto wire = net_.transmit(names[i], names[msg.to], MsgKind::MaskedShare,
                                  msg.to_bytes(), "group-key-agreement/1");
        if (!wire) continue;
        try {
          parties[msg.to].receive_masked_share(MaskedShareMsg::from_bytes(*wire));
        } catch (const std::invalid_argument&) {
        }
      }
    }

    // key agreement step 2
    bool all_keyed = true;
    for (std::size_t i = 0; i < parties.size(); ++i) {
      GroupParty::KeyOutcome k;
      try {
        k = parties[i].key_agree_finish();
      } catch (const std::logic_error&) {
        k = {false, RejectReason::key_mismatch};
      }
      transcript_.verdict(names[i], "group-key-agreement/2", k.keyed,
                          to_string(k.reason));
      if (!k.keyed) {
        all_keyed = false;
        run.reason = k.reason;
      }
    }
    if (!all_keyed) return run;

    auto& stored = sessions_[alloc.session_id];
    stored.names = names;
    stored.parties = std::move(parties);
    run.ok = true;
    return run;
  }

  struct UpdateRun {
    bool ok = false;
    RejectReason reason = RejectReason::none;
  };

  // Key update: excluded members receive nothing; replacements join keyed.
  UpdateRun run_key_update(std::uint32_t session_id,
                           const std::vector<std::string>& excluded_names,
                           const std::vector<std::string>& replacement_names) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end())
      throw std::invalid_argument("run_key_update: unknown session");
    SessionParties& sp = it->second;
    SuspicionSet suspicion;
    suspicion.session_id = session_id;
    for (const auto& name : excluded_names) {
      auto pos = std::find(sp.names.begin(), sp.names.end(), name);
      if (pos == sp.names.end())
        throw std::invalid_argument("run_key_update: " + name + " not in session");
      suspicion.excluded.push_back(
          static_cast<std::uint8_t>(pos - sp.names.begin()));
    }
    std::vector<Bytes> replacement_pids;
    for (const auto& name : replacement_names)
      replacement_pids.push_back(credential(name).pid);

    auto batch = authority_.issue_key_update(suspicion, replacement_pids, rng_);
    UpdateRun run;
    run.ok = true;
    for (const auto& msg : batch.messages) {
      std::string target = name_for_pid(msg.to_pid, sp, replacement_names);
      auto wire = net_.transmit("msrp", target, MsgKind::KeyUpdate, msg.to_bytes(),
                                "group-key-update/1");
      if (!wire) continue;
      KeyUpdateMsg delivered = KeyUpdateMsg::from_bytes(*wire);
      auto member = std::find(sp.names.begin(), sp.names.end(), target);
      bool is_replacement =
          std::find(replacement_names.begin(), replacement_names.end(), target) !=
          replacement_names.end();
      if (member != sp.names.end() && !is_replacement) {
        auto& party = sp.parties[member - sp.names.begin()];
        auto outcome = party.apply_key_update(delivered);
        transcript_.verdict(target, "group-key-update/2", outcome.ok,
                            to_string(outcome.reason));
        if (!outcome.ok) {
          run.ok = false;
          run.reason = outcome.reason;
        }
      } else {
        auto joined = GroupParty::join_via_update(party_keys(target),
                                                  party_pid(target),
                                                  msrp_.params(), delivered);
        transcript_.verdict(target, "group-key-update/2(join)",
                            joined.has_value(),
                            joined ? "none"
                                   : to_string(RejectReason::update_verify_failed));
        if (joined) {
          sp.names.push_back(target);
          sp.parties.push_back(std::move(*joined));
        } else {
          run.ok = false;
          run.reason = RejectReason::update_verify_failed;
        }
      }
    }
    // drop excluded members from the driver's view of the session
    std::vector<std::string> kept_names;
    std::vector<GroupParty> kept_parties;
    for (std::size_t i = 0; i < sp.names.size(); ++i) {
      bool excl = std::find(excluded_names.begin(), excluded_names.end(),
                            sp.names[i]) != excluded_names.end();
      if (excl) {
        excluded_parties_.emplace(sp.names[i], std::move(sp.parties[i]));
        continue;
      }
      kept_names.push_back(sp.names[i]);
      kept_parties.push_back(std::move(sp.parties[i]));
    }
    sp.names = std::move(kept_names);
    sp.parties = std::move(kept_parties);
    return run;
  }

  // --- accessors ---

  MsrpState& msrp() { return msrp_; }
  GroupAuthority& authority() { return authority_; }
  RpmState& rpm(std::uint32_t pool_id) {
    auto it = rpms_.find(pool_id);
    if (it == rpms_.end())
      throw std::invalid_argument("unknown pool " + std::to_string(pool_id));
    return it->second;
  }
  Credential& credential(const std::string& name) {
    auto it = creds_.find(name);
    if (it == creds_.end()) throw std::invalid_argument("unknown RN " + name);
    return it->second;
  }
  const UserProvision& user_info(const std::string& name) const {
    auto it = users_.find(name);
    if (it == users_.end()) throw std::invalid_argument("unknown user " + name);
    return it->second;
  }
  GroupParty& party(std::uint32_t session_id, const std::string& name) {
    auto& sp = session(session_id);
    auto pos = std::find(sp.names.begin(), sp.names.end(), name);
    if (pos == sp.names.end())
      throw std::invalid_argument("party " + name + " not in session");
    return sp.parties[pos - sp.names.begin()];
  }
  GroupParty& excluded_party(const std::string& name) {
    auto it = excluded_parties_.find(name);
    if (it == excluded_parties_.end())
      throw std::invalid_argument("no excluded party " + name);
    return it->second;
  }

  struct SessionParties {
    std::vector<std::string> names;
    std::vector<GroupParty> parties;
  };
  SessionParties& session(std::uint32_t id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw std::invalid_argument("unknown session");
    return it->second;
  }

  Transcript& transcript() { return transcript_; }
  SimNetwork& network() { return net_; }
  const std::shared_ptr<Ledger>& ledger() const { return ledger_; }
  Rng& rng() { return rng_; }

  void set_hook(AdversaryHook hook) { net_.set_hook(std::move(hook)); }
  void clear_hook() { net_.clear_hook(); }

  bool any_reject() const { return transcript_.reject_count() > 0; }

 private:
  void deliver_epoch(std::uint32_t pool_id, const Bytes& payload) {
    std::string rpm_name = "rpm:" + std::to_string(pool_id);
    auto wire = net_.transmit("msrp", rpm_name, MsgKind::BfEpoch, payload,
                              "bf-handoff", /*secure=*/true);
    rpm(pool_id).install_epoch(*wire);
  }

  void finish_accepted_auth(const std::string& rn, const std::string& rpm_name,
                            Credential& cred, const AuthDecision& decision,
                            const std::string& flow, AuthRun& run) {
    // ack and report dispatch in parallel; neither waits on the other
    auto ack_wire = net_.transmit(rpm_name, rn, MsgKind::AuthAck,
                                  decision.ack->to_bytes(), flow + "/3");
    auto report_wire = net_.transmit(rpm_name, "msrp", MsgKind::AuthReport,
                                     decision.report->to_bytes(), flow + "/2-report");
    if (ack_wire) {
      ConfirmResult confirm;
      try {
        confirm = auth_confirm(cred, AuthAckMsg::from_bytes(*ack_wire),
                               rpm(cred_pool(rpm_name)).pool_id());
      } catch (const std::invalid_argument&) {
        confirm = {false, RejectReason::malformed};
      }
      transcript_.verdict(rn, flow + "/4", confirm.joined, to_string(confirm.reason));
      run.joined = confirm.joined;
      if (!confirm.joined) run.reason = confirm.reason;
    }
    if (report_wire) {
      ReportOutcome outcome;
      try {
        outcome = msrp_.on_auth_report(AuthReportMsg::from_bytes(*report_wire));
      } catch (const std::invalid_argument&) {
        outcome = {false, RejectReason::malformed, {}};
      }
      transcript_.verdict("msrp", flow + "/report", outcome.valid,
                          to_string(outcome.reason));
      run.reported = outcome.valid;
    }
  }

  static std::uint32_t cred_pool(const std::string& rpm_name) {
    return static_cast<std::uint32_t>(std::stoul(rpm_name.substr(4)));
  }

  const KeyPair& party_keys(const std::string& name) {
    auto u = users_.find(name);
    if (u != users_.end()) {
      user_keypairs_[name] = KeyPair{u->second.sk, u->second.pk};
      return user_keypairs_[name];
    }
    return credential(name).keys;
  }

  Bytes party_pid(const std::string& name) {
    auto u = users_.find(name);
    if (u != users_.end()) return u->second.pid;
    return credential(name).pid;
  }

  std::string name_for_pid(const Bytes& pid, const SessionParties& sp,
                           const std::vector<std::string>& replacements) {
    for (const auto& name : sp.names)
      if (party_pid(name) == pid) return name;
    for (const auto& name : replacements)
      if (party_pid(name) == pid) return name;
    throw std::invalid_argument("name_for_pid: unknown pid");
  }

  static Bytes serialize_rpm(const RpmProvision& p) {
    Bytes out;
    put_u32(out, p.pool_id);
    append(out, p.sk.bytes());
    append(out, p.pk.to_bytes());
    append(out, p.pid);
    return out;
  }

  static Bytes serialize_rn(const RnProvision& p) {
    Bytes out;
    put_u32(out, p.pool_id);
    append(out, p.sk.bytes());
    append(out, p.pk.to_bytes());
    append(out, p.a0.bytes());
    append(out, p.pid0);
    return out;
  }

  static Bytes serialize_user(const UserProvision& p) {
    Bytes out;
    append(out, p.sk.bytes());
    append(out, p.pk.to_bytes());
    append(out, p.pid);
    return out;
  }

  Rng rng_;
  Transcript transcript_;
  SimNetwork net_;
  std::shared_ptr<Ledger> ledger_;
  MsrpState msrp_;
  GroupAuthority authority_;
  std::map<std::uint32_t, RpmState> rpms_;
  std::map<std::string, Credential> creds_;
  std::map<std::string, UserProvision> users_;
  std::map<std::string, KeyPair> user_keypairs_;
  std::map<std::uint32_t, SessionParties> sessions_;
  std::map<std::string, GroupParty> excluded_parties_;
};

// --- scripted scenarios (the oracle-style driver surface) ---

struct ScenarioStep {
  enum class Kind {
    AddPool,
    RegisterRn,
    RegisterUser,
    Handoff,
    InitialAuth,
    Reauth,
    GroupSession,
    KeyUpdate,
    TamperNext,   // install a field-tamper hook
    ClearHook,
    ReplayLastMsg1,
  };
  Kind kind;
  std::string name;                 // entity the step acts for
  std::uint32_t pool = 0;
  std::vector<std::string> names;   // group members / exclusions / replacements
  std::vector<std::string> names2;  // replacements for KeyUpdate
  std::string field;                // tamper target, e.g. "msg1.c2"
  std::uint32_t session = 0;
};

// Mutates one named field of the next matching message; used to realize the
// modify-in-transit query of the adversarial games and the CLI --tamper flag.
inline AdversaryHook make_tamper_hook(const std::string& field_spec,
                                      std::shared_ptr<Rng> rng) {
  return [field_spec, rng](NetMessage& msg) -> HookResult {
    auto flip_range = [&](std::size_t offset, std::size_t len) {
      if (offset + len <= msg.payload.size() && len > 0) {
        std::size_t pos = offset + rng->uniform(len);
        msg.payload[pos] ^= static_cast<std::uint8_t>(1 + rng->uniform(255));
      }
    };
    if (field_spec == "msg1.c2" && msg.kind == MsgKind::InitialAuth1)
      flip_range(1 + kPointBytes, kScalarBytes);
    else if (field_spec == "msg1.c1" && msg.kind == MsgKind::InitialAuth1)
      flip_range(1, kPointBytes);
    else if (field_spec == "msg1.pid" && msg.kind == MsgKind::InitialAuth1)
      flip_range(1 + kPointBytes + kScalarBytes, kPidBytes);
    else if (field_spec == "reauth.c2" && msg.kind == MsgKind::Reauth1)
      flip_range(1 + kPointBytes, 2 * kScalarBytes);
    else if (field_spec == "ack.a" && msg.kind == MsgKind::AuthAck)
      flip_range(1, kPointBytes);
    else if (field_spec == "report.ct" && msg.kind == MsgKind::AuthReport)
      flip_range(1 + 4 + kPointBytes + 2, 8);
    else if (field_spec == "sharepoint.point" && msg.kind == MsgKind::SharePoint)
      flip_range(1 + 4 + 1, kPointBytes);
    else if (field_spec == "masked.payload" && msg.kind == MsgKind::MaskedShare)
      flip_range(1 + 4 + 2, kScalarBytes);
    else if (field_spec == "update.body" && msg.kind == MsgKind::KeyUpdate)
      flip_range(1 + 4 + kPidBytes + kPointBytes + 2, 8);
    return {};
  };
}

inline bool known_tamper_field(const std::string& f) {
  static const char* kFields[] = {"msg1.c2",   "msg1.c1",        "msg1.pid",
                                  "reauth.c2", "ack.a",          "report.ct",
                                  "sharepoint.point", "masked.payload",
                                  "update.body"};
  for (const char* k : kFields)
    if (f == k) return true;
  return false;
}

struct ScenarioResult {
  bool ok = true;
  std::size_t rejects = 0;
  std::string transcript_text;
};

// Deterministic, scripted end-to-end run: the Send/Execute-style adversary
// hooks are realized by the tamper/replay steps.
inline ScenarioResult run_protocol_scenario(const std::vector<ScenarioStep>& script,
                                            std::uint64_t seed,
                                            DriverConfig cfg = {}) {
  ProtocolDriver driver(seed, cfg);
  auto hook_rng = std::make_shared<Rng>(driver.rng().fork(0x7A3B));
  Bytes last_msg1;
  std::uint32_t last_pool = 0;
  ScenarioResult result;
  for (const auto& step : script) {
    using K = ScenarioStep::Kind;
    switch (step.kind) {
      case K::AddPool:
        driver.add_pool(step.pool);
        break;
      case K::RegisterRn:
        driver.register_rn(step.name, step.pool);
        break;
      case K::RegisterUser:
        driver.register_user(step.name);
        break;
      case K::Handoff:
        driver.handoff(step.pool);
        break;
      case K::InitialAuth: {
        auto run = driver.run_initial_auth(step.name, step.pool);
        if (!run.msg1_wire.empty()) {
          last_msg1 = run.msg1_wire;
          last_pool = step.pool;
        }
        result.ok = result.ok && run.joined && run.reported;
        break;
      }
      case K::Reauth: {
        auto run = driver.run_reauth(step.name, step.pool);
        if (!run.msg1_wire.empty()) {
          last_msg1 = run.msg1_wire;
          last_pool = step.pool;
        }
        result.ok = result.ok && run.joined && run.reported;
        break;
      }
      case K::GroupSession: {
        auto run = driver.run_group_session(step.name, step.names);
        result.ok = result.ok && run.ok;
        break;
      }
      case K::KeyUpdate: {
        auto run = driver.run_key_update(step.session, step.names, step.names2);
        result.ok = result.ok && run.ok;
        break;
      }
      case K::TamperNext:
        if (!known_tamper_field(step.field))
          throw std::invalid_argument("unknown tamper field " + step.field);
        driver.set_hook(make_tamper_hook(step.field, hook_rng));
        break;
      case K::ClearHook:
        driver.clear_hook();
        break;
      case K::ReplayLastMsg1: {
        auto outcome = driver.replay_msg1(last_pool, last_msg1);
        result.ok = result.ok && !outcome.accepted;
        break;
      }
    }
  }
  result.rejects = driver.transcript().reject_count();
  result.transcript_text = driver.transcript().to_text();
  return result;
}

}  // namespace rsms
