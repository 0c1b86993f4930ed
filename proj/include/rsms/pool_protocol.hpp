#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rsms/bloom_filter.hpp"
#include "rsms/bytes.hpp"
#include "rsms/counters.hpp"
#include "rsms/curve.hpp"
#include "rsms/hash_family.hpp"
#include "rsms/hybrid_encryption.hpp"
#include "rsms/ledger.hpp"
#include "rsms/rng.hpp"

namespace rsms {

enum class RejectReason {
  none,
  malformed,
  replayed,            // credential digest already on the ledger
  unregistered,        // no bloom-filter epoch holds the credential
  pseudonym_replayed,  // next pseudonym already on the ledger
  no_chain,            // prior credential digest missing from the ledger
  rpm_auth_failed,     // ack point does not match a * P
  invalid_report,      // report decrypts but mismatches the registry
  membership_failed,   // aggregate share-point check failed
  key_mismatch,        // reconstructed group key fails its digest/commitment
  update_verify_failed,
};

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::malformed: return "malformed";
    case RejectReason::replayed: return "replayed";
    case RejectReason::unregistered: return "unregistered";
    case RejectReason::pseudonym_replayed: return "pseudonym-replayed";
    case RejectReason::no_chain: return "no-chain";
    case RejectReason::rpm_auth_failed: return "rpm-auth-failed";
    case RejectReason::invalid_report: return "invalid-report";
    case RejectReason::membership_failed: return "membership-failed";
    case RejectReason::key_mismatch: return "key-mismatch";
    case RejectReason::update_verify_failed: return "update-verify-failed";
  }
  return "?";
}

// Published system parameters; serialization carries no secret field.
struct SystemParams {
  std::string curve;
  GroupPoint pk_pub;
  Bytes h1_pk_pub;  // cached H1(PK_pub), pseudonym width
  std::string hash_family;

  Bytes to_bytes() const {
    Bytes out;
    put_u16(out, static_cast<std::uint16_t>(curve.size()));
    append(out, str_bytes(curve));
    append(out, pk_pub.to_bytes());
    append(out, h1_pk_pub);
    put_u16(out, static_cast<std::uint16_t>(hash_family.size()));
    append(out, str_bytes(hash_family));
    return out;
  }
};

// --- message codecs (tag byte, then fixed-width fields in step order) ---

inline constexpr std::uint8_t kTagInitialAuthMsg1 = 0xA1;
inline constexpr std::uint8_t kTagReauthMsg1 = 0xA2;
inline constexpr std::uint8_t kTagAuthReport = 0xA3;
inline constexpr std::uint8_t kTagAuthAck = 0xA4;
inline constexpr std::uint8_t kTagBfEpoch = 0xA5;

struct InitialAuthMsg1 {
  GroupPoint c1;
  Bytes c2;   // scalar width
  Bytes pid;  // PID_k

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagInitialAuthMsg1);
    append(out, c1.to_bytes());
    append(out, c2);
    append(out, pid);
    return out;
  }

  static InitialAuthMsg1 from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagInitialAuthMsg1)
      throw std::invalid_argument("msg1: wrong tag");
    InitialAuthMsg1 m;
    m.c1 = GroupPoint::from_bytes(r.take(kPointBytes));
    m.c2 = rsms::to_bytes(r.take(kScalarBytes));
    m.pid = rsms::to_bytes(r.take(kPidBytes));
    r.expect_end();
    return m;
  }
};

struct ReauthMsg1 {
  GroupPoint c1;
  Bytes c2;        // 2 x scalar width: H4(a_k) || a_{k+1}, masked
  Bytes pid_prev;  // PID_k
  Bytes pid_next;  // PID_{k+1}

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagReauthMsg1);
    append(out, c1.to_bytes());
    append(out, c2);
    append(out, pid_prev);
    append(out, pid_next);
    return out;
  }

  static ReauthMsg1 from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagReauthMsg1) throw std::invalid_argument("reauth1: wrong tag");
    ReauthMsg1 m;
    m.c1 = GroupPoint::from_bytes(r.take(kPointBytes));
    m.c2 = rsms::to_bytes(r.take(2 * kScalarBytes));
    m.pid_prev = rsms::to_bytes(r.take(kPidBytes));
    m.pid_next = rsms::to_bytes(r.take(kPidBytes));
    r.expect_end();
    return m;
  }
};

// RPM -> MSRP: Enc_PKpub(a || PID), stamped with the reporting pool.
struct AuthReportMsg {
  std::uint32_t pool_id = 0;
  HybridCiphertext report;

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagAuthReport);
    put_u32(out, pool_id);
    append(out, report.to_bytes());
    return out;
  }

  static AuthReportMsg from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagAuthReport) throw std::invalid_argument("report: wrong tag");
    AuthReportMsg m;
    m.pool_id = r.u32();
    m.report = HybridCiphertext::from_bytes(r.take(r.remaining()));
    return m;
  }
};

// RPM -> RN: A = a * P.
struct AuthAckMsg {
  GroupPoint a_point;

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagAuthAck);
    append(out, a_point.to_bytes());
    return out;
  }

  static AuthAckMsg from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagAuthAck) throw std::invalid_argument("ack: wrong tag");
    AuthAckMsg m;
    m.a_point = GroupPoint::from_bytes(r.take(kPointBytes));
    r.expect_end();
    return m;
  }
};

// --- provisioning bundles (delivered over the modeled secure channel) ---

struct RpmProvision {
  std::uint32_t pool_id = 0;
  Scalar sk;  // d + msk * H2(PID)
  GroupPoint pk;
  Bytes pid;
};

struct RnProvision {
  std::uint32_t pool_id = 0;
  Scalar sk;
  GroupPoint pk;
  Scalar a0;
  Bytes pid0;
  // Set when this registration pushed the pending filter past capacity and
  // an epoch was sealed early; the caller forwards it to the pool's RPM.
  std::optional<Bytes> early_epoch;
};

struct UserProvision {
  Scalar sk;
  GroupPoint pk;
  Bytes pid;
};

struct RpmPublic {
  std::uint32_t pool_id = 0;
  GroupPoint pk;
  Bytes pid;
};

enum class EntityRole : std::uint8_t { Rpm = 1, Rn = 2, User = 3 };

struct RegistryEntry {
  EntityRole role;
  Bytes rid;
  KeyPair keys;
  Bytes pid;  // current pseudonym
  // RN credential chain state:
  Scalar a_current;
  Scalar a_initial;
  std::uint32_t epoch = 0;
  std::uint32_t pool_id = 0;
};

struct ReportOutcome {
  bool valid = false;
  RejectReason reason = RejectReason::none;
  std::vector<std::uint64_t> appended;  // ledger sequence numbers
};

class GroupAuthority;  // group-side MSRP operations, defined with the group protocol

// Root of trust. Registers every entity, maintains the credential registry
// and the per-pool pending bloom filters, and is the only writer of the
// shared ledger.
class MsrpState {
 public:
  struct Config {
    std::uint32_t bf_capacity;
    std::uint32_t bf_epsilon;
    Config(std::uint32_t capacity = 1000, std::uint32_t epsilon = 10)
        : bf_capacity(capacity), bf_epsilon(epsilon) {}
  };

  static MsrpState setup(unsigned security_bits, Rng& rng,
                         std::shared_ptr<Ledger> ledger, Config cfg = Config()) {
    if (security_bits != 128)
      throw std::invalid_argument("msrp_setup: unsupported security parameter");
    MsrpState m(std::move(ledger), cfg);
    m.msk_ = Scalar::random_nonzero(rng);
    m.params_.curve = curve_name();
    m.params_.pk_pub = GroupPoint::mul_generator(m.msk_);
    m.params_.h1_pk_pub = h1_pid_base(m.params_.pk_pub);
    m.params_.hash_family = "sha256+shake256/tagged";
    return m;
  }

  const SystemParams& params() const { return params_; }
  const std::shared_ptr<Ledger>& ledger() const { return ledger_; }

  RpmProvision register_rpm(ByteView rid, std::uint32_t pool_id, Rng& rng) {
    require_fresh_rid(rid);
    if (pools_.count(pool_id))
      throw std::invalid_argument("register_rpm: pool already managed");
    Scalar d = Scalar::random_nonzero(rng);
    GroupPoint pk = GroupPoint::mul_generator(d);
    Bytes pid = xor_bytes(params_.h1_pk_pub, rid);
    Scalar sk = d.add(msk_.mul(h2({ByteView(pid)})));
    RegistryEntry e{EntityRole::Rpm, to_bytes(rid), KeyPair{sk, pk}, pid,
                    Scalar{}, Scalar{}, 0, pool_id};
    insert_entry(std::move(e));
    pools_.emplace(pool_id, PoolState{BloomFilter(cfg_.bf_capacity, cfg_.bf_epsilon, 0), 1});
    return RpmProvision{pool_id, sk, pk, pid};
  }

  RnProvision register_rn(ByteView rid, std::uint32_t pool_id, Rng& rng) {
    require_fresh_rid(rid);
    auto pool = pools_.find(pool_id);
    if (pool == pools_.end())
      throw std::invalid_argument("register_rn: unknown pool");
    KeyPair keys = keygen(rng);
    Scalar a0 = Scalar::random_nonzero(rng);
    Bytes pid0 = xor_bytes(params_.h1_pk_pub, rid);
    std::optional<Bytes> early;
    if (pool->second.pending.inserted() >= pool->second.pending.capacity())
      early = seal_locked(pool->second);
    pool->second.pending.insert(a0.bytes());
    RegistryEntry e{EntityRole::Rn, to_bytes(rid), keys, pid0, a0, a0, 0, pool_id};
    insert_entry(std::move(e));
    return RnProvision{pool_id, keys.sk, keys.pk, a0, pid0, std::move(early)};
  }

  UserProvision register_user(ByteView rid, Rng& rng) {
    require_fresh_rid(rid);
    KeyPair keys = keygen(rng);
    Bytes pid = xor_bytes(params_.h1_pk_pub, rid);
    RegistryEntry e{EntityRole::User, to_bytes(rid), keys, pid,
                    Scalar{}, Scalar{}, 0, 0};
    insert_entry(std::move(e));
    return UserProvision{keys.sk, keys.pk, pid};
  }

  // Seals the pool's pending filter into an epoch payload for the RPM and
  // starts a fresh one. Empty pending filter is a reported no-op.
  std::optional<Bytes> seal_bf_epoch(std::uint32_t pool_id) {
    auto pool = pools_.find(pool_id);
    if (pool == pools_.end())
      throw std::invalid_argument("seal_bf_epoch: unknown pool");
    if (pool->second.pending.inserted() == 0) return std::nullopt;
    return seal_locked(pool->second);
  }

  // Mutual-authentication report: decrypt, match the registry tuple exactly,
  // then advance the chain and record (H4(a_k), PID_k) on the ledger.
  ReportOutcome on_auth_report(const AuthReportMsg& msg) {
    auto plain = pk_decrypt(msk_, msg.report);
    if (!plain || plain->size() != kScalarBytes + kPidBytes)
      return {false, RejectReason::malformed, {}};
    auto a = Scalar::try_from_bytes(ByteView(*plain).first(kScalarBytes));
    Bytes pid = to_bytes(ByteView(*plain).subspan(kScalarBytes));
    if (!a) return {false, RejectReason::malformed, {}};
    auto rid = pid_index_.find(pid);
    if (rid == pid_index_.end()) return {false, RejectReason::invalid_report, {}};
    RegistryEntry& e = registry_.at(rid->second);
    if (e.role != EntityRole::Rn || !(e.a_current == *a) || e.pid != pid)
      return {false, RejectReason::invalid_report, {}};
    ReportOutcome out;
    out.valid = true;
    out.appended.push_back(
        ledger_->append(RecordKind::credential_digest,
                        h4_digest(e.a_current).bytes(), msg.pool_id));
    out.appended.push_back(
        ledger_->append(RecordKind::pseudonym, e.pid, msg.pool_id));
    advance_chain(e);
    return out;
  }

  // Chain reconstruction for audit: recompute the RN's pseudonym chain from
  // its registration secrets and return the ones found on the ledger.
  std::vector<Bytes> trace_rn(ByteView rid) const {
    auto it = registry_.find(to_bytes(rid));
    if (it == registry_.end() || it->second.role != EntityRole::Rn)
      throw std::invalid_argument("trace_rn: unknown RN");
    const RegistryEntry& e = it->second;
    std::vector<Bytes> found;
    Bytes pid = xor_bytes(params_.h1_pk_pub, rid);
    Scalar a = e.a_initial;
    for (std::uint32_t k = 0;; ++k) {
      if (ledger_->contains(RecordKind::pseudonym, pid)) found.push_back(pid);
      if (k >= e.epoch) break;
      a = h4_chain(a, e.keys.sk);
      pid = h6_next_pid(pid, a);
    }
    return found;
  }

  const RegistryEntry* find_by_pid(ByteView pid) const {
    auto it = pid_index_.find(to_bytes(pid));
    if (it == pid_index_.end()) return nullptr;
    return &registry_.at(it->second);
  }

  const RegistryEntry& entry(ByteView rid) const {
    auto it = registry_.find(to_bytes(rid));
    if (it == registry_.end()) throw std::invalid_argument("entry: unknown RID");
    return it->second;
  }

  const BloomFilter& pending_bf(std::uint32_t pool_id) const {
    return pools_.at(pool_id).pending;
  }

  // Group operations (defined alongside the group protocol) need the master
  // secret and registry access; the MSRP is the trusted root either way.
  const Scalar& master_secret() const { return msk_; }

 private:
  friend class GroupAuthority;

  struct PoolState {
    BloomFilter pending;
    std::uint32_t next_epoch;
  };

  MsrpState(std::shared_ptr<Ledger> ledger, Config cfg)
      : ledger_(std::move(ledger)), cfg_(cfg) {
    if (!ledger_) throw std::invalid_argument("msrp: null ledger");
  }

  void require_fresh_rid(ByteView rid) const {
    if (rid.size() != kPidBytes)
      throw std::invalid_argument("register: RID must be pseudonym width");
    if (registry_.count(to_bytes(rid)))
      throw std::invalid_argument("register: duplicate RID");
  }

  void insert_entry(RegistryEntry e) {
    pid_index_[e.pid] = e.rid;
    registry_.emplace(e.rid, std::move(e));
  }

  Bytes seal_locked(PoolState& pool) {
    Bytes payload = pool.pending.serialize();
    pool.pending = BloomFilter(cfg_.bf_capacity, cfg_.bf_epsilon, pool.next_epoch++);
    return payload;
  }

  void advance_chain(RegistryEntry& e) {
    Scalar a_next = h4_chain(e.a_current, e.keys.sk);
    Bytes pid_next = h6_next_pid(e.pid, a_next);
    pid_index_.erase(e.pid);
    e.a_current = a_next;
    e.pid = pid_next;
    e.epoch++;
    pid_index_[e.pid] = e.rid;
  }

  Scalar msk_;
  SystemParams params_;
  std::shared_ptr<Ledger> ledger_;
  Config cfg_;
  std::map<Bytes, RegistryEntry> registry_;  // by RID
  std::map<Bytes, Bytes> pid_index_;         // current PID -> RID
  std::map<std::uint32_t, PoolState> pools_;
};

// --- RN-side credential and requests ---

// Evolving secret tuple. `a`/`pid` always hold the next value to consume;
// `prev_*` hold the pair consumed by the last successful authentication,
// which re-authentication references as its chain link.
struct Credential {
  Bytes rid;
  KeyPair keys;
  std::uint32_t home_pool = 0;
  std::uint32_t joined_pool = 0;
  bool joined = false;
  Scalar a;
  Bytes pid;
  std::uint32_t epoch = 0;
  std::optional<Scalar> prev_a;
  std::optional<Bytes> prev_pid;
  bool session_open = false;

  static Credential from_provision(ByteView rid, const RnProvision& p) {
    Credential c;
    c.rid = to_bytes(rid);
    c.keys = KeyPair{p.sk, p.pk};
    c.home_pool = p.pool_id;
    c.a = p.a0;
    c.pid = p.pid0;
    return c;
  }
};

// Step 1 of Initial Authentication: c1 = u(PK_RPM + H2(PID_RPM) PK_pub),
// c2 = H3(U, PID_k) xor a_k. U = uP stays recoverable by the RPM; u itself
// is discarded with the request.
inline InitialAuthMsg1 initial_auth_request(Credential& cred,
                                            const RpmPublic& rpm,
                                            const SystemParams& params,
                                            Rng& rng,
                                            PhaseMeter* meter = nullptr) {
  InitialAuthMsg1 msg;
  {
    MeterSection sec(meter ? &meter->core : nullptr);
    Scalar u = Scalar::random_nonzero(rng);
    GroupPoint basis = rpm.pk.add(params.pk_pub.mul(h2({ByteView(rpm.pid)})));
    msg.c1 = basis.mul(u);
    GroupPoint u_point = GroupPoint::mul_generator(u);
    Bytes mask = h3_mask(u_point, cred.pid, kScalarBytes);
    msg.c2 = xor_bytes(mask, cred.a.bytes());
    msg.pid = cred.pid;
  }
  cred.session_open = true;
  return msg;
}

// Step 1 of Re-authentication against another pool's RPM. Requires one
// completed authentication: the consumed pair anchors the chain and the
// current pair is spent by this run.
inline ReauthMsg1 reauth_request(Credential& cred, const RpmPublic& rpm,
                                 const SystemParams& params, Rng& rng,
                                 PhaseMeter* meter = nullptr) {
  if (!cred.prev_a || !cred.prev_pid)
    throw std::logic_error("reauth_request: no completed authentication to chain from");
  ReauthMsg1 msg;
  {
    MeterSection sec(meter ? &meter->core : nullptr);
    Scalar w = Scalar::random_nonzero(rng);
    GroupPoint basis = rpm.pk.add(params.pk_pub.mul(h2({ByteView(rpm.pid)})));
    msg.c1 = basis.mul(w);
    GroupPoint w_point = GroupPoint::mul_generator(w);
    Bytes payload;
    append(payload, h4_digest(*cred.prev_a).bytes());
    append(payload, cred.a.bytes());
    Bytes mask = h3_mask(w_point, *cred.prev_pid, 2 * kScalarBytes);
    msg.c2 = xor_bytes(mask, payload);
    msg.pid_prev = *cred.prev_pid;
    msg.pid_next = cred.pid;
  }
  cred.session_open = true;
  return msg;
}

struct ConfirmResult {
  bool joined = false;
  RejectReason reason = RejectReason::none;
};

// Step 4: a * P == A authenticates the RPM; on success the credential chain
// advances exactly once.
inline ConfirmResult auth_confirm(Credential& cred, const AuthAckMsg& ack,
                                  std::uint32_t pool_id,
                                  PhaseMeter* meter = nullptr) {
  if (!cred.session_open)
    throw std::logic_error("auth_confirm: no open session");
  bool ok;
  {
    MeterSection sec(meter ? &meter->core : nullptr);
    ok = GroupPoint::mul_generator(cred.a) == ack.a_point;
  }
  cred.session_open = false;
  if (!ok) return {false, RejectReason::rpm_auth_failed};
  {
    MeterSection sec(meter ? &meter->extras : nullptr);
    Scalar a_next = h4_chain(cred.a, cred.keys.sk);
    Bytes pid_next = h6_next_pid(cred.pid, a_next);
    cred.prev_a = cred.a;
    cred.prev_pid = cred.pid;
    cred.a = a_next;
    cred.pid = pid_next;
    cred.epoch++;
  }
  cred.joined = true;
  cred.joined_pool = pool_id;
  return {true, RejectReason::none};
}

struct AuthDecision {
  bool accepted = false;
  RejectReason reason = RejectReason::none;
  std::optional<AuthReportMsg> report;  // to MSRP
  std::optional<AuthAckMsg> ack;        // to RN
};

// Pool manager. Holds the implicit-certificate keypair, the precomputed
// scalar inverse, and every bloom-filter epoch handed off by the MSRP.
class RpmState {
 public:
  RpmState(const SystemParams& params, const RpmProvision& prov,
           std::shared_ptr<Ledger> ledger)
      : params_(params),
        pool_id_(prov.pool_id),
        keys_{prov.sk, prov.pk},
        pid_(prov.pid),
        sk_inv_(prov.sk.inverse()),  // Remark-style precomputation
        ledger_(std::move(ledger)) {
    if (!ledger_) throw std::invalid_argument("rpm: null ledger");
  }

  std::uint32_t pool_id() const { return pool_id_; }

  RpmPublic public_info() const { return RpmPublic{pool_id_, keys_.pk, pid_}; }

  void install_epoch(ByteView serialized) {
    epochs_.insert(epochs_.begin(), BloomFilter::deserialize(serialized));
  }

  std::size_t epoch_count() const { return epochs_.size(); }

  // Step 2 of Initial Authentication: recover U via the precomputed inverse,
  // unmask a, reject replays via the ledger digest, then check registration
  // against every installed epoch, newest first.
  AuthDecision initial_auth_verify(const InitialAuthMsg1& msg, Rng& rng,
                                   PhaseMeter* meter = nullptr) {
    if (epochs_.empty())
      throw std::logic_error("initial_auth_verify: no installed BF epoch");
    std::optional<Scalar> a;
    {
      MeterSection sec(meter ? &meter->core : nullptr);
      GroupPoint u_point = msg.c1.mul(sk_inv_);
      Bytes mask = h3_mask(u_point, msg.pid, kScalarBytes);
      a = Scalar::try_from_bytes(xor_bytes(mask, msg.c2));
      if (a && a->is_zero()) a.reset();
      if (a) {
        if (ledger_->contains(RecordKind::credential_digest,
                              h4_digest(*a).bytes()))
          return {false, RejectReason::replayed, {}, {}};
        bool registered = false;
        for (const auto& epoch : epochs_)
          if (epoch.check(a->bytes())) {
            registered = true;
            break;
          }
        if (!registered) return {false, RejectReason::unregistered, {}, {}};
      }
    }
    if (!a) return {false, RejectReason::malformed, {}, {}};
    AuthDecision out;
    out.accepted = true;
    {
      MeterSection sec(meter ? &meter->core : nullptr);
      out.ack = AuthAckMsg{GroupPoint::mul_generator(*a)};
    }
    {
      MeterSection sec(meter ? &meter->extras : nullptr);
      Bytes plain;
      append(plain, a->bytes());
      append(plain, msg.pid);
      out.report =
          AuthReportMsg{pool_id_, pk_encrypt(params_.pk_pub, plain, rng)};
    }
    return out;
  }

  // Step 2 of Re-authentication: ledger-only checks — the next pseudonym
  // must be fresh and the previous credential digest must be on the chain.
  AuthDecision reauth_verify(const ReauthMsg1& msg, Rng& rng,
                             PhaseMeter* meter = nullptr) {
    std::optional<Scalar> a_next;
    Bytes digest_prev;
    {
      MeterSection sec(meter ? &meter->core : nullptr);
      GroupPoint w_point = msg.c1.mul(sk_inv_);
      Bytes mask = h3_mask(w_point, msg.pid_prev, 2 * kScalarBytes);
      Bytes payload = xor_bytes(mask, msg.c2);
      digest_prev = to_bytes(ByteView(payload).first(kScalarBytes));
      a_next = Scalar::try_from_bytes(ByteView(payload).subspan(kScalarBytes));
      if (a_next && a_next->is_zero()) a_next.reset();
      if (a_next) {
        if (ledger_->contains(RecordKind::pseudonym, msg.pid_next))
          return {false, RejectReason::pseudonym_replayed, {}, {}};
        if (!ledger_->contains(RecordKind::credential_digest, digest_prev))
          return {false, RejectReason::no_chain, {}, {}};
      }
    }
    if (!a_next) return {false, RejectReason::malformed, {}, {}};
    AuthDecision out;
    out.accepted = true;
    {
      MeterSection sec(meter ? &meter->core : nullptr);
      out.ack = AuthAckMsg{GroupPoint::mul_generator(*a_next)};
    }
    {
      MeterSection sec(meter ? &meter->extras : nullptr);
      Bytes plain;
      append(plain, a_next->bytes());
      append(plain, msg.pid_next);
      out.report =
          AuthReportMsg{pool_id_, pk_encrypt(params_.pk_pub, plain, rng)};
    }
    return out;
  }

  const KeyPair& keys() const { return keys_; }
  const Scalar& sk_inverse() const { return sk_inv_; }

 private:
  SystemParams params_;
  std::uint32_t pool_id_;
  KeyPair keys_;
  Bytes pid_;
  Scalar sk_inv_;
  std::vector<BloomFilter> epochs_;  // newest first
  std::shared_ptr<Ledger> ledger_;
};

}  // namespace rsms
