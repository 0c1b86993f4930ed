#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rsms/pool_protocol.hpp"
#include "rsms/shamir.hpp"

namespace rsms {

inline constexpr std::uint8_t kTagAllocation = 0xB1;
inline constexpr std::uint8_t kTagSharePoint = 0xB2;
inline constexpr std::uint8_t kTagMaskedShare = 0xB3;
inline constexpr std::uint8_t kTagKeyUpdate = 0xB4;
inline constexpr std::uint8_t kTagGroupData = 0xB5;

// Session roster plus the public commitments every party verifies against.
// Party 1 (index 0) is the user; evaluation points are derived from the
// pseudonyms, with a per-party counter salt for the collision corner case.
struct GroupDescriptor {
  struct PartyRef {
    Bytes pid;
    GroupPoint pk;
    std::uint8_t salt = 0;
  };

  std::uint32_t session_id = 0;
  std::vector<PartyRef> roster;
  GroupPoint commitment;  // Q = s_serv * P
  Scalar key_digest;      // H4(s_serv)

  static Scalar eval_point(const PartyRef& p) {
    if (p.salt == 0) return h2({ByteView(p.pid)});
    return h2({ByteView(p.pid), ByteView(&p.salt, 1)});
  }

  std::vector<Scalar> eval_points() const {
    std::vector<Scalar> xs;
    xs.reserve(roster.size());
    for (const auto& p : roster) xs.push_back(eval_point(p));
    return xs;
  }

  Bytes to_bytes() const {
    Bytes out;
    put_u32(out, session_id);
    put_u8(out, static_cast<std::uint8_t>(roster.size()));
    for (const auto& p : roster) {
      append(out, p.pid);
      append(out, p.pk.to_bytes());
      put_u8(out, p.salt);
    }
    append(out, commitment.to_bytes());
    append(out, key_digest.bytes());
    return out;
  }

  static GroupDescriptor read(ByteReader& r) {
    GroupDescriptor d;
    d.session_id = r.u32();
    std::size_t n = r.u8();
    for (std::size_t i = 0; i < n; ++i) {
      PartyRef p;
      p.pid = rsms::to_bytes(r.take(kPidBytes));
      p.pk = GroupPoint::from_bytes(r.take(kPointBytes));
      p.salt = r.u8();
      d.roster.push_back(std::move(p));
    }
    d.commitment = GroupPoint::from_bytes(r.take(kPointBytes));
    d.key_digest = Scalar::from_bytes(r.take(kScalarBytes));
    return d;
  }
};

// MSRP -> party i: the descriptor plus the party's share, encrypted to it.
struct AllocationMsg {
  std::uint8_t index = 0;
  GroupDescriptor descriptor;
  HybridCiphertext share_ct;

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagAllocation);
    put_u8(out, index);
    append(out, descriptor.to_bytes());
    append(out, share_ct.to_bytes());
    return out;
  }

  static AllocationMsg from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagAllocation) throw std::invalid_argument("alloc: wrong tag");
    AllocationMsg m;
    m.index = r.u8();
    m.descriptor = GroupDescriptor::read(r);
    m.share_ct = HybridCiphertext::from_bytes(r.take(r.remaining()));
    return m;
  }
};

// Party i broadcast: f(x_i) * P.
struct SharePointMsg {
  std::uint32_t session_id = 0;
  std::uint8_t from = 0;
  GroupPoint share_point;

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagSharePoint);
    put_u32(out, session_id);
    put_u8(out, from);
    append(out, share_point.to_bytes());
    return out;
  }

  static SharePointMsg from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagSharePoint) throw std::invalid_argument("share-point: wrong tag");
    SharePointMsg m;
    m.session_id = r.u32();
    m.from = r.u8();
    m.share_point = GroupPoint::from_bytes(r.take(kPointBytes));
    r.expect_end();
    return m;
  }
};

// Party i -> party j: f(x_i) masked by the pairwise Diffie-Hellman point.
struct MaskedShareMsg {
  std::uint32_t session_id = 0;
  std::uint8_t from = 0;
  std::uint8_t to = 0;
  Bytes payload;  // scalar width

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagMaskedShare);
    put_u32(out, session_id);
    put_u8(out, from);
    put_u8(out, to);
    append(out, payload);
    return out;
  }

  static MaskedShareMsg from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagMaskedShare) throw std::invalid_argument("masked-share: wrong tag");
    MaskedShareMsg m;
    m.session_id = r.u32();
    m.from = r.u8();
    m.to = r.u8();
    m.payload = rsms::to_bytes(r.take(kScalarBytes));
    r.expect_end();
    return m;
  }
};

// MSRP -> retained/replacement party: Enc_PK_i(s_new || Q).
struct KeyUpdateMsg {
  std::uint32_t session_id = 0;
  Bytes to_pid;
  HybridCiphertext body;

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagKeyUpdate);
    put_u32(out, session_id);
    append(out, to_pid);
    append(out, body.to_bytes());
    return out;
  }

  static KeyUpdateMsg from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagKeyUpdate) throw std::invalid_argument("key-update: wrong tag");
    KeyUpdateMsg m;
    m.session_id = r.u32();
    m.to_pid = rsms::to_bytes(r.take(kPidBytes));
    m.body = HybridCiphertext::from_bytes(r.take(r.remaining()));
    return m;
  }
};

// Authenticated group traffic under the session key. Exists to demonstrate
// forward/backward security, not as a full secure-messaging layer.
struct GroupDataMsg {
  std::uint32_t session_id = 0;
  std::uint8_t from = 0;
  std::array<std::uint8_t, kAeadNonceBytes> nonce{};
  Bytes ciphertext;
  std::array<std::uint8_t, kAeadTagBytes> tag{};

  Bytes to_bytes() const {
    Bytes out;
    put_u8(out, kTagGroupData);
    put_u32(out, session_id);
    put_u8(out, from);
    append(out, ByteView(nonce));
    put_u16(out, static_cast<std::uint16_t>(ciphertext.size()));
    append(out, ciphertext);
    append(out, ByteView(tag));
    return out;
  }

  static GroupDataMsg from_bytes(ByteView b) {
    ByteReader r(b);
    if (r.u8() != kTagGroupData) throw std::invalid_argument("group-data: wrong tag");
    GroupDataMsg m;
    m.session_id = r.u32();
    m.from = r.u8();
    ByteView nonce = r.take(kAeadNonceBytes);
    std::copy(nonce.begin(), nonce.end(), m.nonce.begin());
    std::size_t n = r.u16();
    m.ciphertext = rsms::to_bytes(r.take(n));
    ByteView tag = r.take(kAeadTagBytes);
    std::copy(tag.begin(), tag.end(), m.tag.begin());
    r.expect_end();
    return m;
  }
};

struct SuspicionSet {
  std::uint32_t session_id = 0;
  std::vector<std::uint8_t> excluded;  // roster indices, never 0 (the user)
};

struct GroupSessionRecord {
  GroupDescriptor descriptor;
  Scalar s_serv;
  std::vector<Scalar> shares;  // f(x_i), cleared after a key update
};

namespace detail {

inline void group_traffic_key(const Scalar& s_serv, std::uint32_t session_id,
                              std::array<std::uint8_t, kAeadKeyBytes>& key) {
  Bytes sid;
  put_u32(sid, session_id);
  Bytes okm = shake256({str_bytes("rsms-group-data-v1"), ByteView(s_serv.bytes()),
                        ByteView(sid)},
                       kAeadKeyBytes);
  std::copy(okm.begin(), okm.end(), key.begin());
}

}  // namespace detail

// MSRP-side group session management: allocation of shares over the roster
// and key updates that exclude suspicious members.
class GroupAuthority {
 public:
  explicit GroupAuthority(MsrpState& msrp) : msrp_(&msrp) {}

  struct Allocation {
    std::uint32_t session_id = 0;
    std::vector<AllocationMsg> messages;  // one per roster index
  };

  // s_serv = r + msk * H2(PID_1 || ... || PID_{N+1}); degree-N polynomial
  // with f(0) = s_serv; Q = s_serv * P. Works for N >= 0 (user alone).
  Allocation allocate(ByteView user_pid, std::span<const Bytes> rn_pids, Rng& rng) {
    GroupDescriptor desc;
    desc.session_id = next_session_++;
    desc.roster.push_back(party_ref(user_pid, EntityRole::User));
    for (const auto& pid : rn_pids)
      desc.roster.push_back(party_ref(pid, EntityRole::Rn));

    derive_eval_points(desc);
    std::vector<Scalar> xs = desc.eval_points();

    Bytes pid_concat;
    for (const auto& p : desc.roster) append(pid_concat, p.pid);
    Scalar r = Scalar::random_nonzero(rng);
    Scalar s_serv = r.add(msrp_->master_secret().mul(h2({ByteView(pid_concat)})));

    std::size_t degree = desc.roster.size() - 1;
    auto shares = share_generate(s_serv, std::span<const Scalar>(xs), degree, rng);
    desc.commitment = GroupPoint::mul_generator(s_serv);
    desc.key_digest = h4_digest(s_serv);

    // self-check: the shares interpolate back to the chosen key
    if (!(share_reconstruct(std::span<const Share<Scalar>>(shares)) == s_serv))
      throw std::logic_error("allocate: share self-check failed");

    Allocation out;
    out.session_id = desc.session_id;
    GroupSessionRecord rec{desc, s_serv, {}};
    for (std::size_t i = 0; i < desc.roster.size(); ++i) {
      rec.shares.push_back(shares[i].y);
      AllocationMsg m;
      m.index = static_cast<std::uint8_t>(i);
      m.descriptor = desc;
      m.share_ct = pk_encrypt(desc.roster[i].pk, shares[i].y.bytes(), rng);
      out.messages.push_back(std::move(m));
    }
    sessions_.emplace(desc.session_id, std::move(rec));
    return out;
  }

  struct UpdateBatch {
    std::vector<KeyUpdateMsg> messages;
    Scalar s_new;          // for tests; never sent in the clear
    GroupPoint q_previous;
  };

  // s_new = s_serv + msk * H5(Q, PK_pub), delivered encrypted to every
  // retained member and every replacement, never to excluded members.
  UpdateBatch issue_key_update(const SuspicionSet& suspicion,
                               std::span<const Bytes> replacement_pids, Rng& rng) {
    auto it = sessions_.find(suspicion.session_id);
    if (it == sessions_.end())
      throw std::invalid_argument("key_update: unknown session");
    if (suspicion.excluded.empty() && replacement_pids.empty())
      throw std::invalid_argument("key_update: nothing to update");
    GroupSessionRecord& rec = it->second;
    std::vector<bool> out_set(rec.descriptor.roster.size(), false);
    for (std::uint8_t idx : suspicion.excluded) {
      if (idx == 0)
        throw std::invalid_argument("key_update: the user cannot be excluded");
      if (idx >= rec.descriptor.roster.size())
        throw std::invalid_argument("key_update: excluded index out of range");
      out_set[idx] = true;
    }

    const GroupPoint q_old = rec.descriptor.commitment;
    Scalar delta = h5_update_delta(q_old, msrp_->params().pk_pub);
    Scalar s_new = rec.s_serv.add(msrp_->master_secret().mul(delta));

    Bytes plain;
    append(plain, s_new.bytes());
    append(plain, q_old.to_bytes());

    UpdateBatch batch;
    batch.s_new = s_new;
    batch.q_previous = q_old;
    std::vector<GroupDescriptor::PartyRef> new_roster;
    for (std::size_t i = 0; i < rec.descriptor.roster.size(); ++i) {
      if (out_set[i]) continue;
      const auto& p = rec.descriptor.roster[i];
      batch.messages.push_back(
          KeyUpdateMsg{rec.descriptor.session_id, p.pid,
                       pk_encrypt(p.pk, plain, rng)});
      new_roster.push_back(p);
    }
    if (new_roster.empty())
      throw std::invalid_argument("key_update: would exclude all members");
    for (const auto& pid : replacement_pids) {
      auto ref = party_ref(pid, EntityRole::Rn);
      batch.messages.push_back(
          KeyUpdateMsg{rec.descriptor.session_id, ref.pid,
                       pk_encrypt(ref.pk, plain, rng)});
      new_roster.push_back(std::move(ref));
    }

    rec.s_serv = s_new;
    rec.descriptor.roster = std::move(new_roster);
    rec.descriptor.commitment = GroupPoint::mul_generator(s_new);
    rec.descriptor.key_digest = h4_digest(s_new);
    rec.shares.clear();  // stale after membership change
    return batch;
  }

  const GroupSessionRecord& session(std::uint32_t id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw std::invalid_argument("session: unknown id");
    return it->second;
  }

 private:
  GroupDescriptor::PartyRef party_ref(ByteView pid, EntityRole expected) const {
    const RegistryEntry* e = msrp_->find_by_pid(pid);
    if (!e) throw std::invalid_argument("group: unregistered PID");
    if (e->role != expected) throw std::invalid_argument("group: wrong role for PID");
    return GroupDescriptor::PartyRef{rsms::to_bytes(pid), e->keys.pk, 0};
  }

  // H2 collisions or zeros are re-salted with a bounded counter; Lagrange
  // interpolation needs distinct nonzero nodes.
  static void derive_eval_points(GroupDescriptor& desc) {
    std::vector<Scalar> seen;
    for (auto& p : desc.roster) {
      for (int attempt = 0; attempt <= 16; ++attempt) {
        p.salt = static_cast<std::uint8_t>(attempt);
        Scalar x = GroupDescriptor::eval_point(p);
        bool clash = x.is_zero();
        for (const auto& s : seen)
          if (s == x) clash = true;
        if (!clash) {
          seen.push_back(x);
          break;
        }
        if (attempt == 16)
          throw std::runtime_error("group: evaluation point collision unresolved");
      }
    }
  }

  MsrpState* msrp_;
  std::map<std::uint32_t, GroupSessionRecord> sessions_;
  std::uint32_t next_session_ = 1;
};

enum class PartyPhase : std::uint8_t { allocated, membership_verified, keyed };

// One party's state through membership authentication, key agreement and
// key updates. Phases only ever move forward.
class GroupParty {
 public:
  // Decrypts the allocated share. Returns nullopt when the ciphertext does
  // not open under this party's key.
  static std::optional<GroupParty> from_allocation(const KeyPair& own,
                                                   ByteView own_pid,
                                                   const SystemParams& params,
                                                   const AllocationMsg& msg) {
    if (msg.index >= msg.descriptor.roster.size())
      throw std::invalid_argument("allocation: index out of range");
    if (msg.descriptor.roster[msg.index].pid != rsms::to_bytes(own_pid))
      throw std::invalid_argument("allocation: roster mismatch");
    auto plain = pk_decrypt(own.sk, msg.share_ct);
    if (!plain) return std::nullopt;
    auto share = Scalar::try_from_bytes(*plain);
    if (!share) return std::nullopt;
    GroupParty p(params, own, msg.descriptor, msg.index, *share);
    return p;
  }

  // Step 3: f(x_i) * P to every other party; the share scalar itself never
  // leaves this object in the clear.
  SharePointMsg membership_broadcast(PhaseMeter* meter = nullptr) {
    require_phase(PartyPhase::allocated, "membership_broadcast");
    MeterSection sec(meter ? &meter->core : nullptr);
    GroupPoint pt = GroupPoint::mul_generator(own_share_);
    share_points_[index_] = pt;
    return SharePointMsg{desc_.session_id, static_cast<std::uint8_t>(index_), pt};
  }

  void receive_share_point(const SharePointMsg& msg) {
    if (msg.session_id != desc_.session_id)
      throw std::invalid_argument("share-point: wrong session");
    if (msg.from >= share_points_.size())
      throw std::invalid_argument("share-point: bad index");
    share_points_[msg.from] = msg.share_point;
  }

  struct VerifyOutcome {
    bool verified = false;
    RejectReason reason = RejectReason::none;
  };

  // Steps 4-5: C_i = lambda_i f(x_i) P, accept iff sum C_i = Q. The check is
  // aggregate; a failure identifies no culprit.
  VerifyOutcome membership_verify(PhaseMeter* meter = nullptr) {
    require_phase(PartyPhase::allocated, "membership_verify");
    for (const auto& sp : share_points_)
      if (!sp) throw std::logic_error("membership_verify: missing share points");
    bool ok;
    {
      MeterSection sec(meter ? &meter->core : nullptr);
      GroupPoint sum;
      for (std::size_t i = 0; i < share_points_.size(); ++i) {
        Scalar li = lagrange_coeff_at_zero(std::span<const Scalar>(xs_), i);
        GroupPoint ci = share_points_[i]->mul(li);
        sum = i == 0 ? ci : sum.add(ci);
      }
      ok = sum == desc_.commitment;
    }
    if (!ok) return {false, RejectReason::membership_failed};
    phase_ = PartyPhase::membership_verified;
    return {true, RejectReason::none};
  }

  // Key-agreement step 1: for each peer, mask the own share with the
  // pairwise point f(x_i) f(x_j) P. The point is cached; unmasking the
  // peer's reply reuses it.
  std::vector<MaskedShareMsg> key_agree_send(PhaseMeter* meter = nullptr) {
    require_phase(PartyPhase::membership_verified, "key_agree_send");
    std::vector<MaskedShareMsg> out;
    for (std::size_t j = 0; j < share_points_.size(); ++j) {
      if (j == index_) continue;
      const GroupPoint& dh = pairwise_point(j, meter);
      Bytes mask;
      {
        MeterSection sec(meter ? &meter->extras : nullptr);
        mask = h3_point_mask(dh, kScalarBytes);
      }
      out.push_back(MaskedShareMsg{desc_.session_id,
                                   static_cast<std::uint8_t>(index_),
                                   static_cast<std::uint8_t>(j),
                                   xor_bytes(mask, own_share_.bytes())});
    }
    return out;
  }

  void receive_masked_share(const MaskedShareMsg& msg, PhaseMeter* meter = nullptr) {
    if (msg.session_id != desc_.session_id)
      throw std::invalid_argument("masked-share: wrong session");
    if (msg.to != index_) throw std::invalid_argument("masked-share: not addressed here");
    if (msg.from >= share_points_.size() || msg.from == index_)
      throw std::invalid_argument("masked-share: bad sender");
    const GroupPoint& dh = pairwise_point(msg.from, meter);
    Bytes mask;
    {
      MeterSection sec(meter ? &meter->extras : nullptr);
      mask = h3_point_mask(dh, kScalarBytes);
    }
    auto y = Scalar::try_from_bytes(xor_bytes(mask, msg.payload));
    if (y)
      recovered_[msg.from] = *y;
    else
      bad_share_[msg.from] = true;
  }

  struct KeyOutcome {
    bool keyed = false;
    RejectReason reason = RejectReason::none;
  };

  // Key-agreement step 2: interpolate s'_serv from the recovered shares and
  // accept iff H4(s') matches the allocated digest and s' P = Q.
  KeyOutcome key_agree_finish(PhaseMeter* meter = nullptr) {
    require_phase(PartyPhase::membership_verified, "key_agree_finish");
    std::vector<Share<Scalar>> shares;
    for (std::size_t i = 0; i < share_points_.size(); ++i) {
      if (i == index_) {
        shares.push_back(Share<Scalar>{xs_[i], own_share_});
        continue;
      }
      if (bad_share_[i]) return {false, RejectReason::key_mismatch};
      if (!recovered_[i])
        throw std::logic_error("key_agree_finish: missing masked shares");
      shares.push_back(Share<Scalar>{xs_[i], *recovered_[i]});
    }
    bool ok;
    Scalar candidate;
    {
      MeterSection sec(meter ? &meter->core : nullptr);
      candidate = share_reconstruct(std::span<const Share<Scalar>>(shares));
      ok = h4_digest(candidate) == desc_.key_digest;
    }
    {
      MeterSection sec(meter ? &meter->extras : nullptr);
      ok = ok && GroupPoint::mul_generator(candidate) == desc_.commitment;
    }
    if (!ok) return {false, RejectReason::key_mismatch};
    s_serv_ = candidate;
    phase_ = PartyPhase::keyed;
    return {true, RejectReason::none};
  }

  struct UpdateOutcome {
    bool ok = false;
    RejectReason reason = RejectReason::none;
  };

  // Key-update step 2: decrypt, verify s_new P = Q + H5(Q, PK_pub) PK_pub
  // against the local commitment, then swap in the new key.
  UpdateOutcome apply_key_update(const KeyUpdateMsg& msg, PhaseMeter* meter = nullptr) {
    require_phase(PartyPhase::keyed, "apply_key_update");
    std::optional<Bytes> plain;
    {
      MeterSection sec(meter ? &meter->extras : nullptr);
      plain = pk_decrypt(keys_.sk, msg.body);
    }
    if (!plain || plain->size() != kScalarBytes + kPointBytes ||
        msg.session_id != desc_.session_id)
      return {false, RejectReason::update_verify_failed};
    auto s_new = Scalar::try_from_bytes(ByteView(*plain).first(kScalarBytes));
    if (!s_new) return {false, RejectReason::update_verify_failed};
    GroupPoint q_embedded;
    try {
      q_embedded = GroupPoint::from_bytes(ByteView(*plain).subspan(kScalarBytes));
    } catch (const std::invalid_argument&) {
      return {false, RejectReason::update_verify_failed};
    }
    if (q_embedded != desc_.commitment)
      return {false, RejectReason::update_verify_failed};
    bool ok;
    GroupPoint new_commitment;
    {
      MeterSection sec(meter ? &meter->core : nullptr);
      Scalar delta = h5_update_delta(desc_.commitment, params_.pk_pub);
      new_commitment = GroupPoint::mul_generator(*s_new);
      GroupPoint expected = desc_.commitment.add(params_.pk_pub.mul(delta));
      ok = new_commitment == expected;
    }
    if (!ok) return {false, RejectReason::update_verify_failed};
    s_serv_ = *s_new;
    desc_.commitment = new_commitment;
    desc_.key_digest = h4_digest(*s_new);
    return {true, RejectReason::none};
  }

  // Replacement path: a freshly authenticated RN receives the update message
  // without ever holding the old key; the embedded commitment anchors the
  // verification equation.
  static std::optional<GroupParty> join_via_update(const KeyPair& own,
                                                   ByteView own_pid,
                                                   const SystemParams& params,
                                                   const KeyUpdateMsg& msg,
                                                   PhaseMeter* meter = nullptr) {
    if (msg.to_pid != rsms::to_bytes(own_pid)) return std::nullopt;
    std::optional<Bytes> plain;
    {
      MeterSection sec(meter ? &meter->extras : nullptr);
      plain = pk_decrypt(own.sk, msg.body);
    }
    if (!plain || plain->size() != kScalarBytes + kPointBytes) return std::nullopt;
    auto s_new = Scalar::try_from_bytes(ByteView(*plain).first(kScalarBytes));
    if (!s_new) return std::nullopt;
    GroupPoint q_embedded;
    try {
      q_embedded = GroupPoint::from_bytes(ByteView(*plain).subspan(kScalarBytes));
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
    bool ok;
    GroupPoint new_commitment;
    {
      MeterSection sec(meter ? &meter->core : nullptr);
      Scalar delta = h5_update_delta(q_embedded, params.pk_pub);
      new_commitment = GroupPoint::mul_generator(*s_new);
      ok = new_commitment == q_embedded.add(params.pk_pub.mul(delta));
    }
    if (!ok) return std::nullopt;
    GroupDescriptor desc;
    desc.session_id = msg.session_id;
    desc.commitment = new_commitment;
    desc.key_digest = h4_digest(*s_new);
    GroupParty p(params, own, desc, kReplacementIndex, Scalar{});
    p.s_serv_ = *s_new;
    p.phase_ = PartyPhase::keyed;
    return p;
  }

  GroupDataMsg seal_message(ByteView plaintext, Rng& rng) const {
    require_phase(PartyPhase::keyed, "seal_message");
    std::array<std::uint8_t, kAeadKeyBytes> key;
    detail::group_traffic_key(*s_serv_, desc_.session_id, key);
    GroupDataMsg msg;
    msg.session_id = desc_.session_id;
    msg.from = static_cast<std::uint8_t>(index_);
    Bytes nonce = rng.bytes(kAeadNonceBytes);
    std::copy(nonce.begin(), nonce.end(), msg.nonce.begin());
    Bytes aad;
    put_u32(aad, desc_.session_id);
    aead_seal(ByteView(key), ByteView(msg.nonce), plaintext, ByteView(aad),
              msg.ciphertext, msg.tag);
    return msg;
  }

  std::optional<Bytes> open_message(const GroupDataMsg& msg) const {
    require_phase(PartyPhase::keyed, "open_message");
    std::array<std::uint8_t, kAeadKeyBytes> key;
    detail::group_traffic_key(*s_serv_, msg.session_id, key);
    Bytes aad;
    put_u32(aad, msg.session_id);
    return aead_open(ByteView(key), ByteView(msg.nonce), ByteView(msg.ciphertext),
                     ByteView(aad), ByteView(msg.tag));
  }

  static constexpr std::size_t kReplacementIndex = 0xFF;

  std::size_t index() const { return index_; }
  PartyPhase phase() const { return phase_; }
  const GroupDescriptor& descriptor() const { return desc_; }
  const Scalar& session_key() const {
    if (!s_serv_) throw std::logic_error("session_key: not keyed");
    return *s_serv_;
  }
  const Scalar& own_share() const { return own_share_; }

 private:
  GroupParty(const SystemParams& params, const KeyPair& own, GroupDescriptor desc,
             std::size_t index, Scalar share)
      : params_(params),
        keys_(own),
        desc_(std::move(desc)),
        xs_(desc_.eval_points()),
        index_(index),
        own_share_(share),
        share_points_(desc_.roster.size()),
        dh_cache_(desc_.roster.size()),
        recovered_(desc_.roster.size()),
        bad_share_(desc_.roster.size(), false) {}

  void require_phase(PartyPhase expected, const char* op) const {
    if (phase_ != expected)
      throw std::logic_error(std::string(op) + ": wrong phase");
  }

  const GroupPoint& pairwise_point(std::size_t j, PhaseMeter* meter) {
    if (!dh_cache_[j]) {
      if (!share_points_[j])
        throw std::logic_error("pairwise_point: missing share point");
      MeterSection sec(meter ? &meter->core : nullptr);
      dh_cache_[j] = share_points_[j]->mul(own_share_);
    }
    return *dh_cache_[j];
  }

  SystemParams params_;
  KeyPair keys_;
  GroupDescriptor desc_;
  std::vector<Scalar> xs_;
  std::size_t index_ = 0;
  Scalar own_share_;
  std::vector<std::optional<GroupPoint>> share_points_;
  std::vector<std::optional<GroupPoint>> dh_cache_;
  std::vector<std::optional<Scalar>> recovered_;
  std::vector<bool> bad_share_;
  PartyPhase phase_ = PartyPhase::allocated;
  std::optional<Scalar> s_serv_;
};

}  // namespace rsms
