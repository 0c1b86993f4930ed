#include <gtest/gtest.h>

#include "rsms/group_protocol.hpp"
#include "rsms/scenario.hpp"

using namespace rsms;

namespace {

struct GroupRig {
  std::shared_ptr<Ledger> ledger = std::make_shared<Ledger>();
  Rng rng{314};
  MsrpState msrp = MsrpState::setup(128, rng, ledger);
  GroupAuthority authority{msrp};
  UserProvision user;
  std::vector<KeyPair> keys;  // index 0 = user
  std::vector<Bytes> pids;
  std::vector<Bytes> rn_pids;

  explicit GroupRig(std::size_t n_rns = 3) {
    msrp.register_rpm(rid_for_name("rpm"), 1, rng);
    user = msrp.register_user(rid_for_name("user"), rng);
    keys.push_back(KeyPair{user.sk, user.pk});
    pids.push_back(user.pid);
    for (std::size_t i = 0; i < n_rns; ++i) {
      auto prov = msrp.register_rn(rid_for_name("rn" + std::to_string(i)), 1, rng);
      keys.push_back(KeyPair{prov.sk, prov.pk});
      pids.push_back(prov.pid0);
      rn_pids.push_back(prov.pid0);
    }
  }

  GroupAuthority::Allocation allocate() {
    return authority.allocate(user.pid, rn_pids, rng);
  }

  std::vector<GroupParty> build_parties(const GroupAuthority::Allocation& alloc) {
    std::vector<GroupParty> parties;
    for (std::size_t i = 0; i < alloc.messages.size(); ++i) {
      auto p = GroupParty::from_allocation(keys[i], pids[i], msrp.params(),
                                           alloc.messages[i]);
      EXPECT_TRUE(p.has_value());
      parties.push_back(std::move(*p));
    }
    return parties;
  }

  static void run_membership(std::vector<GroupParty>& parties) {
    std::vector<SharePointMsg> points;
    for (auto& p : parties) points.push_back(p.membership_broadcast());
    for (std::size_t i = 0; i < parties.size(); ++i)
      for (std::size_t j = 0; j < parties.size(); ++j)
        if (i != j) parties[j].receive_share_point(points[i]);
    for (auto& p : parties) ASSERT_TRUE(p.membership_verify().verified);
  }

  static void run_agreement(std::vector<GroupParty>& parties) {
    for (std::size_t i = 0; i < parties.size(); ++i)
      for (auto& msg : parties[i].key_agree_send())
        parties[msg.to].receive_masked_share(msg);
    for (auto& p : parties) ASSERT_TRUE(p.key_agree_finish().keyed);
  }
};

}  // namespace

TEST(RegisterUser, BundleInvariants) {
  GroupRig rig;
  EXPECT_EQ(rig.user.pk, GroupPoint::mul_generator(rig.user.sk));
  EXPECT_EQ(xor_bytes(rig.user.pid, rig.msrp.params().h1_pk_pub),
            rid_for_name("user"));
  EXPECT_THROW(rig.msrp.register_user(rid_for_name("user"), rig.rng),
               std::invalid_argument);
}

TEST(Allocate, CommitmentMatchesKeyAndShares) {
  GroupRig rig;
  auto alloc = rig.allocate();
  const auto& record = rig.authority.session(alloc.session_id);
  EXPECT_EQ(record.descriptor.commitment,
            GroupPoint::mul_generator(record.s_serv));
  EXPECT_EQ(record.descriptor.key_digest, h4_digest(record.s_serv));
  EXPECT_EQ(record.shares.size(), 4u);
  // reconstructing from the recorded shares yields s_serv (MSRP self-check
  // runs internally as well)
  auto xs = record.descriptor.eval_points();
  std::vector<Share<Scalar>> shares;
  for (std::size_t i = 0; i < xs.size(); ++i)
    shares.push_back(Share<Scalar>{xs[i], record.shares[i]});
  EXPECT_EQ(share_reconstruct(std::span<const Share<Scalar>>(shares)),
            record.s_serv);
}

TEST(Allocate, ShareDecryptsOnlyUnderOwnKey) {
  GroupRig rig;
  auto alloc = rig.allocate();
  // right key works
  auto ok = GroupParty::from_allocation(rig.keys[1], rig.pids[1],
                                        rig.msrp.params(), alloc.messages[1]);
  EXPECT_TRUE(ok.has_value());
  // another party's key cannot open it
  EXPECT_FALSE(pk_decrypt(rig.keys[2].sk, alloc.messages[1].share_ct).has_value());
}

TEST(Allocate, UnregisteredPidRejected) {
  GroupRig rig;
  Rng other(555);
  std::vector<Bytes> bad{other.bytes(kPidBytes)};
  EXPECT_THROW(rig.authority.allocate(rig.user.pid, bad, rig.rng),
               std::invalid_argument);
  // role mismatch: a user pseudonym in the RN slot
  std::vector<Bytes> wrong_role{rig.user.pid};
  EXPECT_THROW(rig.authority.allocate(rig.user.pid, wrong_role, rig.rng),
               std::invalid_argument);
}

TEST(Allocate, DuplicateRosterPidResalted) {
  GroupRig rig(2);
  // same RN twice: evaluation points collide until the salt separates them
  std::vector<Bytes> twice{rig.rn_pids[0], rig.rn_pids[0]};
  auto alloc = rig.authority.allocate(rig.user.pid, twice, rig.rng);
  const auto& desc = rig.authority.session(alloc.session_id).descriptor;
  EXPECT_EQ(desc.roster[1].salt, 0);
  EXPECT_NE(desc.roster[2].salt, 0);
  auto xs = desc.eval_points();
  EXPECT_FALSE(xs[1] == xs[2]);
}

TEST(Membership, HonestSumEqualsCommitment) {
  for (std::size_t n : {1u, 2u, 3u, 4u}) {
    GroupRig rig(n);
    auto alloc = rig.allocate();
    auto parties = rig.build_parties(alloc);
    GroupRig::run_membership(parties);
    for (auto& p : parties)
      EXPECT_EQ(p.phase(), PartyPhase::membership_verified);
  }
}

TEST(Membership, DegenerateUserOnlyGroup) {
  GroupRig rig(0);
  auto alloc = rig.authority.allocate(rig.user.pid, {}, rig.rng);
  auto parties = rig.build_parties(alloc);
  ASSERT_EQ(parties.size(), 1u);
  parties[0].membership_broadcast();
  EXPECT_TRUE(parties[0].membership_verify().verified);
}

TEST(Membership, RandomPointSubstitutionRejected) {
  GroupRig rig(3);
  auto alloc = rig.allocate();
  auto parties = rig.build_parties(alloc);
  std::vector<SharePointMsg> points;
  for (auto& p : parties) points.push_back(p.membership_broadcast());
  // substitute party 2's broadcast with a random point for receiver 0
  SharePointMsg forged = points[2];
  forged.share_point = GroupPoint::mul_generator(Scalar::random_nonzero(rig.rng));
  for (std::size_t j : {0u, 1u, 3u}) parties[0].receive_share_point(points[j]);
  parties[0].receive_share_point(forged);
  auto verdict = parties[0].membership_verify();
  EXPECT_FALSE(verdict.verified);
  EXPECT_EQ(verdict.reason, RejectReason::membership_failed);
  EXPECT_EQ(parties[0].phase(), PartyPhase::allocated);
}

TEST(Membership, MissingSharePointIsPreconditionError) {
  GroupRig rig(2);
  auto alloc = rig.allocate();
  auto parties = rig.build_parties(alloc);
  parties[0].membership_broadcast();
  EXPECT_THROW(parties[0].membership_verify(), std::logic_error);
}

TEST(Membership, DistinctSharePointsAcrossSessions) {
  GroupRig rig(2);
  std::set<Bytes> seen;
  for (int s = 0; s < 20; ++s) {
    auto alloc = rig.allocate();
    auto parties = rig.build_parties(alloc);
    for (auto& p : parties) {
      auto msg = p.membership_broadcast();
      EXPECT_TRUE(seen.insert(msg.share_point.to_bytes()).second);
    }
  }
}

TEST(KeyAgreement, AllPartiesDeriveSameKey) {
  for (std::size_t n : {1u, 2u, 3u, 4u}) {
    GroupRig rig(n);
    auto alloc = rig.allocate();
    auto parties = rig.build_parties(alloc);
    GroupRig::run_membership(parties);
    GroupRig::run_agreement(parties);
    const Scalar& expected = rig.authority.session(alloc.session_id).s_serv;
    for (auto& p : parties) {
      EXPECT_EQ(p.session_key(), expected);
      EXPECT_EQ(GroupPoint::mul_generator(p.session_key()),
                p.descriptor().commitment);
      EXPECT_EQ(p.phase(), PartyPhase::keyed);
    }
  }
}

TEST(KeyAgreement, TamperedMaskedShareRejected) {
  GroupRig rig(2);
  auto alloc = rig.allocate();
  auto parties = rig.build_parties(alloc);
  GroupRig::run_membership(parties);
  for (std::size_t i = 0; i < parties.size(); ++i)
    for (auto& msg : parties[i].key_agree_send()) {
      if (msg.from == 1 && msg.to == 0) msg.payload[5] ^= 0x40;  // one flip
      parties[msg.to].receive_masked_share(msg);
    }
  auto v0 = parties[0].key_agree_finish();
  EXPECT_FALSE(v0.keyed);
  EXPECT_EQ(v0.reason, RejectReason::key_mismatch);
  // untouched parties still finish
  EXPECT_TRUE(parties[1].key_agree_finish().keyed);
}

TEST(KeyAgreement, EavesdropperCannotUnmask) {
  // with only the broadcast points and the masked payload, unmasking demands
  // the pairwise Diffie-Hellman point; guessing from public points fails
  GroupRig rig(1);
  int recovered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto alloc = rig.allocate();
    auto parties = rig.build_parties(alloc);
    GroupRig::run_membership(parties);
    auto msgs = parties[0].key_agree_send();
    ASSERT_EQ(msgs.size(), 1u);
    GroupPoint y0 = GroupPoint::mul_generator(parties[0].own_share());
    GroupPoint y1 = GroupPoint::mul_generator(parties[1].own_share());
    for (const GroupPoint& guess : {y0, y1, y0.add(y1)}) {
      Bytes mask = h3_point_mask(guess, kScalarBytes);
      auto candidate = Scalar::try_from_bytes(xor_bytes(mask, msgs[0].payload));
      if (candidate && GroupPoint::mul_generator(*candidate) == y0) recovered++;
    }
  }
  EXPECT_EQ(recovered, 0);
}

namespace {

struct KeyedRig : GroupRig {
  GroupAuthority::Allocation alloc;
  std::vector<GroupParty> parties;

  explicit KeyedRig(std::size_t n = 3) : GroupRig(n), alloc(allocate()) {
    parties = build_parties(alloc);
    run_membership(parties);
    run_agreement(parties);
  }
};

}  // namespace

TEST(KeyUpdate, RetainedMemberVerifiesEquation) {
  KeyedRig rig;
  Scalar s_old = rig.parties[0].session_key();
  GroupPoint q_old = rig.parties[0].descriptor().commitment;
  SuspicionSet suspicion{rig.alloc.session_id, {2}};
  auto batch = rig.authority.issue_key_update(suspicion, {}, rig.rng);
  EXPECT_EQ(batch.messages.size(), 3u);  // everyone except the excluded RN
  // the published verification identity holds for the issued key
  Scalar delta = h5_update_delta(q_old, rig.msrp.params().pk_pub);
  EXPECT_EQ(GroupPoint::mul_generator(batch.s_new),
            q_old.add(rig.msrp.params().pk_pub.mul(delta)));
  auto outcome = rig.parties[0].apply_key_update(batch.messages[0]);
  ASSERT_TRUE(outcome.ok);
  EXPECT_FALSE(rig.parties[0].session_key() == s_old);
  EXPECT_EQ(rig.parties[0].session_key(), batch.s_new);
  EXPECT_EQ(rig.parties[0].descriptor().commitment,
            GroupPoint::mul_generator(batch.s_new));
}

TEST(KeyUpdate, ExcludedPartyCannotReadNewTraffic) {
  KeyedRig rig;
  SuspicionSet suspicion{rig.alloc.session_id, {3}};
  auto batch = rig.authority.issue_key_update(suspicion, {}, rig.rng);
  // retained members move to the new key
  ASSERT_TRUE(rig.parties[0].apply_key_update(batch.messages[0]).ok);
  ASSERT_TRUE(rig.parties[1].apply_key_update(batch.messages[1]).ok);
  Rng traffic(808);
  auto sealed = rig.parties[0].seal_message(str_bytes("post-update"), traffic);
  // party 3 still holds the old key and fails on every message
  EXPECT_FALSE(rig.parties[3].open_message(sealed).has_value());
  auto ok = rig.parties[1].open_message(sealed);
  ASSERT_TRUE(ok.has_value());
  EXPECT_EQ(*ok, str_bytes("post-update"));
}

TEST(KeyUpdate, ReplacementJoinsAndExchangesTraffic) {
  KeyedRig rig;
  auto extra = rig.msrp.register_rn(rid_for_name("replacement"), 1, rig.rng);
  SuspicionSet suspicion{rig.alloc.session_id, {1}};
  std::vector<Bytes> repl{extra.pid0};
  auto batch = rig.authority.issue_key_update(suspicion, repl, rig.rng);
  ASSERT_EQ(batch.messages.size(), 4u);  // 3 retained + 1 replacement
  ASSERT_TRUE(rig.parties[0].apply_key_update(batch.messages[0]).ok);
  auto joined = GroupParty::join_via_update(KeyPair{extra.sk, extra.pk},
                                            extra.pid0, rig.msrp.params(),
                                            batch.messages.back());
  ASSERT_TRUE(joined.has_value());
  EXPECT_EQ(joined->session_key(), rig.parties[0].session_key());
  Rng traffic(809);
  auto sealed = joined->seal_message(str_bytes("fresh node"), traffic);
  auto opened = rig.parties[0].open_message(sealed);
  ASSERT_TRUE(opened.has_value());
  EXPECT_EQ(*opened, str_bytes("fresh node"));
}

TEST(KeyUpdate, ChainedUpdatesVerifyAgainstNewCommitment) {
  KeyedRig rig;
  SuspicionSet first{rig.alloc.session_id, {3}};
  auto b1 = rig.authority.issue_key_update(first, {}, rig.rng);
  ASSERT_TRUE(rig.parties[0].apply_key_update(b1.messages[0]).ok);
  ASSERT_TRUE(rig.parties[1].apply_key_update(b1.messages[1]).ok);
  // second update is built from and verified against Q_new
  SuspicionSet second{rig.alloc.session_id, {2}};
  auto b2 = rig.authority.issue_key_update(second, {}, rig.rng);
  ASSERT_TRUE(rig.parties[0].apply_key_update(b2.messages[0]).ok);
  ASSERT_TRUE(rig.parties[1].apply_key_update(b2.messages[1]).ok);
  EXPECT_EQ(rig.parties[0].session_key(), b2.s_new);
  EXPECT_EQ(rig.parties[0].descriptor().commitment,
            GroupPoint::mul_generator(b2.s_new));
}

TEST(KeyUpdate, CrossSessionConfusionRejected) {
  GroupRig rig(2);
  auto alloc_a = rig.allocate();
  auto parties_a = rig.build_parties(alloc_a);
  GroupRig::run_membership(parties_a);
  GroupRig::run_agreement(parties_a);
  auto alloc_b = rig.allocate();
  auto parties_b = rig.build_parties(alloc_b);
  GroupRig::run_membership(parties_b);
  GroupRig::run_agreement(parties_b);

  SuspicionSet suspicion{alloc_b.session_id, {1}};
  auto batch = rig.authority.issue_key_update(suspicion, {}, rig.rng);
  // session B's update delivered to the party's session-A state
  auto direct = parties_a[0].apply_key_update(batch.messages[0]);
  EXPECT_FALSE(direct.ok);
  EXPECT_EQ(direct.reason, RejectReason::update_verify_failed);
  // even with the session header rewritten, the embedded commitment differs
  KeyUpdateMsg relabeled = batch.messages[0];
  relabeled.session_id = alloc_a.session_id;
  auto relabeled_outcome = parties_a[0].apply_key_update(relabeled);
  EXPECT_FALSE(relabeled_outcome.ok);
}

TEST(KeyUpdate, GuardsAndErrors) {
  KeyedRig rig;
  SuspicionSet excl_user{rig.alloc.session_id, {0}};
  EXPECT_THROW(rig.authority.issue_key_update(excl_user, {}, rig.rng),
               std::invalid_argument);
  SuspicionSet empty{rig.alloc.session_id, {}};
  EXPECT_THROW(rig.authority.issue_key_update(empty, {}, rig.rng),
               std::invalid_argument);
  SuspicionSet unknown{9999, {1}};
  EXPECT_THROW(rig.authority.issue_key_update(unknown, {}, rig.rng),
               std::invalid_argument);
  SuspicionSet out_of_range{rig.alloc.session_id, {9}};
  EXPECT_THROW(rig.authority.issue_key_update(out_of_range, {}, rig.rng),
               std::invalid_argument);
}

TEST(PartyPhases, MonotoneAndGuarded) {
  GroupRig rig(1);
  auto alloc = rig.allocate();
  auto parties = rig.build_parties(alloc);
  EXPECT_EQ(parties[0].phase(), PartyPhase::allocated);
  EXPECT_THROW(parties[0].key_agree_send(), std::logic_error);
  EXPECT_THROW(parties[0].key_agree_finish(), std::logic_error);
  Rng traffic(1);
  EXPECT_THROW(parties[0].seal_message(str_bytes("x"), traffic), std::logic_error);
  GroupRig::run_membership(parties);
  EXPECT_THROW(parties[0].membership_verify(), std::logic_error);  // no re-run
  GroupRig::run_agreement(parties);
  EXPECT_EQ(parties[0].phase(), PartyPhase::keyed);
}

TEST(Codec, GroupMessagesRoundtrip) {
  KeyedRig rig(2);
  auto alloc_wire = rig.alloc.messages[0].to_bytes();
  EXPECT_EQ(AllocationMsg::from_bytes(alloc_wire).to_bytes(), alloc_wire);

  SharePointMsg sp{7, 1, GroupPoint::generator()};
  EXPECT_EQ(sp.to_bytes().size(), 1 + 4 + 1 + kPointBytes);
  EXPECT_EQ(SharePointMsg::from_bytes(sp.to_bytes()).to_bytes(), sp.to_bytes());

  MaskedShareMsg ms{7, 0, 1, Bytes(kScalarBytes, 0xAB)};
  EXPECT_EQ(ms.to_bytes().size(), 1 + 4 + 2 + kScalarBytes);
  EXPECT_EQ(MaskedShareMsg::from_bytes(ms.to_bytes()).to_bytes(), ms.to_bytes());

  Rng traffic(3);
  auto data = rig.parties[0].seal_message(str_bytes("codec"), traffic);
  EXPECT_EQ(GroupDataMsg::from_bytes(data.to_bytes()).to_bytes(), data.to_bytes());
}
