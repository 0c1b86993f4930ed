#include <gtest/gtest.h>

#include "rsms/pool_protocol.hpp"
#include "rsms/scenario.hpp"

using namespace rsms;

namespace {

struct Rig {
  std::shared_ptr<Ledger> ledger = std::make_shared<Ledger>();
  Rng rng{99};
  MsrpState msrp = MsrpState::setup(128, rng, ledger);

  Bytes rid(const std::string& name) { return rid_for_name(name); }
};

}  // namespace

TEST(MsrpSetup, PublicKeyMatchesMasterSecret) {
  Rig rig;
  EXPECT_EQ(rig.msrp.params().pk_pub,
            GroupPoint::mul_generator(rig.msrp.master_secret()));
  EXPECT_FALSE(rig.msrp.params().pk_pub.is_identity());
}

TEST(MsrpSetup, DistinctMasterSecrets) {
  auto ledger = std::make_shared<Ledger>();
  Rng r1(1), r2(2);
  auto m1 = MsrpState::setup(128, r1, ledger);
  auto m2 = MsrpState::setup(128, r2, ledger);
  EXPECT_NE(m1.master_secret(), m2.master_secret());
}

TEST(MsrpSetup, UnsupportedSecurityParameterRejected) {
  auto ledger = std::make_shared<Ledger>();
  Rng rng(3);
  EXPECT_THROW(MsrpState::setup(80, rng, ledger), std::invalid_argument);
}

TEST(MsrpSetup, PublishedParamsCarryNoSecret) {
  Rig rig;
  Bytes wire = rig.msrp.params().to_bytes();
  const auto& msk = rig.msrp.master_secret().bytes();
  auto it = std::search(wire.begin(), wire.end(), msk.begin(), msk.end());
  EXPECT_EQ(it, wire.end());
}

TEST(RegisterRpm, ImplicitCertificateIdentity) {
  Rig rig;
  auto prov = rig.msrp.register_rpm(rig.rid("rpm-a"), 1, rig.rng);
  // sk * P == PK + H2(PID) * PK_pub, the identity behind U-recovery
  GroupPoint lhs = GroupPoint::mul_generator(prov.sk);
  GroupPoint rhs =
      prov.pk.add(rig.msrp.params().pk_pub.mul(h2({ByteView(prov.pid)})));
  EXPECT_EQ(lhs, rhs);
  // PID xor H1(PK_pub) recovers the real identity
  EXPECT_EQ(xor_bytes(prov.pid, rig.msrp.params().h1_pk_pub), rig.rid("rpm-a"));
}

TEST(RegisterRpm, DuplicateRidRejected) {
  Rig rig;
  rig.msrp.register_rpm(rig.rid("rpm-a"), 1, rig.rng);
  EXPECT_THROW(rig.msrp.register_rpm(rig.rid("rpm-a"), 2, rig.rng),
               std::invalid_argument);
  EXPECT_THROW(rig.msrp.register_rpm(rig.rid("rpm-b"), 1, rig.rng),
               std::invalid_argument);  // pool already managed
}

TEST(RegisterRn, BundleAndPendingFilter) {
  Rig rig;
  rig.msrp.register_rpm(rig.rid("rpm-a"), 1, rig.rng);
  auto prov = rig.msrp.register_rn(rig.rid("rn-1"), 1, rig.rng);
  EXPECT_EQ(prov.pk, GroupPoint::mul_generator(prov.sk));
  EXPECT_EQ(xor_bytes(prov.pid0, rig.msrp.params().h1_pk_pub), rig.rid("rn-1"));
  EXPECT_TRUE(rig.msrp.pending_bf(1).check(prov.a0.bytes()));
  const auto& entry = rig.msrp.entry(rig.rid("rn-1"));
  EXPECT_EQ(entry.epoch, 0u);
  EXPECT_EQ(entry.a_current, prov.a0);
  EXPECT_THROW(rig.msrp.register_rn(rig.rid("rn-1"), 1, rig.rng),
               std::invalid_argument);
  EXPECT_THROW(rig.msrp.register_rn(rig.rid("rn-2"), 42, rig.rng),
               std::invalid_argument);  // unknown pool
}

TEST(RegisterRn, CapacityTriggersEarlyHandoff) {
  auto ledger = std::make_shared<Ledger>();
  Rng rng(5);
  MsrpState msrp = MsrpState::setup(128, rng, ledger, MsrpState::Config(2, 6));
  msrp.register_rpm(rid_for_name("rpm-a"), 1, rng);
  auto p1 = msrp.register_rn(rid_for_name("a"), 1, rng);
  auto p2 = msrp.register_rn(rid_for_name("b"), 1, rng);
  EXPECT_FALSE(p1.early_epoch.has_value());
  EXPECT_FALSE(p2.early_epoch.has_value());
  auto p3 = msrp.register_rn(rid_for_name("c"), 1, rng);  // third of capacity 2
  ASSERT_TRUE(p3.early_epoch.has_value());
  BloomFilter sealed = BloomFilter::deserialize(*p3.early_epoch);
  EXPECT_TRUE(sealed.check(p1.a0.bytes()));
  EXPECT_TRUE(sealed.check(p2.a0.bytes()));
  EXPECT_TRUE(msrp.pending_bf(1).check(p3.a0.bytes()));
  EXPECT_EQ(msrp.pending_bf(1).inserted(), 1u);
}

TEST(BfHandoff, SealsAndResets) {
  Rig rig;
  auto rpm_prov = rig.msrp.register_rpm(rig.rid("rpm-a"), 1, rig.rng);
  RpmState rpm(rig.msrp.params(), rpm_prov, rig.ledger);
  auto rn1 = rig.msrp.register_rn(rig.rid("rn-1"), 1, rig.rng);
  auto epoch1 = rig.msrp.seal_bf_epoch(1);
  ASSERT_TRUE(epoch1.has_value());
  rpm.install_epoch(*epoch1);
  EXPECT_EQ(rig.msrp.pending_bf(1).inserted(), 0u);  // fresh pending filter
  // empty pending filter: reported no-op
  EXPECT_FALSE(rig.msrp.seal_bf_epoch(1).has_value());
  // second epoch, both searchable at the RPM
  auto rn2 = rig.msrp.register_rn(rig.rid("rn-2"), 1, rig.rng);
  auto epoch2 = rig.msrp.seal_bf_epoch(1);
  ASSERT_TRUE(epoch2.has_value());
  rpm.install_epoch(*epoch2);
  EXPECT_EQ(rpm.epoch_count(), 2u);
  EXPECT_EQ(BloomFilter::deserialize(*epoch2).epoch_id(), 1u);
  (void)rn1;
  (void)rn2;
}

namespace {

// MSRP + one RPM per pool + one authenticated-ready RN
struct AuthRig : Rig {
  RpmProvision rpm_prov_x = msrp.register_rpm(rid("rpm-x"), 1, rng);
  RpmProvision rpm_prov_y = msrp.register_rpm(rid("rpm-y"), 2, rng);
  RpmState rpm_x{msrp.params(), rpm_prov_x, ledger};
  RpmState rpm_y{msrp.params(), rpm_prov_y, ledger};
  RnProvision rn_prov = msrp.register_rn(rid("rn-1"), 1, rng);
  Credential cred = Credential::from_provision(rid("rn-1"), rn_prov);

  AuthRig() { rpm_x.install_epoch(*msrp.seal_bf_epoch(1)); }

  // run one full honest initial authentication, report included
  void complete_initial_auth() {
    auto msg1 = initial_auth_request(cred, rpm_x.public_info(), msrp.params(), rng);
    auto decision = rpm_x.initial_auth_verify(msg1, rng);
    ASSERT_TRUE(decision.accepted);
    ASSERT_TRUE(auth_confirm(cred, *decision.ack, 1).joined);
    ASSERT_TRUE(msrp.on_auth_report(*decision.report).valid);
  }
};

}  // namespace

TEST(InitialAuth, HonestFlowRecoversCredential) {
  AuthRig rig;
  auto msg1 = initial_auth_request(rig.cred, rig.rpm_x.public_info(),
                                   rig.msrp.params(), rig.rng);
  EXPECT_EQ(msg1.c2.size(), kScalarBytes);
  auto decision = rig.rpm_x.initial_auth_verify(msg1, rig.rng);
  ASSERT_TRUE(decision.accepted);
  // the ack is a * P for the exact credential value the RN sent
  EXPECT_EQ(decision.ack->a_point, GroupPoint::mul_generator(rig.cred.a));
}

TEST(InitialAuth, FreshRandomnessPerRequest) {
  AuthRig rig;
  auto m1 = initial_auth_request(rig.cred, rig.rpm_x.public_info(),
                                 rig.msrp.params(), rig.rng);
  auto m2 = initial_auth_request(rig.cred, rig.rpm_x.public_info(),
                                 rig.msrp.params(), rig.rng);
  EXPECT_NE(m1.c1.to_bytes(), m2.c1.to_bytes());
  EXPECT_NE(m1.c2, m2.c2);
}

TEST(InitialAuth, ConfirmAdvancesChainInLockstep) {
  AuthRig rig;
  Scalar a0 = rig.cred.a;
  Bytes pid0 = rig.cred.pid;
  rig.complete_initial_auth();
  EXPECT_EQ(rig.cred.epoch, 1u);
  EXPECT_EQ(*rig.cred.prev_a, a0);
  EXPECT_EQ(*rig.cred.prev_pid, pid0);
  // both sides ran the same derivation
  const auto& entry = rig.msrp.entry(rig.rid("rn-1"));
  EXPECT_EQ(entry.a_current, rig.cred.a);
  EXPECT_EQ(entry.pid, rig.cred.pid);
  EXPECT_EQ(entry.epoch, 1u);
  // chain formulas hold
  EXPECT_EQ(rig.cred.a, h4_chain(a0, rig.cred.keys.sk));
  EXPECT_EQ(rig.cred.pid, h6_next_pid(pid0, rig.cred.a));
}

TEST(InitialAuth, RandomAckRejected) {
  AuthRig rig;
  initial_auth_request(rig.cred, rig.rpm_x.public_info(), rig.msrp.params(),
                       rig.rng);
  AuthAckMsg forged{GroupPoint::mul_generator(Scalar::random_nonzero(rig.rng))};
  auto confirm = auth_confirm(rig.cred, forged, 1);
  EXPECT_FALSE(confirm.joined);
  EXPECT_EQ(confirm.reason, RejectReason::rpm_auth_failed);
  EXPECT_EQ(rig.cred.epoch, 0u);  // no advance on reject
}

TEST(InitialAuth, ReplayRejectedAfterReport) {
  AuthRig rig;
  auto msg1 = initial_auth_request(rig.cred, rig.rpm_x.public_info(),
                                   rig.msrp.params(), rig.rng);
  auto decision = rig.rpm_x.initial_auth_verify(msg1, rig.rng);
  ASSERT_TRUE(decision.accepted);
  ASSERT_TRUE(auth_confirm(rig.cred, *decision.ack, 1).joined);
  ASSERT_TRUE(rig.msrp.on_auth_report(*decision.report).valid);
  // the digest H4(a) is now on the ledger: same message must bounce anywhere
  auto replayed = rig.rpm_x.initial_auth_verify(msg1, rig.rng);
  EXPECT_FALSE(replayed.accepted);
  EXPECT_EQ(replayed.reason, RejectReason::replayed);
}

TEST(InitialAuth, UnregisteredCredentialRejected) {
  AuthRig rig;
  // outsider with a random credential value; never registered in any epoch
  Credential outsider = rig.cred;
  outsider.a = Scalar::random_nonzero(rig.rng);
  auto msg1 = initial_auth_request(outsider, rig.rpm_x.public_info(),
                                   rig.msrp.params(), rig.rng);
  auto decision = rig.rpm_x.initial_auth_verify(msg1, rig.rng);
  EXPECT_FALSE(decision.accepted);
  EXPECT_EQ(decision.reason, RejectReason::unregistered);
}

TEST(InitialAuth, TamperedMaskRejected) {
  AuthRig rig;
  int rejects = 0;
  const int trials = 200;
  for (int i = 0; i < trials; ++i) {
    auto msg1 = initial_auth_request(rig.cred, rig.rpm_x.public_info(),
                                     rig.msrp.params(), rig.rng);
    msg1.c2 = rig.rng.bytes(kScalarBytes);
    auto decision = rig.rpm_x.initial_auth_verify(msg1, rig.rng);
    if (!decision.accepted) rejects++;
  }
  // residual acceptance is the bloom-filter false-positive channel; with one
  // registered element the empirical rate here is effectively zero
  EXPECT_EQ(rejects, trials);
}

// A consumed credential value is spent everywhere, not just at the pool that
// saw it: the ledger digest blocks it at every manager.
TEST(InitialAuth, ConsumedValueRejectedAtOtherRpms) {
  AuthRig rig;
  Scalar a0 = rig.cred.a;
  Bytes pid0 = rig.cred.pid;
  rig.complete_initial_auth();
  // pool 2 gets its own epoch so the check reaches the ledger stage
  rig.msrp.register_rn(rig.rid("rn-p2"), 2, rig.rng);
  rig.rpm_y.install_epoch(*rig.msrp.seal_bf_epoch(2));
  // an adversary who learned a_0 re-targets it at the other pool's manager
  Credential stolen = rig.cred;
  stolen.a = a0;
  stolen.pid = pid0;
  auto msg1 = initial_auth_request(stolen, rig.rpm_y.public_info(),
                                   rig.msrp.params(), rig.rng);
  auto decision = rig.rpm_y.initial_auth_verify(msg1, rig.rng);
  EXPECT_FALSE(decision.accepted);
  EXPECT_EQ(decision.reason, RejectReason::replayed);
}

TEST(Counters, MonotoneWithinARun) {
  OpCounters before = op_counters_snapshot();
  Rng rng(777);
  GroupPoint p = GroupPoint::mul_generator(Scalar::random_nonzero(rng));
  p = p.add(p);
  h2({ByteView(p.to_bytes())});
  OpCounters after = op_counters_snapshot();
  EXPECT_GE(after.point_mul, before.point_mul + 1);
  EXPECT_GE(after.point_add, before.point_add + 1);
  EXPECT_GE(after.hash_calls, before.hash_calls + 1);
  OpCounters delta = after - before;
  EXPECT_GE(delta.point_mul, 1u);
}

TEST(MsrpReport, ForgedPairWritesNothing) {
  AuthRig rig;
  Bytes plain;
  append(plain, Scalar::random_nonzero(rig.rng).bytes());  // not the registry a
  append(plain, rig.cred.pid);
  AuthReportMsg forged{1, pk_encrypt(rig.msrp.params().pk_pub, plain, rig.rng)};
  auto outcome = rig.msrp.on_auth_report(forged);
  EXPECT_FALSE(outcome.valid);
  EXPECT_EQ(outcome.reason, RejectReason::invalid_report);
  EXPECT_EQ(rig.ledger->size(), 0u);
}

TEST(MsrpReport, HonestReportAppendsBothRecords) {
  AuthRig rig;
  Scalar a0 = rig.cred.a;
  Bytes pid0 = rig.cred.pid;
  rig.complete_initial_auth();
  EXPECT_EQ(rig.ledger->size(), 2u);
  EXPECT_TRUE(rig.ledger->contains(RecordKind::credential_digest,
                                   h4_digest(a0).bytes()));
  EXPECT_TRUE(rig.ledger->contains(RecordKind::pseudonym, pid0));
}

TEST(Reauth, HonestCrossPoolFlow) {
  AuthRig rig;
  rig.complete_initial_auth();
  auto msg1 = reauth_request(rig.cred, rig.rpm_y.public_info(),
                             rig.msrp.params(), rig.rng);
  EXPECT_EQ(msg1.c2.size(), 2 * kScalarBytes);
  // the advertised next pseudonym is the deterministic H6 chain value
  EXPECT_EQ(msg1.pid_next, h6_next_pid(msg1.pid_prev, rig.cred.a));
  auto decision = rig.rpm_y.reauth_verify(msg1, rig.rng);
  ASSERT_TRUE(decision.accepted);
  EXPECT_TRUE(auth_confirm(rig.cred, *decision.ack, 2).joined);
  EXPECT_TRUE(rig.msrp.on_auth_report(*decision.report).valid);
  EXPECT_EQ(rig.cred.epoch, 2u);
  EXPECT_EQ(rig.cred.joined_pool, 2u);
  // lockstep with the registry after two authentications
  const auto& entry = rig.msrp.entry(rig.rid("rn-1"));
  EXPECT_EQ(entry.a_current, rig.cred.a);
  EXPECT_EQ(entry.pid, rig.cred.pid);
}

TEST(Reauth, RequiresPriorAuthentication) {
  AuthRig rig;
  EXPECT_THROW(reauth_request(rig.cred, rig.rpm_y.public_info(),
                              rig.msrp.params(), rig.rng),
               std::logic_error);
}

TEST(Reauth, NoChainWithoutLedgerDigest) {
  AuthRig rig;
  // initial auth completes at the RN but the report never reaches the MSRP,
  // so H4(a_0) is absent from the ledger
  auto msg1 = initial_auth_request(rig.cred, rig.rpm_x.public_info(),
                                   rig.msrp.params(), rig.rng);
  auto decision = rig.rpm_x.initial_auth_verify(msg1, rig.rng);
  ASSERT_TRUE(decision.accepted);
  ASSERT_TRUE(auth_confirm(rig.cred, *decision.ack, 1).joined);
  auto re = reauth_request(rig.cred, rig.rpm_y.public_info(), rig.msrp.params(),
                           rig.rng);
  auto verdict = rig.rpm_y.reauth_verify(re, rig.rng);
  EXPECT_FALSE(verdict.accepted);
  EXPECT_EQ(verdict.reason, RejectReason::no_chain);
}

TEST(Reauth, TranscriptReplayRejected) {
  AuthRig rig;
  rig.complete_initial_auth();
  auto msg1 = reauth_request(rig.cred, rig.rpm_y.public_info(),
                             rig.msrp.params(), rig.rng);
  auto decision = rig.rpm_y.reauth_verify(msg1, rig.rng);
  ASSERT_TRUE(decision.accepted);
  ASSERT_TRUE(auth_confirm(rig.cred, *decision.ack, 2).joined);
  ASSERT_TRUE(rig.msrp.on_auth_report(*decision.report).valid);
  // PID_{k+1} was appended by the report: full-transcript replay bounces
  auto replayed = rig.rpm_y.reauth_verify(msg1, rig.rng);
  EXPECT_FALSE(replayed.accepted);
  EXPECT_EQ(replayed.reason, RejectReason::pseudonym_replayed);
}

TEST(Recovery, UIdentityHoldsForRandomBlinding) {
  AuthRig rig;
  for (int i = 0; i < 100; ++i) {
    Scalar u = Scalar::random_nonzero(rig.rng);
    GroupPoint basis = rig.rpm_prov_x.pk.add(
        rig.msrp.params().pk_pub.mul(h2({ByteView(rig.rpm_prov_x.pid)})));
    GroupPoint c1 = basis.mul(u);
    EXPECT_EQ(c1.mul(rig.rpm_x.sk_inverse()), GroupPoint::mul_generator(u));
  }
}

TEST(Traceability, ChainReconstructionFindsLedgerPids) {
  AuthRig rig;
  rig.complete_initial_auth();
  auto msg1 = reauth_request(rig.cred, rig.rpm_y.public_info(),
                             rig.msrp.params(), rig.rng);
  auto decision = rig.rpm_y.reauth_verify(msg1, rig.rng);
  ASSERT_TRUE(decision.accepted);
  ASSERT_TRUE(auth_confirm(rig.cred, *decision.ack, 2).joined);
  ASSERT_TRUE(rig.msrp.on_auth_report(*decision.report).valid);
  auto found = rig.msrp.trace_rn(rig.rid("rn-1"));
  ASSERT_EQ(found.size(), 2u);  // PID_0 and PID_1 are on the ledger
  EXPECT_TRUE(rig.ledger->contains(RecordKind::pseudonym, found[0]));
  EXPECT_TRUE(rig.ledger->contains(RecordKind::pseudonym, found[1]));
  EXPECT_THROW(rig.msrp.trace_rn(rig.rid("nobody")), std::invalid_argument);
}

// Pseudonym chains are H6 outputs: pairs from the same RN must look like
// pairs from different RNs, bit position by bit position.
TEST(Unlinkability, ChainPairsIndistinguishable) {
  Rng rng(404);
  const int chains = 10'000;
  std::vector<Bytes> pid0(chains), pid1(chains);
  for (int i = 0; i < chains; ++i) {
    pid0[i] = rng.bytes(kPidBytes);
    Scalar a1 = h4_chain(Scalar::random_nonzero(rng), Scalar::random_nonzero(rng));
    pid1[i] = h6_next_pid(pid0[i], a1);
  }
  std::vector<int> same_bits(kPidBytes * 8, 0), diff_bits(kPidBytes * 8, 0);
  for (int i = 0; i < chains; ++i) {
    Bytes same = xor_bytes(pid0[i], pid1[i]);
    Bytes diff = xor_bytes(pid0[i], pid1[(i + 1) % chains]);
    for (std::size_t b = 0; b < kPidBytes * 8; ++b) {
      if ((same[b / 8] >> (b % 8)) & 1) same_bits[b]++;
      if ((diff[b / 8] >> (b % 8)) & 1) diff_bits[b]++;
    }
  }
  // each bit is Bernoulli(1/2) over 10^4 samples: sigma = 50
  for (std::size_t b = 0; b < kPidBytes * 8; ++b) {
    EXPECT_LT(std::abs(same_bits[b] - chains / 2), 250) << "bit " << b;
    EXPECT_LT(std::abs(diff_bits[b] - chains / 2), 250) << "bit " << b;
    EXPECT_LT(std::abs(same_bits[b] - diff_bits[b]), 350) << "bit " << b;
  }
}

TEST(Codec, FixedWidthsAndRoundtrips) {
  AuthRig rig;
  auto msg1 = initial_auth_request(rig.cred, rig.rpm_x.public_info(),
                                   rig.msrp.params(), rig.rng);
  Bytes wire = msg1.to_bytes();
  EXPECT_EQ(wire.size(), 1 + kPointBytes + kScalarBytes + kPidBytes);  // 86
  EXPECT_EQ(InitialAuthMsg1::from_bytes(wire).to_bytes(), wire);

  rig.complete_initial_auth();
  auto re = reauth_request(rig.cred, rig.rpm_y.public_info(), rig.msrp.params(),
                           rig.rng);
  Bytes re_wire = re.to_bytes();
  EXPECT_EQ(re_wire.size(), 1 + kPointBytes + 2 * kScalarBytes + 2 * kPidBytes);
  EXPECT_EQ(ReauthMsg1::from_bytes(re_wire).to_bytes(), re_wire);

  AuthAckMsg ack{GroupPoint::generator()};
  EXPECT_EQ(ack.to_bytes().size(), 1 + kPointBytes);
  EXPECT_EQ(AuthAckMsg::from_bytes(ack.to_bytes()).to_bytes(), ack.to_bytes());

  EXPECT_THROW(InitialAuthMsg1::from_bytes(ByteView(wire).first(20)),
               std::invalid_argument);
  Bytes wrong_tag = wire;
  wrong_tag[0] = 0x77;
  EXPECT_THROW(InitialAuthMsg1::from_bytes(wrong_tag), std::invalid_argument);
}
