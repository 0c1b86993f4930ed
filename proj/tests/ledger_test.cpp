#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rsms/ledger.hpp"
#include "rsms/rng.hpp"

using namespace rsms;

namespace {

Bytes digest_value(Rng& rng) { return rng.bytes(kScalarBytes); }
Bytes pid_value(Rng& rng) { return rng.bytes(kPidBytes); }

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {
    std::remove(path.c_str());
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST(Ledger, AppendThenContains) {
  Ledger ledger;
  Rng rng(1);
  Bytes v = digest_value(rng);
  EXPECT_FALSE(ledger.contains(RecordKind::credential_digest, v));
  ledger.append(RecordKind::credential_digest, v, 1);
  EXPECT_TRUE(ledger.contains(RecordKind::credential_digest, v));
  // same bytes under the other kind are distinct entries
  EXPECT_FALSE(ledger.contains(RecordKind::pseudonym, Bytes(v.begin(), v.begin() + kPidBytes)));
}

TEST(Ledger, SequenceIsMonotone) {
  Ledger ledger;
  Rng rng(2);
  std::uint64_t s1 = ledger.append(RecordKind::pseudonym, pid_value(rng), 1);
  std::uint64_t s2 = ledger.append(RecordKind::pseudonym, pid_value(rng), 1);
  EXPECT_EQ(s2, s1 + 1);
  EXPECT_EQ(ledger.record(0).seq, s1);
  EXPECT_EQ(ledger.record(0).timestamp(), s1);
}

TEST(Ledger, RejectsMalformedWidth) {
  Ledger ledger;
  EXPECT_THROW(ledger.append(RecordKind::pseudonym, Bytes(8, 0), 1),
               std::invalid_argument);
  EXPECT_THROW(ledger.append(RecordKind::credential_digest, Bytes(20, 0), 1),
               std::invalid_argument);
}

TEST(Ledger, FreshLedgerContainsNothing) {
  Ledger ledger;
  Rng rng(3);
  for (int i = 0; i < 100; ++i)
    EXPECT_FALSE(ledger.contains(RecordKind::pseudonym, pid_value(rng)));
}

// no near-miss matches: every single-bit neighbor of an appended value is absent
TEST(Ledger, BitFlipNeighborProbe) {
  Ledger ledger;
  Rng rng(4);
  std::vector<Bytes> values;
  for (int i = 0; i < 100; ++i) {
    values.push_back(pid_value(rng));
    ledger.append(RecordKind::pseudonym, values.back(), 1);
  }
  for (const auto& v : values) {
    for (std::size_t bit = 0; bit < v.size() * 8; ++bit) {
      Bytes flipped = v;
      flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      EXPECT_FALSE(ledger.contains(RecordKind::pseudonym, flipped));
    }
  }
}

TEST(Ledger, FileBackendSurvivesReload) {
  TempFile tmp("rsms-ledger-reload.bin");
  Rng rng(5);
  std::vector<Bytes> digests;
  Bytes full_digest;
  {
    Ledger ledger(tmp.path);
    for (int i = 0; i < 50; ++i) {
      digests.push_back(digest_value(rng));
      ledger.append(RecordKind::credential_digest, digests.back(), i % 3);
    }
    full_digest = ledger.digest();
  }  // closed
  Ledger reloaded(tmp.path);
  EXPECT_EQ(reloaded.size(), 50u);
  for (const auto& d : digests)
    EXPECT_TRUE(reloaded.contains(RecordKind::credential_digest, d));
  EXPECT_EQ(reloaded.digest(), full_digest);
  // appends continue with the next sequence number
  EXPECT_EQ(reloaded.append(RecordKind::credential_digest, digest_value(rng), 9), 50u);
}

// acknowledged records stay; a torn tail from a mid-write crash is dropped
TEST(Ledger, TornTailIsDiscarded) {
  TempFile tmp("rsms-ledger-torn.bin");
  Rng rng(6);
  Bytes keep = digest_value(rng);
  {
    Ledger ledger(tmp.path);
    ledger.append(RecordKind::credential_digest, keep, 1);
    ledger.append(RecordKind::credential_digest, digest_value(rng), 1);
  }
  auto size = std::filesystem::file_size(tmp.path);
  std::filesystem::resize_file(tmp.path, size - 7);  // cut into the last record
  Ledger reloaded(tmp.path);
  EXPECT_EQ(reloaded.size(), 1u);
  EXPECT_TRUE(reloaded.contains(RecordKind::credential_digest, keep));
}

TEST(Ledger, AppendOnlyDigestReproducible) {
  Ledger a;
  Ledger b;
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    Bytes v = pid_value(rng);
    a.append(RecordKind::pseudonym, v, 2);
    b.append(RecordKind::pseudonym, v, 2);
  }
  EXPECT_EQ(a.digest(), b.digest());
  a.append(RecordKind::pseudonym, pid_value(rng), 2);
  EXPECT_NE(a.digest(), b.digest());
}
