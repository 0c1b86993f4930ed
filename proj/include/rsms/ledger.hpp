#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rsms/bytes.hpp"
#include "rsms/curve.hpp"
#include "rsms/digest.hpp"

namespace rsms {

enum class RecordKind : std::uint8_t {
  credential_digest = 1,  // H4(a_k), scalar width
  pseudonym = 2,          // PID_k, pseudonym width
};

inline std::size_t record_value_width(RecordKind k) {
  switch (k) {
    case RecordKind::credential_digest:
      return kScalarBytes;
    case RecordKind::pseudonym:
      return kPidBytes;
  }
  throw std::invalid_argument("ledger: unknown record kind");
}

struct LedgerRecord {
  RecordKind kind;
  std::uint32_t pool_id;
  std::uint64_t seq;
  Bytes value;

  // Logical clock; appends are totally ordered, so the sequence number is it.
  std::uint64_t timestamp() const { return seq; }
};

// The shared record store all pool managers consult: one logical, ordered,
// append-only list with exact membership queries. Backed either by memory
// alone or by an append-only file whose records survive restart.
//
// File format per record: [u32 length][kind u8][pool_id u32][seq u64][value],
// little-endian integers. A torn final record (partial write at crash) is
// dropped on reload; acknowledged records precede it by construction.
class Ledger {
 public:
  Ledger() = default;

  explicit Ledger(const std::string& path) : path_(path) {
    load_file();
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw std::runtime_error("ledger: cannot open " + path);
  }

  std::uint64_t append(RecordKind kind, ByteView value, std::uint32_t pool_id) {
    if (value.size() != record_value_width(kind))
      throw std::invalid_argument("ledger: malformed value width");
    std::lock_guard<std::mutex> lock(mu_);
    LedgerRecord rec{kind, pool_id, next_seq_++, to_bytes(value)};
    if (out_.is_open()) {
      Bytes encoded = encode(rec);
      out_.write(reinterpret_cast<const char*>(encoded.data()),
                 static_cast<std::streamsize>(encoded.size()));
      out_.flush();
      if (!out_) throw std::runtime_error("ledger: write failed");
    }
    index_.insert(key(rec.kind, rec.value));
    records_.push_back(std::move(rec));
    return records_.back().seq;
  }

  bool contains(RecordKind kind, ByteView value) const {
    std::lock_guard<std::mutex> lock(mu_);
    return index_.count(key(kind, to_bytes(value))) > 0;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return records_.size();
  }

  const LedgerRecord& record(std::size_t i) const {
    std::lock_guard<std::mutex> lock(mu_);
    return records_.at(i);
  }

  // Full-scan digest; reproducible across restarts of a file-backed store.
  Bytes digest() const {
    std::lock_guard<std::mutex> lock(mu_);
    Bytes all;
    for (const auto& r : records_) rsms::append(all, encode(r));
    return sha256(ByteView(all));
  }

 private:
  static std::pair<std::uint8_t, Bytes> key(RecordKind kind, Bytes value) {
    return {static_cast<std::uint8_t>(kind), std::move(value)};
  }

  static Bytes encode(const LedgerRecord& r) {
    Bytes payload;
    put_u8(payload, static_cast<std::uint8_t>(r.kind));
    put_u32(payload, r.pool_id);
    put_u64(payload, r.seq);
    rsms::append(payload, r.value);
    Bytes out;
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    rsms::append(out, payload);
    return out;
  }

  void load_file() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh store
    Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos + 4 <= raw.size()) {
      std::uint32_t len = 0;
      for (int i = 3; i >= 0; --i) len = len << 8 | raw[pos + i];
      if (pos + 4 + len > raw.size()) break;  // torn tail, drop
      ByteReader r(ByteView(raw).subspan(pos + 4, len));
      auto kind = static_cast<RecordKind>(r.u8());
      std::uint32_t pool_id = r.u32();
      std::uint64_t seq = r.u64();
      Bytes value = to_bytes(r.take(record_value_width(kind)));
      r.expect_end();
      index_.insert(key(kind, value));
      records_.push_back(LedgerRecord{kind, pool_id, seq, std::move(value)});
      next_seq_ = seq + 1;
      pos += 4 + len;
    }
  }

  mutable std::mutex mu_;
  std::vector<LedgerRecord> records_;
  std::set<std::pair<std::uint8_t, Bytes>> index_;
  std::uint64_t next_seq_ = 0;
  std::string path_;
  std::ofstream out_;
};

}  // namespace rsms
