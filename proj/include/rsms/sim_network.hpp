#pragma once

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rsms/bytes.hpp"

namespace rsms {

enum class MsgKind : std::uint8_t {
  InitialAuth1,
  Reauth1,
  AuthReport,
  AuthAck,
  BfEpoch,
  Allocation,
  SharePoint,
  MaskedShare,
  KeyUpdate,
  GroupData,
  Provision,
};

inline const char* to_string(MsgKind k) {
  switch (k) {
    case MsgKind::InitialAuth1: return "initial-auth-msg1";
    case MsgKind::Reauth1: return "reauth-msg1";
    case MsgKind::AuthReport: return "auth-report";
    case MsgKind::AuthAck: return "auth-ack";
    case MsgKind::BfEpoch: return "bf-epoch";
    case MsgKind::Allocation: return "allocation";
    case MsgKind::SharePoint: return "share-point";
    case MsgKind::MaskedShare: return "masked-share";
    case MsgKind::KeyUpdate: return "key-update";
    case MsgKind::GroupData: return "group-data";
    case MsgKind::Provision: return "provision";
  }
  return "?";
}

struct NetMessage {
  std::uint64_t seq = 0;
  std::string from;
  std::string to;
  MsgKind kind = MsgKind::Provision;
  Bytes payload;
  bool secure_channel = false;
};

// The adversary sits on the public channel: it may pass a message through,
// mutate its payload in place, or drop it. Copies taken inside the hook model
// eavesdropping.
struct HookResult {
  enum class Action { Pass, Drop };
  Action action = Action::Pass;
};
using AdversaryHook = std::function<HookResult(NetMessage&)>;

// Ordered record of everything observable in a run: each message (post
// adversary), each accept/reject with its reason, plus free-form notes.
// Rendering is stable, so equal seeds give byte-identical text.
class Transcript {
 public:
  struct Entry {
    enum class Type { Message, Verdict, Note };
    Type type = Type::Note;
    std::string label;
    std::string from, to;
    MsgKind kind = MsgKind::Provision;
    std::size_t size = 0;
    std::string payload_hex;
    bool dropped = false;
    std::string actor;
    bool accepted = false;
    std::string reason;
    std::string text;
  };

  void message(const std::string& label, const NetMessage& msg, bool dropped) {
    Entry e;
    e.type = Entry::Type::Message;
    e.label = label;
    e.from = msg.from;
    e.to = msg.to;
    e.kind = msg.kind;
    e.size = msg.payload.size();
    e.payload_hex = to_hex(msg.payload);
    e.dropped = dropped;
    entries_.push_back(std::move(e));
  }

  void verdict(const std::string& actor, const std::string& label, bool accepted,
               const std::string& reason) {
    Entry e;
    e.type = Entry::Type::Verdict;
    e.label = label;
    e.actor = actor;
    e.accepted = accepted;
    e.reason = reason;
    entries_.push_back(std::move(e));
    if (!accepted) rejects_++;
  }

  void note(const std::string& text) {
    Entry e;
    e.type = Entry::Type::Note;
    e.text = text;
    entries_.push_back(std::move(e));
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t reject_count() const { return rejects_; }

  std::string to_text() const {
    std::ostringstream os;
    std::size_t i = 0;
    for (const auto& e : entries_) {
      os << "[" << i++ << "] ";
      switch (e.type) {
        case Entry::Type::Message:
          os << "msg     " << e.label << " " << e.from << " -> " << e.to << " "
             << to_string(e.kind) << " " << e.size << "B";
          if (e.dropped) os << " (dropped)";
          os << " " << e.payload_hex;
          break;
        case Entry::Type::Verdict:
          os << "verdict " << e.label << " " << e.actor << " "
             << (e.accepted ? "accept" : "reject(" + e.reason + ")");
          break;
        case Entry::Type::Note:
          os << "note    " << e.text;
          break;
      }
      os << "\n";
    }
    return os.str();
  }

 private:
  std::vector<Entry> entries_;
  std::size_t rejects_ = 0;
};

// Message fabric between entities. Delivery is synchronous and in order;
// the optional adversary hook transforms anything on the public channel.
// Secure-channel traffic (provisioning, epoch handoff) bypasses the hook
// but is still logged and counted.
class SimNetwork {
 public:
  explicit SimNetwork(Transcript* transcript) : transcript_(transcript) {}

  void set_hook(AdversaryHook hook) { hook_ = std::move(hook); }
  void clear_hook() { hook_ = nullptr; }

  std::optional<Bytes> transmit(const std::string& from, const std::string& to,
                                MsgKind kind, Bytes payload,
                                const std::string& label, bool secure = false) {
    NetMessage msg{next_seq_++, from, to, kind, std::move(payload), secure};
    bytes_by_kind_[kind] += msg.payload.size();
    count_by_kind_[kind]++;
    total_bytes_ += msg.payload.size();
    bool dropped = false;
    if (hook_ && !secure) {
      HookResult r = hook_(msg);
      dropped = r.action == HookResult::Action::Drop;
    }
    if (transcript_) transcript_->message(label, msg, dropped);
    if (dropped) return std::nullopt;
    return msg.payload;
  }

  std::uint64_t bytes_sent(MsgKind kind) const {
    auto it = bytes_by_kind_.find(kind);
    return it == bytes_by_kind_.end() ? 0 : it->second;
  }

  std::uint64_t messages_sent(MsgKind kind) const {
    auto it = count_by_kind_.find(kind);
    return it == count_by_kind_.end() ? 0 : it->second;
  }

  std::uint64_t total_bytes() const { return total_bytes_; }

  const std::map<MsgKind, std::uint64_t>& bytes_by_kind() const {
    return bytes_by_kind_;
  }

 private:
  Transcript* transcript_;
  AdversaryHook hook_;
  std::map<MsgKind, std::uint64_t> bytes_by_kind_;
  std::map<MsgKind, std::uint64_t> count_by_kind_;
  std::uint64_t total_bytes_ = 0;
  std::uint64_t next_seq_ = 0;
};

}  // namespace rsms
