#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgmas/error.hpp"
#include "kgmas/json.hpp"

namespace kgmas {

enum class Performative { request, inform, confirm, refuse, failure };

std::string to_string(Performative p);
/// Throws AclError(unknown_performative).
Performative performative_from_string(const std::string& text);

struct AclMessage {
  Performative performative = Performative::inform;
  std::string sender;
  std::string receiver;
  Json content = Json::object();
  std::string conversation_id;
  std::optional<std::string> reply_with;
  std::optional<std::string> in_reply_to;

  bool operator==(const AclMessage&) const = default;
};

class AclError : public Error {
 public:
  enum class Kind { malformed, unknown_performative, missing_field };
  AclError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Canonical JSON object text (sorted keys, absent optionals omitted).
std::string serialize(const AclMessage& msg);
AclMessage deserialize(const std::string& text);

struct LoggedMessage {
  std::uint64_t seq = 0;
  AclMessage message;
};

/// `seq TAB performative TAB sender TAB receiver TAB conversation_id TAB content`
std::string to_trace_line(const LoggedMessage& entry);
/// Parses one trace line. Reply fields are not part of the line format.
LoggedMessage parse_trace_line(const std::string& line);
std::string to_trace(const std::vector<LoggedMessage>& entries);
std::vector<LoggedMessage> parse_trace(const std::string& text);

/// In-process ACL bus with per-pair FIFO, exactly-once delivery and a totally
/// ordered delivery log.
class MessageBus {
 public:
  /// Throws DuplicateError when the id is taken.
  void register_agent(const std::string& agent_id);
  /// Pending messages are discarded. No-op for unknown ids.
  void unregister_agent(const std::string& agent_id);
  bool is_registered(const std::string& agent_id) const;

  /// Enqueues and logs. Throws NotFoundError for an unknown receiver and
  /// ValidationError for invariant violations (sender == receiver, empty
  /// ids, dangling in_reply_to).
  std::uint64_t send(const AclMessage& msg);

  /// Head of the inbox, or nullopt after `timeout` with nothing to read.
  std::optional<AclMessage> receive(const std::string& agent_id, std::chrono::milliseconds timeout);

  std::vector<LoggedMessage> log() const;
  std::vector<LoggedMessage> conversation(const std::string& conversation_id) const;
  std::size_t log_size() const;

  /// Blocks until the log grows beyond `known_size` or the timeout expires.
  bool wait_for_growth(std::size_t known_size, std::chrono::milliseconds timeout) const;

 private:
  struct Inbox {
    std::deque<AclMessage> queue;
    std::condition_variable cv;
    bool open = true;
  };

  mutable std::mutex mu_;
  mutable std::condition_variable log_cv_;
  std::map<std::string, std::shared_ptr<Inbox>> inboxes_;
  std::vector<LoggedMessage> log_;
  std::set<std::pair<std::string, std::string>> reply_tokens_;  // (conversation, reply_with)
  std::uint64_t next_seq_ = 1;
};

}  // namespace kgmas
