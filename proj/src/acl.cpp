#include "kgmas/acl.hpp"

#include <sstream>

namespace kgmas {

namespace {

const std::string& required_string(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw AclError(AclError::Kind::missing_field, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw AclError(AclError::Kind::malformed, std::string("field '") + key + "' must be a string");
  return it->get_ref<const std::string&>();
}

std::optional<std::string> optional_string(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_string()) throw AclError(AclError::Kind::malformed, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

std::string to_string(Performative p) {
  switch (p) {
    case Performative::request: return "request";
    case Performative::inform: return "inform";
    case Performative::confirm: return "confirm";
    case Performative::refuse: return "refuse";
    case Performative::failure: return "failure";
  }
  return "unknown";
}

Performative performative_from_string(const std::string& text) {
  if (text == "request") return Performative::request;
  if (text == "inform") return Performative::inform;
  if (text == "confirm") return Performative::confirm;
  if (text == "refuse") return Performative::refuse;
  if (text == "failure") return Performative::failure;
  throw AclError(AclError::Kind::unknown_performative, "unknown performative '" + text + "'");
}

std::string serialize(const AclMessage& msg) {
  Json obj = {
      {"performative", to_string(msg.performative)},
      {"sender", msg.sender},
      {"receiver", msg.receiver},
      {"content", msg.content},
      {"conversation_id", msg.conversation_id},
  };
  if (msg.reply_with) obj["reply_with"] = *msg.reply_with;
  if (msg.in_reply_to) obj["in_reply_to"] = *msg.in_reply_to;
  return canonical(obj);
}

AclMessage deserialize(const std::string& text) {
  Json obj;
  try {
    obj = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw AclError(AclError::Kind::malformed, std::string("malformed message: ") + e.what());
  }
  if (!obj.is_object()) throw AclError(AclError::Kind::malformed, "message must be a JSON object");
  AclMessage msg;
  msg.performative = performative_from_string(required_string(obj, "performative"));
  msg.sender = required_string(obj, "sender");
  msg.receiver = required_string(obj, "receiver");
  msg.conversation_id = required_string(obj, "conversation_id");
  const auto content = obj.find("content");
  if (content == obj.end()) throw AclError(AclError::Kind::missing_field, "missing field 'content'");
  msg.content = *content;
  msg.reply_with = optional_string(obj, "reply_with");
  msg.in_reply_to = optional_string(obj, "in_reply_to");
  return msg;
}

std::string to_trace_line(const LoggedMessage& entry) {
  const auto& m = entry.message;
  std::ostringstream os;
  os << entry.seq << '\t' << to_string(m.performative) << '\t' << m.sender << '\t' << m.receiver << '\t'
     << m.conversation_id << '\t' << canonical(m.content);
  return os.str();
}

LoggedMessage parse_trace_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (int i = 0; i < 5; ++i) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) throw AclError(AclError::Kind::malformed, "trace line needs 6 tab-separated fields");
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  fields.push_back(line.substr(start));
  LoggedMessage entry;
  try {
    entry.seq = std::stoull(fields[0]);
    entry.message.content = Json::parse(fields[5]);
  } catch (const std::exception& e) {
    throw AclError(AclError::Kind::malformed, std::string("malformed trace line: ") + e.what());
  }
  entry.message.performative = performative_from_string(fields[1]);
  entry.message.sender = fields[2];
  entry.message.receiver = fields[3];
  entry.message.conversation_id = fields[4];
  return entry;
}

std::string to_trace(const std::vector<LoggedMessage>& entries) {
  std::string out;
  for (const auto& e : entries) out += to_trace_line(e) + "\n";
  return out;
}

std::vector<LoggedMessage> parse_trace(const std::string& text) {
  std::vector<LoggedMessage> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(parse_trace_line(line));
  }
  return out;
}

void MessageBus::register_agent(const std::string& agent_id) {
  if (agent_id.empty()) throw ValidationError("empty agent id");
  std::lock_guard lock(mu_);
  if (!inboxes_.emplace(agent_id, std::make_shared<Inbox>()).second) {
    throw DuplicateError("agent '" + agent_id + "' is already registered");
  }
}

void MessageBus::unregister_agent(const std::string& agent_id) {
  std::lock_guard lock(mu_);
  const auto it = inboxes_.find(agent_id);
  if (it == inboxes_.end()) return;
  it->second->open = false;
  it->second->queue.clear();
  it->second->cv.notify_all();
  inboxes_.erase(it);
}

bool MessageBus::is_registered(const std::string& agent_id) const {
  std::lock_guard lock(mu_);
  return inboxes_.contains(agent_id);
}

std::uint64_t MessageBus::send(const AclMessage& msg) {
  if (msg.sender.empty() || msg.receiver.empty()) throw ValidationError("sender and receiver must be non-empty");
  if (msg.sender == msg.receiver) throw ValidationError("sender and receiver must differ ('" + msg.sender + "')");
  if (msg.conversation_id.empty()) throw ValidationError("empty conversation id");
  std::lock_guard lock(mu_);
  const auto it = inboxes_.find(msg.receiver);
  if (it == inboxes_.end()) throw NotFoundError("unknown receiver '" + msg.receiver + "'");
  if (msg.in_reply_to && !reply_tokens_.contains({msg.conversation_id, *msg.in_reply_to})) {
    throw ValidationError("in_reply_to '" + *msg.in_reply_to + "' does not match an earlier reply_with");
  }
  if (msg.reply_with && !reply_tokens_.insert({msg.conversation_id, *msg.reply_with}).second) {
    throw ValidationError("reply_with '" + *msg.reply_with + "' reused in conversation");
  }
  const auto seq = next_seq_++;
  log_.push_back({seq, msg});
  it->second->queue.push_back(msg);
  it->second->cv.notify_one();
  log_cv_.notify_all();
  return seq;
}

std::optional<AclMessage> MessageBus::receive(const std::string& agent_id, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  const auto it = inboxes_.find(agent_id);
  if (it == inboxes_.end()) throw NotFoundError("unknown agent '" + agent_id + "'");
  const auto inbox = it->second;
  if (!inbox->cv.wait_for(lock, timeout, [&] { return !inbox->queue.empty() || !inbox->open; })) return std::nullopt;
  if (inbox->queue.empty()) return std::nullopt;
  AclMessage msg = std::move(inbox->queue.front());
  inbox->queue.pop_front();
  return msg;
}

std::vector<LoggedMessage> MessageBus::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::vector<LoggedMessage> MessageBus::conversation(const std::string& conversation_id) const {
  std::lock_guard lock(mu_);
  std::vector<LoggedMessage> out;
  for (const auto& e : log_) {
    if (e.message.conversation_id == conversation_id) out.push_back(e);
  }
  return out;
}

std::size_t MessageBus::log_size() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

bool MessageBus::wait_for_growth(std::size_t known_size, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return log_cv_.wait_for(lock, timeout, [&] { return log_.size() > known_size; });
}

}  // namespace kgmas
