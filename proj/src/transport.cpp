#include "kgmas/transport.hpp"

#include <optional>

#include "kgmas/log.hpp"

namespace kgmas {

namespace {

struct SubscriberSlot {
  std::mutex mu;
  MessageHandler handler;
  bool active = true;
};

struct ResponderSlot {
  std::mutex mu;
  Responder responder;
  bool active = true;
};

}  // namespace

/// One named in-process endpoint. Delivery runs on the publisher's thread;
/// callbacks for one subscriber are serialized by its slot mutex.
class Hub : public std::enable_shared_from_this<Hub> {
 public:
  explicit Hub(TransportKind kind) : kind_(kind) {}

  TransportKind kind() const { return kind_; }

  void publish(const std::string& topic, const Json& payload) {
    std::vector<std::shared_ptr<SubscriberSlot>> targets;
    {
      std::lock_guard lock(mu_);
      if (kind_ == TransportKind::broker_pubsub) retained_[topic] = payload;
      targets = subscribers_[topic];
    }
    for (const auto& slot : targets) {
      std::lock_guard slot_lock(slot->mu);
      if (slot->active) slot->handler(payload);
    }
  }

  Subscription subscribe(const std::string& topic, MessageHandler handler) {
    auto slot = std::make_shared<SubscriberSlot>();
    slot->handler = std::move(handler);
    // Holding the slot lock while registering keeps any concurrent publish
    // behind the retained delivery.
    std::lock_guard slot_lock(slot->mu);
    std::optional<Json> retained;
    {
      std::lock_guard lock(mu_);
      subscribers_[topic].push_back(slot);
      if (const auto it = retained_.find(topic); it != retained_.end()) retained = it->second;
    }
    if (retained) slot->handler(*retained);
    auto self = shared_from_this();
    return Subscription([self, slot, topic] {
      {
        std::lock_guard slot_lock(slot->mu);
        slot->active = false;
      }
      std::lock_guard lock(self->mu_);
      auto& list = self->subscribers_[topic];
      std::erase(list, slot);
    });
  }

  Json request(const std::string& path, const Json& payload) {
    std::shared_ptr<ResponderSlot> slot;
    {
      std::lock_guard lock(mu_);
      if (const auto it = responders_.find(path); it != responders_.end()) slot = it->second;
    }
    if (slot) {
      std::lock_guard slot_lock(slot->mu);
      if (slot->active) return slot->responder(payload);
    }
    throw TransportError("no responder for '" + path + "'");
  }

  bool has_responder(const std::string& path) {
    std::lock_guard lock(mu_);
    return responders_.contains(path);
  }

  Subscription serve(const std::string& path, Responder responder) {
    auto slot = std::make_shared<ResponderSlot>();
    slot->responder = std::move(responder);
    {
      std::lock_guard lock(mu_);
      if (!responders_.emplace(path, slot).second) throw DuplicateError("path '" + path + "' already has a responder");
    }
    auto self = shared_from_this();
    return Subscription([self, slot, path] {
      {
        std::lock_guard slot_lock(slot->mu);
        slot->active = false;
      }
      std::lock_guard lock(self->mu_);
      if (const auto it = self->responders_.find(path); it != self->responders_.end() && it->second == slot) {
        self->responders_.erase(it);
      }
    });
  }

 private:
  TransportKind kind_;
  std::mutex mu_;
  std::map<std::string, std::vector<std::shared_ptr<SubscriberSlot>>> subscribers_;
  std::map<std::string, Json> retained_;
  std::map<std::string, std::shared_ptr<ResponderSlot>> responders_;
};

std::string to_string(TransportKind kind) {
  switch (kind) {
    case TransportKind::topic_pubsub: return "topic_pubsub";
    case TransportKind::request_response: return "request_response";
    case TransportKind::broker_pubsub: return "broker_pubsub";
  }
  return "unknown";
}

std::vector<std::string> builtin_schemes() { return {"mqtt", "rest+http", "ros+ws"}; }

std::shared_ptr<Hub> HubNetwork::hub(TransportKind kind, const Endpoint& endpoint) {
  std::lock_guard lock(mu_);
  auto& slot = hubs_[endpoint];
  if (!slot) slot = std::make_shared<Hub>(kind);
  if (slot->kind() != kind) {
    throw TransportError("hub " + endpoint.scheme + "://" + endpoint.address + " already serves " + to_string(slot->kind()));
  }
  return slot;
}

void HubAdapter::connect(const Endpoint& endpoint) {
  if (endpoint.address.empty()) throw ValidationError("empty endpoint address");
  hub_ = network_->hub(kind_, endpoint);
  endpoint_ = endpoint;
  log::debug("adapter connected to ", endpoint.scheme, "://", endpoint.address);
}

Hub& HubAdapter::connected_hub() {
  if (!hub_) throw TransportError("adapter is not connected");
  return *hub_;
}

void HubAdapter::publish(const std::string& topic, const Json& payload) {
  auto& hub = connected_hub();
  if (kind_ != TransportKind::request_response) {
    hub.publish(topic, payload);
    return;
  }
  if (!emulate_publish_) throw TransportError("publish on a request/response endpoint requires emulation");
  // Fire-and-forget: the reply and a missing responder are both ignored.
  if (hub.has_responder(topic)) {
    try {
      hub.request(topic, payload);
    } catch (const TransportError&) {
    }
  }
}

Subscription HubAdapter::subscribe(const std::string& topic, MessageHandler handler) {
  if (kind_ == TransportKind::request_response) throw TransportError("subscribe is not supported by request/response transports");
  return connected_hub().subscribe(topic, std::move(handler));
}

Json HubAdapter::request(const std::string& path, const Json& payload) {
  if (kind_ != TransportKind::request_response) throw TransportError("request is not supported by " + to_string(kind_));
  return connected_hub().request(path, payload);
}

Subscription HubAdapter::serve(const std::string& path, Responder responder) {
  if (kind_ != TransportKind::request_response) throw TransportError("serve is not supported by " + to_string(kind_));
  return connected_hub().serve(path, std::move(responder));
}

TransportRegistry::TransportRegistry(std::shared_ptr<HubNetwork> network) : network_(std::move(network)) {
  auto builtin = [](TransportKind kind) {
    return [kind](std::shared_ptr<HubNetwork> net) -> std::unique_ptr<Adapter> {
      return std::make_unique<HubAdapter>(std::move(net), kind);
    };
  };
  factories_.emplace("ros+ws", builtin(TransportKind::topic_pubsub));
  factories_.emplace("rest+http", builtin(TransportKind::request_response));
  factories_.emplace("mqtt", builtin(TransportKind::broker_pubsub));
}

TransportRegistry& TransportRegistry::register_scheme(const std::string& scheme, AdapterFactory factory) {
  if (scheme.empty()) throw ValidationError("empty transport scheme");
  if (!factories_.emplace(scheme, std::move(factory)).second) {
    throw DuplicateError("transport scheme '" + scheme + "' is already registered");
  }
  return *this;
}

std::unique_ptr<Adapter> TransportRegistry::resolve(const CommunicationBinding& binding) const {
  const auto it = factories_.find(binding.protocol_scheme);
  if (it == factories_.end()) throw NotFoundError("unknown protocol scheme '" + binding.protocol_scheme + "'");
  auto adapter = it->second(network_);
  adapter->connect({binding.protocol_scheme, binding.endpoint});
  return adapter;
}

bool TransportRegistry::knows(const std::string& scheme) const { return factories_.contains(scheme); }

std::set<std::string> TransportRegistry::schemes() const {
  std::set<std::string> out;
  for (const auto& [scheme, factory] : factories_) out.insert(scheme);
  return out;
}

}  // namespace kgmas
