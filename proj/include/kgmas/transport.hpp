#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <utility>
#include <string>
#include <vector>

#include "kgmas/error.hpp"
#include "kgmas/json.hpp"
#include "kgmas/rami_model.hpp"

namespace kgmas {

enum class TransportKind { topic_pubsub, request_response, broker_pubsub };

std::string to_string(TransportKind kind);

/// "ros+ws", "rest+http", "mqtt".
std::vector<std::string> builtin_schemes();

struct Endpoint {
  std::string scheme;
  std::string address;  // host:port, used only as a hub name
  auto operator<=>(const Endpoint&) const = default;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

using MessageHandler = std::function<void(const Json& payload)>;
using Responder = std::function<Json(const Json& payload)>;

/// Registration handle; cancels on destruction. After reset() returns no
/// further callbacks run.
class Subscription {
 public:
  Subscription() = default;
  explicit Subscription(std::function<void()> cancel) : cancel_(std::move(cancel)) {}
  Subscription(Subscription&& other) noexcept : cancel_(std::exchange(other.cancel_, nullptr)) {}
  Subscription& operator=(Subscription&& other) noexcept {
    if (this != &other) {
      reset();
      cancel_ = std::exchange(other.cancel_, nullptr);
    }
    return *this;
  }
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription() { reset(); }

  void reset() {
    if (cancel_) std::exchange(cancel_, nullptr)();
  }
  bool active() const { return static_cast<bool>(cancel_); }

 private:
  std::function<void()> cancel_;
};

class Hub;

/// In-process hubs keyed by (scheme, address). Assets with equal endpoints
/// share a hub.
class HubNetwork {
 public:
  std::shared_ptr<Hub> hub(TransportKind kind, const Endpoint& endpoint);

 private:
  std::mutex mu_;
  std::map<Endpoint, std::shared_ptr<Hub>> hubs_;
};

/// Behavioral contract every protocol adapter implements.
///
/// Pub/sub kinds support publish/subscribe and reject request/serve.
/// request_response supports request/serve; publish is only available as a
/// fire-and-forget request once emulation is enabled.
class Adapter {
 public:
  virtual ~Adapter() = default;

  virtual TransportKind kind() const = 0;
  virtual void connect(const Endpoint& endpoint) = 0;
  virtual const Endpoint& endpoint() const = 0;

  virtual void publish(const std::string& topic, const Json& payload) = 0;
  virtual Subscription subscribe(const std::string& topic, MessageHandler handler) = 0;
  virtual Json request(const std::string& path, const Json& payload) = 0;
  /// Registers the single responder for `path`.
  virtual Subscription serve(const std::string& path, Responder responder) = 0;

  bool supports_subscribe() const { return kind() != TransportKind::request_response; }
};

/// Adapter backed by a HubNetwork hub. Also the base for extension adapters.
class HubAdapter : public Adapter {
 public:
  HubAdapter(std::shared_ptr<HubNetwork> network, TransportKind kind) : network_(std::move(network)), kind_(kind) {}

  TransportKind kind() const override { return kind_; }
  void connect(const Endpoint& endpoint) override;
  const Endpoint& endpoint() const override { return endpoint_; }
  void publish(const std::string& topic, const Json& payload) override;
  Subscription subscribe(const std::string& topic, MessageHandler handler) override;
  Json request(const std::string& path, const Json& payload) override;
  Subscription serve(const std::string& path, Responder responder) override;

  void set_publish_emulation(bool on) { emulate_publish_ = on; }

 private:
  Hub& connected_hub();

  std::shared_ptr<HubNetwork> network_;
  TransportKind kind_;
  Endpoint endpoint_;
  std::shared_ptr<Hub> hub_;
  bool emulate_publish_ = false;
};

using AdapterFactory = std::function<std::unique_ptr<Adapter>(std::shared_ptr<HubNetwork>)>;

/// Scheme -> adapter factory. A fresh registry resolves the three built-in
/// schemes.
class TransportRegistry {
 public:
  explicit TransportRegistry(std::shared_ptr<HubNetwork> network = std::make_shared<HubNetwork>());

  /// Throws DuplicateError when the scheme is already bound.
  TransportRegistry& register_scheme(const std::string& scheme, AdapterFactory factory);

  /// Connected adapter for the binding. Throws NotFoundError naming the
  /// scheme when it is not registered.
  std::unique_ptr<Adapter> resolve(const CommunicationBinding& binding) const;

  bool knows(const std::string& scheme) const;
  std::set<std::string> schemes() const;
  const std::shared_ptr<HubNetwork>& network() const { return network_; }

 private:
  std::shared_ptr<HubNetwork> network_;
  std::map<std::string, AdapterFactory> factories_;
};

}  // namespace kgmas
