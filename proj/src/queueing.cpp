#include "qgsf/queueing.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qgsf {

namespace {

enum StreamTag : std::uint64_t { kArrivalTag = 1, kServiceTag = 2, kRoutingTag = 3 };

constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace

std::size_t QueueNetworkConfig::total_dim() const noexcept {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{0});
}

std::size_t QueueNetworkConfig::block_offset(std::size_t node) const {
  if (node >= dims.size()) throw std::out_of_range("block_offset: node index");
  return std::accumulate(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(node),
                         std::size_t{0});
}

void QueueNetworkConfig::validate() const {
  const std::size_t k = arrival_rates.size();
  if (k == 0) throw std::invalid_argument("queue network: need at least one node");
  if (leave_probs.size() != k || service_constants.size() != k || dims.size() != k)
    throw std::invalid_argument("queue network: per-node vectors must all have K entries");
  bool any_arrivals = false;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(arrival_rates[i] >= 0.0) || !std::isfinite(arrival_rates[i]))
      throw std::invalid_argument("queue network: arrival rates must be finite and >= 0");
    any_arrivals = any_arrivals || arrival_rates[i] > 0.0;
    if (!(leave_probs[i] >= 0.0 && leave_probs[i] <= 1.0))
      throw std::invalid_argument("queue network: leave probabilities must lie in [0, 1]");
    if (!(service_constants[i] > 0.0) || !std::isfinite(service_constants[i]))
      throw std::invalid_argument("queue network: service constants must be positive");
    if (dims[i] == 0) throw std::invalid_argument("queue network: node dimensions must be >= 1");
  }
  if (!any_arrivals) throw std::invalid_argument("queue network: no external arrivals");
  if (theta_target.size() != total_dim())
    throw std::invalid_argument("queue network: target length must equal the sum of dims");
}

SystemPreset preset_two_node() {
  QueueNetworkConfig net{{0.2, 0.1}, {0.0, 0.4}, {10.0, 20.0}, {2, 2}, std::vector<double>(4, 0.3)};
  return {"two_node", std::move(net), BoxConstraint::uniform(4, 0.1, 0.6), {0.1, 0.1, 0.6, 0.6}};
}

SystemPreset preset_four_node() {
  QueueNetworkConfig net{std::vector<double>(4, 0.2), std::vector<double>(4, 0.2),
                         std::vector<double>(4, 10.0), std::vector<std::size_t>(4, 5),
                         std::vector<double>(20, 0.3)};
  return {"four_node", std::move(net), BoxConstraint::uniform(20, 0.1, 0.6),
          std::vector<double>(20, 0.6)};
}

std::optional<SystemPreset> preset_by_name(const std::string& name) {
  if (name == "two_node" || name == "4d") return preset_two_node();
  if (name == "four_node" || name == "20d") return preset_four_node();
  return std::nullopt;
}

double service_time(std::size_t node, std::span<const double> theta_node,
                    const QueueNetworkConfig& config, RngStream& stream) {
  if (node >= config.node_count()) throw std::out_of_range("service_time: node index");
  if (theta_node.size() != config.dims[node])
    throw std::invalid_argument("service_time: parameter block has the wrong length");
  const std::size_t offset = config.block_offset(node);
  double dist2 = 0.0;
  for (std::size_t j = 0; j < theta_node.size(); ++j) {
    const double d = theta_node[j] - config.theta_target[offset + j];
    dist2 += d * d;
  }
  return stream.uniform01() * (1.0 / config.service_constants[node] + dist2);
}

QueueNetwork::QueueNetwork(QueueNetworkConfig config, const RngStream& stream)
    : config_(std::move(config)) {
  config_.validate();
  nodes_.reserve(config_.node_count());
  for (std::size_t i = 0; i < config_.node_count(); ++i) {
    nodes_.push_back(Node{{},
                          kInfinity,
                          kInfinity,
                          stream.substream(derive_stream_id({kArrivalTag, i})),
                          stream.substream(derive_stream_id({kServiceTag, i})),
                          stream.substream(derive_stream_id({kRoutingTag, i}))});
    Node& node = nodes_.back();
    if (config_.arrival_rates[i] > 0.0)
      node.next_arrival = node.arrivals.exponential(config_.arrival_rates[i]);
  }
}

std::size_t QueueNetwork::customers_in_system() const noexcept {
  std::size_t count = 0;
  for (const Node& node : nodes_) count += node.customers.size();
  return count;
}

double QueueNetwork::total_sojourn() const noexcept {
  double total = 0.0;
  for (const Node& node : nodes_)
    for (const Customer& c : node.customers) total += clock_ - c.entry_time;
  return total;
}

void QueueNetwork::start_service(std::size_t node, std::span<const double> control) {
  Node& n = nodes_[node];
  const std::size_t offset = config_.block_offset(node);
  const double duration =
      service_time(node, control.subspan(offset, config_.dims[node]), config_, n.services);
  n.completion = clock_ + duration;
  if (observer_) observer_->on_service_start(node, n.customers.front().id, clock_, duration);
}

void QueueNetwork::join(std::size_t node, Customer customer, std::span<const double> control) {
  Node& n = nodes_[node];
  n.customers.push_back(customer);
  if (observer_) observer_->on_node_arrival(node, customer.id, clock_);
  if (n.customers.size() == 1) start_service(node, control);
}

double QueueNetwork::step(std::span<const double> control) {
  if (control.size() != config_.total_dim())
    throw std::invalid_argument("QueueNetwork::step: control vector has the wrong length");
  const std::size_t k = nodes_.size();
  for (;;) {
    // Next event: the earliest external arrival or service completion.
    std::size_t node = 0;
    double when = kInfinity;
    bool is_completion = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (nodes_[i].completion < when) {
        when = nodes_[i].completion;
        node = i;
        is_completion = true;
      }
      if (nodes_[i].next_arrival < when) {
        when = nodes_[i].next_arrival;
        node = i;
        is_completion = false;
      }
    }
    if (!std::isfinite(when)) throw std::logic_error("QueueNetwork: event list is empty");
    clock_ = when;
    Node& n = nodes_[node];

    if (!is_completion) {
      const Customer customer{next_id_++, clock_};
      ++external_arrivals_;
      n.next_arrival = clock_ + n.arrivals.exponential(config_.arrival_rates[node]);
      if (observer_) observer_->on_external_arrival(node, customer.id, clock_);
      join(node, customer, control);
      continue;
    }

    const double cost = total_sojourn();
    const Customer done = n.customers.front();
    n.customers.pop_front();
    n.completion = kInfinity;
    const bool leaves = n.routing.uniform01() < config_.leave_probs[node];
    if (observer_) observer_->on_service_completion(node, done.id, clock_, leaves);
    if (!n.customers.empty()) start_service(node, control);
    if (leaves) {
      ++departures_;
    } else {
      join((node + 1) % k, done, control);
    }
    return cost;
  }
}

std::unique_ptr<Simulator> make_simulator(const QueueNetworkConfig& config,
                                          const RngStream& stream) {
  return std::make_unique<QueueNetwork>(config, stream);
}

}  // namespace qgsf
