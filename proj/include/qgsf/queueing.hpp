#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qgsf/optimizer.hpp"
#include "qgsf/rng.hpp"

namespace qgsf {

/**
 * A tandem of K single-server FIFO queues with Bernoulli feedback.
 *
 * Node i receives Poisson(arrival_rates[i]) external traffic. After service at
 * node i a customer leaves with probability leave_probs[i], otherwise it joins
 * node i+1 (node K-1 feeds node 0). Service at node i takes
 * U * (1/R_i + |theta_i - target_i|^2) with U ~ Uniform(0,1), where theta_i is
 * the node's block of the control vector.
 */
struct QueueNetworkConfig {
  std::vector<double> arrival_rates;
  std::vector<double> leave_probs;
  std::vector<double> service_constants;
  std::vector<std::size_t> dims;
  std::vector<double> theta_target;

  std::size_t node_count() const noexcept { return arrival_rates.size(); }
  std::size_t total_dim() const noexcept;
  /// Offset of node i's block inside the full parameter vector.
  std::size_t block_offset(std::size_t node) const;
  void validate() const;  // throws std::invalid_argument
};

/// A queueing system together with the feasible box and starting point used with it.
struct SystemPreset {
  std::string name;
  QueueNetworkConfig network;
  BoxConstraint box;
  std::vector<double> theta0;
};

/// Two nodes, 4 parameters: lambda = (0.2, 0.1), p = (0, 0.4), R = (10, 20),
/// box [0.1, 0.6]^4, target 0.3, start (0.1, 0.1, 0.6, 0.6).
SystemPreset preset_two_node();
/// Four nodes, 20 parameters: lambda = p = 0.2, R = 10, box [0.1, 0.6]^20,
/// target 0.3, start 0.6.
SystemPreset preset_four_node();
/// "two_node" / "4d" and "four_node" / "20d".
std::optional<SystemPreset> preset_by_name(const std::string& name);

/// One service duration for `node` under its parameter block `theta_node`.
double service_time(std::size_t node, std::span<const double> theta_node,
                    const QueueNetworkConfig& config, RngStream& stream);

/// Hooks into the event loop. Default implementations ignore everything.
class QueueObserver {
public:
  virtual ~QueueObserver() = default;
  virtual void on_external_arrival(std::size_t /*node*/, std::uint64_t /*customer*/,
                                   double /*time*/) {}
  virtual void on_node_arrival(std::size_t /*node*/, std::uint64_t /*customer*/,
                               double /*time*/) {}
  virtual void on_service_start(std::size_t /*node*/, std::uint64_t /*customer*/,
                                double /*time*/, double /*duration*/) {}
  virtual void on_service_completion(std::size_t /*node*/, std::uint64_t /*customer*/,
                                     double /*time*/, bool /*leaves_system*/) {}
};

/**
 * Live discrete-event state of the network. Starts empty at clock 0.
 *
 * Each step() runs the event loop up to the next service completion anywhere
 * in the network and returns the summed system sojourn time (clock minus
 * system-entry time) of every customer present just before the completing
 * customer is routed. Service durations are drawn at service start using the
 * control vector passed to that step().
 */
class QueueNetwork final : public Simulator {
public:
  QueueNetwork(QueueNetworkConfig config, const RngStream& stream);

  double step(std::span<const double> control) override;

  double clock() const noexcept { return clock_; }
  std::size_t customers_in_system() const noexcept;
  std::size_t queue_length(std::size_t node) const { return nodes_.at(node).customers.size(); }
  std::uint64_t external_arrivals() const noexcept { return external_arrivals_; }
  std::uint64_t departures() const noexcept { return departures_; }
  const QueueNetworkConfig& config() const noexcept { return config_; }

  /// Not owned; pass nullptr to detach.
  void set_observer(QueueObserver* observer) noexcept { observer_ = observer; }

private:
  struct Customer {
    std::uint64_t id;
    double entry_time;
  };
  struct Node {
    std::deque<Customer> customers;  // front is in service when busy
    double next_arrival = std::numeric_limits<double>::infinity();
    double completion = std::numeric_limits<double>::infinity();
    RngStream arrivals;
    RngStream services;
    RngStream routing;
  };

  void join(std::size_t node, Customer customer, std::span<const double> control);
  void start_service(std::size_t node, std::span<const double> control);
  double total_sojourn() const noexcept;

  QueueNetworkConfig config_;
  std::vector<Node> nodes_;
  double clock_ = 0.0;
  std::uint64_t next_id_ = 0;
  std::uint64_t external_arrivals_ = 0;
  std::uint64_t departures_ = 0;
  QueueObserver* observer_ = nullptr;
};

/// A fresh, empty network behind the Simulator interface.
std::unique_ptr<Simulator> make_simulator(const QueueNetworkConfig& config,
                                          const RngStream& stream);

}  // namespace qgsf
