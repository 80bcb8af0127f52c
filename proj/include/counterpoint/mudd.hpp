#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "counterpoint/counter_namespace.hpp"

namespace counterpoint {

enum class NodeKind { Event, Counter, Decision, Done };

std::string_view to_string(NodeKind kind);

struct NodeId {
  std::uint32_t value = 0;
  friend auto operator<=>(NodeId, NodeId) = default;
};

struct Node {
  NodeKind kind = NodeKind::Event;
  // Event name, counter name, or decision property depending on `kind`.
  std::string name;
  std::optional<std::string> label;
};

struct CausalityEdge {
  NodeId from;
  NodeId to;
  // Property value; present exactly on edges leaving decision nodes.
  std::optional<std::string> value;
};

struct HappensBeforeEdge {
  NodeId from;
  NodeId to;
  friend bool operator==(const HappensBeforeEdge&, const HappensBeforeEdge&) = default;
};

/// A µpath decision diagram. Immutable once built; construction validates
/// every structural invariant (see MuDD::Builder::build).
class MuDD {
 public:
  class Builder;

  const CounterNamespace& counter_namespace() const noexcept { return ns_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(id.value); }
  const std::vector<CausalityEdge>& causality_edges() const noexcept { return causality_; }
  const std::vector<HappensBeforeEdge>& happens_before_edges() const noexcept { return happens_before_; }
  NodeId entry() const noexcept { return entry_; }

  /// Indices into causality_edges() leaving `id`, in declaration order.
  const std::vector<std::size_t>& out_edges(NodeId id) const { return out_.at(id.value); }

  std::optional<NodeId> find_label(std::string_view label) const;

 private:
  MuDD() = default;

  CounterNamespace ns_;
  std::vector<Node> nodes_;
  std::vector<CausalityEdge> causality_;
  std::vector<HappensBeforeEdge> happens_before_;
  std::vector<std::vector<std::size_t>> out_;
  NodeId entry_;
};

class MuDD::Builder {
 public:
  explicit Builder(CounterNamespace ns) : ns_(std::move(ns)) {}

  NodeId add_event(std::string name, std::optional<std::string> label = std::nullopt);
  NodeId add_counter(std::string counter, std::optional<std::string> label = std::nullopt);
  NodeId add_decision(std::string property, std::optional<std::string> label = std::nullopt);
  NodeId add_done(std::optional<std::string> label = std::nullopt);

  void add_causality(NodeId from, NodeId to, std::optional<std::string> value = std::nullopt);
  void add_happens_before(NodeId from, NodeId to);
  void set_entry(NodeId entry) { entry_ = entry; }

  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Validates and freezes the diagram. Throws InvalidModel for structural
  /// violations, UnknownCounter for counters outside the namespace, and
  /// CycleDetected when causality (or causality plus happens-before) edges
  /// form a cycle.
  MuDD build() const;

 private:
  NodeId add(NodeKind kind, std::string name, std::optional<std::string> label);

  CounterNamespace ns_;
  std::vector<Node> nodes_;
  std::vector<CausalityEdge> causality_;
  std::vector<HappensBeforeEdge> happens_before_;
  std::optional<NodeId> entry_;
};

struct MuPath {
  std::vector<NodeId> nodes_in_order;
  // Property assignments in the order they were made along the traversal.
  std::vector<std::pair<std::string, std::string>> property_assignment;
  std::vector<HappensBeforeEdge> happens_before;

  std::optional<std::string> value_of(std::string_view property) const;
};

struct CounterSignature {
  std::vector<std::int64_t> counts;
  std::optional<std::size_t> source_path;

  friend bool operator==(const CounterSignature& a, const CounterSignature& b) { return a.counts == b.counts; }
};

inline constexpr std::size_t kDefaultPathCap = 100'000;

/// Depth-first enumeration of every µpath, following outgoing edges in
/// declaration order. Unassigned decisions branch over all of their values;
/// decisions on an already-assigned property follow the matching edge.
std::vector<MuPath> enumerate_mupaths(const MuDD& model, std::size_t cap = kDefaultPathCap);

enum class UnknownCounterPolicy { Reject, Drop };

/// Occurrence counts of each counter of `ns` along `path`. Counters of the
/// model that are absent from `ns` raise UnknownCounter unless `policy` is Drop
/// (used when observations cover only part of the model's namespace).
CounterSignature signature_of(const MuDD& model, const MuPath& path, const CounterNamespace& ns,
                              UnknownCounterPolicy policy = UnknownCounterPolicy::Reject);

std::vector<CounterSignature> signatures_of_model(const MuDD& model, std::size_t cap = kDefaultPathCap);
std::vector<CounterSignature> signatures_of_model(const MuDD& model, const CounterNamespace& ns,
                                                  UnknownCounterPolicy policy, std::size_t cap = kDefaultPathCap);

/// "prop=value, prop=value" rendering of a path's property assignment.
std::string describe_assignment(const MuPath& path);

}  // namespace counterpoint
