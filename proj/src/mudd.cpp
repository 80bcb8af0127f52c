#include "counterpoint/mudd.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "counterpoint/error.hpp"

namespace counterpoint {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Event: return "event";
    case NodeKind::Counter: return "counter";
    case NodeKind::Decision: return "decision";
    case NodeKind::Done: return "done";
  }
  return "?";
}

std::optional<NodeId> MuDD::find_label(std::string_view label) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].label && *nodes_[i].label == label) return NodeId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

NodeId MuDD::Builder::add(NodeKind kind, std::string name, std::optional<std::string> label) {
  nodes_.push_back(Node{kind, std::move(name), std::move(label)});
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId MuDD::Builder::add_event(std::string name, std::optional<std::string> label) {
  return add(NodeKind::Event, std::move(name), std::move(label));
}
NodeId MuDD::Builder::add_counter(std::string counter, std::optional<std::string> label) {
  return add(NodeKind::Counter, std::move(counter), std::move(label));
}
NodeId MuDD::Builder::add_decision(std::string property, std::optional<std::string> label) {
  return add(NodeKind::Decision, std::move(property), std::move(label));
}
NodeId MuDD::Builder::add_done(std::optional<std::string> label) {
  return add(NodeKind::Done, "done", std::move(label));
}

void MuDD::Builder::add_causality(NodeId from, NodeId to, std::optional<std::string> value) {
  causality_.push_back(CausalityEdge{from, to, std::move(value)});
}

void MuDD::Builder::add_happens_before(NodeId from, NodeId to) {
  happens_before_.push_back(HappensBeforeEdge{from, to});
}

namespace {

std::string describe(const std::vector<Node>& nodes, NodeId id) {
  const Node& n = nodes[id.value];
  std::string s = std::string(to_string(n.kind)) + " #" + std::to_string(id.value);
  if (n.kind != NodeKind::Done) s += " '" + n.name + "'";
  return s;
}

// Kahn's algorithm over the given adjacency; returns a node on a cycle if any.
std::optional<std::size_t> find_cycle_node(const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<std::size_t> indegree(adj.size(), 0);
  for (const auto& succ : adj) {
    for (auto t : succ) ++indegree[t];
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    auto n = ready.back();
    ready.pop_back();
    ++seen;
    for (auto t : adj[n]) {
      if (--indegree[t] == 0) ready.push_back(t);
    }
  }
  if (seen == adj.size()) return std::nullopt;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    if (indegree[i] > 0) return i;
  }
  return std::nullopt;
}

}  // namespace

MuDD MuDD::Builder::build() const {
  const auto n = nodes_.size();
  if (!entry_) throw Error(ErrorKind::InvalidModel, "no entry node");
  if (entry_->value >= n) throw Error(ErrorKind::InvalidModel, "entry node out of range");

  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t e = 0; e < causality_.size(); ++e) {
    const auto& edge = causality_[e];
    if (edge.from.value >= n || edge.to.value >= n) {
      throw Error(ErrorKind::InvalidModel, "causality edge " + std::to_string(e) + " references a missing node");
    }
    out[edge.from.value].push_back(e);
  }
  for (const auto& hb : happens_before_) {
    if (hb.from.value >= n || hb.to.value >= n) {
      throw Error(ErrorKind::InvalidModel, "happens-before edge references a missing node");
    }
  }

  std::set<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = nodes_[i];
    const NodeId id{static_cast<std::uint32_t>(i)};
    if (node.label && !labels.insert(*node.label).second) {
      throw Error(ErrorKind::DuplicateLabel, "label '" + *node.label + "' is used twice");
    }
    const auto& edges = out[i];
    switch (node.kind) {
      case NodeKind::Done:
        if (!edges.empty()) throw Error(ErrorKind::InvalidModel, describe(nodes_, id) + " has outgoing edges");
        break;
      case NodeKind::Decision: {
        if (edges.empty()) throw Error(ErrorKind::InvalidModel, describe(nodes_, id) + " has no outgoing edges");
        std::set<std::string> values;
        for (auto e : edges) {
          const auto& v = causality_[e].value;
          if (!v) throw Error(ErrorKind::InvalidModel, describe(nodes_, id) + " has an unlabeled outgoing edge");
          if (!values.insert(*v).second) {
            throw Error(ErrorKind::InvalidModel,
                        describe(nodes_, id) + " has two edges labeled '" + *v + "'");
          }
        }
        break;
      }
      case NodeKind::Counter:
        if (!ns_.contains(node.name)) {
          throw Error(ErrorKind::UnknownCounter, "counter '" + node.name + "' is not in the namespace");
        }
        [[fallthrough]];
      case NodeKind::Event:
        if (edges.size() != 1) {
          throw Error(ErrorKind::InvalidModel, describe(nodes_, id) + " must have exactly one outgoing edge, has " +
                                                   std::to_string(edges.size()));
        }
        if (causality_[edges.front()].value) {
          throw Error(ErrorKind::InvalidModel, describe(nodes_, id) + " has a labeled outgoing edge");
        }
        break;
    }
  }

  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& edge : causality_) adj[edge.from.value].push_back(edge.to.value);
  if (auto bad = find_cycle_node(adj)) {
    throw Error(ErrorKind::CycleDetected,
                "causality edges form a cycle through " + describe(nodes_, NodeId{static_cast<std::uint32_t>(*bad)}));
  }
  for (const auto& hb : happens_before_) adj[hb.from.value].push_back(hb.to.value);
  if (auto bad = find_cycle_node(adj)) {
    throw Error(ErrorKind::CycleDetected, "happens-before edges contradict causality through " +
                                              describe(nodes_, NodeId{static_cast<std::uint32_t>(*bad)}));
  }

  MuDD model;
  model.ns_ = ns_;
  model.nodes_ = nodes_;
  model.causality_ = causality_;
  model.happens_before_ = happens_before_;
  model.out_ = std::move(out);
  model.entry_ = *entry_;
  return model;
}

std::optional<std::string> MuPath::value_of(std::string_view property) const {
  for (const auto& [p, v] : property_assignment) {
    if (p == property) return v;
  }
  return std::nullopt;
}

std::vector<MuPath> enumerate_mupaths(const MuDD& model, std::size_t cap) {
  if (cap == 0) throw Error(ErrorKind::InvalidArgument, "path cap must be positive");
  std::vector<MuPath> paths;
  MuPath current;
  const auto node_count = model.nodes().size();

  std::function<void(NodeId)> visit = [&](NodeId id) {
    if (current.nodes_in_order.size() > node_count) {
      throw Error(ErrorKind::CycleDetected, "traversal revisited a node");
    }
    current.nodes_in_order.push_back(id);
    const Node& node = model.node(id);
    const auto& edges = model.out_edges(id);
    switch (node.kind) {
      case NodeKind::Done: {
        if (paths.size() == cap) {
          throw Error(ErrorKind::PathExplosion, "model has more than " + std::to_string(cap) + " µpaths");
        }
        MuPath p = current;
        std::vector<std::size_t> position(node_count, SIZE_MAX);
        for (std::size_t i = 0; i < p.nodes_in_order.size(); ++i) position[p.nodes_in_order[i].value] = i;
        for (const auto& hb : model.happens_before_edges()) {
          if (position[hb.from.value] != SIZE_MAX && position[hb.to.value] != SIZE_MAX) p.happens_before.push_back(hb);
        }
        paths.push_back(std::move(p));
        break;
      }
      case NodeKind::Decision: {
        if (auto assigned = current.value_of(node.name)) {
          auto it = std::find_if(edges.begin(), edges.end(), [&](std::size_t e) {
            return model.causality_edges()[e].value == assigned;
          });
          if (it == edges.end()) {
            throw Error(ErrorKind::DanglingDecision, "property '" + node.name + "' was assigned '" + *assigned +
                                                         "' but decision #" + std::to_string(id.value) +
                                                         " has no matching edge");
          }
          visit(model.causality_edges()[*it].to);
        } else {
          for (auto e : edges) {
            const auto& edge = model.causality_edges()[e];
            current.property_assignment.emplace_back(node.name, *edge.value);
            visit(edge.to);
            current.property_assignment.pop_back();
          }
        }
        break;
      }
      case NodeKind::Event:
      case NodeKind::Counter:
        visit(model.causality_edges()[edges.front()].to);
        break;
    }
    current.nodes_in_order.pop_back();
  };

  visit(model.entry());
  return paths;
}

CounterSignature signature_of(const MuDD& model, const MuPath& path, const CounterNamespace& ns,
                              UnknownCounterPolicy policy) {
  CounterSignature sig;
  sig.counts.assign(ns.size(), 0);
  for (auto id : path.nodes_in_order) {
    const Node& node = model.node(id);
    if (node.kind != NodeKind::Counter) continue;
    if (auto i = ns.find(node.name)) {
      ++sig.counts[*i];
    } else if (policy == UnknownCounterPolicy::Reject) {
      throw Error(ErrorKind::UnknownCounter, "counter '" + node.name + "' is not in the namespace");
    }
  }
  return sig;
}

std::vector<CounterSignature> signatures_of_model(const MuDD& model, std::size_t cap) {
  return signatures_of_model(model, model.counter_namespace(), UnknownCounterPolicy::Reject, cap);
}

std::vector<CounterSignature> signatures_of_model(const MuDD& model, const CounterNamespace& ns,
                                                  UnknownCounterPolicy policy, std::size_t cap) {
  auto paths = enumerate_mupaths(model, cap);
  std::vector<CounterSignature> sigs;
  sigs.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    auto sig = signature_of(model, paths[i], ns, policy);
    sig.source_path = i;
    sigs.push_back(std::move(sig));
  }
  return sigs;
}

std::string describe_assignment(const MuPath& path) {
  std::string s;
  for (const auto& [p, v] : path.property_assignment) {
    if (!s.empty()) s += ", ";
    s += p + "=" + v;
  }
  return s.empty() ? "-" : s;
}

}  // namespace counterpoint
