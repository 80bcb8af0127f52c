#include "counterpoint/counter_namespace.hpp"

#include <algorithm>

#include "counterpoint/error.hpp"

namespace counterpoint {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PathExplosion: return "PathExplosion";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::DanglingDecision: return "DanglingDecision";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::UnknownCounter: return "UnknownCounter";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DuplicateLabel: return "DuplicateLabel";
    case ErrorKind::EmptySwitch: return "EmptySwitch";
    case ErrorKind::UnreachableStatement: return "UnreachableStatement";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::DegenerateHull: return "DegenerateHull";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MissingCounter: return "MissingCounter";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NoFeasibleModel: return "NoFeasibleModel";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidCatalog: return "InvalidCatalog";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

CounterNamespace::CounterNamespace(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) {
      throw Error(ErrorKind::InvalidArgument, "empty counter name at position " + std::to_string(i));
    }
    auto [it, inserted] = index_.emplace(names_[i], i);
    if (!inserted) {
      throw Error(ErrorKind::InvalidArgument, "duplicate counter name '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> CounterNamespace::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CounterNamespace::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorKind::UnknownCounter, "counter '" + std::string(name) + "' is not in the namespace");
}

CounterNamespace CounterNamespace::restricted_to(const std::vector<std::string>& keep) const {
  std::vector<std::string> out;
  for (const auto& n : names_) {
    if (std::find(keep.begin(), keep.end(), n) != keep.end()) out.push_back(n);
  }
  return CounterNamespace(std::move(out));
}

CounterNamespace haswell_namespace() {
  std::vector<std::string> names;
  for (const char* access : {"load", "store"}) {
    const std::string t = access;
    for (const char* s : {"causes_walk", "walk_done_4k", "walk_done_2m", "walk_done_1g", "walk_done",
                          "pde$_miss"}) {
      names.push_back(t + "." + s);
    }
  }
  for (const char* s : {"walk_ref.l1", "walk_ref.l2", "walk_ref.l3", "walk_ref.mem"}) names.emplace_back(s);
  for (const char* access : {"load", "store"}) {
    const std::string t = access;
    names.push_back(t + ".ret_stlb_miss");
    names.push_back(t + ".ret");
  }
  for (const char* access : {"load", "store"}) {
    const std::string t = access;
    names.push_back(t + ".stlb_hit_4k");
    names.push_back(t + ".stlb_hit_2m");
    names.push_back(t + ".stlb_hit");
  }
  return CounterNamespace(std::move(names));
}

}  // namespace counterpoint
