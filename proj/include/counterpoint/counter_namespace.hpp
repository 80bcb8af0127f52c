#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace counterpoint {

/// Ordered set of hardware event counter names. The order fixes the coordinate
/// order of every counter vector (signatures, observations, constraints).
class CounterNamespace {
 public:
  CounterNamespace() = default;
  explicit CounterNamespace(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t index) const { return names_.at(index); }

  std::optional<std::size_t> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  /// Throws UnknownCounter when absent.
  std::size_t index_of(std::string_view name) const;

  /// Keeps only the listed names, preserving this namespace's order.
  CounterNamespace restricted_to(const std::vector<std::string>& keep) const;

  friend bool operator==(const CounterNamespace& a, const CounterNamespace& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The 26 Haswell MMU data-side counters (load and store variants of the Walk,
/// Ret and STLB groups plus the four page-walker reference counters).
CounterNamespace haswell_namespace();

}  // namespace counterpoint
