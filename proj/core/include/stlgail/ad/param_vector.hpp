#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stlgail::ad {

/// Named groups of real parameters behind one flat vector. Groups keep their
/// insertion order, which fixes the flattening order.
class ParamVector {
 public:
  struct Group {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
    friend bool operator==(const Group&, const Group&) = default;
  };

  /// Appends a group; throws InvalidArgument on a duplicate name.
  std::span<double> add_group(std::string name, std::size_t size, double fill = 0.0);

  std::span<double> group(std::string_view name);
  std::span<const double> group(std::string_view name) const;
  const Group& group_info(std::string_view name) const;
  bool has_group(std::string_view name) const noexcept;

  std::span<double> flat() noexcept { return values_; }
  std::span<const double> flat() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<Group>& groups() const noexcept { return groups_; }

  /// Overwrites every value; `values.size()` must equal `size()`.
  void unflatten(std::span<const double> values);

  /// Same group layout (names, order, sizes).
  bool same_layout(const ParamVector& other) const noexcept {
    return groups_ == other.groups_;
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<Group> groups_;
  std::vector<double> values_;
};

}  // namespace stlgail::ad
