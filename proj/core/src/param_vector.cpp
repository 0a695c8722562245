#include "stlgail/ad/param_vector.hpp"

#include <algorithm>

#include "stlgail/error.hpp"

namespace stlgail::ad {

std::span<double> ParamVector::add_group(std::string name, std::size_t size,
                                         double fill) {
  if (has_group(name)) throw InvalidArgument("duplicate parameter group " + name);
  const std::size_t offset = values_.size();
  groups_.push_back({std::move(name), offset, size});
  values_.resize(offset + size, fill);
  return {values_.data() + offset, size};
}

const ParamVector::Group& ParamVector::group_info(std::string_view name) const {
  const auto it = std::find_if(groups_.begin(), groups_.end(),
                               [&](const Group& g) { return g.name == name; });
  if (it == groups_.end()) {
    throw InvalidArgument("no parameter group " + std::string(name));
  }
  return *it;
}

bool ParamVector::has_group(std::string_view name) const noexcept {
  return std::any_of(groups_.begin(), groups_.end(),
                     [&](const Group& g) { return g.name == name; });
}

std::span<double> ParamVector::group(std::string_view name) {
  const auto& g = group_info(name);
  return {values_.data() + g.offset, g.size};
}

std::span<const double> ParamVector::group(std::string_view name) const {
  const auto& g = group_info(name);
  return {values_.data() + g.offset, g.size};
}

void ParamVector::unflatten(std::span<const double> values) {
  if (values.size() != values_.size()) {
    throw DimensionMismatch("unflatten: expected " + std::to_string(values_.size()) +
                            " values, got " + std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), values_.begin());
}

}  // namespace stlgail::ad
