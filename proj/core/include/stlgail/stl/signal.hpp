#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stlgail::stl {

/// Discrete-time real vector signal x(0..T), stored row-major.
class Signal {
 public:
  Signal() = default;
  /// `values.size()` must be a nonzero multiple of `names.size()`.
  Signal(std::vector<std::string> names, std::vector<double> values);
  /// Builds from one row per time step.
  static Signal from_rows(std::vector<std::string> names,
                          const std::vector<std::vector<double>>& rows);

  std::size_t dim() const noexcept { return names_.size(); }
  std::size_t length() const noexcept {
    return names_.empty() ? 0 : values_.size() / names_.size();
  }
  /// Last valid time index T.
  int last_time() const noexcept { return static_cast<int>(length()) - 1; }

  std::span<const double> at(std::size_t t) const {
    return {values_.data() + t * dim(), dim()};
  }
  double operator()(std::size_t t, std::size_t d) const {
    return values_[t * dim() + d];
  }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

/// A signal with a classification label, +1 (positive) or -1 (negative).
struct LabeledSignal {
  Signal signal;
  int label = 1;
};

using SignalSet = std::vector<LabeledSignal>;

}  // namespace stlgail::stl
