#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "liqgame/error.hpp"

namespace liqgame {

/// Uniform grid t_k = k T / M on [0, T].
class TimeGrid {
 public:
  TimeGrid(double t_end, std::size_t steps) : t_end_(t_end), steps_(steps) {
    if (!(std::isfinite(t_end) && t_end > 0.0)) {
      throw Error(ErrorCategory::kInvalidArgument, "time grid horizon must be positive");
    }
    if (steps < 2) {
      throw Error(ErrorCategory::kInvalidArgument,
                  "time grid needs at least 2 steps, got " + std::to_string(steps));
    }
  }

  double t_end() const noexcept { return t_end_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return steps_ + 1; }
  double h() const noexcept { return t_end_ / static_cast<double>(steps_); }

  double t(std::size_t k) const noexcept {
    if (k == steps_) return t_end_;
    return t_end_ * static_cast<double>(k) / static_cast<double>(steps_);
  }

  std::vector<double> times() const {
    std::vector<double> ts(nodes());
    for (std::size_t k = 0; k < ts.size(); ++k) ts[k] = t(k);
    return ts;
  }

  TimeGrid refined() const { return TimeGrid(t_end_, 2 * steps_); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_end_;
  std::size_t steps_;
};

}  // namespace liqgame
