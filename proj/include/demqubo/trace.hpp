#pragma once

// Per-iteration solver history.  `value` is the quantity the solver tracks
// (expectation Phi for descent methods, best-seen objective for the discrete
// heuristics); `aux` is solver-specific (gradient/direction norm, temperature,
// pump amplitude, ...).  `seconds` is monotonic time since the solver call.

#include <chrono>
#include <cstdint>
#include <vector>

namespace demqubo {

namespace detail {
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};
}  // namespace detail

struct TraceEntry {
  std::int64_t iteration;
  double value;
  double aux;
  double seconds;
};

using Trace = std::vector<TraceEntry>;

}  // namespace demqubo
