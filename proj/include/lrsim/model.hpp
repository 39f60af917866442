#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lrsim {

/// Anything that can produce a return path of a given length from a seed.
/// Implementations must be deterministic in (n, seed) and safe to call
/// concurrently from several threads.
class ReturnModel {
 public:
  virtual ~ReturnModel() = default;
  [[nodiscard]] virtual std::vector<double> simulate(std::size_t n, std::uint64_t seed) const = 0;
  [[nodiscard]] virtual std::string label() const = 0;
};

}  // namespace lrsim
