#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace arraypir {

// Thrown when stored or received data is inconsistent (corrupt shards,
// mismatched responses, bad snapshots). Distinct from std::invalid_argument,
// which covers caller-side precondition violations; the CLI maps the two to
// different exit codes.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Uniform integer in [0, bound) by rejection sampling, so results depend only
// on the generator stream and stay reproducible across platforms.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

}  // namespace arraypir
