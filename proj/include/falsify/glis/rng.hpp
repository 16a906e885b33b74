#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace falsify::glis {

/// Seeded generator with a portable uniform draw (53 random mantissa bits),
/// so sample histories do not depend on the standard library's distributions.
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n)
  {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::uint64_t next() { return engine_(); }

  std::string state() const
  {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void restore(const std::string & s)
  {
    std::istringstream is(s);
    is >> engine_;
  }

  bool operator==(const Rng & other) const { return engine_ == other.engine_; }

private:
  std::mt19937_64 engine_;
};

}  // namespace falsify::glis
