#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixflex {

using Seconds = double;
using Meters = double;

/// Dense, typed index into one of the world's tables (stops, links, lines, ...).
template <class Tag>
struct Index {
  std::int32_t value = -1;

  constexpr Index() = default;
  constexpr explicit Index(std::int32_t v) : value(v) {}
  constexpr explicit Index(std::size_t v) : value(static_cast<std::int32_t>(v)) {}

  [[nodiscard]] constexpr bool valid() const { return value >= 0; }
  [[nodiscard]] constexpr std::size_t get() const { return static_cast<std::size_t>(value); }

  constexpr auto operator<=>(const Index&) const = default;
};

using StopIdx = Index<struct StopTag>;
using LinkIdx = Index<struct LinkTag>;
using LineIdx = Index<struct LineTag>;
using VehicleTypeIdx = Index<struct VehicleTypeTag>;
using ComponentIdx = Index<struct ComponentTag>;
using PathIdx = Index<struct PathTag>;
using TravelerIdx = Index<struct TravelerTag>;
using VehicleIdx = Index<struct VehicleTag>;
using GroupIdx = Index<struct GroupTag>;
using PlanIdx = Index<struct PlanTag>;

enum class Mode : std::uint8_t { Fix, Flex };

[[nodiscard]] inline const char* to_string(Mode m) { return m == Mode::Fix ? "FIX" : "FLEX"; }

/// Raised for scenario/configuration problems. Carries every violation found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  [[nodiscard]] const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Raised when a runtime invariant of the simulation is broken.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// splitmix64 finalizer; used to derive independent stream seeds.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                                  std::uint64_t c = 0) {
  return base ^ mix64(mix64(mix64(a) ^ b) ^ (c * 0x632BE59BD9B4E019ULL));
}

/// Random stream with transforms fixed in this code base.
///
/// std::*_distribution output is implementation-defined; only the engine
/// sequence is portable, so every transform used by the simulator lives here.
class RandomStream {
 public:
  RandomStream() = default;
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per call, the pair's sine half is discarded).
  double normal();

  double lognormal(double mu, double sigma);

  /// Exponential with the given rate (events per second).
  double exponential(double rate);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_{0};
};

}  // namespace fixflex

template <class Tag>
struct std::hash<fixflex::Index<Tag>> {
  std::size_t operator()(const fixflex::Index<Tag>& i) const noexcept { return std::hash<std::int32_t>{}(i.value); }
};
