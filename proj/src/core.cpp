#include "fixflex/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fixflex {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::ostringstream os;
  os << v.size() << " configuration error(s)";
  for (const auto& s : v) os << "\n  " << s;
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

double RandomStream::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::lognormal(double mu, double sigma) {
  if (sigma == 0.0) return std::exp(mu);
  return std::exp(mu + sigma * normal());
}

double RandomStream::exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

}  // namespace fixflex
