#include "nss/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nss {

namespace {
[[noreturn]] void fail(const char* key, double value, const char* constraint) {
  std::ostringstream os;
  os << "PhysParams: " << key << " = " << value << " violates " << constraint;
  throw std::invalid_argument(os.str());
}
}  // namespace

void PhysParams::validate() const {
  if (!(a > 0.0)) fail("a", a, "a > 0");
  if (!(gamma > 1.0)) fail("gamma", gamma, "gamma > 1");
  if (!(mu > 0.0)) fail("mu", mu, "mu > 0");
  if (!(lambda + 2.0 * mu / 3.0 >= 0.0))
    fail("lambda", lambda, "lambda + 2 mu / 3 >= 0");
  if (!(beta != 0.0) || std::isnan(beta)) fail("beta", beta, "beta != 0");
  if (!(delta >= 0.0)) fail("delta", delta, "delta >= 0");
  if (!(h > 0.0)) fail("h", h, "h > 0");
}

double pressure(double rho, const PhysParams& p) {
  const double r6 = rho * rho * rho;
  return p.a * std::pow(rho, p.gamma) + p.delta * r6 * r6;
}

double pressure_potential(double rho, const PhysParams& p) {
  const double r6 = rho * rho * rho;
  return p.a / (p.gamma - 1.0) * std::pow(rho, p.gamma) +
         p.delta / 5.0 * r6 * r6;
}

double pressure_potential_prime(double rho, const PhysParams& p) {
  const double r5 = rho * rho * rho * rho * rho;
  return p.a * p.gamma / (p.gamma - 1.0) * std::pow(rho, p.gamma - 1.0) +
         1.2 * p.delta * r5;
}

}  // namespace nss
