#pragma once

#include <cmath>

#include "droplet/error.hpp"

namespace droplet {

// Admissible band 1 - mu_minus <= |grad u|^2 <= 1 + mu_plus at the contact line.
struct PinningInterval {
  double mu_plus = 0.0;
  double mu_minus = 0.0;

  PinningInterval() = default;
  PinningInterval(double mu_p, double mu_m) : mu_plus(mu_p), mu_minus(mu_m) {
    if (!(mu_plus > 0.0)) throw PreconditionError("mu_plus must be positive");
    if (!(mu_minus > 0.0 && mu_minus < 1.0)) throw PreconditionError("mu_minus must lie in (0, 1)");
  }

  // Slope at which the contact line advances.
  double q_adv() const { return std::sqrt(1.0 + mu_plus); }
  // Slope at which the contact line recedes.
  double q_rec() const { return std::sqrt(1.0 - mu_minus); }
};

}  // namespace droplet
