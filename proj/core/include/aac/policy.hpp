#pragma once

#include "aac/net.hpp"
#include "aac/rng.hpp"

namespace aac {

inline constexpr double kLogStdMin = -10.0;
inline constexpr double kLogStdMax = 2.0;

struct SquashedSample {
  Vector action;    // tanh-squashed, each component in (-1, 1)
  double log_prob;  // summed over dimensions
};

// Diagonal Gaussian with tanh squashing. Built from the raw actor output
// (mean head followed by a log-std head, clamped to [kLogStdMin, kLogStdMax]).
struct GaussianPolicyHead {
  Vector mean;
  Vector log_std;

  static GaussianPolicyHead from_raw(const Vector& raw);

  SquashedSample sample(Rng& rng) const;
  // Deterministic given the standard-normal noise vector z.
  SquashedSample sample_with_noise(const Vector& z) const;
  Vector mode() const;  // tanh(mean)
};

// log N(u; mean, std) summed with the tanh change-of-variables correction,
// evaluated at the pre-squash value u.
double squashed_log_prob(const Vector& mean, const Vector& log_std,
                         const Vector& pre_squash);

// Numerically stable log(1 - tanh(u)^2).
double log_one_minus_tanh_sq(double u);

}  // namespace aac
