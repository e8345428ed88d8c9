#include "aac/policy.hpp"

#include <cmath>
#include <numbers>

namespace aac {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467267;  // 0.5*log(2*pi)
}

double log_one_minus_tanh_sq(double u) {
  // log(1 - tanh(u)^2) = 2*(log 2 - u - softplus(-2u))
  const double x = -2.0 * u;
  const double softplus = x > 0.0 ? x + std::log1p(std::exp(-x))
                                  : std::log1p(std::exp(x));
  return 2.0 * (std::numbers::ln2 - u - softplus);
}

GaussianPolicyHead GaussianPolicyHead::from_raw(const Vector& raw) {
  if (raw.size() % 2 != 0) {
    throw std::invalid_argument("policy head expects mean and log-std halves");
  }
  const int dim = static_cast<int>(raw.size()) / 2;
  GaussianPolicyHead head;
  head.mean = raw.head(dim);
  head.log_std = raw.tail(dim).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  if (!head.mean.allFinite()) throw NumericError("policy head: non-finite mean");
  return head;
}

SquashedSample GaussianPolicyHead::sample(Rng& rng) const {
  Vector z(mean.size());
  for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return sample_with_noise(z);
}

SquashedSample GaussianPolicyHead::sample_with_noise(const Vector& z) const {
  const Vector std = log_std.array().exp();
  const Vector u = mean + std.cwiseProduct(z);
  SquashedSample out;
  // Nudge saturated tanh values off +/-1 so actions stay in the open
  // interval even for extreme pre-squash draws.
  constexpr double bound = 1.0 - 1e-12;
  out.action = u.array().tanh().cwiseMax(-bound).cwiseMin(bound);
  out.log_prob = squashed_log_prob(mean, log_std, u);
  return out;
}

Vector GaussianPolicyHead::mode() const { return mean.array().tanh(); }

double squashed_log_prob(const Vector& mean, const Vector& log_std,
                         const Vector& pre_squash) {
  double lp = 0.0;
  for (int i = 0; i < mean.size(); ++i) {
    const double std = std::exp(log_std(i));
    const double z = (pre_squash(i) - mean(i)) / std;
    lp += -0.5 * z * z - log_std(i) - kLogSqrt2Pi;
    lp -= log_one_minus_tanh_sq(pre_squash(i));
  }
  return lp;
}

}  // namespace aac
