#include "aac/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aac {

namespace {

double angle_normalize(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x + std::numbers::pi, two_pi);
  if (x < 0) x += two_pi;
  return x - std::numbers::pi;
}

void check_action(const Vector& a, int dim) {
  if (a.size() != dim) throw std::invalid_argument("action dimension mismatch");
  if (!a.allFinite()) throw std::invalid_argument("non-finite action");
}

}  // namespace

// ---------------------------------------------------------------- pendulum

const EnvSpec& PendulumEnv::spec() const {
  static const EnvSpec s{3, 1, 200, "-(th^2 + 0.1 thdot^2 + 0.001 u^2)"};
  return s;
}

Vector PendulumEnv::observe() const {
  Vector o(3);
  o << std::cos(theta_), std::sin(theta_), theta_dot_;
  return o;
}

Vector PendulumEnv::reset(Rng& rng) {
  theta_ = rng.uniform(-std::numbers::pi, std::numbers::pi);
  theta_dot_ = rng.uniform(-1.0, 1.0);
  return observe();
}

void PendulumEnv::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
}

StepResult PendulumEnv::step(const Vector& action, Rng&) {
  check_action(action, 1);
  constexpr double g = 10.0, m = 1.0, l = 1.0, dt = 0.05;
  const double u = 2.0 * std::clamp(action(0), -1.0, 1.0);
  const double th = angle_normalize(theta_);
  const double reward =
      -(th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);
  const double acc = (3.0 * g / (2.0 * l)) * std::sin(theta_) +
                     (3.0 / (m * l * l)) * u;
  theta_dot_ = std::clamp(theta_dot_ + acc * dt, -8.0, 8.0);
  theta_ = theta_ + theta_dot_ * dt;
  return {observe(), reward, false};
}

// --------------------------------------------------------------- pointmass

const EnvSpec& PointMassEnv::spec() const {
  static const EnvSpec s{4, 2, 300, "-||pos||_2, goal at origin"};
  return s;
}

Vector PointMassEnv::reset(Rng& rng) {
  pos_ << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
  vel_.setZero();
  Vector o(4);
  o << pos_, vel_;
  return o;
}

void PointMassEnv::set_state(const Vector& pos, const Vector& vel) {
  pos_ = pos;
  vel_ = vel;
}

StepResult PointMassEnv::step(const Vector& action, Rng&) {
  check_action(action, 2);
  constexpr double dt = 0.05, damping = 0.95;
  const Vector force = action.cwiseMax(-1.0).cwiseMin(1.0);
  const double reward = -pos_.norm();
  vel_ = damping * (vel_ + force * dt);
  pos_ += vel_ * dt;
  Vector o(4);
  o << pos_, vel_;
  return {o, reward, false};
}

// -------------------------------------------------------------- newsvendor

const EnvSpec& NewsvendorEnv::spec() const {
  static const EnvSpec s{3, 1, kHorizon,
                         "2*sales - order - 0.05*carried - 0.5*unmet"};
  return s;
}

Vector NewsvendorEnv::observe() const {
  double avg = 0.0;
  for (double d : demand_history_) avg += d;
  avg /= 5.0;
  Vector o(3);
  o << inventory_ / kMaxOrder, avg / 45.0,
      static_cast<double>(day_) / kHorizon;
  return o;
}

Vector NewsvendorEnv::reset(Rng& rng) {
  inventory_ = 0.0;
  lambda_ = rng.uniform(5.0, 45.0);
  for (double& d : demand_history_) d = 0.0;
  day_ = 0;
  return observe();
}

void NewsvendorEnv::set_state(double inventory, double lambda, int day) {
  inventory_ = inventory;
  lambda_ = lambda;
  day_ = day;
}

double NewsvendorEnv::day_reward(double inventory, double order, double demand,
                                 double* end_inventory) {
  constexpr double price = 2.0, cost = 1.0, holding = 0.05, penalty = 0.5;
  const double available = inventory + order;
  const double sales = std::min(available, demand);
  const double carried = available - sales;
  const double unmet = demand - sales;
  if (end_inventory) *end_inventory = carried;
  return price * sales - cost * order - holding * carried - penalty * unmet;
}

StepResult NewsvendorEnv::step(const Vector& action, Rng& rng) {
  check_action(action, 1);
  const double order =
      kMaxOrder * (std::clamp(action(0), -1.0, 1.0) + 1.0) / 2.0;
  const double demand = static_cast<double>(rng.poisson(lambda_));
  const double reward = day_reward(inventory_, order, demand, &inventory_);
  // Demand intensity drifts as a bounded random walk.
  lambda_ = std::clamp(lambda_ + rng.uniform(-2.0, 2.0), 5.0, 45.0);
  for (int i = 4; i > 0; --i) demand_history_[i] = demand_history_[i - 1];
  demand_history_[0] = demand;
  day_ += 1;
  return {observe(), reward, false};
}

// ----------------------------------------------------------------- factory

std::unique_ptr<Env> make_env(const std::string& id) {
  if (id == "pendulum") return std::make_unique<PendulumEnv>();
  if (id == "pointmass") return std::make_unique<PointMassEnv>();
  if (id == "newsvendor") return std::make_unique<NewsvendorEnv>();
  throw std::invalid_argument("unknown environment id: " + id);
}

}  // namespace aac
