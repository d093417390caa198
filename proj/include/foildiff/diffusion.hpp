#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "foildiff/common.hpp"
#include "foildiff/conditioning.hpp"
#include "foildiff/geometry.hpp"

namespace foildiff {

struct ScheduleParams {
  int total_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  bool operator==(const ScheduleParams& o) const {
    return total_steps == o.total_steps && beta_start == o.beta_start && beta_end == o.beta_end;
  }
};

// Precomputed variance schedule: beta_t, alpha_t = 1 - beta_t and the
// running product alpha_bar_t, all indexed by t in [1, T] (0-based storage).
struct NoiseSchedule {
  ScheduleParams params;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  int total_steps() const { return params.total_steps; }

  double beta_at(int t) const { return beta[check(t)]; }
  double alpha_at(int t) const { return alpha[check(t)]; }
  double alpha_bar_at(int t) const { return alpha_bar[check(t)]; }

 private:
  std::size_t check(int t) const {
    if (t < 1 || t > params.total_steps) {
      fail(ErrorCode::InvalidRange, "timestep " + std::to_string(t) + " outside [1, T]");
    }
    return std::size_t(t) - 1;
  }
};

inline NoiseSchedule make_schedule(int total_steps, double beta_start, double beta_end) {
  if (total_steps < 1) fail(ErrorCode::InvalidRange, "total_steps must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    fail(ErrorCode::InvalidRange, "need 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.params = {total_steps, beta_start, beta_end};
  s.beta.resize(total_steps);
  s.alpha.resize(total_steps);
  s.alpha_bar.resize(total_steps);
  double running = 1.0;
  for (int i = 0; i < total_steps; ++i) {
    const double frac = total_steps == 1 ? 0.0 : double(i) / (total_steps - 1);
    s.beta[i] = beta_start + (beta_end - beta_start) * frac;
    s.alpha[i] = 1.0 - s.beta[i];
    running *= s.alpha[i];
    s.alpha_bar[i] = running;
  }
  return s;
}

inline NoiseSchedule make_schedule(const ScheduleParams& p) {
  return make_schedule(p.total_steps, p.beta_start, p.beta_end);
}

// Closed-form corruption: y_t = sqrt(abar_t) y0 + sqrt(1 - abar_t) eps.
inline Signal forward_sample(const Signal& y0, int t, const Signal& noise,
                             const NoiseSchedule& schedule) {
  require_same_shape(y0, noise, "forward_sample");
  const double abar = schedule.alpha_bar_at(t);
  const double signal_scale = std::sqrt(abar);
  const double noise_scale = std::sqrt(1.0 - abar);
  Signal out = y0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.v[i] = signal_scale * y0.v[i] + noise_scale * noise.v[i];
  }
  return out;
}

// Single Markov step: y_t = sqrt(1 - beta_t) y_{t-1} + sqrt(beta_t) eps.
inline Signal forward_step(const Signal& y_prev, int t, const Signal& noise,
                           const NoiseSchedule& schedule) {
  require_same_shape(y_prev, noise, "forward_step");
  const double beta = schedule.beta_at(t);
  const double keep = std::sqrt(1.0 - beta);
  const double add = std::sqrt(beta);
  Signal out = y_prev;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.v[i] = keep * y_prev.v[i] + add * noise.v[i];
  }
  return out;
}

// Reverse update from the predicted noise; fresh noise is suppressed at the
// final step t = 1.
inline Signal reverse_step(const Signal& y_t, int t, const Signal& eps_hat,
                           const Signal& fresh_noise, const NoiseSchedule& schedule) {
  require_same_shape(y_t, eps_hat, "reverse_step");
  require_same_shape(y_t, fresh_noise, "reverse_step");
  const double beta = schedule.beta_at(t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha_at(t));
  const double eps_coeff = beta / std::sqrt(1.0 - schedule.alpha_bar_at(t));
  const double sigma = t == 1 ? 0.0 : std::sqrt(beta);
  Signal out = y_t;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.v[i] = inv_sqrt_alpha * (y_t.v[i] - eps_coeff * eps_hat.v[i]) + sigma * fresh_noise.v[i];
  }
  return out;
}

struct GuidanceConfig {
  double scale = 2.0;             // w
  double uncond_drop_prob = 0.1;  // training-time conditioning dropout

  void validate() const {
    if (!(scale >= 0.0)) fail(ErrorCode::InvalidRange, "guidance scale must be >= 0");
    if (!(uncond_drop_prob >= 0.0 && uncond_drop_prob <= 1.0)) {
      fail(ErrorCode::InvalidRange, "uncond_drop_prob must lie in [0, 1]");
    }
  }
};

// Classifier-free combination: eps_uncond + w (eps_cond - eps_uncond).
// Endpoints w = 0 and w = 1 return the respective branch bit-exactly.
inline Signal guided_epsilon(const Signal& eps_cond, const Signal& eps_uncond, double scale) {
  require_same_shape(eps_cond, eps_uncond, "guided_epsilon");
  if (scale == 0.0) return eps_uncond;
  if (scale == 1.0) return eps_cond;
  Signal out = eps_uncond;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.v[i] = eps_uncond.v[i] + scale * (eps_cond.v[i] - eps_uncond.v[i]);
  }
  return out;
}

// Reverse-process sampling loop. The model must expose
//   predict_noise(const Signal&, int t, const ConditioningSpec&) -> Signal
// and schedule_params(). Each sample draws from an independent rng derived
// from (seed, sample index), so outputs do not depend on evaluation order.
template <class Model>
std::vector<CanonicalSample> sample(const Model& model, const NoiseSchedule& schedule,
                                    const std::vector<ConditioningSpec>& conditioning,
                                    const GuidanceConfig& guidance, std::uint64_t seed, int count) {
  if (count < 1) fail(ErrorCode::InvalidRange, "count must be >= 1");
  if (!(model.schedule_params() == schedule.params)) {
    fail(ErrorCode::ScheduleMismatch, "model was trained against a different schedule");
  }
  if (!conditioning.empty() && conditioning.size() != 1 &&
      conditioning.size() != std::size_t(count)) {
    fail(ErrorCode::LengthMismatch, "conditioning must be empty, single, or one per sample");
  }
  guidance.validate();

  const ConditioningSpec null_spec = ConditioningSpec::none();
  std::vector<CanonicalSample> out;
  out.reserve(std::size_t(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, std::uint64_t(i)));
    Signal y(2, kPointsPerSurface);
    for (double& v : y.v) v = rng.normal();

    const ConditioningSpec* spec = nullptr;
    if (!conditioning.empty()) {
      spec = conditioning.size() == 1 ? &conditioning[0] : &conditioning[std::size_t(i)];
      if (spec->kind == ConditioningKind::none) spec = nullptr;
    }

    Signal fresh(2, kPointsPerSurface);
    for (int t = schedule.total_steps(); t >= 1; --t) {
      Signal eps_hat;
      if (spec != nullptr) {
        if (guidance.scale == 1.0) {
          eps_hat = model.predict_noise(y, t, *spec);
        } else {
          const Signal eps_cond = model.predict_noise(y, t, *spec);
          const Signal eps_uncond = model.predict_noise(y, t, null_spec);
          eps_hat = guided_epsilon(eps_cond, eps_uncond, guidance.scale);
        }
      } else {
        eps_hat = model.predict_noise(y, t, null_spec);
      }
      if (t > 1) {
        for (double& v : fresh.v) v = rng.normal();
      } else {
        std::fill(fresh.v.begin(), fresh.v.end(), 0.0);
      }
      y = reverse_step(y, t, eps_hat, fresh, schedule);
    }
    for (double& v : y.v) v = std::clamp(v, -1.0, 1.0);
    out.push_back(from_signal(y));
  }
  return out;
}

template <class Model>
std::vector<CanonicalSample> sample(const Model& model, const NoiseSchedule& schedule,
                                    const std::optional<ConditioningSpec>& conditioning,
                                    const GuidanceConfig& guidance, std::uint64_t seed, int count) {
  std::vector<ConditioningSpec> specs;
  if (conditioning.has_value()) specs.push_back(*conditioning);
  return sample(model, schedule, specs, guidance, seed, count);
}

}  // namespace foildiff
