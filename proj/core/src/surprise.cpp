#include "sugar/surprise.hpp"

#include "sugar/error.hpp"

#include <algorithm>
#include <cmath>

namespace sugar {

double SurpriseEstimator::sigma() const {
  return std::max(std::sqrt(variance), config.sigma_floor);
}

double SurpriseEstimator::score(double error) const {
  const double z = (error - mean) / sigma();
  return sigmoid(config.gain * z - config.offset);
}

double SurpriseEstimator::update(double error) {
  if (!std::isfinite(error)) throw NumericalError("surprise_update: non-finite error");
  const double s = score(error);
  const double dev = error - mean;
  mean = (1.0 - config.rate) * mean + config.rate * error;
  variance = (1.0 - config.rate) * variance + config.rate * dev * dev;
  return s;
}

double surprise_update(SurpriseEstimator& estimator, const Vec& y_act, const Vec& y_hat) {
  if (y_act.size() != y_hat.size()) throw ShapeError("surprise_update: size mismatch");
  return estimator.update(mean_abs_error(y_act, y_hat));
}

}  // namespace sugar
