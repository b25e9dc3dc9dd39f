#include "top/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace top {

namespace {

// Sums after sorting so the result does not depend on input order.
double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  double comp = 0.0;  // Neumaier compensation
  for (const double x : terms) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double nll_term(const StatePrediction& pred, OccupancyState state, std::size_t k) {
  const double p = pred[state];
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::NonFiniteLoss,
                "sample " + std::to_string(k) + " gives zero probability to its true state");
  }
  return -std::log(p);
}

}  // namespace

double ClassWeights::operator[](OccupancyState s) const {
  switch (s) {
    case OccupancyState::Free: return free;
    case OccupancyState::Occupied: return occupied;
    case OccupancyState::Unknown: return unknown;
  }
  return 0.0;
}

void ClassWeights::validate() const {
  if (!(free > 0.0 && occupied > 0.0 && unknown > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "class weights must be positive");
  }
}

std::vector<double> positional_encoding(const std::array<double, 4>& point,
                                        const EncodingConfig& cfg) {
  if (cfg.dimension <= 0 || cfg.dimension % 8 != 0) {
    throw Error(ErrorCode::BadDimension, "encoding dimension must be a positive multiple of 8");
  }
  const int per_axis = cfg.dimension / 4;
  std::vector<double> out(static_cast<std::size_t>(cfg.dimension));
  for (int axis = 0; axis < 4; ++axis) {
    const double x = point[axis] / cfg.coordinate_scale[axis];
    for (int k = 0; k < per_axis / 2; ++k) {
      const double freq = std::pow(cfg.frequency_base, -2.0 * k / per_axis);
      const auto slot = static_cast<std::size_t>(axis * per_axis + 2 * k);
      out[slot] = std::sin(x * freq);
      out[slot + 1] = std::cos(x * freq);
    }
  }
  return out;
}

double overlap_loss(std::span<const OccupancyState> states, std::span<const double> confidences,
                    std::span<const StatePrediction> predictions, const ClassWeights& weights) {
  if (states.empty()) throw Error(ErrorCode::EmptyBatch, "no overlap points");
  if (states.size() != confidences.size() || states.size() != predictions.size()) {
    throw Error(ErrorCode::CountMismatch, "states, confidences and predictions differ in length");
  }
  std::vector<double> terms(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    terms[k] = confidences[k] * weights[states[k]] * nll_term(predictions[k], states[k], k);
  }
  return ordered_sum(terms) / static_cast<double>(states.size());
}

double recon_loss(std::span<const OccupancyState> states,
                  std::span<const StatePrediction> predictions, const ClassWeights& weights,
                  std::size_t n_points, std::size_t per_beam) {
  if (n_points == 0 || per_beam == 0) throw Error(ErrorCode::EmptyBatch, "no reconstruction samples");
  if (states.size() != n_points * per_beam || predictions.size() != states.size()) {
    throw Error(ErrorCode::CountMismatch, "expected " + std::to_string(n_points * per_beam) +
                                              " samples, got " + std::to_string(states.size()));
  }
  std::vector<double> terms(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    terms[k] = weights[states[k]] * nll_term(predictions[k], states[k], k);
  }
  return ordered_sum(terms) / static_cast<double>(n_points * per_beam);
}

double total_loss(double overlap, double recon) { return overlap + recon; }

}  // namespace top
