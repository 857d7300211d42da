#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tavr/losses.hpp"
#include "tavr/metrics.hpp"

namespace tavr {

struct FitConfig {
  Objective objective = Objective::focal_sk_star;
  double learning_rate = 0.5;
  int iterations = 500;
  double init_logit = 0.0;
  // Per-channel initial logit overriding init_logit, e.g. a negative value to
  // handicap a thin class.
  std::map<ClassId, double> channel_init;
  LossConfig loss;
  // When set, each trace entry counts the 26-connected components of this
  // class in the argmax prediction.
  std::optional<ClassId> watch_class;

  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  double total = 0.0;
  std::optional<double> dice, ce, focal, sr, focal_sr;
  MetricsReport metrics;  // argmax prediction vs target
  std::optional<std::uint32_t> watch_components;
};

struct FitResult {
  LogitField logits;
  std::vector<TraceEntry> trace;  // iterations + 1 entries, the last after the final update
};

LabelVolume argmax_labels(const ChannelField& field, const ClassMap& classes);

// Plain gradient descent on a free per-voxel logit field. Throws if the loss
// becomes non-finite, naming the iteration.
FitResult fit_probability_field(const LabelVolume& target, const SkeletonMask& skel, const FitConfig& cfg);

}  // namespace tavr
