#include "tavr/optim.hpp"

#include <cmath>

#include "tavr/components.hpp"

namespace tavr {

void FitConfig::validate() const {
  if (!(learning_rate > 0)) throw Error("learning rate must be > 0");
  if (iterations <= 0) throw Error("iterations must be > 0");
  loss.validate();
}

LabelVolume argmax_labels(const ChannelField& field, const ClassMap& classes) {
  const std::size_t n = field.voxels();
  std::vector<ClassId> labels(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    for (int c = 1; c < field.channels(); ++c)
      if (field(c, i) > field(best, i)) best = c;
    labels[i] = static_cast<ClassId>(best);
  }
  return LabelVolume(field.grid(), classes, std::move(labels));
}

FitResult fit_probability_field(const LabelVolume& target, const SkeletonMask& skel, const FitConfig& cfg) {
  cfg.validate();
  if (uses_skeleton(cfg.objective)) require_same_grid(target.grid(), skel.grid, "target and skeleton");
  const int channels = static_cast<int>(target.classes().max_id()) + 1;

  FitResult result{LogitField(target.grid(), channels, cfg.init_logit), {}};
  LogitField& z = result.logits;
  for (const auto& [c, v] : cfg.channel_init) {
    if (c >= channels) throw Error("initial logit for unknown channel " + std::to_string(c));
    for (std::size_t i = 0; i < z.voxels(); ++i) z(c, i) = v;
  }

  for (int it = 0; it <= cfg.iterations; ++it) {
    const ProbabilityField p = softmax(z);
    const LossReport r = combined_loss(p, target, skel, cfg.objective, cfg.loss);
    if (!std::isfinite(r.total)) throw Error("optimization diverged at iteration " + std::to_string(it));

    TraceEntry e;
    e.iteration = it;
    e.total = r.total;
    e.dice = r.dice;
    e.ce = r.ce;
    e.focal = r.focal;
    e.sr = r.sr;
    e.focal_sr = r.focal_sr;
    const LabelVolume pred = argmax_labels(p, target.classes());
    e.metrics = dice_iou(pred, target);
    if (cfg.watch_class) e.watch_components = count_components(class_mask(pred, *cfg.watch_class));
    result.trace.push_back(std::move(e));

    if (it == cfg.iterations) break;
    auto values = z.values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      values[j] -= cfg.learning_rate * r.grad_logits[j];
      if (!std::isfinite(values[j])) throw Error("optimization diverged at iteration " + std::to_string(it + 1));
    }
  }
  return result;
}

}  // namespace tavr
