#include "tavr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tavr {

ChannelField::ChannelField(VoxelGrid3 grid, int channels, std::vector<double> values)
    : grid_(std::move(grid)), channels_(channels), values_(std::move(values)) {
  if (channels_ <= 0) throw Error("field needs at least one channel");
  if (values_.size() != static_cast<std::size_t>(channels_) * grid_.size())
    throw Error("field buffer size does not match grid x channels");
}

ChannelField::ChannelField(VoxelGrid3 grid, int channels, double fill)
    : ChannelField(grid, channels, std::vector<double>(static_cast<std::size_t>(channels) * grid.size(), fill)) {}

ProbabilityField::ProbabilityField(VoxelGrid3 grid, int channels, std::vector<double> values, bool normalized,
                                   double sum_tolerance)
    : ChannelField(std::move(grid), channels, std::move(values)), normalized_(normalized) {
  for (double v : this->values())
    if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) throw Error("probability outside [0,1]");
  if (normalized_) {
    for (std::size_t i = 0; i < voxels(); ++i) {
      double sum = 0.0;
      for (int c = 0; c < this->channels(); ++c) sum += (*this)(c, i);
      if (!(std::abs(sum - 1.0) <= sum_tolerance)) throw Error("probabilities do not sum to 1 at voxel " + std::to_string(i));
    }
  }
}

void LossConfig::validate() const {
  if (!(gamma >= 0)) throw Error("gamma must be >= 0");
  if (!(dice_weight >= 0 && ce_weight >= 0)) throw Error("loss weights must be >= 0");
  if (!(dice_smooth > 0)) throw Error("dice_smooth must be > 0");
  if (!(clamp_eps > 0 && clamp_eps < 0.5)) throw Error("clamp_eps must be in (0, 0.5)");
}

// ---------------------------------------------------------------------------

ProbabilityField softmax(const LogitField& logits) {
  const int k = logits.channels();
  const std::size_t n = logits.voxels();
  std::vector<double> out(logits.values().size());
  for (std::size_t i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double z = logits(c, i);
      if (!std::isfinite(z)) throw Error("non-finite logit at voxel " + std::to_string(i));
      top = std::max(top, z);
    }
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      const double e = std::exp(logits(c, i) - top);
      out[static_cast<std::size_t>(c) * n + i] = e;
      sum += e;
    }
    for (int c = 0; c < k; ++c) out[static_cast<std::size_t>(c) * n + i] /= sum;
  }
  return ProbabilityField(logits.grid(), k, std::move(out), true);
}

std::vector<double> softmax_backward(const ProbabilityField& p, std::span<const double> grad_p) {
  const int k = p.channels();
  const std::size_t n = p.voxels();
  if (grad_p.size() != p.values().size()) throw Error("gradient size does not match field");
  std::vector<double> out(grad_p.size());
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (int c = 0; c < k; ++c) dot += p(c, i) * grad_p[static_cast<std::size_t>(c) * n + i];
    for (int c = 0; c < k; ++c) {
      const std::size_t j = static_cast<std::size_t>(c) * n + i;
      out[j] = p(c, i) * (grad_p[j] - dot);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_target(const ProbabilityField& p, const LabelVolume& target) {
  require_same_grid(p.grid(), target.grid(), "prediction and target");
  for (ClassId c : target.voxels())
    if (c >= p.channels())
      throw Error("target class " + std::to_string(c) + " has no probability channel");
}

void require_normalized(const ProbabilityField& p, const char* what) {
  if (!p.normalized()) throw Error(std::string(what) + " requires normalized probabilities");
}

// Shared body of the two skeleton recall losses. `term(p)` is the per-voxel
// recall contribution and `slope(p)` its derivative.
template <typename Term, typename Slope>
SkeletonLossValue skeleton_family(const ProbabilityField& p, const SkeletonMask& skel, Term term, Slope slope) {
  require_same_grid(p.grid(), skel.grid, "prediction and skeleton");
  const std::size_t n = p.voxels();
  std::vector<std::pair<ClassId, const BinaryMask*>> supervised;
  for (const auto& [c, mask] : skel.per_class) {
    if (mask.empty()) continue;
    if (c >= p.channels()) throw Error("skeleton class " + std::to_string(c) + " has no probability channel");
    supervised.emplace_back(c, &mask);
  }
  if (supervised.empty()) throw Error("no supervision: every class skeleton is empty");

  SkeletonLossValue out;
  out.grad.assign(p.values().size(), 0.0);
  const double classes = static_cast<double>(supervised.size());
  double sum = 0.0;
  for (const auto& [c, mask] : supervised) {
    const double size = static_cast<double>(mask->count());
    double hit = 0.0;
    double recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(*mask)[i]) continue;
      const double pi = p(c, i);
      hit += term(pi);
      recall += pi;
      out.grad[static_cast<std::size_t>(c) * n + i] = -slope(pi) / (classes * size);
    }
    out.recall[c] = recall / size;
    sum += hit / size;
  }
  out.value = -sum / classes;
  return out;
}

}  // namespace

SkeletonLossValue skeleton_recall_loss(const ProbabilityField& p, const SkeletonMask& skel) {
  return skeleton_family(p, skel, [](double pi) { return pi; }, [](double) { return 1.0; });
}

SkeletonLossValue focal_skeleton_recall_loss(const ProbabilityField& p, const SkeletonMask& skel, double gamma,
                                             FocalSrMode mode) {
  if (!(gamma >= 0)) throw Error("gamma must be >= 0");
  const auto term = [gamma](double pi) { return std::pow(1.0 - pi, gamma) * pi; };
  if (mode == FocalSrMode::detached)
    return skeleton_family(p, skel, term, [gamma](double pi) { return std::pow(1.0 - pi, gamma); });
  return skeleton_family(p, skel, term, [gamma](double pi) {
    if (gamma == 0.0) return 1.0;
    return std::pow(1.0 - pi, gamma) - gamma * pi * std::pow(1.0 - pi, gamma - 1.0);
  });
}

LossValue focal_loss(const ProbabilityField& p, const LabelVolume& target, double gamma, double clamp_eps) {
  require_normalized(p, "focal loss");
  check_target(p, target);
  if (!(gamma >= 0)) throw Error("gamma must be >= 0");
  const std::size_t n = p.voxels();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossValue out;
  out.grad.assign(p.values().size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ClassId y = target[i];
    const double raw = p(y, i);
    const double q = std::clamp(raw, clamp_eps, 1.0 - clamp_eps);
    const double log_q = std::log(q);
    const double weight = std::pow(1.0 - q, gamma);
    sum += -weight * log_q;
    if (raw >= clamp_eps && raw <= 1.0 - clamp_eps) {
      const double dweight = gamma == 0.0 ? 0.0 : -gamma * std::pow(1.0 - q, gamma - 1.0);
      out.grad[static_cast<std::size_t>(y) * n + i] = -(dweight * log_q + weight / q) * inv_n;
    }
  }
  out.value = sum * inv_n;
  return out;
}

LossValue cross_entropy_loss(const ProbabilityField& p, const LabelVolume& target, double clamp_eps) {
  require_normalized(p, "cross-entropy loss");
  check_target(p, target);
  const std::size_t n = p.voxels();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossValue out;
  out.grad.assign(p.values().size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ClassId y = target[i];
    const double raw = p(y, i);
    const double q = std::clamp(raw, clamp_eps, 1.0 - clamp_eps);
    sum += -std::log(q);
    if (raw >= clamp_eps && raw <= 1.0 - clamp_eps) out.grad[static_cast<std::size_t>(y) * n + i] = -inv_n / q;
  }
  out.value = sum * inv_n;
  return out;
}

LossValue soft_dice_loss(const ProbabilityField& p, const LabelVolume& target, double smooth) {
  check_target(p, target);
  const std::size_t n = p.voxels();
  const int k = p.channels();
  LossValue out;
  out.grad.assign(p.values().size(), 0.0);
  double mean = 0.0;
  for (int c = 0; c < k; ++c) {
    double inter = 0.0, psum = 0.0, ysum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = target[i] == c ? 1.0 : 0.0;
      inter += p(c, i) * y;
      psum += p(c, i);
      ysum += y;
    }
    const double num = 2.0 * inter + smooth;
    const double den = psum + ysum + smooth;
    mean += num / den;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = target[i] == c ? 1.0 : 0.0;
      out.grad[static_cast<std::size_t>(c) * n + i] = -(2.0 * y * den - num) / (den * den) / k;
    }
  }
  out.value = 1.0 - mean / k;
  return out;
}

DiceCeValue dice_ce_loss(const ProbabilityField& p, const LabelVolume& target, const LossConfig& cfg) {
  cfg.validate();
  require_normalized(p, "DiceCE loss");
  const LossValue dice = soft_dice_loss(p, target, cfg.dice_smooth);
  const LossValue ce = cross_entropy_loss(p, target, cfg.clamp_eps);
  DiceCeValue out;
  out.dice = dice.value;
  out.ce = ce.value;
  out.value = cfg.dice_weight * dice.value + cfg.ce_weight * ce.value;
  out.grad.resize(dice.grad.size());
  for (std::size_t j = 0; j < out.grad.size(); ++j)
    out.grad[j] = cfg.dice_weight * dice.grad[j] + cfg.ce_weight * ce.grad[j];
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct ObjectiveName {
  Objective objective;
  const char* name;
};

constexpr ObjectiveName kObjectiveNames[] = {
    {Objective::dice_ce, "DiceCE"},         {Objective::focal, "Focal"},
    {Objective::dice_ce_sr, "DiceCE+SR"},   {Objective::focal_sr_plus, "Focal+SR"},
    {Objective::focal_sk_star, "FocalSK*"}, {Objective::sr, "SR"},
    {Objective::focal_sr, "FocalSR"},
};

void accumulate(std::vector<double>& into, const std::vector<double>& g, double weight = 1.0) {
  if (into.empty()) into.assign(g.size(), 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) into[j] += weight * g[j];
}

}  // namespace

std::string to_string(Objective o) {
  for (const auto& e : kObjectiveNames)
    if (e.objective == o) return e.name;
  return "unknown";
}

Objective objective_from_string(std::string_view name) {
  for (const auto& e : kObjectiveNames)
    if (name == e.name) return e.objective;
  throw Error("unknown objective '" + std::string(name) + "'");
}

const std::vector<Objective>& ablation_objectives() {
  static const std::vector<Objective> rows{Objective::dice_ce, Objective::focal, Objective::dice_ce_sr,
                                           Objective::focal_sr_plus, Objective::focal_sk_star};
  return rows;
}

bool uses_skeleton(Objective o) {
  return o == Objective::dice_ce_sr || o == Objective::focal_sr_plus || o == Objective::focal_sk_star ||
         o == Objective::sr || o == Objective::focal_sr;
}

LossReport combined_loss(const ProbabilityField& p, const LabelVolume& target, const SkeletonMask& skel,
                         Objective objective, const LossConfig& cfg) {
  cfg.validate();
  LossReport r;
  r.objective = objective;

  const bool with_dice_ce = objective == Objective::dice_ce || objective == Objective::dice_ce_sr;
  const bool with_focal = objective == Objective::focal || objective == Objective::focal_sr_plus ||
                          objective == Objective::focal_sk_star;
  const bool with_sr = objective == Objective::dice_ce_sr || objective == Objective::focal_sr_plus ||
                       objective == Objective::sr;
  const bool with_focal_sr = objective == Objective::focal_sk_star || objective == Objective::focal_sr;

  double total = 0.0;
  if (with_dice_ce) {
    const LossValue dice = soft_dice_loss(p, target, cfg.dice_smooth);
    const LossValue ce = cross_entropy_loss(p, target, cfg.clamp_eps);
    r.dice = dice.value;
    r.ce = ce.value;
    total += cfg.dice_weight * dice.value + cfg.ce_weight * ce.value;
    accumulate(r.grad_p, dice.grad, cfg.dice_weight);
    accumulate(r.grad_p, ce.grad, cfg.ce_weight);
  }
  if (with_focal) {
    const LossValue focal = focal_loss(p, target, cfg.gamma, cfg.clamp_eps);
    r.focal = focal.value;
    total += focal.value;
    accumulate(r.grad_p, focal.grad);
  }
  if (with_sr) {
    const SkeletonLossValue sr = skeleton_recall_loss(p, skel);
    r.sr = sr.value;
    r.skeleton_recall = sr.recall;
    total += sr.value;
    accumulate(r.grad_p, sr.grad);
  }
  if (with_focal_sr) {
    const SkeletonLossValue fsr = focal_skeleton_recall_loss(p, skel, cfg.gamma, cfg.focal_sr_mode);
    r.focal_sr = fsr.value;
    r.skeleton_recall = fsr.recall;
    total += fsr.value;
    accumulate(r.grad_p, fsr.grad);
  }
  r.total = total;
  if (p.normalized()) r.grad_logits = softmax_backward(p, r.grad_p);
  return r;
}

}  // namespace tavr
