#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tavr/skeleton.hpp"
#include "tavr/voxel.hpp"

namespace tavr {

// Per-voxel, per-channel values. Channel c holds class id c. Storage is
// channel-major: all voxels of channel 0, then channel 1, ... (the NIfTI 4th
// dimension order).
class ChannelField {
 public:
  ChannelField() = default;
  ChannelField(VoxelGrid3 grid, int channels, std::vector<double> values);
  ChannelField(VoxelGrid3 grid, int channels, double fill);

  const VoxelGrid3& grid() const { return grid_; }
  int channels() const { return channels_; }
  std::size_t voxels() const { return grid_.size(); }

  double operator()(int c, std::size_t i) const { return values_[static_cast<std::size_t>(c) * voxels() + i]; }
  double& operator()(int c, std::size_t i) { return values_[static_cast<std::size_t>(c) * voxels() + i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  VoxelGrid3 grid_;
  int channels_ = 0;
  std::vector<double> values_;
};

class LogitField : public ChannelField {
 public:
  using ChannelField::ChannelField;
};

class ProbabilityField : public ChannelField {
 public:
  ProbabilityField() = default;
  // Checks values lie in [0,1] (+-1e-9) and, when `normalized`, that every
  // voxel's channels sum to 1 (+-sum_tolerance). Finite-difference probes pass
  // a looser tolerance.
  ProbabilityField(VoxelGrid3 grid, int channels, std::vector<double> values, bool normalized,
                   double sum_tolerance = 1e-6);

  bool normalized() const { return normalized_; }

 private:
  bool normalized_ = false;
};

enum class FocalSrMode { coupled, detached };

struct LossConfig {
  double gamma = 2.0;
  double dice_weight = 0.25;
  double ce_weight = 0.75;
  FocalSrMode focal_sr_mode = FocalSrMode::coupled;
  double dice_smooth = 1e-5;
  double clamp_eps = 1e-7;  // probabilities clamped to [eps, 1-eps] before log

  void validate() const;
};

// Flat loss value and its gradient with respect to the probabilities, in the
// same channel-major layout as the field.
struct LossValue {
  double value = 0.0;
  std::vector<double> grad;
};

struct SkeletonLossValue : LossValue {
  std::map<ClassId, double> recall;  // sum(y*p) / sum(y) per supervised class
};

ProbabilityField softmax(const LogitField& logits);

// Chains a probability gradient through the softmax Jacobian.
std::vector<double> softmax_backward(const ProbabilityField& p, std::span<const double> grad_p);

SkeletonLossValue skeleton_recall_loss(const ProbabilityField& p, const SkeletonMask& skel);
SkeletonLossValue focal_skeleton_recall_loss(const ProbabilityField& p, const SkeletonMask& skel,
                                             double gamma, FocalSrMode mode = FocalSrMode::coupled);

// Mean over voxels of -(1-q)^gamma log q, q = clamped true-class probability.
LossValue focal_loss(const ProbabilityField& p, const LabelVolume& target, double gamma,
                     double clamp_eps = 1e-7);
LossValue cross_entropy_loss(const ProbabilityField& p, const LabelVolume& target, double clamp_eps = 1e-7);
// 1 - mean over all channels of (2 sum p*y + s) / (sum p + sum y + s).
LossValue soft_dice_loss(const ProbabilityField& p, const LabelVolume& target, double smooth = 1e-5);

struct DiceCeValue : LossValue {
  double dice = 0.0;
  double ce = 0.0;
};
DiceCeValue dice_ce_loss(const ProbabilityField& p, const LabelVolume& target, const LossConfig& cfg = {});

enum class Objective {
  dice_ce,        // "DiceCE"
  focal,          // "Focal"
  dice_ce_sr,     // "DiceCE+SR"
  focal_sr_plus,  // "Focal+SR"
  focal_sk_star,  // "FocalSK*" = focal skeleton recall + focal
  sr,             // "SR"
  focal_sr,       // "FocalSR"
};

std::string to_string(Objective o);
Objective objective_from_string(std::string_view name);
// The five configurations compared in the loss ablation, in table order.
const std::vector<Objective>& ablation_objectives();
bool uses_skeleton(Objective o);

struct LossReport {
  Objective objective = Objective::dice_ce;
  double total = 0.0;
  std::optional<double> dice, ce, focal, sr, focal_sr;
  std::map<ClassId, double> skeleton_recall;
  std::vector<double> grad_p;
  std::vector<double> grad_logits;
};

LossReport combined_loss(const ProbabilityField& p, const LabelVolume& target, const SkeletonMask& skel,
                         Objective objective, const LossConfig& cfg = {});

inline LossReport combined_loss(const LogitField& logits, const LabelVolume& target,
                                const SkeletonMask& skel, Objective objective, const LossConfig& cfg = {}) {
  return combined_loss(softmax(logits), target, skel, objective, cfg);
}

}  // namespace tavr
