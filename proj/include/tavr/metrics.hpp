#pragma once

#include <string>
#include <vector>

#include "tavr/voxel.hpp"

namespace tavr {

struct ClassScore {
  ClassId id = 0;
  std::string name;
  double dice = 1.0;
  double iou = 1.0;
  // Neither prediction nor truth contains the class: scored 1 and left out of
  // every mean.
  bool absent_in_both = false;
  std::size_t cases = 1;  // number of cases averaged into this score
};

struct MetricsReport {
  std::string case_id;
  std::vector<ClassScore> classes;  // foreground classes in ClassMap order
  double mean_dice = 1.0;
  double mean_iou = 1.0;

  const ClassScore& score(ClassId id) const;
};

// Per-class Dice 2|P&T|/(|P|+|T|) and IoU |P&T|/|P|T|, macro means over the
// foreground classes present in prediction or truth.
MetricsReport dice_iou(const LabelVolume& pred, const LabelVolume& truth, std::string case_id = {});

// Per-class mean over cases (absent-in-both cases skipped per class); overall
// means recomputed from the per-class means.
MetricsReport aggregate(const std::vector<MetricsReport>& reports, std::string case_id = "aggregate");

struct TableRow {
  std::string label;
  MetricsReport report;
};

// One row per run, one column per class plus Mean, Dice in percent.
std::string render_dice_table(const std::vector<TableRow>& rows);

// One column per run; "<class> Dice" and "<class> IoU" rows per class, then
// Mean Dice and Mean IoU.
std::string render_dice_iou_table(const std::vector<TableRow>& columns);

}  // namespace tavr
