#include "doctest.h"
#include "oracles.hpp"

#include <sstream>

#include "tavr/metrics.hpp"

using namespace tavr;

namespace {

LabelVolume line_labels(std::int64_t n, std::int64_t from, std::int64_t to, ClassId c) {
  LabelVolume v(VoxelGrid3(Dims{n, 1, 1}), ClassMap::tavr());
  for (auto x = from; x < to; ++x) v.set(x, 0, 0, c);
  return v;
}

}  // namespace

TEST_CASE("identity, disjoint and half overlap") {
  std::mt19937_64 rng(71);
  VoxelGrid3 g(Dims{6, 6, 6});
  const LabelVolume t = oracle::random_labels(g, 8, rng);
  const MetricsReport same = dice_iou(t, t);
  for (const auto& c : same.classes) {
    CHECK(c.dice == 1.0);
    CHECK(c.iou == 1.0);
  }
  CHECK(same.mean_dice == 1.0);

  const MetricsReport apart = dice_iou(line_labels(20, 0, 5, 1), line_labels(20, 10, 15, 1));
  CHECK(apart.score(cls::aorta).dice == 0.0);
  CHECK(apart.score(cls::aorta).iou == 0.0);

  const MetricsReport half = dice_iou(line_labels(200, 0, 100, 1), line_labels(200, 50, 150, 1));
  CHECK(half.score(cls::aorta).dice == 0.5);
  CHECK(half.score(cls::aorta).iou == 1.0 / 3.0);
  CHECK(half.score(cls::valve).absent_in_both);
  CHECK(half.mean_dice == 0.5);  // absent classes are left out of the mean
  CHECK(half.mean_iou == 1.0 / 3.0);
}

TEST_CASE("dice-iou identity, symmetry and bounds on random pairs") {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    VoxelGrid3 g(oracle::random_dims(rng, 2, 8));
    const LabelVolume a = oracle::random_labels(g, 1 + trial % 8, rng), b = oracle::random_labels(g, 1 + (trial * 3) % 8, rng);
    const MetricsReport ab = dice_iou(a, b), ba = dice_iou(b, a);
    for (std::size_t k = 0; k < ab.classes.size(); ++k) {
      const auto& c = ab.classes[k];
      CHECK(c.dice >= 0.0);
      CHECK(c.dice <= 1.0);
      CHECK(std::abs(c.dice - 2 * c.iou / (1 + c.iou)) <= 1e-12);
      CHECK(c.dice == ba.classes[k].dice);
      CHECK(c.iou == ba.classes[k].iou);
    }
  }
}

TEST_CASE("dice grows with the intersection at fixed sizes") {
  double prev = -1;
  for (int shift = 50; shift >= 0; shift -= 5) {
    const double d = dice_iou(line_labels(120, 0, 50, 1), line_labels(120, shift, shift + 50, 1)).score(cls::aorta).dice;
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("mismatches are errors") {
  const LabelVolume a = line_labels(10, 0, 3, 1);
  CHECK_THROWS_AS(dice_iou(a, line_labels(11, 0, 3, 1)), GridMismatch);
  const LabelVolume other(a.grid(), ClassMap({{0, "background"}, {1, "aorta"}}));
  CHECK_THROWS_AS(dice_iou(a, other), Error);
  CHECK_THROWS_AS(aggregate({}), Error);
}

TEST_CASE("aggregation") {
  const MetricsReport r = dice_iou(line_labels(200, 0, 100, 1), line_labels(200, 50, 150, 1), "c1");
  const MetricsReport single = aggregate({r});
  CHECK(single.mean_dice == r.mean_dice);
  CHECK(single.score(cls::aorta).dice == r.score(cls::aorta).dice);

  MetricsReport a = r, b = r;
  for (auto* x : {&a, &b})
    for (auto& c : x->classes) c.absent_in_both = c.id != cls::aorta;
  a.classes[0].dice = 0.8;
  b.classes[0].dice = 0.6;
  const MetricsReport m = aggregate({a, b});
  CHECK(m.score(cls::aorta).dice == doctest::Approx(0.7));
  CHECK(m.score(cls::aorta).cases == 2);
  CHECK(m.score(cls::valve).absent_in_both);
  CHECK(m.mean_dice == doctest::Approx(0.7));

  // Absent cases do not dilute a class mean.
  MetricsReport absent = b;
  absent.classes[0].absent_in_both = true;
  CHECK(aggregate({a, absent}).score(cls::aorta).dice == doctest::Approx(0.8));
  // Aggregating aggregates weights by case count.
  CHECK(aggregate({aggregate({a, b}), a}).score(cls::aorta).dice == doctest::Approx((0.8 + 0.6 + 0.8) / 3));
}

TEST_CASE("table layouts") {
  std::vector<TableRow> rows;
  const char* labels[] = {"DiceCE", "Focal", "DiceCE+SR", "Focal+SR", "FocalSK*"};
  for (const char* l : labels) rows.push_back({l, dice_iou(line_labels(200, 0, 100, 1), line_labels(200, 50, 150, 1))});
  const std::string t2 = render_dice_table(rows);
  std::istringstream in(t2);
  std::string header, line;
  std::getline(in, header);
  for (const char* name : {"aorta", "left_ventricle", "aortic_root", "valve", "annulus", "iliac_artery_left",
                           "iliac_artery_right", "Mean"})
    CHECK(header.find(name) != std::string::npos);
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(line.find(labels[n]) == 0);
    CHECK(line.find("50.00") != std::string::npos);
    CHECK(std::count(line.begin(), line.end(), '|') == 8);
    ++n;
  }
  CHECK(n == 5);

  const std::string t3 = render_dice_iou_table({{"Swin UNETR", rows[4].report}});
  CHECK(t3.find("aorta Dice") != std::string::npos);
  CHECK(t3.find("aorta IoU") != std::string::npos);
  CHECK(t3.find("Mean Dice") != std::string::npos);
  CHECK(t3.find("33.33") != std::string::npos);
  CHECK(std::count(t3.begin(), t3.end(), '\n') == 1 + 14 + 2);
}
