#include "tavr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace tavr {

namespace {

void recompute_means(MetricsReport& r) {
  double dice = 0.0, iou = 0.0;
  std::size_t n = 0;
  for (const auto& c : r.classes) {
    if (c.absent_in_both) continue;
    dice += c.dice;
    iou += c.iou;
    ++n;
  }
  r.mean_dice = n ? dice / static_cast<double>(n) : 1.0;
  r.mean_iou = n ? iou / static_cast<double>(n) : 1.0;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

const ClassScore& MetricsReport::score(ClassId id) const {
  for (const auto& c : classes)
    if (c.id == id) return c;
  throw Error("report has no class id " + std::to_string(id));
}

MetricsReport dice_iou(const LabelVolume& pred, const LabelVolume& truth, std::string case_id) {
  require_same_grid(pred.grid(), truth.grid(), "prediction and truth");
  if (!(pred.classes() == truth.classes())) throw Error("prediction and truth use different class maps");

  std::array<std::size_t, 256> p{}, t{}, both{};
  const auto pv = pred.voxels();
  const auto tv = truth.voxels();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    ++p[pv[i]];
    ++t[tv[i]];
    if (pv[i] == tv[i]) ++both[pv[i]];
  }

  MetricsReport r;
  r.case_id = std::move(case_id);
  for (ClassId c : truth.classes().foreground()) {
    ClassScore s{c, truth.classes().name_of(c)};
    const std::size_t uni = p[c] + t[c] - both[c];
    if (uni == 0) {
      s.absent_in_both = true;
    } else {
      s.dice = 2.0 * static_cast<double>(both[c]) / static_cast<double>(p[c] + t[c]);
      s.iou = static_cast<double>(both[c]) / static_cast<double>(uni);
    }
    r.classes.push_back(std::move(s));
  }
  recompute_means(r);
  return r;
}

MetricsReport aggregate(const std::vector<MetricsReport>& reports, std::string case_id) {
  if (reports.empty()) throw Error("cannot aggregate an empty list of reports");
  MetricsReport out;
  out.case_id = std::move(case_id);
  const auto& first = reports.front().classes;
  for (const auto& r : reports) {
    if (r.classes.size() != first.size()) throw Error("reports use different class maps");
    for (std::size_t k = 0; k < first.size(); ++k)
      if (r.classes[k].id != first[k].id || r.classes[k].name != first[k].name)
        throw Error("reports use different class maps");
  }
  for (std::size_t k = 0; k < first.size(); ++k) {
    ClassScore s{first[k].id, first[k].name};
    double dice = 0.0, iou = 0.0, weight = 0.0;
    for (const auto& r : reports) {
      const ClassScore& c = r.classes[k];
      if (c.absent_in_both) continue;
      const auto w = static_cast<double>(c.cases);
      dice += w * c.dice;
      iou += w * c.iou;
      weight += w;
    }
    if (weight == 0.0) {
      s.absent_in_both = true;
      s.cases = 0;
    } else {
      s.dice = dice / weight;
      s.iou = iou / weight;
      s.cases = static_cast<std::size_t>(weight);
    }
    out.classes.push_back(std::move(s));
  }
  recompute_means(out);
  return out;
}

std::string render_dice_table(const std::vector<TableRow>& rows) {
  if (rows.empty()) return {};
  std::size_t label_w = 5;
  for (const auto& r : rows) label_w = std::max(label_w, r.label.size());
  std::vector<std::size_t> widths;
  std::ostringstream os;
  os << pad("", label_w, true);
  for (const auto& c : rows.front().report.classes) {
    widths.push_back(std::max<std::size_t>(6, c.name.size()));
    os << " | " << pad(c.name, widths.back());
  }
  os << " | " << pad("Mean", 6) << "\n";
  for (const auto& r : rows) {
    os << pad(r.label, label_w, true);
    for (std::size_t k = 0; k < r.report.classes.size() && k < widths.size(); ++k) {
      const auto& c = r.report.classes[k];
      os << " | " << pad(c.absent_in_both ? "--" : percent(c.dice), widths[k]);
    }
    os << " | " << pad(percent(r.report.mean_dice), 6) << "\n";
  }
  return os.str();
}

std::string render_dice_iou_table(const std::vector<TableRow>& columns) {
  if (columns.empty()) return {};
  std::size_t label_w = 9;
  for (const auto& c : columns.front().report.classes) label_w = std::max(label_w, c.name.size() + 5);
  std::vector<std::size_t> widths;
  std::ostringstream os;
  os << pad("Target", label_w, true);
  for (const auto& col : columns) {
    widths.push_back(std::max<std::size_t>(6, col.label.size()));
    os << " | " << pad(col.label, widths.back());
  }
  os << "\n";
  const auto line = [&](const std::string& label, auto value) {
    os << pad(label, label_w, true);
    for (std::size_t j = 0; j < columns.size(); ++j) os << " | " << pad(value(columns[j].report), widths[j]);
    os << "\n";
  };
  const auto& classes = columns.front().report.classes;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    line(classes[k].name + " Dice", [&](const MetricsReport& r) {
      return r.classes[k].absent_in_both ? std::string("--") : percent(r.classes[k].dice);
    });
    line(classes[k].name + " IoU", [&](const MetricsReport& r) {
      return r.classes[k].absent_in_both ? std::string("--") : percent(r.classes[k].iou);
    });
  }
  line("Mean Dice", [](const MetricsReport& r) { return percent(r.mean_dice); });
  line("Mean IoU", [](const MetricsReport& r) { return percent(r.mean_iou); });
  return os.str();
}

}  // namespace tavr
