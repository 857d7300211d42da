#include "tavr/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "tavr/components.hpp"
#include "tavr/enrich.hpp"
#include "tavr/io/config.hpp"
#include "tavr/io/manifest.hpp"
#include "tavr/io/nifti.hpp"
#include "tavr/io/report.hpp"
#include "tavr/metrics.hpp"
#include "tavr/optim.hpp"
#include "tavr/phantom.hpp"
#include "tavr/skeleton.hpp"

namespace tavr::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

io::Settings settings_from(const std::string& path) {
  return path.empty() ? io::Settings{} : io::load_settings(path);
}

LabelVolume load_labels(const fs::path& path, const io::Settings& s) {
  return io::read_labels(path, ClassMap::tavr(), s.label_map ? &*s.label_map : nullptr);
}

void write_json(const fs::path& path, const json& j) { io::atomic_write(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

json class_voxels(const LabelVolume& vol) {
  json j = json::object();
  for (const auto& e : vol.classes().entries()) j[e.name] = vol.count(e.id);
  return j;
}

unsigned resolve_jobs(int jobs) {
  if (jobs > 0) return static_cast<unsigned>(jobs);
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs work(i) for i in [0, n) on `jobs` threads. Per-item exceptions are
// returned rather than thrown.
std::vector<std::exception_ptr> parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& work) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return errors;
}

std::string message_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

bool is_excluded(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const CaseExcluded&) {
    return true;
  } catch (...) {
    return false;
  }
}

// ---------------------------------------------------------------- enrich

struct EnrichArgs {
  std::string in, out, config, report, manifest, out_dir;
  int jobs = 0;
};

json enrich_report(const EnrichResult& r, const EnrichConfig& cfg) {
  return {{"status", to_string(r.root.extent.status)},
          {"root", io::to_json(r.root)},
          {"class_voxels", class_voxels(r.volume)},
          {"config", io::to_json(cfg)}};
}

// Returns the exit code for one case and writes its outputs.
int enrich_one(const fs::path& in, const fs::path& out, const fs::path& report, const io::Settings& s,
               std::ostream& err) {
  json rep;
  int code = kExitOk;
  try {
    const LabelVolume vol = load_labels(in, s);
    const EnrichResult r = enrich_volume(vol, s.enrich);
    io::write_labels(out, r.volume);
    rep = enrich_report(r, s.enrich);
  } catch (const CaseExcluded& e) {
    err << in.string() << ": " << e.what() << "\n";
    rep = {{"status", "excluded"}, {"reason", e.what()}, {"config", io::to_json(s.enrich)}};
    code = kExitExcluded;
  } catch (const Error& e) {
    err << in.string() << ": " << e.what() << "\n";
    rep = {{"status", "error"}, {"reason", e.what()}};
    code = kExitError;
  }
  if (!report.empty()) write_json(report, rep);
  return code;
}

int cmd_enrich(const EnrichArgs& a, std::ostream& out, std::ostream& err) {
  const io::Settings s = settings_from(a.config);
  if (a.manifest.empty()) {
    if (a.in.empty() || a.out.empty()) throw Error("enrich needs --in and --out (or --manifest and --out-dir)");
    const int code = enrich_one(a.in, a.out, a.report, s, err);
    if (code == kExitOk) out << "enriched " << a.in << " -> " << a.out << "\n";
    return code;
  }
  if (a.out_dir.empty()) throw Error("enrich --manifest needs --out-dir");
  const io::DatasetManifest m = io::load_manifest(a.manifest);
  fs::create_directories(a.out_dir);
  std::vector<int> codes(m.cases.size(), kExitOk);
  std::mutex log;
  parallel_for(m.cases.size(), resolve_jobs(a.jobs), [&](std::size_t i) {
    const auto& c = m.cases[i];
    std::ostringstream case_err;
    codes[i] = enrich_one(c.label_path, fs::path(a.out_dir) / (c.case_id + ".nii.gz"),
                          fs::path(a.out_dir) / (c.case_id + ".json"), s, case_err);
    std::lock_guard lock(log);
    err << case_err.str();
  });
  const auto count = [&](int code) { return std::count(codes.begin(), codes.end(), code); };
  out << "enriched " << count(kExitOk) << ", excluded " << count(kExitExcluded) << ", failed "
      << count(kExitError) << "\n";
  if (count(kExitError)) return kExitError;
  return count(kExitExcluded) ? kExitExcluded : kExitOk;
}

// ---------------------------------------------------------------- root-curve

// Works on raw and on already enriched labels: with an annulus class present
// the aorta is the union of aorta, valve and root and the annulus is taken as
// labelled. An empty aorta yields an all-zero curve.
CrossSectionCurve case_curve(const LabelVolume& vol, const EnrichConfig& cfg) {
  BinaryMask aorta = class_mask(vol, cls::aorta) | class_mask(vol, cls::valve) | class_mask(vol, cls::aortic_root);
  if (aorta.empty()) return sweep_cross_sections(aorta, PlaneFrame{}, cfg);
  BinaryMask annulus = class_mask(vol, cls::annulus);
  if (annulus.empty()) {
    const BinaryMask ventricle = class_mask(vol, cls::left_ventricle);
    if (ventricle.empty()) throw CaseExcluded("missing required class left_ventricle");
    annulus = extract_annulus(aorta, ventricle, cfg);
  }
  return sweep_cross_sections(aorta, fit_annulus_plane(annulus, aorta), cfg);
}

struct RootCurveArgs {
  std::string in, out, config, manifest;
  bool aggregate = false;
  int jobs = 0;
};

int cmd_root_curve(const RootCurveArgs& a, std::ostream& out, std::ostream& err) {
  const io::Settings s = settings_from(a.config);
  CrossSectionCurve curve;
  if (a.manifest.empty()) {
    if (a.in.empty()) throw Error("root-curve needs --in or --manifest");
    curve = case_curve(load_labels(a.in, s), s.enrich);
  } else {
    if (!a.aggregate) throw Error("root-curve --manifest requires --aggregate");
    const io::DatasetManifest m = io::load_manifest(a.manifest);
    std::vector<CrossSectionCurve> curves(m.cases.size());
    const auto errors = parallel_for(m.cases.size(), resolve_jobs(a.jobs), [&](std::size_t i) {
      curves[i] = case_curve(load_labels(m.cases[i].label_path, s), s.enrich);
    });
    std::size_t used = 0;
    for (std::size_t i = 0; i < curves.size(); ++i) {
      if (errors[i]) {
        if (!is_excluded(errors[i])) throw Error(m.cases[i].case_id + ": " + message_of(errors[i]));
        err << m.cases[i].case_id << ": skipped, " << message_of(errors[i]) << "\n";
        continue;
      }
      if (curve.distances.empty()) {
        curve = curves[i];
      } else {
        for (std::size_t k = 0; k < curve.size(); ++k) curve.raw_counts[k] += curves[i].raw_counts[k];
      }
      ++used;
    }
    if (!used) throw Error("no usable cases in manifest");
    curve.smoothed = moving_average(std::vector<double>(curve.raw_counts.begin(), curve.raw_counts.end()),
                                    s.enrich.smoothing_window);
    out << "aggregated " << used << " cases\n";
  }
  if (!a.out.empty()) io::atomic_write(a.out, io::curve_csv(curve));
  const RootExtent ext = detect_root_extent(curve, s.enrich.smoothing_window);
  out << "status " << to_string(ext.status);
  if (ext.status == RootStatus::found)
    out << " max_distance " << ext.max_distance << " min_distance " << ext.min_distance << " smoothed_min_distance "
        << ext.smoothed_min_distance;
  out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- skeletonize

struct SkeletonizeArgs {
  std::string in, out, config;
  std::optional<double> tube_radius;
};

int cmd_skeletonize(const SkeletonizeArgs& a, std::ostream& out) {
  const io::Settings s = settings_from(a.config);
  const LabelVolume vol = load_labels(a.in, s);
  const SkeletonMask skel = skeletons_for_volume(vol, a.tube_radius.value_or(s.tube_radius));
  LabelVolume result(vol.grid(), vol.classes());
  for (const auto& [c, mask] : skel.per_class) result.paint(mask, c);
  io::write_labels(a.out, result);
  for (const auto& [c, mask] : skel.per_class)
    out << vol.classes().name_of(c) << " " << vol.count(c) << " -> " << mask.count() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string pred, truth, out, config, manifest, pred_dir;
  bool table = false;
  int jobs = 0;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
  const io::Settings s = settings_from(a.config);
  MetricsReport shown;
  json doc;
  if (a.manifest.empty()) {
    if (a.pred.empty() || a.truth.empty()) throw Error("metrics needs --pred and --truth (or --manifest)");
    shown = dice_iou(load_labels(a.pred, s), load_labels(a.truth, s), fs::path(a.truth).filename().string());
    doc = io::to_json(shown);
  } else {
    const io::DatasetManifest m = io::load_manifest(a.manifest);
    std::vector<MetricsReport> reports(m.cases.size());
    const auto errors = parallel_for(m.cases.size(), resolve_jobs(a.jobs), [&](std::size_t i) {
      const auto& c = m.cases[i];
      fs::path pred;
      if (!a.pred_dir.empty()) pred = fs::path(a.pred_dir) / c.label_path.filename();
      else if (c.pred_path) pred = *c.pred_path;
      else throw Error("no prediction (give --pred-dir or pred_path)");
      reports[i] = dice_iou(load_labels(pred, s), load_labels(c.label_path, s), c.case_id);
    });
    for (std::size_t i = 0; i < errors.size(); ++i)
      if (errors[i]) throw Error(m.cases[i].case_id + ": " + message_of(errors[i]));
    shown = aggregate(reports);
    json cases = json::array();
    for (const auto& r : reports) cases.push_back(io::to_json(r));
    doc = {{"cases", cases}, {"aggregate", io::to_json(shown)}};
  }
  if (!a.out.empty()) write_json(a.out, doc);
  if (a.table) out << render_dice_iou_table({{shown.case_id, shown}});
  else out << "mean_dice " << shown.mean_dice << " mean_iou " << shown.mean_iou << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- table

struct TableArgs {
  std::vector<std::string> reports, labels;
  std::string layout = "dice", out;
};

int cmd_table(const TableArgs& a, std::ostream& out) {
  if (!a.labels.empty() && a.labels.size() != a.reports.size())
    throw Error("--labels must name every report");
  std::vector<TableRow> rows;
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    const json j = read_json(a.reports[i]);
    const std::string label = a.labels.empty() ? fs::path(a.reports[i]).stem().string() : a.labels[i];
    rows.push_back({label, io::metrics_from_json(j.contains("aggregate") ? j["aggregate"] : j)});
  }
  const std::string text = a.layout == "dice" ? render_dice_table(rows) : render_dice_iou_table(rows);
  if (a.out.empty()) out << text;
  else io::atomic_write(a.out, text);
  return kExitOk;
}

// ---------------------------------------------------------------- loss

struct LossArgs {
  std::string pred_logits, truth, objective, out, config;
  std::optional<double> tube_radius;
};

int cmd_loss(const LossArgs& a, std::ostream& out) {
  const io::Settings s = settings_from(a.config);
  const Objective objective = objective_from_string(a.objective);
  const LogitField logits = io::read_logits(a.pred_logits);
  const LabelVolume truth = load_labels(a.truth, s);
  require_same_grid(logits.grid(), truth.grid(), "logits and truth");
  const SkeletonMask skel = uses_skeleton(objective)
                                ? skeletons_for_volume(truth, a.tube_radius.value_or(s.tube_radius))
                                : SkeletonMask{truth.grid(), 0.0, {}};
  const LossReport r = combined_loss(logits, truth, skel, objective, s.loss);
  const json j = io::to_json(r, s.loss);
  if (!a.out.empty()) write_json(a.out, j);
  out << to_string(objective) << " " << io::json(r.total).dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- validate-dataset

struct ValidateArgs {
  std::string manifest, config;
  bool expect_paper_splits = false, lenient = false;
  int jobs = 0;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const io::Settings s = settings_from(a.config);
  const io::DatasetManifest m = io::load_manifest(a.manifest);
  bool ok = true;
  const auto fail = [&](const std::string& msg) {
    ok = false;
    out << "FAIL " << msg << "\n";
  };

  const io::SplitCounts n = m.counts();
  out << "cases " << n.total() << " (train " << n.train << ", val " << n.val << ", test " << n.test << ")\n";
  if (a.expect_paper_splits) {
    const auto& p = io::kPublishedSplits;
    if (n.train != p.train || n.val != p.val || n.test != p.test)
      fail("split sizes " + std::to_string(n.train) + "/" + std::to_string(n.val) + "/" + std::to_string(n.test) +
           ", expected " + std::to_string(p.train) + "/" + std::to_string(p.val) + "/" + std::to_string(p.test));
  }
  for (const auto& id : m.duplicate_ids()) fail("duplicate case id " + id);

  std::vector<std::optional<std::vector<std::size_t>>> presence(m.cases.size());
  std::vector<bool> missing(m.cases.size(), false);
  for (std::size_t i = 0; i < m.cases.size(); ++i) missing[i] = !fs::exists(m.cases[i].label_path);
  const auto errors = parallel_for(m.cases.size(), resolve_jobs(a.jobs), [&](std::size_t i) {
    if (missing[i]) return;
    const LabelVolume vol = load_labels(m.cases[i].label_path, s);
    std::vector<std::size_t> counts;
    for (const auto& e : vol.classes().entries()) counts.push_back(vol.count(e.id));
    presence[i] = std::move(counts);
  });

  const ClassMap& classes = ClassMap::tavr();
  std::vector<std::size_t> census(classes.entries().size(), 0);
  std::size_t read = 0;
  for (std::size_t i = 0; i < m.cases.size(); ++i) {
    const auto& c = m.cases[i];
    if (missing[i]) {
      if (a.lenient) out << "WARN " << c.case_id << ": missing " << c.label_path.string() << "\n";
      else fail(c.case_id + ": missing " + c.label_path.string());
      continue;
    }
    if (errors[i]) {
      fail(c.case_id + ": unreadable: " + message_of(errors[i]));
      continue;
    }
    ++read;
    std::vector<std::string> absent;
    for (std::size_t k = 0; k < census.size(); ++k) {
      if ((*presence[i])[k] > 0) ++census[k];
      const ClassId id = classes.entries()[k].id;
      if ((*presence[i])[k] == 0 && std::find(s.enrich.required.begin(), s.enrich.required.end(), id) !=
                                        s.enrich.required.end())
        absent.push_back(classes.entries()[k].name);
    }
    if (!absent.empty()) {
      std::string list;
      for (const auto& name : absent) list += (list.empty() ? "" : ", ") + name;
      fail(c.case_id + ": excludable, missing " + list);
    }
  }
  out << "class presence (" << read << " readable cases)\n";
  for (std::size_t k = 1; k < census.size(); ++k)
    out << "  " << classes.entries()[k].name << " " << census[k] << "/" << read << "\n";
  out << (ok ? "OK" : "INVALID") << "\n";
  return ok ? kExitOk : kExitError;
}

// ---------------------------------------------------------------- phantom

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("expected a comma-separated number list, got '" + v + "'");
    }
  }
  return out;
}

double parse_number(const std::string& key, const std::string& v) {
  const auto list = parse_list(v);
  if (list.size() != 1) throw Error("parameter " + key + " expects one number");
  return list[0];
}

VoxelGrid3 grid_from(const std::string& dims, const std::string& spacing) {
  const auto d = parse_list(dims);
  if (d.size() != 3 || d[0] < 1 || d[1] < 1 || d[2] < 1) throw Error("--dims expects nx,ny,nz");
  Vec3 sp = Vec3::Ones();
  if (!spacing.empty()) {
    const auto v = parse_list(spacing);
    if (v.size() != 3 || v[0] <= 0 || v[1] <= 0 || v[2] <= 0) throw Error("--spacing expects three positive values");
    sp = Vec3(v[0], v[1], v[2]);
  }
  return VoxelGrid3(Dims{static_cast<std::int64_t>(d[0]), static_cast<std::int64_t>(d[1]), static_cast<std::int64_t>(d[2])}, sp);
}

phantom::Spec spec_from(const std::string& kind, std::uint64_t seed, double jitter, const std::vector<std::string>& params) {
  phantom::Spec spec;
  spec.kind = phantom::kind_from_string(kind);
  spec.seed = seed;
  spec.jitter = jitter;
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw Error("--param expects key=value, got '" + p + "'");
    const std::string key = p.substr(0, eq), v = p.substr(eq + 1);
    const auto integer = [&] { return static_cast<std::int64_t>(parse_number(key, v)); };
    if (key == "margin") spec.margin = integer();
    else if (key == "gap") spec.gap = integer();
    else if (key == "inset") spec.inset = integer();
    else if (key == "base_z") spec.base_z = integer();
    else if (key == "top_z") spec.top_z = integer();
    else if (key == "ventricle_depth") spec.ventricle_depth = integer();
    else if (key == "ventricle_half_width") spec.ventricle_half_width = parse_number(key, v);
    else if (key == "iliac_radius") spec.iliac_radius = parse_number(key, v);
    else if (key == "tube_radius") spec.tube_radius = parse_number(key, v);
    else if (key == "bulb_radius") spec.bulb_radius = parse_number(key, v);
    else if (key == "bulb_center_z") spec.bulb_center_z = parse_number(key, v);
    else if (key == "profile") spec.profile = v == "dataset_like" ? phantom::dataset_like_profile() : parse_list(v);
    else if (key == "branch_radius") spec.branch_radius = parse_number(key, v);
    else if (key == "branch_spread") spec.branch_spread = parse_number(key, v);
    else if (key == "label") spec.label = ClassMap::tavr().id_of(v);
    else throw Error("unknown phantom parameter '" + key + "'");
  }
  return spec;
}

json truth_json(const phantom::GroundTruth& t) {
  json j = json::object();
  if (t.annulus_plane)
    j["annulus_plane"] = {{"point", {t.annulus_plane->point.x(), t.annulus_plane->point.y(), t.annulus_plane->point.z()}},
                          {"normal", {t.annulus_plane->normal.x(), t.annulus_plane->normal.y(), t.annulus_plane->normal.z()}}};
  const auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  opt("bulb_equator_distance", t.bulb_equator_distance);
  opt("waist_distance", t.waist_distance);
  opt("profile_max_distance", t.profile_max_distance);
  opt("profile_min_distance", t.profile_min_distance);
  if (t.expected_valve) j["expected_valve_voxels"] = t.expected_valve->count();
  if (t.expected_annulus) j["expected_annulus_voxels"] = t.expected_annulus->count();
  json comps = json::object(), vols = json::object();
  for (const auto& [c, n] : t.expected_components) comps[ClassMap::tavr().name_of(c)] = n;
  for (const auto& [c, v] : t.analytic_volume) vols[ClassMap::tavr().name_of(c)] = v;
  j["expected_components"] = comps;
  j["analytic_volume"] = vols;
  return j;
}

struct PhantomArgs {
  std::string kind = "cylinder_bulb", out, truth_json, dims = "48,48,64", spacing;
  std::uint64_t seed = 0;
  double jitter = 0.0;
  std::vector<std::string> params;
};

int cmd_phantom(const PhantomArgs& a, std::ostream& out) {
  const phantom::Result r = phantom::generate(spec_from(a.kind, a.seed, a.jitter, a.params), grid_from(a.dims, a.spacing));
  io::write_labels(a.out, r.volume);
  if (!a.truth_json.empty()) write_json(a.truth_json, truth_json(r.truth));
  out << "wrote " << a.kind << " phantom to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- fit-demo

struct FitArgs {
  PhantomArgs phantom;
  std::string objective = "FocalSK*", labels_in, labels_out, config, watch;
  std::vector<std::string> init;
  int iterations = 500;
  double lr = 0.5, init_logit = 0.0;
  std::optional<double> tube_radius;
};

int cmd_fit_demo(const FitArgs& a, std::ostream& out) {
  const io::Settings s = settings_from(a.config);
  const LabelVolume target =
      a.labels_in.empty()
          ? phantom::generate(spec_from(a.phantom.kind, a.phantom.seed, a.phantom.jitter, a.phantom.params),
                              grid_from(a.phantom.dims, a.phantom.spacing))
                .volume
          : load_labels(a.labels_in, s);
  FitConfig cfg;
  cfg.objective = objective_from_string(a.objective);
  cfg.learning_rate = a.lr;
  cfg.iterations = a.iterations;
  cfg.init_logit = a.init_logit;
  cfg.loss = s.loss;
  for (const auto& p : a.init) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw Error("--init expects class=logit, got '" + p + "'");
    cfg.channel_init[ClassMap::tavr().id_of(p.substr(0, eq))] = parse_number(p, p.substr(eq + 1));
  }
  if (!a.watch.empty()) cfg.watch_class = ClassMap::tavr().id_of(a.watch);
  const SkeletonMask skel = skeletons_for_volume(target, a.tube_radius.value_or(s.tube_radius));
  const FitResult r = fit_probability_field(target, skel, cfg);
  if (!a.phantom.out.empty()) io::atomic_write(a.phantom.out, io::trace_csv(r.trace));
  if (!a.labels_out.empty()) io::write_labels(a.labels_out, argmax_labels(r.logits, target.classes()));
  const TraceEntry& last = r.trace.back();
  out << to_string(cfg.objective) << " iterations " << last.iteration << " total " << last.total << " mean_dice "
      << last.metrics.mean_dice;
  if (last.watch_components) out << " components " << *last.watch_components;
  out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TAVR label enrichment, skeleton losses and evaluation"};
  app.name("tavrseg");
  app.require_subcommand(1);
  app.set_version_flag("--version", "tavrseg 1.0");

  EnrichArgs ea;
  auto* enrich = app.add_subcommand("enrich", "derive valve, annulus and aortic root labels");
  enrich->add_option("--in", ea.in, "input label volume");
  enrich->add_option("--out", ea.out, "output label volume");
  enrich->add_option("--config", ea.config, "key = value settings file")->check(CLI::ExistingFile);
  enrich->add_option("--report", ea.report, "report JSON");
  enrich->add_option("--manifest", ea.manifest, "dataset manifest (batch mode)")->check(CLI::ExistingFile);
  enrich->add_option("--out-dir", ea.out_dir, "batch output directory");
  enrich->add_option("--jobs", ea.jobs, "worker threads (0: all cores)");

  RootCurveArgs ra;
  auto* curve = app.add_subcommand("root-curve", "aorta cross-section counts against distance from the annulus");
  curve->add_option("--in", ra.in, "input label volume");
  curve->add_option("--out", ra.out, "output CSV");
  curve->add_option("--config", ra.config)->check(CLI::ExistingFile);
  curve->add_option("--manifest", ra.manifest)->check(CLI::ExistingFile);
  curve->add_flag("--aggregate", ra.aggregate, "sum raw counts over the manifest");
  curve->add_option("--jobs", ra.jobs);

  SkeletonizeArgs sa;
  auto* skel = app.add_subcommand("skeletonize", "per-class skeletons as a label volume");
  skel->add_option("--in", sa.in)->required();
  skel->add_option("--out", sa.out)->required();
  skel->add_option("--tube-radius", sa.tube_radius);
  skel->add_option("--config", sa.config)->check(CLI::ExistingFile);

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "per-class Dice and IoU");
  metrics->add_option("--pred", ma.pred);
  metrics->add_option("--truth", ma.truth);
  metrics->add_option("--out", ma.out, "report JSON");
  metrics->add_option("--config", ma.config)->check(CLI::ExistingFile);
  metrics->add_option("--manifest", ma.manifest)->check(CLI::ExistingFile);
  metrics->add_option("--pred-dir", ma.pred_dir, "predictions named like the truth files");
  metrics->add_flag("--table", ma.table, "print a Dice/IoU table");
  metrics->add_option("--jobs", ma.jobs);

  TableArgs ta;
  auto* table = app.add_subcommand("table", "render metric reports as a text table");
  table->add_option("--reports", ta.reports, "report JSON files")->required()->check(CLI::ExistingFile);
  table->add_option("--labels", ta.labels, "row/column labels");
  table->add_option("--layout", ta.layout, "dice (runs as rows) or dice-iou (runs as columns)")
      ->check(CLI::IsMember({"dice", "dice-iou"}));
  table->add_option("--out", ta.out);

  LossArgs la;
  auto* loss = app.add_subcommand("loss", "evaluate a training objective on logits");
  loss->add_option("--pred-logits", la.pred_logits)->required();
  loss->add_option("--truth", la.truth)->required();
  loss->add_option("--objective", la.objective)->required();
  loss->add_option("--out", la.out);
  loss->add_option("--config", la.config)->check(CLI::ExistingFile);
  loss->add_option("--tube-radius", la.tube_radius);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate-dataset", "check a dataset manifest");
  validate->add_option("--manifest", va.manifest)->required();
  validate->add_option("--config", va.config)->check(CLI::ExistingFile);
  validate->add_flag("--expect-paper-splits", va.expect_paper_splits, "require 378/100/100 cases");
  validate->add_flag("--lenient", va.lenient, "missing files are warnings");
  validate->add_option("--jobs", va.jobs);

  PhantomArgs pa;
  const auto phantom_options = [](CLI::App* sub, PhantomArgs& p) {
    sub->add_option("--kind", p.kind)->check(CLI::IsMember(
        {"box_interface", "cylinder_bulb", "radius_profile", "y_bifurcation", "seven_class_composite"}));
    sub->add_option("--seed", p.seed);
    sub->add_option("--jitter", p.jitter);
    sub->add_option("--dims", p.dims, "nx,ny,nz");
    sub->add_option("--spacing", p.spacing, "sx,sy,sz");
    sub->add_option("--param", p.params, "key=value geometry parameter");
  };
  auto* phantom_cmd = app.add_subcommand("phantom", "write a synthetic label volume");
  phantom_options(phantom_cmd, pa);
  phantom_cmd->add_option("--out", pa.out)->required();
  phantom_cmd->add_option("--truth-json", pa.truth_json);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit-demo", "fit a free logit field to a label volume");
  phantom_options(fit, fa.phantom);
  fit->add_option("--labels", fa.labels_in, "fit these labels instead of a phantom");
  fit->add_option("--objective", fa.objective);
  fit->add_option("--iterations", fa.iterations);
  fit->add_option("--lr", fa.lr);
  fit->add_option("--init-logit", fa.init_logit);
  fit->add_option("--init", fa.init, "class=logit initial value for one channel");
  fit->add_option("--watch", fa.watch, "class whose components are traced");
  fit->add_option("--tube-radius", fa.tube_radius);
  fit->add_option("--config", fa.config)->check(CLI::ExistingFile);
  fit->add_option("--out", fa.phantom.out, "trace CSV");
  fit->add_option("--labels-out", fa.labels_out, "final argmax labels");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*enrich) return cmd_enrich(ea, out, err);
    if (*curve) return cmd_root_curve(ra, out, err);
    if (*skel) return cmd_skeletonize(sa, out);
    if (*metrics) return cmd_metrics(ma, out);
    if (*table) return cmd_table(ta, out);
    if (*loss) return cmd_loss(la, out);
    if (*validate) return cmd_validate(va, out);
    if (*phantom_cmd) return cmd_phantom(pa, out);
    if (*fit) return cmd_fit_demo(fa, out);
  } catch (const CaseExcluded& e) {
    err << "case excluded: " << e.what() << "\n";
    return kExitExcluded;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tavr::cli
