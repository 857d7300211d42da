#include "doctest.h"
#include "tempdir.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "tavr/cli.hpp"
#include "tavr/components.hpp"
#include "tavr/io/nifti.hpp"
#include "tavr/io/report.hpp"
#include "tavr/phantom.hpp"

using namespace tavr;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json load(const std::filesystem::path& p) { return json::parse(slurp(p)); }

std::string str(const std::filesystem::path& p) { return p.string(); }

// Every class except `drop` from the default composite phantom.
LabelVolume composite_without(ClassId drop) {
  phantom::Spec spec;
  spec.kind = phantom::Kind::cylinder_bulb;
  LabelVolume v = phantom::generate(spec, VoxelGrid3(Dims{48, 48, 64})).volume;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == drop) v.set(i, cls::background);
  return v;
}

// Two aorta blocks of 100 voxels overlapping in 50.
std::pair<LabelVolume, LabelVolume> half_overlap() {
  const VoxelGrid3 g(Dims{20, 10, 10});
  LabelVolume p(g, ClassMap::tavr()), t(g, ClassMap::tavr());
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) {
        p.set(x, y, z, cls::aorta);
        t.set(x + 5 * (z >= 2 ? 1 : 0), y, z + 2 * (z >= 2 ? 0 : 1), cls::aorta);
      }
  return {p, t};
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({}).code == cli::kExitError);
  CHECK(run({"frobnicate"}).code == cli::kExitError);
  CHECK(run({"phantom"}).code == cli::kExitError);
  CHECK(run({"phantom", "--kind", "torus", "--out", "x.nii"}).code == cli::kExitError);
  CHECK(run({"enrich", "--in", "a.nii.gz"}).code == cli::kExitError);
}

TEST_CASE("phantom output is deterministic by seed") {
  TempDir dir;
  const auto make = [&](const std::string& name, const std::string& seed) {
    return run({"phantom", "--kind", "seven_class_composite", "--seed", seed, "--jitter", "0.3", "--out",
                str(dir / name), "--truth-json", str(dir / (name + ".json"))});
  };
  REQUIRE(make("a.nii.gz", "7").code == 0);
  REQUIRE(make("b.nii.gz", "7").code == 0);
  REQUIRE(make("c.nii.gz", "8").code == 0);
  CHECK(slurp(dir / "a.nii.gz") == slurp(dir / "b.nii.gz"));
  CHECK(slurp(dir / "a.nii.gz.json") == slurp(dir / "b.nii.gz.json"));
  CHECK(slurp(dir / "a.nii.gz") != slurp(dir / "c.nii.gz"));
  const json truth = load(dir / "a.nii.gz.json");
  CHECK(truth["expected_components"]["aorta"] == 1);
  CHECK(run({"phantom", "--kind", "cylinder_bulb", "--param", "bogus=1", "--out", str(dir / "x.nii")}).code ==
        cli::kExitError);
}

TEST_CASE("enrich a phantom") {
  TempDir dir;
  REQUIRE(run({"phantom", "--out", str(dir / "in.nii.gz")}).code == 0);
  const Run r = run({"enrich", "--in", str(dir / "in.nii.gz"), "--out", str(dir / "out.nii.gz"), "--report",
                     str(dir / "rep.json")});
  REQUIRE(r.code == cli::kExitOk);
  const json rep = load(dir / "rep.json");
  CHECK(rep["status"] == "found");
  for (const char* name : {"aorta", "left_ventricle", "aortic_root", "valve", "annulus", "iliac_artery_left",
                           "iliac_artery_right"})
    CHECK(rep["class_voxels"][name].get<std::size_t>() > 0);
  CHECK(rep["config"]["valve_distance"] == 3.0);

  const LabelVolume in = io::read_labels(dir / "in.nii.gz");
  const LabelVolume out = io::read_labels(dir / "out.nii.gz");
  // Subset invariants against the input.
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (out[i] == cls::valve || out[i] == cls::aortic_root) CHECK(in[i] == cls::aorta);
    if (out[i] == cls::annulus) CHECK(in[i] == cls::left_ventricle);
  }
  CHECK(rep["class_voxels"]["valve"] == out.count(cls::valve));
}

TEST_CASE("enrich exit codes") {
  TempDir dir;
  io::write_labels(dir / "nolv.nii.gz", composite_without(cls::left_ventricle));
  Run r = run({"enrich", "--in", str(dir / "nolv.nii.gz"), "--out", str(dir / "o.nii.gz"), "--report",
               str(dir / "r.json")});
  CHECK(r.code == cli::kExitExcluded);
  CHECK(load(dir / "r.json")["status"] == "excluded");
  CHECK(load(dir / "r.json")["reason"].get<std::string>().find("left_ventricle") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "o.nii.gz"));

  spit(dir / "junk.nii.gz", "not an image");
  r = run({"enrich", "--in", str(dir / "junk.nii.gz"), "--out", str(dir / "o.nii.gz"), "--report",
           str(dir / "r.json")});
  CHECK(r.code == cli::kExitError);
  CHECK(load(dir / "r.json")["status"] == "error");
}

TEST_CASE("label map config reads source ids") {
  TempDir dir;
  const LabelVolume v = composite_without(cls::background);
  std::vector<double> raw(v.size());
  const std::map<ClassId, int> source{{cls::aorta, 7},
                                      {cls::left_ventricle, 46},
                                      {cls::iliac_artery_left, 58},
                                      {cls::iliac_artery_right, 59}};
  for (std::size_t i = 0; i < v.size(); ++i) raw[i] = v[i] ? source.at(v[i]) : 0;
  raw[0] = 21;  // an unrelated structure
  io::write_nifti(dir / "ts.nii.gz", v.grid(), 1, raw, io::nifti_type::int16);
  const std::string cfg = std::string(TAVR_CONFIG_DIR) + "/totalsegmentator_v1.cfg";
  CHECK(run({"enrich", "--in", str(dir / "ts.nii.gz"), "--out", str(dir / "o.nii.gz")}).code == cli::kExitError);
  REQUIRE(run({"enrich", "--in", str(dir / "ts.nii.gz"), "--out", str(dir / "o.nii.gz"), "--config", cfg}).code ==
          cli::kExitOk);
  const LabelVolume out = io::read_labels(dir / "o.nii.gz");
  CHECK(out[0] == cls::background);
  CHECK(out.count(cls::valve) > 0);
}

TEST_CASE("batch enrich") {
  TempDir dir;
  REQUIRE(run({"phantom", "--out", str(dir / "a.nii.gz")}).code == 0);
  REQUIRE(run({"phantom", "--seed", "3", "--jitter", "0.2", "--out", str(dir / "b.nii.gz")}).code == 0);
  io::write_labels(dir / "c.nii.gz", composite_without(cls::aorta));
  spit(dir / "m.json", R"({"cases": [
    {"case_id": "a", "label_path": "a.nii.gz", "split": "train"},
    {"case_id": "b", "label_path": "b.nii.gz", "split": "val"},
    {"case_id": "c", "label_path": "c.nii.gz", "split": "test"}]})");
  for (const char* jobs : {"1", "3"}) {
    const std::string out = str(dir / (std::string("out") + jobs));
    const Run r = run({"enrich", "--manifest", str(dir / "m.json"), "--out-dir", out, "--jobs", jobs});
    CHECK(r.code == cli::kExitExcluded);
    CHECK(r.out.find("enriched 2, excluded 1, failed 0") != std::string::npos);
    CHECK(load(dir / ("out" + std::string(jobs)) / "c.json")["status"] == "excluded");
    CHECK(load(dir / ("out" + std::string(jobs)) / "a.json")["status"] == "found");
  }
  CHECK(slurp(dir / "out1/a.nii.gz") == slurp(dir / "out3/a.nii.gz"));
  CHECK(slurp(dir / "out1/b.nii.gz") == slurp(dir / "out3/b.nii.gz"));
}

TEST_CASE("root curves") {
  TempDir dir;
  SUBCASE("cylinder gives a near-constant raw column") {
    std::string profile;
    for (int k = 0; k < 50; ++k) profile += (k ? "," : "") + std::string("6");
    REQUIRE(run({"phantom", "--kind", "radius_profile", "--dims", "40,40,72", "--param", "base_z=9", "--param",
                 "profile=" + profile, "--out", str(dir / "c.nii.gz")})
                .code == 0);
    const Run r = run({"root-curve", "--in", str(dir / "c.nii.gz"), "--out", str(dir / "c.csv")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("status failed") != std::string::npos);
    std::istringstream in(slurp(dir / "c.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "distance,raw_count,smoothed");
    std::vector<double> counts;
    while (std::getline(in, line)) {
      const auto a = line.find(','), b = line.rfind(',');
      const double d = std::stod(line.substr(0, a));
      if (d >= 1 && d <= 49) counts.push_back(std::stod(line.substr(a + 1, b - a - 1)));
    }
    REQUIRE(counts.size() == 49);
    // Disc of radius 6 on the lattice: 113 voxel centres.
    for (double c : counts) CHECK(c == 113);
  }
  SUBCASE("empty aorta gives zero rows") {
    LabelVolume v(VoxelGrid3(Dims{8, 8, 8}), ClassMap::tavr());
    v.set(1, 1, 1, cls::left_ventricle);
    io::write_labels(dir / "e.nii.gz", v);
    REQUIRE(run({"root-curve", "--in", str(dir / "e.nii.gz"), "--out", str(dir / "e.csv")}).code == 0);
    std::istringstream in(slurp(dir / "e.csv"));
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(line.substr(line.find(',')) == ",0,0");
    }
    CHECK(rows == 61);
  }
  SUBCASE("bulb waist and aggregate") {
    REQUIRE(run({"phantom", "--out", str(dir / "a.nii.gz"), "--truth-json", str(dir / "t.json")}).code == 0);
    const double waist = load(dir / "t.json")["waist_distance"].get<double>();
    Run r = run({"root-curve", "--in", str(dir / "a.nii.gz")});
    REQUIRE(r.code == 0);
    const auto at = r.out.find(" min_distance ");
    REQUIRE(at != std::string::npos);
    CHECK(std::abs(std::stod(r.out.substr(at + 14)) - waist) <= 2.0);

    REQUIRE(run({"enrich", "--in", str(dir / "a.nii.gz"), "--out", str(dir / "e.nii.gz")}).code == 0);
    spit(dir / "m.json", R"({"cases": [
      {"case_id": "a", "label_path": "a.nii.gz", "split": "train"},
      {"case_id": "e", "label_path": "e.nii.gz", "split": "train"}]})");
    r = run({"root-curve", "--manifest", str(dir / "m.json"), "--aggregate", "--out", str(dir / "agg.csv")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("aggregated 2 cases") != std::string::npos);
    CHECK(r.out.find("status found") != std::string::npos);
    CHECK(run({"root-curve", "--manifest", str(dir / "m.json")}).code == cli::kExitError);
  }
}

TEST_CASE("skeletonize") {
  TempDir dir;
  LabelVolume line(VoxelGrid3(Dims{5, 5, 12}), ClassMap::tavr());
  for (int z = 1; z < 11; ++z) line.set(2, 2, z, cls::aorta);
  io::write_labels(dir / "l.nii.gz", line);
  REQUIRE(run({"skeletonize", "--in", str(dir / "l.nii.gz"), "--out", str(dir / "s.nii.gz")}).code == 0);
  CHECK(io::read_labels(dir / "s.nii.gz") == line);

  REQUIRE(run({"phantom", "--kind", "y_bifurcation", "--dims", "32,32,40", "--out", str(dir / "y.nii.gz")}).code == 0);
  REQUIRE(run({"skeletonize", "--in", str(dir / "y.nii.gz"), "--out", str(dir / "ys.nii.gz")}).code == 0);
  const LabelVolume y = io::read_labels(dir / "y.nii.gz"), ys = io::read_labels(dir / "ys.nii.gz");
  CHECK(ys.count(cls::aorta) > 0);
  CHECK(ys.count(cls::aorta) < y.count(cls::aorta) / 5);
  CHECK(count_components(class_mask(ys, cls::aorta)) == 1);
  REQUIRE(run({"skeletonize", "--in", str(dir / "y.nii.gz"), "--out", str(dir / "yt.nii.gz"), "--tube-radius", "1"})
              .code == 0);
  CHECK(io::read_labels(dir / "yt.nii.gz").count(cls::aorta) > ys.count(cls::aorta));
}

TEST_CASE("metrics") {
  TempDir dir;
  const auto [p, t] = half_overlap();
  REQUIRE(p.count(cls::aorta) == 100);
  REQUIRE(t.count(cls::aorta) == 100);
  io::write_labels(dir / "p.nii.gz", p);
  io::write_labels(dir / "t.nii.gz", t);
  Run r = run({"metrics", "--pred", str(dir / "p.nii.gz"), "--truth", str(dir / "t.nii.gz"), "--out",
               str(dir / "m.json")});
  REQUIRE(r.code == 0);
  const MetricsReport rep = io::metrics_from_json(load(dir / "m.json"));
  CHECK(rep.score(cls::aorta).dice == 0.5);
  CHECK(rep.score(cls::aorta).iou == 1.0 / 3.0);
  CHECK(rep.score(cls::valve).absent_in_both);
  CHECK(rep.mean_dice == 0.5);

  r = run({"metrics", "--pred", str(dir / "t.nii.gz"), "--truth", str(dir / "t.nii.gz"), "--table"});
  CHECK(r.out.find("aorta Dice") != std::string::npos);
  CHECK(r.out.find("100.00") != std::string::npos);

  SUBCASE("batch") {
    std::filesystem::create_directories(dir / "pred");
    io::write_labels(dir / "pred/t.nii.gz", p);
    io::write_labels(dir / "pred/u.nii.gz", t);
    io::write_labels(dir / "u.nii.gz", t);
    spit(dir / "man.json", R"({"cases": [
      {"case_id": "one", "label_path": "t.nii.gz", "split": "test"},
      {"case_id": "two", "label_path": "u.nii.gz", "split": "test"}]})");
    r = run({"metrics", "--manifest", str(dir / "man.json"), "--pred-dir", str(dir / "pred"), "--out",
             str(dir / "b.json"), "--jobs", "2"});
    REQUIRE(r.code == 0);
    const json b = load(dir / "b.json");
    CHECK(b["cases"].size() == 2);
    CHECK(b["cases"][0]["case_id"] == "one");
    CHECK(io::metrics_from_json(b["aggregate"]).score(cls::aorta).dice == 0.75);
    CHECK(run({"metrics", "--manifest", str(dir / "man.json")}).code == cli::kExitError);
  }
  SUBCASE("class map mismatch through grids") {
    LabelVolume other(VoxelGrid3(Dims{4, 4, 4}), ClassMap::tavr());
    io::write_labels(dir / "o.nii.gz", other);
    CHECK(run({"metrics", "--pred", str(dir / "o.nii.gz"), "--truth", str(dir / "t.nii.gz")}).code ==
          cli::kExitError);
  }
}

TEST_CASE("table layouts") {
  TempDir dir;
  const auto [p, t] = half_overlap();
  io::write_labels(dir / "p.nii.gz", p);
  io::write_labels(dir / "t.nii.gz", t);
  REQUIRE(run({"metrics", "--pred", str(dir / "p.nii.gz"), "--truth", str(dir / "t.nii.gz"), "--out",
               str(dir / "r.json")})
              .code == 0);
  std::vector<std::string> args{"table", "--reports"};
  for (int k = 0; k < 5; ++k) args.push_back(str(dir / "r.json"));
  args.insert(args.end(), {"--labels", "DiceCE", "Focal", "DiceCE+SR", "Focal+SR", "FocalSK*"});
  Run r = run(args);
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0].find("Mean") != std::string::npos);
  CHECK(lines[5].rfind("FocalSK*", 0) == 0);
  // 7 class columns + Mean
  CHECK(std::count(lines[1].begin(), lines[1].end(), '|') == 8);
  CHECK(lines[1].find("50.00") != std::string::npos);

  args.push_back("--layout");
  args.push_back("dice-iou");
  r = run(args);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("aorta IoU") != std::string::npos);
  CHECK(r.out.find("33.33") != std::string::npos);
  CHECK(r.out.find("Mean IoU") != std::string::npos);

  CHECK(run({"table", "--reports", str(dir / "r.json"), "--labels", "a", "b"}).code == cli::kExitError);
  spit(dir / "bad.json", "{}");
  CHECK(run({"table", "--reports", str(dir / "bad.json")}).code == cli::kExitError);
}

TEST_CASE("loss command") {
  TempDir dir;
  const VoxelGrid3 g(Dims{6, 6, 6});
  LabelVolume truth(g, ClassMap::tavr());
  for (std::size_t i = 0; i < truth.size(); ++i) truth.set(i, static_cast<ClassId>(i % 4));
  io::write_labels(dir / "t.nii.gz", truth);

  SUBCASE("uniform logits, focal, four classes") {
    io::write_nifti(dir / "z.nii.gz", g, 4, std::vector<double>(4 * g.size(), 0.0), io::nifti_type::float32);
    REQUIRE(run({"loss", "--pred-logits", str(dir / "z.nii.gz"), "--truth", str(dir / "t.nii.gz"), "--objective",
                 "Focal", "--out", str(dir / "l.json")})
                .code == 0);
    CHECK(std::abs(load(dir / "l.json")["total"].get<double>() - 0.75 * 0.75 * std::log(4.0)) < 1e-12);
    CHECK(std::abs(0.75 * 0.75 * std::log(4.0) - 0.7797) < 1e-4);  // quoted to four decimals, truncated
  }
  SUBCASE("perfect logits, FocalSK*") {
    std::vector<double> z(8 * g.size(), -20.0);
    for (std::size_t i = 0; i < g.size(); ++i) z[truth[i] * g.size() + i] = 20.0;
    io::write_nifti(dir / "z.nii.gz", g, 8, z, io::nifti_type::float32);
    REQUIRE(run({"loss", "--pred-logits", str(dir / "z.nii.gz"), "--truth", str(dir / "t.nii.gz"), "--objective",
                 "FocalSK*", "--out", str(dir / "l.json")})
                .code == 0);
    const json j = load(dir / "l.json");
    CHECK(std::abs(j["total"].get<double>()) < 1e-3);
    CHECK(j["terms"]["focal_sr"].is_number());
  }
  SUBCASE("DiceCE+SR recomposes") {
    std::vector<double> z(8 * g.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::sin(double(i) * 0.37) * 3;
    io::write_nifti(dir / "z.nii.gz", g, 8, z, io::nifti_type::float32);
    REQUIRE(run({"loss", "--pred-logits", str(dir / "z.nii.gz"), "--truth", str(dir / "t.nii.gz"), "--objective",
                 "DiceCE+SR", "--out", str(dir / "l.json")})
                .code == 0);
    const json j = load(dir / "l.json");
    const double recomposed = 0.25 * j["terms"]["dice"].get<double>() + 0.75 * j["terms"]["ce"].get<double>() +
                              j["terms"]["sr"].get<double>();
    CHECK(std::abs(j["total"].get<double>() - recomposed) < 1e-12);
  }
  SUBCASE("errors") {
    io::write_nifti(dir / "z.nii.gz", g, 4, std::vector<double>(4 * g.size(), 0.0), io::nifti_type::float32);
    CHECK(run({"loss", "--pred-logits", str(dir / "z.nii.gz"), "--truth", str(dir / "t.nii.gz"), "--objective",
               "Hinge"})
              .code == cli::kExitError);
    io::write_nifti(dir / "small.nii.gz", VoxelGrid3(Dims{2, 2, 2}), 4, std::vector<double>(32, 0.0),
                    io::nifti_type::float32);
    CHECK(run({"loss", "--pred-logits", str(dir / "small.nii.gz"), "--truth", str(dir / "t.nii.gz"), "--objective",
               "Focal"})
              .code == cli::kExitError);
  }
}

TEST_CASE("validate-dataset") {
  TempDir dir;
  REQUIRE(run({"phantom", "--out", str(dir / "a.nii.gz")}).code == 0);
  io::write_labels(dir / "noaorta.nii.gz", composite_without(cls::aorta));

  spit(dir / "ok.json", R"({"cases": [{"case_id": "a", "label_path": "a.nii.gz", "split": "train"}]})");
  Run r = run({"validate-dataset", "--manifest", str(dir / "ok.json")});
  CHECK(r.code == 0);
  CHECK(r.out.find("cases 1 (train 1, val 0, test 0)") != std::string::npos);
  CHECK(r.out.find("aorta 1/1") != std::string::npos);
  CHECK(r.out.find("OK") != std::string::npos);

  r = run({"validate-dataset", "--manifest", str(dir / "ok.json"), "--expect-paper-splits"});
  CHECK(r.code == cli::kExitError);
  CHECK(r.out.find("expected 378/100/100") != std::string::npos);

  spit(dir / "dup.json", R"({"cases": [
    {"case_id": "a", "label_path": "a.nii.gz", "split": "train"},
    {"case_id": "a", "label_path": "a.nii.gz", "split": "test"}]})");
  r = run({"validate-dataset", "--manifest", str(dir / "dup.json")});
  CHECK(r.code == cli::kExitError);
  CHECK(r.out.find("FAIL duplicate case id a") != std::string::npos);

  spit(dir / "ex.json", R"({"cases": [{"case_id": "n", "label_path": "noaorta.nii.gz", "split": "val"}]})");
  r = run({"validate-dataset", "--manifest", str(dir / "ex.json")});
  CHECK(r.code == cli::kExitError);
  CHECK(r.out.find("n: excludable, missing aorta") != std::string::npos);

  spit(dir / "miss.json", R"({"cases": [
    {"case_id": "a", "label_path": "a.nii.gz", "split": "train"},
    {"case_id": "gone", "label_path": "gone.nii.gz", "split": "train"}]})");
  CHECK(run({"validate-dataset", "--manifest", str(dir / "miss.json")}).code == cli::kExitError);
  r = run({"validate-dataset", "--manifest", str(dir / "miss.json"), "--lenient"});
  CHECK(r.code == 0);
  CHECK(r.out.find("WARN gone") != std::string::npos);

  spit(dir / "bad.json", R"({"cases": [{"case_id": "x"}]})");
  CHECK(run({"validate-dataset", "--manifest", str(dir / "bad.json")}).code == cli::kExitError);
}

TEST_CASE("fit-demo") {
  TempDir dir;
  const Run r = run({"fit-demo", "--kind", "y_bifurcation", "--dims", "20,20,24", "--param", "branch_radius=1",
                     "--param", "tube_radius=1.5", "--param", "branch_spread=5", "--iterations", "150", "--watch",
                     "aorta", "--out", str(dir / "trace.csv"), "--labels-out", str(dir / "fit.nii.gz")});
  REQUIRE(r.code == 0);
  std::istringstream in(slurp(dir / "trace.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,total,dice_mean,focal,focal_sr,components");
  int rows = 0;
  std::string last;
  for (std::string l; std::getline(in, l); ++rows) last = l;
  CHECK(rows == 151);
  CHECK(last.rfind("150,", 0) == 0);
  CHECK(last.substr(last.rfind(',') + 1) == "1");
  const LabelVolume fit = io::read_labels(dir / "fit.nii.gz");
  CHECK(fit.count(cls::aorta) > 0);

  const Run again = run({"fit-demo", "--kind", "y_bifurcation", "--dims", "20,20,24", "--param", "branch_radius=1",
                         "--param", "tube_radius=1.5", "--param", "branch_spread=5", "--iterations", "150",
                         "--watch", "aorta", "--out", str(dir / "trace2.csv")});
  CHECK(slurp(dir / "trace.csv") == slurp(dir / "trace2.csv"));
  CHECK(run({"fit-demo", "--iterations", "0", "--out", str(dir / "x.csv")}).code == cli::kExitError);
  CHECK(run({"fit-demo", "--init", "aorta", "--iterations", "1"}).code == cli::kExitError);
}
