#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = QUANTA_FIXTURES;

struct Result {
  int code = -1;
  std::string err;
};

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("quanta-cli-" + std::to_string(::getpid()) + "-" + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path dir(const std::string& name) const { return root_ / name; }

  Result run(const std::vector<std::string>& args) const {
    const fs::path err = root_ / "stderr.txt";
    std::string cmd = QUANTA_CLI;
    for (const auto& a : args) cmd += " '" + a + "'";
    cmd += " >/dev/null 2>'" + err.string() + "'";
    const int st = std::system(cmd.c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, read(err)};
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = root_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  static json read_json(const fs::path& p) { return json::parse(read(p)); }

  fs::path root_;
};

} // namespace

TEST_F(Cli, QuantogramOutputs) {
  const auto out = dir("q");
  ASSERT_EQ(run({"quantogram", kFixtures + "/quantum_values.csv", "--nsims", "99", "--rank", "1", "--out", out.string()})
                .code,
            0);
  for (const char* f : {"manifest.json", "values.csv", "curve.csv", "boundary.csv", "peak.json", "quantogram.svg"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto peak = read_json(out / "peak.json");
  EXPECT_EQ(peak["manifest"], "manifest.json");
  EXPECT_NEAR(peak["primary"]["quantum"].get<double>(), 4.32, 0.05);
  EXPECT_TRUE(peak["exceeds_boundary"].get<bool>());
  EXPECT_EQ(read(out / "curve.csv").rfind("# manifest: manifest.json\nomega,quantum,height\n", 0), 0u);
  EXPECT_NE(read(out / "quantogram.svg").find("manifest: manifest.json"), std::string::npos);

  const auto m = read_json(out / "manifest.json");
  EXPECT_EQ(m["command"], "quantogram");
  EXPECT_EQ(m["seed"], 20160301u);
  EXPECT_EQ(m["config"]["boundary"]["nsims"], 99);
  ASSERT_EQ(m["inputs"].size(), 1u);
  EXPECT_EQ(m["inputs"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST_F(Cli, DominantPeakOutsideRoiIsFlagged) {
  // Every value is a multiple of 1.68 m, so the strongest peak lies outside 3-6.5 m.
  std::string csv = "value_m\n";
  for (int k = 1; k <= 40; ++k) csv += std::to_string(1.68 * (1 + k % 7)) + "\n";
  const auto in = write("short.csv", csv);
  const auto out = dir("s");
  ASSERT_EQ(run({"quantogram", in.string(), "--nsims", "19", "--rank", "1", "--nboot", "0", "--out", out.string()}).code,
            0);
  const auto peak = read_json(out / "peak.json");
  EXPECT_TRUE(peak["dominant_outside_roi"].get<bool>());
  EXPECT_NEAR(peak["dominant"]["quantum"].get<double>(), 1.68, 0.01);
}

TEST_F(Cli, IdenticalRerunsAndReplay) {
  const std::vector<std::vector<std::string>> commands{
      {"quantogram", kFixtures + "/quantum_values.csv", "--nsims", "49", "--rank", "1", "--nboot", "19"},
      {"perp", kFixtures + "/lattice_noise_points.csv"},
      {"gridfit", kFixtures + "/two_grids_corners.csv", "--nsims", "19", "--rank", "1"},
      {"clean", kFixtures + "/plan.pbm"},
  };
  int k = 0;
  for (auto args : commands) {
    const auto a = dir("a" + std::to_string(k));
    const auto b = dir("b" + std::to_string(k));
    const auto c = dir("c" + std::to_string(k));
    ++k;
    auto ra = args, rb = args;
    ra.insert(ra.end(), {"--out", a.string()});
    rb.insert(rb.end(), {"--out", b.string()});
    ASSERT_EQ(run(ra).code, 0) << args[0];
    ASSERT_EQ(run(rb).code, 0) << args[0];
    ASSERT_EQ(run({"replay", (a / "manifest.json").string(), "--out", c.string()}).code, 0) << args[0];
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().filename() == "manifest.json") continue;
      EXPECT_EQ(read(e.path()), read(b / e.path().filename())) << e.path();
      EXPECT_EQ(read(e.path()), read(c / e.path().filename())) << e.path();
    }
  }
}

TEST_F(Cli, ReplayDetectsChangedInput) {
  const auto in = write("v.csv", "value_m\n4.3\n8.6\n13.0\n17.3\n");
  const auto out = dir("o");
  ASSERT_EQ(run({"quantogram", in.string(), "--nsims", "9", "--rank", "1", "--nboot", "0", "--out", out.string()}).code, 0);
  write("v.csv", "value_m\n4.3\n8.6\n13.0\n17.4\n");
  const auto r = run({"replay", (out / "manifest.json").string(), "--out", dir("o2").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("changed"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsFailBeforeAnyOutput) {
  const std::string in = kFixtures + "/quantum_values.csv";
  for (const auto& bad : std::vector<std::vector<std::string>>{
           {"--roi", "0.4:0.2"},
           {"--roi", "nonsense"},
           {"--nsims", "3", "--rank", "5"},
           {"--jitter", "1.5"},
           {"--omega-step", "0"},
           {"--no-such-flag"},
       }) {
    const auto out = dir("cfg");
    std::vector<std::string> args{"quantogram", in, "--out", out.string()};
    args.insert(args.end(), bad.begin(), bad.end());
    EXPECT_EQ(run(args).code, 2) << bad[0];
    EXPECT_FALSE(fs::exists(out)) << bad[0];
  }
  EXPECT_EQ(run({"perp", kFixtures + "/noise_points.csv", "--link-distance", "-1", "--out", dir("p").string()}).code, 2);
  EXPECT_EQ(run({"clean", kFixtures + "/plan.pbm", "--crop", "5,5,1,1", "--out", dir("c").string()}).code, 2);
  EXPECT_EQ(run({"clean", kFixtures + "/plan.pbm", "--min-circularity", "2", "--out", dir("c").string()}).code, 2);
  EXPECT_EQ(run({"gridfit", kFixtures + "/two_grids_corners.csv", "--quantum", "0", "--out", dir("g").string()}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST_F(Cli, InputErrorsWriteDiagnostic) {
  const auto out = dir("missing");
  const auto r = run({"quantogram", (root_ / "nope.csv").string(), "--out", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos);

  const auto bad = write("bad.csv", "value_m\n1.0\nabc\n");
  const auto out2 = dir("bad");
  EXPECT_EQ(run({"quantogram", bad.string(), "--nsims", "9", "--rank", "1", "--out", out2.string()}).code, 1);
  const auto d = read_json(out2 / "diagnostic.json");
  EXPECT_EQ(d["exit_code"], 1);
  EXPECT_NE(d["error"].get<std::string>().find("line 3"), std::string::npos);
}

TEST_F(Cli, DuplicatePointIdsNamed) {
  const auto in = write("dup.csv", "id,x,y\na,0,0\nb,1,0\nc,0,1\na,2,2\nd,1,1\ne,3,3\n");
  const auto r = run({"perp", in.string(), "--out", dir("d").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("duplicate id a"), std::string::npos) << r.err;
}

TEST_F(Cli, CoincidentPointsNamed) {
  const auto in = write("same.csv", "id,x,y\np1,0,0\np2,1,0\np3,0,0\np4,5,5\np5,2,1\np6,3,3\n");
  const auto r = run({"perp", in.string(), "--out", dir("d").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("p1"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("p3"), std::string::npos) << r.err;
}

TEST_F(Cli, AllWhiteRasterIsDegenerate) {
  const auto in = write("white.pbm", "P1\n4 3\n0 0 0 0\n0 0 0 0\n0 0 0 0\n");
  const auto out = dir("w");
  EXPECT_EQ(run({"clean", in.string(), "--out", out.string()}).code, 3);
  const auto d = read_json(out / "diagnostic.json");
  EXPECT_EQ(d["exit_code"], 3);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST_F(Cli, PerpFixtures) {
  const auto a = dir("lattice");
  ASSERT_EQ(run({"perp", kFixtures + "/lattice_noise_points.csv", "--out", a.string()}).code, 0);
  const auto pa = read_json(a / "perp.json");
  EXPECT_EQ(pa["axiality"]["classification"], "perpendicular");
  EXPECT_GE(pa["clusters"].get<int>(), 2);
  EXPECT_LT(std::abs(pa["grid_orientation_deg"].get<double>() - 20.0), 2.0);

  const auto b = dir("noise");
  ASSERT_EQ(run({"perp", kFixtures + "/noise_points.csv", "--out", b.string()}).code, 0);
  EXPECT_EQ(read_json(b / "perp.json")["axiality"]["classification"], "neither");
  EXPECT_EQ(read(b / "points.csv").rfind("# manifest: manifest.json\nid,x,y,accepted,gridded,cluster\n", 0), 0u);

  const auto c = dir("raster");
  ASSERT_EQ(run({"perp", kFixtures + "/plan.pbm", "--scale", "0.05", "--crop", "0,0,330,300", "--out", c.string()}).code,
            0);
  EXPECT_TRUE(fs::exists(c / "clean.json"));
  EXPECT_EQ(read_json(c / "perp.json")["units"], "metres");
}

TEST_F(Cli, CleanKeepsPlantedDots) {
  const auto truth = read_json(kFixtures + "/plan_truth.json");
  const auto box = truth["crop_without_legend"];
  const std::string crop = std::to_string(box[0].get<int>()) + "," + std::to_string(box[1].get<int>()) + "," +
                           std::to_string(box[2].get<int>()) + "," + std::to_string(box[3].get<int>());
  const auto out = dir("c");
  ASSERT_EQ(run({"clean", kFixtures + "/plan.pbm", "--crop", crop, "--out", out.string()}).code, 0);
  const auto report = read_json(out / "clean.json");
  EXPECT_EQ(report["kept"].size(), truth["dots"].get<std::size_t>());

  // Without the crop the legend marks survive as well.
  const auto full = dir("f");
  ASSERT_EQ(run({"clean", kFixtures + "/plan.pbm", "--out", full.string()}).code, 0);
  EXPECT_GT(read_json(full / "clean.json")["kept"].size(), truth["dots"].get<std::size_t>());
  const std::string svg = read(out / "clean.svg");
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
}

TEST_F(Cli, GridfitComparisonMode) {
  const auto out = dir("g");
  ASSERT_EQ(run({"gridfit", kFixtures + "/two_grids_corners.csv", "--nsims", "19", "--rank", "1", "--quantum", "4.75",
                 "--out", out.string()})
                .code,
            0);
  EXPECT_TRUE(fs::exists(out / "grid_fitted.svg"));
  EXPECT_TRUE(fs::exists(out / "grid_override.svg"));
  const auto grids = read_json(out / "grids.json");
  ASSERT_EQ(grids["fits"].size(), 2u);
  EXPECT_TRUE(grids["comparison"]["fitted_is_better"].get<bool>());
  const auto assign = read_json(out / "assignments.json");
  ASSERT_EQ(assign["unassigned"].size(), 1u);
  EXPECT_EQ(assign["unassigned"][0], "X1");
}

TEST_F(Cli, GridfitSingleBuildingWarns) {
  const auto in = write("one.csv", "building,corner_index,x,y\nB,0,0,0\nB,1,8.64,0\nB,2,8.64,4.32\nB,3,0,4.32\n");
  const auto out = dir("one");
  const auto r = run({"gridfit", in.string(), "--nsims", "9", "--rank", "1", "--out", out.string()});
  EXPECT_NE(r.err.find("warning"), std::string::npos) << r.err;
  EXPECT_TRUE(fs::exists(out / "assignments.json"));
  EXPECT_FALSE(read_json(out / "assignments.json")["warnings"].empty());
}
