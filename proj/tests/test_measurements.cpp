#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "quanta/measurements.hpp"
#include "quanta/random.hpp"

namespace ms = quanta::measurements;
using ms::PositionRole;
using quanta::MeasurementSet;

namespace {

ms::MeasurementLine line_of(std::vector<double> pos, std::vector<PositionRole> roles) {
  return {"S", "L1", ms::LineOrientation::EastWest, std::move(pos), std::move(roles)};
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / ("quanta_test_" + name);
  std::ofstream(p) << body;
  return p;
}

ms::MeasurementLine random_line(quanta::Rng& rng, std::size_t n) {
  ms::MeasurementLine l = line_of({}, {});
  for (std::size_t i = 0; i < n; ++i) {
    l.positions.push_back(rng.uniform(0.0, 50.0));
    l.roles.push_back(PositionRole::ObjectBoundary);
  }
  return l;
}

} // namespace

TEST(CentreLines, Midpoints) {
  const auto a = ms::centre_lines(line_of({10.0, 10.6}, {PositionRole::InsideFace, PositionRole::OutsideFace}));
  ASSERT_EQ(a.positions.size(), 1u);
  EXPECT_NEAR(a.positions[0], 10.3, 1e-12);

  const auto b = ms::centre_lines(line_of({0.0, 0.5, 7.0, 7.5}, {PositionRole::OutsideFace, PositionRole::InsideFace,
                                                                 PositionRole::InsideFace, PositionRole::OutsideFace}));
  ASSERT_EQ(b.positions.size(), 2u);
  EXPECT_NEAR(b.positions[0], 0.25, 1e-12);
  EXPECT_NEAR(b.positions[1], 7.25, 1e-12);
}

TEST(CentreLines, ObjectBoundaryListedTwice) {
  const auto c = ms::centre_lines(line_of({0.0, 0.5, 3.0, 7.0, 7.5},
                                          {PositionRole::OutsideFace, PositionRole::InsideFace, PositionRole::ObjectBoundary,
                                           PositionRole::InsideFace, PositionRole::OutsideFace}));
  EXPECT_EQ(c.positions.size(), 2u + 2u);
  EXPECT_EQ(std::count(c.positions.begin(), c.positions.end(), 3.0), 2);
}

TEST(CentreLines, OddFaceCountIsAPairingError) {
  const auto l = line_of({0.0, 0.5, 7.0}, {PositionRole::OutsideFace, PositionRole::InsideFace, PositionRole::InsideFace});
  try {
    ms::centre_lines(l);
    FAIL() << "expected a pairing error";
  } catch (const quanta::PairingError& e) {
    EXPECT_NE(std::string(e.what()).find("S/L1"), std::string::npos);
    EXPECT_EQ(e.exit_code(), 1);
  }
}

TEST(CentreLines, HalvesFaceDerivedCount) {
  quanta::Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    auto l = line_of({}, {});
    const std::size_t pairs = 1 + rng.below(8);
    const std::size_t objects = rng.below(4);
    double x = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
      l.positions.push_back(x += rng.uniform(1.0, 6.0));
      l.roles.push_back(PositionRole::OutsideFace);
      l.positions.push_back(x += 0.5);
      l.roles.push_back(PositionRole::InsideFace);
    }
    for (std::size_t o = 0; o < objects; ++o) {
      l.positions.push_back(x += rng.uniform(1.0, 3.0));
      l.roles.push_back(PositionRole::ObjectBoundary);
    }
    const auto c = ms::centre_lines(l);
    EXPECT_EQ(c.positions.size(), pairs + 2 * objects);
    EXPECT_EQ(std::count(c.roles.begin(), c.roles.end(), PositionRole::Centre), static_cast<long>(pairs));
  }
}

TEST(AllPairDifferences, Examples) {
  const auto d = ms::all_pair_differences(line_of({0.0, 4.8, 9.6}, std::vector<PositionRole>(3, PositionRole::Centre)));
  ASSERT_EQ(d.size(), 3u);
  const auto s = sorted(d.values);
  EXPECT_NEAR(s[0], 4.8, 1e-12);
  EXPECT_NEAR(s[1], 4.8, 1e-12);
  EXPECT_NEAR(s[2], 9.6, 1e-12);
  EXPECT_EQ(d.tags[0], "S/L1");

  EXPECT_TRUE(ms::all_pair_differences(line_of({0.0, 0.0}, std::vector<PositionRole>(2, PositionRole::Centre))).empty());
  EXPECT_THROW(ms::all_pair_differences(line_of({1.0}, {PositionRole::Centre})), quanta::ValidationError);
}

TEST(AllPairDifferences, CountAndTranslationInvariance) {
  quanta::Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng.below(20);
    auto l = random_line(rng, n);
    const auto d = ms::all_pair_differences(l);
    EXPECT_EQ(d.size(), n * (n - 1) / 2);
    const double c = rng.uniform(-100.0, 100.0);
    for (double& p : l.positions) p += c;
    const auto shifted = sorted(ms::all_pair_differences(l).values);
    const auto base = sorted(d.values);
    ASSERT_EQ(shifted.size(), base.size());
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(shifted[i], base[i], 1e-9);
  }
}

TEST(Pool, UnionIdentityAssociativityCommutativity) {
  MeasurementSet a, b, c, empty;
  a.add(4.8, "a");
  b.add(9.6, "b");
  c.add(1.5, "c");
  c.add(2.5, "c");
  const std::vector<MeasurementSet> ab{a, b};
  const auto u = ms::pool(ab);
  EXPECT_EQ(u.values, (std::vector<double>{4.8, 9.6}));
  EXPECT_EQ(u.tags, (std::vector<std::string>{"a", "b"}));

  const std::vector<MeasurementSet> ae{a, empty};
  EXPECT_EQ(ms::pool(ae).values, a.values);

  const std::vector<MeasurementSet> left{ms::pool(ab), c};
  const std::vector<MeasurementSet> bc{b, c};
  const std::vector<MeasurementSet> right{a, ms::pool(bc)};
  EXPECT_EQ(ms::pool(left).values, ms::pool(right).values);
  const std::vector<MeasurementSet> cba{c, b, a};
  EXPECT_EQ(sorted(ms::pool(cba).values), sorted(ms::pool(left).values));
}

TEST(Tables, LinesRoundTrip) {
  const auto p = write_temp("lines.csv",
                            "site,line,orientation,position_m,role\n"
                            "# comment\n"
                            "A,1,E-W,0.0,outside\n"
                            "A,1,E-W,0.5,inside\n"
                            "A,1,E-W,3.0,object\n"
                            "A,1,E-W,9.6,inside\n"
                            "A,1,E-W,10.1,outside\n"
                            "A,2,N-S,1.0,object\n"
                            "A,2,N-S,5.0,object\n");
  const auto t = ms::load_tables(p.string());
  EXPECT_EQ(t.format, ms::TableFormat::MeasurementLines);
  ASSERT_EQ(t.lines.size(), 2u);
  EXPECT_EQ(t.lines[0].positions.size(), 5u);
  EXPECT_EQ(t.lines[1].orientation, ms::LineOrientation::NorthSouth);
  const auto m = ms::lines_to_measurements(t.lines);
  // line 1: {0.25, 3, 3, 9.85} → 6 pairs minus one zero; line 2: {1,1,5,5} → 6 minus two zeros.
  EXPECT_EQ(m.size(), 5u + 4u);
  std::filesystem::remove(p);
}

TEST(Tables, DimsGiveTwoValuesPerBuilding) {
  std::ostringstream body;
  body << "building,width_m,depth_m,source\n";
  for (int i = 0; i < 55; ++i) body << "B" << i << "," << 4.0 + 0.1 * i << "," << 9.0 + 0.05 * i << ",T1\n";
  const auto p = write_temp("dims.csv", body.str());
  const auto t = ms::load_tables(p.string());
  EXPECT_EQ(t.format, ms::TableFormat::BuildingDims);
  EXPECT_EQ(ms::dims_to_measurements(t.dims).size(), 110u);
  std::filesystem::remove(p);
}

TEST(Tables, ValueTableRowsMapOneToOne) {
  std::ostringstream body;
  body << "value_m,source\n";
  for (int i = 0; i < 110; ++i) body << 3.0 + 0.07 * i << ",survey\n";
  const auto p = write_temp("values.csv", body.str());
  const auto t = ms::load_tables(p.string());
  EXPECT_EQ(t.format, ms::TableFormat::Values);
  EXPECT_EQ(t.values.size(), 110u);
  std::filesystem::remove(p);
}

TEST(Tables, Errors) {
  const auto empty = write_temp("empty.csv", "");
  EXPECT_THROW(ms::load_tables(empty.string()), quanta::ValidationError);

  const auto neg = write_temp("neg.csv", "building,width_m,depth_m,source\nB1,-1,5,T\n");
  EXPECT_THROW(ms::load_tables(neg.string()), quanta::ValidationError);

  const auto bad = write_temp("bad.csv", "building,width_m,depth_m,source\nB1,4,5,T\nB2,abc,5,T\n");
  try {
    ms::load_tables(bad.string());
    FAIL() << "expected an input error";
  } catch (const quanta::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }

  const auto ragged = write_temp("ragged.csv", "value_m\n3.0\n4.0,extra\n");
  EXPECT_THROW(ms::load_tables(ragged.string()), quanta::InputError);

  const auto header = write_temp("header.csv", "width,depth\n1,2\n");
  EXPECT_THROW(ms::load_tables(header.string()), quanta::InputError);

  EXPECT_THROW(ms::load_tables("/nonexistent/quanta.csv"), quanta::InputError);
  for (const auto& p : {empty, neg, bad, ragged, header}) std::filesystem::remove(p);
}
