#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <set>
#include <vector>

#include "quanta/postholes.hpp"
#include "quanta/random.hpp"

namespace ph = quanta::postholes;
namespace cs = quanta::circstats;
using quanta::Point;
using quanta::PointPattern;
using quanta::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

Point rotate(Point p, double deg) {
  const double a = deg * kPi / 180.0;
  return {p.x * std::cos(a) - p.y * std::sin(a), p.x * std::sin(a) + p.y * std::cos(a)};
}

void add_lattice(std::vector<Point>& pts, Point origin, double spacing, int nx, int ny, double orientation_deg,
                 double jitter, Rng& rng) {
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const Point local = rotate({i * spacing, j * spacing}, orientation_deg);
      pts.push_back({origin.x + local.x + rng.normal(0.0, jitter), origin.y + local.y + rng.normal(0.0, jitter)});
    }
}

double diff_mod(double a, double b, double m) {
  const double d = std::fmod(std::abs(a - b), m);
  return std::min(d, m - d);
}

// Hand-built uniform + von Mises report for classification examples.
ph::PerpReport report_with(double mu_deg, double kappa, double weight) {
  ph::PerpReport r;
  r.mixture.kind = cs::MixtureKind::UniformVonMises;
  r.mixture.weights = {1.0 - weight, weight};
  r.mixture.components = {{ph::direction_to_circle(mu_deg), kappa}};
  r.mixture.converged = true;
  r.grid_orientation_deg = mu_deg;
  r.gridded_fraction = weight;
  return r;
}

} // namespace

TEST(RejectIsolated, Examples) {
  auto pair = PointPattern::from_points({{0, 0}, {1, 0}});
  pair = ph::reject_isolated(pair, 2.0);
  EXPECT_TRUE(pair.accepted[0] && pair.accepted[1]);

  std::vector<Point> pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {100, 0}};
  const auto p = ph::reject_isolated(PointPattern::from_points(pts), 10.0);
  EXPECT_EQ(std::count(p.accepted.begin(), p.accepted.end(), true), 4);
  EXPECT_FALSE(p.accepted[4]);

  EXPECT_EQ(ph::reject_isolated(PointPattern{}, 1.0).size(), 0u);
  EXPECT_THROW(ph::reject_isolated(PointPattern{}, 0.0), quanta::ConfigError);
}

TEST(RejectIsolated, SinglePassAgainstOriginal) {
  // The middle point keeps its neighbours accepted even though it needs two.
  const auto p = ph::reject_isolated(PointPattern::from_points({{0, 0}, {1, 0}, {2, 0}}), 1.0, 2);
  EXPECT_FALSE(p.accepted[0]);
  EXPECT_TRUE(p.accepted[1]);
  EXPECT_FALSE(p.accepted[2]);
}

TEST(NearestNeighbour, Examples) {
  const auto a = ph::nn_directions(PointPattern::from_points({{0, 0}, {1, 0}}));
  EXPECT_NEAR(a.degrees[0], 0.0, 1e-12);
  EXPECT_NEAR(a.degrees[1], 180.0, 1e-12);

  const auto b = ph::nn_directions(PointPattern::from_points({{0, 0}, {0, 2}, {5, 0}}));
  EXPECT_NEAR(b.degrees[2], 180.0, 1e-12);
  EXPECT_NEAR(b.distances[2], 5.0, 1e-12);

  std::vector<Point> lattice;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) lattice.push_back({double(i), double(j)});
  for (double d : ph::nn_directions(PointPattern::from_points(lattice)).degrees) {
    const double r = std::fmod(d, 90.0);
    EXPECT_TRUE(r < 1e-9 || r > 90.0 - 1e-9) << d;
  }
}

TEST(NearestNeighbour, TiesResolveToLowestPoint) {
  // (1,1) is equidistant from (0,1) and (1,0) and (2,1) and (1,2).
  const auto d = ph::nn_directions(PointPattern::from_points({{1, 1}, {2, 1}, {1, 2}, {0, 1}, {1, 0}}));
  EXPECT_NEAR(d.degrees[0], 180.0, 1e-12);
}

TEST(NearestNeighbour, ErrorsAndRejectedPointsSkipped) {
  auto dup = PointPattern::from_points({{0, 0}, {3, 3}, {0, 0}});
  dup.ids = {"a", "b", "c"};
  try {
    ph::nn_directions(dup);
    FAIL() << "expected a geometry error";
  } catch (const quanta::GeometryError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("a"), std::string::npos);
    EXPECT_NE(msg.find("c"), std::string::npos);
  }
  EXPECT_THROW(ph::nn_directions(PointPattern::from_points({{0, 0}})), quanta::InputError);

  auto p = PointPattern::from_points({{0, 0}, {1, 0}, {0, 5}});
  p.accepted[1] = false;
  const auto d = ph::nn_directions(p);
  ASSERT_EQ(d.point_index.size(), 2u);
  EXPECT_NEAR(d.degrees[0], 90.0, 1e-12);
}

TEST(NearestNeighbour, RotationEquivariant) {
  Rng rng(12);
  std::vector<Point> pts;
  for (int i = 0; i < 60; ++i) pts.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
  const auto base = ph::nn_directions(PointPattern::from_points(pts));
  for (double delta : {17.0, 90.0, 203.5}) {
    std::vector<Point> rot;
    for (const auto& p : pts) rot.push_back(rotate(p, delta));
    const auto r = ph::nn_directions(PointPattern::from_points(rot));
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(diff_mod(r.degrees[i], base.degrees[i] + delta, 360.0), 1e-8);
  }
}

TEST(Perpendicularity, AxisDirectionsWithNoise) {
  Rng rng(400);
  std::vector<double> dirs;
  for (int i = 0; i < 400; ++i)
    dirs.push_back(rng.uniform() < 0.1 ? rng.uniform(0.0, 360.0) : 90.0 * static_cast<double>(rng.below(4)));
  const auto r = ph::perpendicularity_analysis(dirs);
  EXPECT_LT(diff_mod(r.grid_orientation_deg, 0.0, 90.0), 2.0);
  EXPECT_EQ(r.axiality.classification, cs::Axiality::Perpendicular);
  EXPECT_TRUE(r.perpendicular);
  EXPECT_GT(r.gridded_fraction, 0.85);
  EXPECT_EQ(r.folded_deg.size(), 400u);
}

TEST(Perpendicularity, CollinearRejected) {
  Rng rng(1);
  std::vector<double> dirs;
  for (int i = 0; i < 50; ++i) dirs.push_back(rng.below(2) ? 30.0 : 210.0);
  const auto r = ph::perpendicularity_analysis(dirs);
  EXPECT_EQ(r.axiality.classification, cs::Axiality::Collinear);
  EXPECT_FALSE(r.perpendicular);
}

TEST(Perpendicularity, UniformDirections) {
  Rng rng(1000);
  std::vector<double> dirs;
  for (int i = 0; i < 1000; ++i) dirs.push_back(rng.uniform(0.0, 360.0));
  const auto r = ph::perpendicularity_analysis(dirs);
  EXPECT_LT(r.gridded_fraction, 0.2);
  EXPECT_EQ(r.axiality.classification, cs::Axiality::Neither);
  EXPECT_THROW(ph::perpendicularity_analysis({1.0, 2.0, 3.0, 4.0}), quanta::InputError);
}

TEST(Perpendicularity, InvariantUnderQuarterTurns) {
  Rng rng(77);
  std::vector<Point> pts;
  add_lattice(pts, {0, 0}, 5.0, 8, 8, 20.0, 0.2, rng);
  for (int i = 0; i < 20; ++i) pts.push_back({rng.uniform(-20, 60), rng.uniform(-10, 60)});
  const auto base = ph::perpendicularity_analysis(ph::nn_directions(PointPattern::from_points(pts)).degrees);
  EXPECT_LT(diff_mod(base.grid_orientation_deg, 20.0, 90.0), 2.0);
  for (double q : {90.0, 180.0, 270.0}) {
    std::vector<Point> rot;
    for (const auto& p : pts) rot.push_back(rotate(p, q));
    const auto r = ph::perpendicularity_analysis(ph::nn_directions(PointPattern::from_points(rot)).degrees);
    EXPECT_LT(diff_mod(r.grid_orientation_deg, base.grid_orientation_deg, 90.0), 1e-6);
  }
}

TEST(Classify, ResponsibilityExamples) {
  // Oracle (mpmath): 0.7·f_vM(μ) / (0.7·f_vM(μ) + 0.3/2π) with κ = 8.
  const auto r = report_with(20.0, 8.0, 0.7);
  EXPECT_NEAR(ph::gridded_responsibility(r, 20.0), 0.942089065702204617, 1e-12);
  EXPECT_NEAR(ph::gridded_responsibility(r, 20.0 + 45.0), 1.8307071852186347e-6, 1e-15);
  EXPECT_NEAR(ph::gridded_responsibility(r, 110.0), ph::gridded_responsibility(r, 20.0), 1e-12);

  const auto flat = report_with(20.0, 0.0, 0.7);
  for (double d : {0.0, 33.0, 71.0}) EXPECT_NEAR(ph::gridded_responsibility(flat, d), 0.7, 1e-12);

  auto p = PointPattern::from_points({{0, 0}, {1, 0}, {2, 0}});
  ph::NearestNeighbourDirections dirs{{0, 1, 2}, {20.0, 65.0, 200.0}, {1, 1, 1}};
  const auto c = ph::classify_points(p, dirs, r);
  EXPECT_TRUE(c.gridded[0]);
  EXPECT_FALSE(c.gridded[1]);
  EXPECT_TRUE(c.gridded[2]);
  const auto all = ph::classify_points(p, dirs, flat).gridded;
  EXPECT_EQ(std::count(all.begin(), all.end(), true), 3);
  const auto none = ph::classify_points(p, dirs, flat, 0.75).gridded;
  EXPECT_EQ(std::count(none.begin(), none.end(), true), 0);

  auto bad = r;
  bad.mixture.converged = false;
  EXPECT_THROW(ph::classify_points(p, dirs, bad), quanta::DegenerateError);
}

TEST(Classify, ThresholdMonotone) {
  Rng rng(9);
  std::vector<Point> pts;
  add_lattice(pts, {0, 0}, 4.0, 7, 7, 35.0, 0.3, rng);
  for (int i = 0; i < 30; ++i) pts.push_back({rng.uniform(-30, 40), rng.uniform(-5, 40)});
  const auto p = PointPattern::from_points(pts);
  const auto dirs = ph::nn_directions(p);
  const auto rep = ph::perpendicularity_analysis(dirs.degrees);
  std::vector<bool> prev(p.size(), true);
  for (double t : {0.0, 0.2, 0.5, 0.8, 0.95, 1.0}) {
    const auto c = ph::classify_points(p, dirs, rep, t);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_TRUE(!c.gridded[i] || prev[i]);
    prev = c.gridded;
  }
}

TEST(Cluster, Examples) {
  std::vector<Point> pts;
  for (int i = 0; i < 6; ++i) pts.push_back({double(i % 3), double(i / 3)});
  for (int i = 0; i < 8; ++i) pts.push_back({100.0 + i % 4, double(i / 4)});
  auto p = PointPattern::from_points(pts);
  std::fill(p.gridded.begin(), p.gridded.end(), true);
  const auto c = ph::spatial_cluster(p, 10.0);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(c.cluster[i], 2);
  for (int i = 6; i < 14; ++i) EXPECT_EQ(c.cluster[i], 1);

  std::vector<Point> chain;
  for (int i = 0; i < 10; ++i) chain.push_back({9.0 * i, 0.0});
  auto ch = PointPattern::from_points(chain);
  std::fill(ch.gridded.begin(), ch.gridded.end(), true);
  const auto cc = ph::spatial_cluster(ch, 10.0);
  for (const auto& id : cc.cluster) EXPECT_EQ(id, 1);

  auto three = PointPattern::from_points({{0, 0}, {1, 0}, {2, 0}});
  std::fill(three.gridded.begin(), three.gridded.end(), true);
  for (const auto& id : ph::spatial_cluster(three, 10.0).cluster) EXPECT_FALSE(id.has_value());
  EXPECT_THROW(ph::spatial_cluster(three, 0.0), quanta::ConfigError);
}

TEST(Cluster, BackgroundPointsNeverClusteredAndTieOrder) {
  std::vector<Point> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({50.0 + i, 0.0});
  for (int i = 0; i < 5; ++i) pts.push_back({double(i), 0.0});
  pts.push_back({2.0, 1.0});
  auto p = PointPattern::from_points(pts);
  std::fill(p.gridded.begin(), p.gridded.end(), true);
  p.gridded[10] = false;
  const auto c = ph::spatial_cluster(p, 1.5);
  EXPECT_EQ(c.cluster[5], 1); // equal sizes: leftmost first
  EXPECT_EQ(c.cluster[0], 2);
  EXPECT_FALSE(c.cluster[10].has_value());
  EXPECT_NO_THROW(c.validate());
}

TEST(Cluster, OrderIndependent) {
  Rng rng(31);
  std::vector<Point> pts;
  add_lattice(pts, {0, 0}, 3.0, 5, 5, 0.0, 0.2, rng);
  add_lattice(pts, {60, 10}, 3.0, 4, 6, 0.0, 0.2, rng);
  add_lattice(pts, {0, 80}, 3.0, 2, 2, 0.0, 0.2, rng);
  auto cluster_of = [](const std::vector<Point>& v) {
    auto p = PointPattern::from_points(v);
    std::fill(p.gridded.begin(), p.gridded.end(), true);
    return ph::spatial_cluster(p, 5.0);
  };
  const auto base = cluster_of(pts);
  auto shuffled = pts;
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  const auto s = cluster_of(shuffled);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto j = static_cast<std::size_t>(std::find(shuffled.begin(), shuffled.end(), pts[i]) - shuffled.begin());
    EXPECT_EQ(base.cluster[i], s.cluster[j]);
  }
}

TEST(Pipeline, TwoOffsetLattices) {
  Rng rng(2016);
  std::vector<Point> pts;
  add_lattice(pts, {0, 0}, 5.0, 8, 8, 15.0, 0.15, rng);
  add_lattice(pts, {150, 40}, 5.0, 7, 9, 15.0, 0.15, rng);
  const std::size_t n_lattice = pts.size();
  for (int i = 0; i < 40; ++i) pts.push_back({rng.uniform(-30, 220), rng.uniform(-20, 120)});

  auto p = PointPattern::from_points(pts);
  p = ph::reject_isolated(p, ph::default_isolation_radius(p));
  const auto dirs = ph::nn_directions(p);
  const auto rep = ph::perpendicularity_analysis(dirs.degrees);
  EXPECT_TRUE(rep.perpendicular);
  EXPECT_LT(diff_mod(rep.grid_orientation_deg, 15.0, 90.0), 2.0);
  p = ph::classify_points(p, dirs, rep);
  p = ph::spatial_cluster(p, ph::default_link_distance(p));

  std::size_t gridded = 0;
  std::set<int> clusters;
  for (std::size_t i = 0; i < n_lattice; ++i) {
    if (p.gridded[i]) ++gridded;
    if (p.cluster[i]) clusters.insert(*p.cluster[i]);
  }
  EXPECT_GE(static_cast<double>(gridded), 0.8 * static_cast<double>(n_lattice));
  EXPECT_GE(clusters.size(), 2u);
}

TEST(Histogram, Bins) {
  const auto h = ph::orientation_histogram({0.0, 4.9, 5.0, 89.9, 90.0, 181.0}, 5.0);
  ASSERT_EQ(h.size(), 18u);
  EXPECT_EQ(h[0].count, 4u);
  EXPECT_EQ(h[1].count, 1u);
  EXPECT_EQ(h[17].count, 1u);
  const auto r = ph::orientation_histogram({44.0}, 5.0, 90.0, 45.0);
  EXPECT_EQ(r[17].count, 1u);
  EXPECT_THROW(ph::orientation_histogram({}, 0.0), quanta::ConfigError);
}

TEST(Points, ParseTable) {
  std::istringstream in("id,x,y,accepted\np1,0,0,1\np2,3.5,-1,0\n");
  const auto p = ph::parse_points(quanta::csv::read(in));
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.ids[1], "p2");
  EXPECT_EQ(p.points[1], (Point{3.5, -1.0}));
  EXPECT_TRUE(p.accepted[1]);

  std::istringstream dup("id,x,y\np1,0,0\np1,1,1\n");
  EXPECT_THROW(ph::parse_points(quanta::csv::read(dup)), quanta::ValidationError);
  std::istringstream bad("x,y\n0,0\n");
  EXPECT_THROW(ph::parse_points(quanta::csv::read(bad)), quanta::InputError);
}
