#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nero/geometry.hpp"

using namespace nero;

TEST_CASE("normalize maps bounds onto [-1,1] and inverts") {
  SceneBounds b;
  b.min_x = 2.0;
  b.max_x = 10.0;
  b.min_y = -3.0;
  b.max_y = 5.0;
  b.margin = 0.0;

  const NormCoord2 center = normalize(Coord2(6.0, 1.0), b);
  CHECK(center.x == Catch::Approx(0.0).margin(1e-15));
  CHECK(center.y == Catch::Approx(0.0).margin(1e-15));

  const NormCoord2 corner = normalize(Coord2(2.0, -3.0), b);
  CHECK(corner.x == -1.0);
  CHECK(corner.y == -1.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dx(2.0, 10.0), dy(-3.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Coord2 p(dx(rng), dy(rng));
    const Coord2 q = denormalize(normalize(p, b), b);
    CHECK((p - q).norm() <= 1e-9);
  }

  SECTION("monotone per axis") {
    double prev = -2.0;
    for (double x = 2.0; x <= 10.0; x += 0.37) {
      const double nx = normalize(Coord2(x, 0.0), b).x;
      CHECK(nx > prev);
      prev = nx;
    }
  }

  SECTION("margin expands the mapped extent") {
    SceneBounds m = b;
    m.margin = 0.01;
    const NormCoord2 c = normalize(Coord2(2.0, -3.0), m);
    CHECK(c.x > -1.0);
    CHECK(c.y > -1.0);
  }

  SECTION("clamping is counted") {
    std::uint64_t clamped = 0;
    const NormCoord2 out = normalize(Coord2(100.0, 0.0), b, &clamped);
    CHECK(out.x == 1.0);
    CHECK(clamped == 1);
  }

  SECTION("degenerate bounds are rejected") {
    SceneBounds bad = b;
    bad.max_x = bad.min_x;
    CHECK_THROWS_AS(normalize(Coord2(0, 0), bad), Error);
  }
}

TEST_CASE("pinhole projection") {
  CameraFrame cam;
  cam.width = 4;
  cam.height = 4;
  cam.fx = cam.fy = 1.0;
  cam.cx = cam.cy = 0.0;

  SECTION("unit point on the optical axis") {
    const Projection p = project(Eigen::Vector3d(0, 0, 1), cam);
    REQUIRE(p.in_view());
    CHECK(p.pixel.u == 0.0);
    CHECK(p.pixel.v == 0.0);
    CHECK(p.pixel.depth == 1.0);
  }

  SECTION("points behind the camera are flagged") {
    const Projection p = project(Eigen::Vector3d(0, 0, -1), cam);
    CHECK(p.status == ProjectStatus::behind);
  }

  SECTION("published driving-camera intrinsics, hand-computed pixel") {
    CameraFrame kitti;
    kitti.fx = 718.856;
    kitti.fy = 718.856;
    kitti.cx = 607.1928;
    kitti.cy = 185.2157;
    kitti.width = 1241;
    kitti.height = 376;
    const Projection p = project(Eigen::Vector3d(1, 0, 10), kitti);
    REQUIRE(p.in_view());
    CHECK(p.pixel.u == Catch::Approx(679.0784).epsilon(1e-12));
    CHECK(p.pixel.v == Catch::Approx(185.2157).epsilon(1e-12));
    CHECK(p.pixel.depth == 10.0);
  }

  SECTION("out-of-bounds pixels are flagged, not errors") {
    cam.cx = 2.0;
    cam.cy = 2.0;
    const Projection p = project(Eigen::Vector3d(10, 0, 1), cam);
    CHECK(p.status == ProjectStatus::out_of_bounds);
  }
}

TEST_CASE("projection round-trips through the pixel ray") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  CameraFrame cam;
  cam.width = 640;
  cam.height = 480;
  cam.fx = 500;
  cam.fy = 480;
  cam.cx = 320;
  cam.cy = 240;
  // Random but valid pose.
  const Eigen::AngleAxisd rot(0.4, Eigen::Vector3d(0.2, 1.0, -0.3).normalized());
  cam.R = rot.toRotationMatrix();
  cam.t = Eigen::Vector3d(0.5, -1.0, 2.0);
  REQUIRE(cam.rotation_error() < 1e-12);

  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d w(5 * dist(rng), 5 * dist(rng), 5 * dist(rng));
    const Projection p = project(w, cam);
    if (!p.in_view()) continue;
    // March the reconstructed camera ray out to the stored depth.
    const Eigen::Vector3d pc_rec =
        pixel_ray_cam(cam, p.pixel.u, p.pixel.v) * p.pixel.depth;
    const Eigen::Vector3d pc_true = cam.R * w + cam.t;
    CHECK((pc_rec - pc_true).norm() <= 1e-9);

    // Scaling the camera-frame point along its own ray keeps (u, v).
    const Eigen::Vector3d w2 =
        cam.R.transpose() * (pc_true * 1.7) - cam.R.transpose() * cam.t;
    const Projection p2 = project(w2, cam);
    if (p2.in_view()) {
      CHECK(p2.pixel.u == Catch::Approx(p.pixel.u).margin(1e-9));
      CHECK(p2.pixel.v == Catch::Approx(p.pixel.v).margin(1e-9));
    }
  }
}

TEST_CASE("pixel sampling") {
  Image3f img;
  img.resize(3, 1);
  img.set(0, 0, {0.f, 0.f, 0.f});
  img.set(1, 0, {1.f, 1.f, 1.f});
  img.set(2, 0, {0.25f, 0.5f, 0.75f});

  SECTION("uniform image returns its color anywhere") {
    Image3f uni;
    uni.resize(4, 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) uni.set(x, y, {0.3f, 0.6f, 0.9f});
    const Eigen::Vector3f c = sample_color_bilinear(uni, 1.7, 2.2);
    CHECK(c.x() == Catch::Approx(0.3f));
    CHECK(c.y() == Catch::Approx(0.6f));
    CHECK(c.z() == Catch::Approx(0.9f));
  }

  SECTION("exact pixel centers return that pixel in both modes") {
    const Eigen::Vector3f c = sample_color_bilinear(img, 2.0, 0.0);
    CHECK(c.x() == Catch::Approx(0.25f));
    ImageU8 labels;
    labels.resize(3, 1);
    labels.set(0, 0, 7);
    labels.set(1, 0, 9);
    labels.set(2, 0, 11);
    CHECK(sample_label_nearest(labels, 1.0, 0.0) == 9);
    CHECK(sample_label_nearest(labels, 1.4, 0.0) == 9);
    CHECK(sample_label_nearest(labels, 1.6, 0.0) == 11);
  }

  SECTION("bilinear midpoint of adjacent 0 and 1 pixels is one half") {
    const Eigen::Vector3f c = sample_color_bilinear(img, 0.5, 0.0);
    CHECK(c.x() == Catch::Approx(0.5f));
    CHECK(c.y() == Catch::Approx(0.5f));
    CHECK(c.z() == Catch::Approx(0.5f));
  }
}
