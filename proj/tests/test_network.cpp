#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nero/model.hpp"

using namespace nero;

namespace {

ModelConfig tiny_config(EncoderKind kind) {
  ModelConfig cfg;
  cfg.pe.num_frequencies = 4;
  cfg.grid.num_levels = 3;
  cfg.grid.base_resolution = 2;
  cfg.grid.per_level_scale = 1.5;
  cfg.grid.table_size = 16;
  cfg.grid.feature_dim = 2;
  cfg.height = {kind, {16, 16}};
  cfg.color = {kind, {16, 16}};
  cfg.semantic = {kind, {16, 16}};
  cfg.seed = 77;
  return cfg;
}

Mat2X<double> random_coords(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat2X<double> x(2, n);
  for (int i = 0; i < n; ++i) {
    x(0, i) = dist(rng);
    x(1, i) = dist(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("zeroed output layer makes heads constant") {
  FieldModel<double> model;
  model.cfg = tiny_config(EncoderKind::pe);
  model.build();

  auto& hh = model.head(Head::height);
  hh.W.back().setZero();
  hh.b.back()(0) = 3.25;
  CHECK(model.forward_height(NormCoord2{0.3, -0.8}) == 3.25);
  CHECK(model.forward_height(NormCoord2{-0.9, 0.1}) == 3.25);

  auto& ch = model.head(Head::color);
  for (auto& w : ch.W) w.setZero();
  for (auto& b : ch.b) b.setZero();
  const Eigen::Vector3d c = model.forward_color(NormCoord2{0.2, 0.4});
  for (int i = 0; i < 3; ++i) CHECK(c(i) == Catch::Approx(0.5).margin(1e-15));

  auto& sh = model.head(Head::semantic);
  for (auto& w : sh.W) w.setZero();
  for (auto& b : sh.b) b.setZero();
  Eigen::VectorXd logits = model.forward_semantic(NormCoord2{0.2, 0.4});
  MatX<double> lm(logits.size(), 1);
  lm.col(0) = logits;
  const MatX<double> p = softmax(lm);
  for (int i = 0; i < p.rows(); ++i)
    CHECK(p(i, 0) == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("color output stays inside the unit cube") {
  FieldModel<double> model;
  model.cfg = tiny_config(EncoderKind::hash);
  model.cfg.seed = 5;
  model.build();
  // Inflate parameters so the sigmoid sees large magnitudes.
  for (auto& w : model.head(Head::color).W) w *= 40.0;
  const auto x = random_coords(64, 3);
  const auto c = model.forward_batch(Head::color, Mat2X<double>(x));
  CHECK(c.minCoeff() >= 0.0);
  CHECK(c.maxCoeff() <= 1.0);
}

TEST_CASE("softmax columns sum to one") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-30.0, 30.0);
  MatX<double> logits(5, 40);
  for (Eigen::Index c = 0; c < logits.cols(); ++c)
    for (Eigen::Index r = 0; r < logits.rows(); ++r) logits(r, c) = dist(rng);
  const MatX<double> p = softmax(logits);
  for (Eigen::Index c = 0; c < p.cols(); ++c)
    CHECK(std::abs(p.col(c).sum() - 1.0) <= 1e-12);
}

TEST_CASE("loss values match hand arithmetic") {
  MatX<double> a(1, 1), b(1, 1);
  a << 1.0;
  b << 1.0;
  CHECK(loss_height(a, b) == 0.0);
  a << 2.0;
  b << 0.0;
  CHECK(loss_height(a, b) == 4.0);
  MatX<double> zb(1, 2), zt(1, 2);
  zb << 1.0, 0.0;
  zt << 0.0, 1.0;
  CHECK(loss_height(zb, zt) == Catch::Approx(1.0));

  MatX<double> c(3, 1), ct(3, 1);
  c << 0.2, 0.4, 0.9;
  ct = c;
  CHECK(loss_color(c, ct) == 0.0);
  c << 0, 0, 0;
  ct << 1, 1, 1;
  CHECK(loss_color(c, ct) == Catch::Approx(3.0));
  c << 0.5, 0, 0;
  ct << 0, 0, 0;
  CHECK(loss_color(c, ct) == Catch::Approx(0.25));

  MatX<double> logits(3, 1);
  logits << 30.0, 0.0, 0.0;  // effectively one-hot confident
  CHECK(loss_semantic(logits, {0}) == Catch::Approx(0.0).margin(1e-12));
  logits << 1.0, 1.0, 1.0;
  CHECK(loss_semantic(logits, {1}) ==
        Catch::Approx(1.098612288668110).epsilon(1e-12));
  logits << 1.0, 0.0, 0.0;
  // Pinned from an independent evaluation of -log(e / (e + 2)).
  CHECK(loss_semantic(logits, {0}) ==
        Catch::Approx(0.551444713932051).epsilon(1e-12));
}

TEST_CASE("losses are nonnegative and vanish only at the target") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    MatX<double> z(1, 3), zt(1, 3);
    for (int j = 0; j < 3; ++j) {
      z(0, j) = dist(rng);
      zt(0, j) = dist(rng);
    }
    const double l = loss_height(z, zt);
    CHECK(l >= 0.0);
    if (z == zt) CHECK(l == 0.0);
    if (l == 0.0) CHECK(z == zt);
  }
}

TEST_CASE("forward passes are pure") {
  FieldModel<double> model;
  model.cfg = tiny_config(EncoderKind::hash);
  model.build();
  const NormCoord2 x{0.123, -0.456};
  const double z1 = model.forward_height(x);
  const double z2 = model.forward_height(x);
  CHECK(z1 == z2);
  CHECK(model.forward_color(x) == model.forward_color(x));
}

namespace {

// Full-model scalar loss for finite differencing: all three heads on a
// shared batch with fixed random targets. Total loss is the sum of parts.
struct TotalLossProbe {
  Mat2X<double> x;
  MatX<double> z_gt, c_gt;
  std::vector<int> s_gt;

  double operator()(const FieldModel<double>& model) const {
    const MatX<double> z = model.forward_batch(Head::height, x);
    const MatX<double> c = model.forward_batch(Head::color, x);
    const MatX<double> s = model.forward_batch(Head::semantic, x);
    return loss_height(z, z_gt) + loss_color(c, c_gt) + loss_semantic(s, s_gt);
  }
};

void fd_check_span(FieldModel<double>& model, const TotalLossProbe& probe,
                   double* data, std::int64_t n, const double* analytic,
                   double step, double tol) {
  for (std::int64_t i = 0; i < n; ++i) {
    const double saved = data[i];
    data[i] = saved + step;
    const double lp = probe(model);
    data[i] = saved - step;
    const double lm = probe(model);
    data[i] = saved;
    const double fd = (lp - lm) / (2 * step);
    const double a = analytic[i];
    REQUIRE(std::abs(a - fd) <= tol * std::max(std::abs(a), std::abs(fd)) + 1e-9);
  }
}

}  // namespace

TEST_CASE("analytic gradients match finite differences across the model") {
  FieldModel<double> model;
  model.cfg = tiny_config(EncoderKind::hash);
  // Seed chosen so every hidden pre-activation sits > 1.5e-3 from the ReLU
  // kink on this batch; finite differences are only valid away from kinks.
  model.cfg.seed = 176;
  model.build();
  // Move tables away from their tiny init so gradients are well conditioned.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-0.4, 0.4);
  for (auto& enc : model.encoders)
    for (auto& t : enc.grid.tables)
      for (Eigen::Index c = 0; c < t.cols(); ++c)
        for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = dist(rng);

  TotalLossProbe probe;
  probe.x = random_coords(6, 23);
  probe.z_gt = MatX<double>::Random(1, 6);
  probe.c_gt = (MatX<double>::Random(3, 6).array() * 0.5 + 0.5).matrix();
  probe.s_gt = {0, 1, 2, 0, 2, 1};

  typename MlpHead<double>::Grads grads[3];
  for (int i = 0; i < 3; ++i) grads[i].resize_like(model.heads[i]);
  for (auto& enc : model.encoders) enc.grid.zero_grad();

  BranchPass<double> pass[3];
  const MatX<double> z = branch_forward(model, Head::height, probe.x, pass[0]);
  const MatX<double> c = branch_forward(model, Head::color, probe.x, pass[1]);
  const MatX<double> s = branch_forward(model, Head::semantic, probe.x, pass[2]);
  for (const auto& p : pass)
    for (std::size_t l = 0; l + 1 < p.cache.pre.size(); ++l)
      REQUIRE(p.cache.pre[l].cwiseAbs().minCoeff() > 1.5e-3);
  MatX<double> dz, dc, ds;
  loss_height_grad(z, probe.z_gt, dz);
  loss_color_grad(c, probe.c_gt, dc);
  loss_semantic_grad(s, probe.s_gt, ds);
  branch_backward(model, Head::height, pass[0], dz, grads[0]);
  branch_backward(model, Head::color, pass[1], dc, grads[1]);
  branch_backward(model, Head::semantic, pass[2], ds, grads[2]);

  const double tol = 1e-4;
  for (int i = 0; i < 3; ++i) {
    MlpHead<double>& head = model.heads[i];
    for (std::size_t l = 0; l < head.W.size(); ++l) {
      fd_check_span(model, probe, head.W[l].data(), head.W[l].size(),
                    grads[i].dW[l].data(), 1e-5, tol);
      fd_check_span(model, probe, head.b[l].data(), head.b[l].size(),
                    grads[i].db[l].data(), 1e-5, tol);
    }
  }
  for (auto& enc : model.encoders) {
    for (std::size_t l = 0; l < enc.grid.tables.size(); ++l) {
      fd_check_span(model, probe, enc.grid.tables[l].data(),
                    enc.grid.tables[l].size(), enc.grid.grads[l].data(), 1e-4,
                    tol);
    }
  }
}

TEST_CASE("gradient scaling is linear and zero upstream means zero grads") {
  FieldModel<double> model;
  model.cfg = tiny_config(EncoderKind::hash);
  model.build();
  const Mat2X<double> x = random_coords(4, 77);

  typename MlpHead<double>::Grads g1, g2;
  g1.resize_like(model.head(Head::height));
  g2.resize_like(model.head(Head::height));

  BranchPass<double> pass;
  branch_forward(model, Head::height, x, pass);
  MatX<double> dz = MatX<double>::Random(1, 4);

  branch_backward(model, Head::height, pass, dz, g1);
  const MatX<double> table_g1 = model.encoder(Head::height).grid.grads[0];
  model.encoder(Head::height).grid.zero_grad();
  branch_backward(model, Head::height, pass, MatX<double>(2.0 * dz), g2);
  const MatX<double> table_g2 = model.encoder(Head::height).grid.grads[0];
  model.encoder(Head::height).grid.zero_grad();

  for (std::size_t l = 0; l < g1.dW.size(); ++l) {
    CHECK((2.0 * g1.dW[l] - g2.dW[l]).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK((2.0 * table_g1 - table_g2).cwiseAbs().maxCoeff() <= 1e-12);

  typename MlpHead<double>::Grads gz;
  gz.resize_like(model.head(Head::height));
  branch_backward(model, Head::height, pass, MatX<double>(0.0 * dz), gz);
  for (auto& m : gz.dW) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.encoder(Head::height).grid.grads[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam first step and idle behavior") {
  AdamConfig<double> cfg;
  cfg.lr = 5e-4;

  SECTION("first nonzero step moves by roughly lr against the gradient") {
    VecX<double> p(4), g(4), m = VecX<double>::Zero(4), v = VecX<double>::Zero(4);
    p << 1.0, -2.0, 0.5, 3.0;
    g << 0.3, -4.0, 12.0, -0.01;
    const VecX<double> before = p;
    adam_step(p.data(), g.data(), m.data(), v.data(), 4, cfg, 1);
    for (int i = 0; i < 4; ++i) {
      const double delta = p(i) - before(i);
      CHECK(std::abs(delta) >= 0.99 * cfg.lr);
      CHECK(std::abs(delta) <= cfg.lr);
      CHECK(delta * g(i) < 0.0);
    }
  }

  SECTION("zero gradient leaves parameters untouched") {
    VecX<double> p(3), g = VecX<double>::Zero(3), m = VecX<double>::Zero(3),
                 v = VecX<double>::Zero(3);
    p << 0.1, 0.2, 0.3;
    const VecX<double> before = p;
    for (int t = 1; t <= 10; ++t)
      adam_step(p.data(), g.data(), m.data(), v.data(), 3, cfg, t);
    CHECK(p == before);
  }

  SECTION("identical seeds and data give bitwise identical trajectories") {
    auto run = [&] {
      VecX<double> p(2), m = VecX<double>::Zero(2), v = VecX<double>::Zero(2);
      p << 0.7, -0.9;
      std::mt19937_64 rng(123);
      std::uniform_real_distribution<double> dist(-1, 1);
      for (int t = 1; t <= 50; ++t) {
        VecX<double> g(2);
        g << dist(rng), dist(rng);
        adam_step(p.data(), g.data(), m.data(), v.data(), 2, cfg, t);
      }
      return p;
    };
    const VecX<double> a = run(), b = run();
    CHECK(a(0) == b(0));
    CHECK(a(1) == b(1));
  }
}
