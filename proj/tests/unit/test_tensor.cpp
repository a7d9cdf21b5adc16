#include <doctest.h>

#include <cmath>
#include <numbers>

#include "asmr/error.hpp"
#include "asmr/tensor.hpp"
#include "oracles.hpp"

using namespace asmr;
using asmr::testing::dot;
using asmr::testing::random_tensor;
using asmr::testing::relative_error;

namespace {

// Plain two-point central difference, step 1e-5.
std::vector<double> central_difference(const std::function<double()>& f, std::vector<double>& x) {
  const double h = 1e-5;
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f();
    x[i] = keep - h;
    const double down = f();
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

void check_gradient(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  REQUIRE(analytic.size() == numeric.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    // Absolute floor: cancellation in the difference leaves ~1e-11 of noise.
    CHECK(relative_error(analytic[i], numeric[i], 1e-6) <= 1e-5);
  }
}

}  // namespace

TEST_CASE("affine examples") {
  const Tensor w({2, 2}, {1, 2, 3, 4});
  const Tensor zero_b({2}, {0, 0});
  CHECK(ops::affine(Tensor({1, 2}, {1, 0}), w, &zero_b).values() == std::vector<double>{1, 2});
  const Tensor b({2}, {5, 6});
  CHECK(ops::affine(Tensor({1, 2}, {0, 0}), w, &b).values() == std::vector<double>{5, 6});
  CHECK_THROWS_AS(ops::affine(Tensor({1, 3}), w, nullptr), Error);
}

TEST_CASE("affine matches a triple loop") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 3 + seed, p = 2 + seed % 3, q = 4 + seed % 5;
    const auto x = random_tensor({n, p}, seed);
    const auto w = random_tensor({p, q}, seed + 100);
    const auto b = random_tensor({q}, seed + 200);
    auto expected = testing::triple_loop_matmul(x.values(), w.values(), n, p, q);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < q; ++c) expected[r * q + c] += b[c];
    const auto got = ops::affine(x, w, &b);
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(got[i] - expected[i]) <= 1e-12);
    CHECK(ops::affine_macs(x, w) == n * p * q);
  }
}

TEST_CASE("affine backward is the transpose product") {
  const auto x = random_tensor({3, 2}, 1);
  const auto w = random_tensor({2, 4}, 2);
  const auto g = random_tensor({3, 4}, 3);
  std::vector<double> gx(6, 0.0), gw(8, 0.0), gb(4, 0.0);
  ops::affine_backward(x, w, g.values(), gx.data(), gw.data(), gb.data());
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t k = 0; k < 2; ++k) {
      double s = 0;
      for (std::size_t c = 0; c < 4; ++c) s += g.at(r, c) * w.at(k, c);
      CHECK(gx[r * 2 + k] == doctest::Approx(s).epsilon(1e-14));
    }
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t c = 0; c < 4; ++c) {
      double s = 0;
      for (std::size_t r = 0; r < 3; ++r) s += x.at(r, k) * g.at(r, c);
      CHECK(gw[k * 4 + c] == doctest::Approx(s).epsilon(1e-14));
    }
  for (std::size_t c = 0; c < 4; ++c) CHECK(gb[c] == doctest::Approx(g.at(0, c) + g.at(1, c) + g.at(2, c)));
}

TEST_CASE("sine examples") {
  CHECK(ops::sine(Tensor({1}, {0.0}), 30.0)[0] == 0.0);
  CHECK(ops::sine(Tensor({1}, {std::numbers::pi / 60.0}), 30.0)[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("upsample and tile examples") {
  const std::vector<std::size_t> two = {2};
  CHECK(ops::upsample_nearest(Tensor({2, 1}, {1, 2}), two).values() == std::vector<double>{1, 1, 2, 2});
  CHECK(ops::tile_replicate(Tensor({2, 1}, {1, 2}), two).values() == std::vector<double>{1, 2, 1, 2});

  const Tensor sq({2, 2, 1}, {1, 2, 3, 4});
  const std::vector<std::size_t> twotwo = {2, 2};
  const auto up = ops::upsample_nearest(sq, twotwo);
  CHECK(up.shape() == Shape{4, 4, 1});
  CHECK(up.values() == std::vector<double>{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4});
  const std::vector<std::size_t> axis0 = {2, 1};
  const auto tiled = ops::tile_replicate(sq, axis0);
  CHECK(tiled.shape() == Shape{4, 2, 1});
  CHECK(tiled.values() == std::vector<double>{1, 2, 3, 4, 1, 2, 3, 4});

  std::vector<double> g(2, 0.0);
  const std::vector<double> ones4(4, 1.0);
  ops::upsample_nearest_backward({2, 1}, two, ones4, g.data());
  CHECK(g == std::vector<double>{2, 2});
  std::vector<double> gt(2, 0.0);
  const std::vector<std::size_t> three = {3};
  const std::vector<double> ones6(6, 1.0);
  ops::tile_replicate_backward({2, 1}, three, ones6, gt.data());
  CHECK(gt == std::vector<double>{3, 3});

  const std::vector<std::size_t> zero = {0};
  CHECK_THROWS_AS(ops::upsample_nearest(Tensor({2, 1}), zero), Error);
  CHECK_THROWS_AS(ops::tile_replicate(Tensor({2, 1}), zero), Error);
}

TEST_CASE("replication matches the index maps") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 30; ++k) {
    const std::size_t d = 1 + rng() % 3;
    const std::size_t c = 1 + rng() % 3;
    std::vector<std::size_t> in(d), r(d);
    Shape shape;
    for (std::size_t a = 0; a < d; ++a) {
      in[a] = 1 + rng() % 4;
      r[a] = 1 + rng() % 3;
      shape.push_back(in[a]);
    }
    shape.push_back(c);
    const auto x = random_tensor(shape, k);
    CHECK(ops::upsample_nearest(x, r).values() == testing::upsample_by_index(x.values(), in, c, r, false));
    CHECK(ops::tile_replicate(x, r).values() == testing::upsample_by_index(x.values(), in, c, r, true));
  }
}

TEST_CASE("identity factors and composition") {
  const auto x = random_tensor({3, 2, 2}, 9);
  const std::vector<std::size_t> ones = {1, 1};
  CHECK(ops::upsample_nearest(x, ones).values() == x.values());
  CHECK(ops::tile_replicate(x, ones).values() == x.values());
  const std::vector<std::size_t> r = {2, 3}, s = {3, 2}, rs = {6, 6};
  CHECK(ops::upsample_nearest(ops::upsample_nearest(x, r), s).values() == ops::upsample_nearest(x, rs).values());
}

TEST_CASE("replication adjointness") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 30; ++k) {
    const std::size_t d = 1 + rng() % 3;
    Shape shape;
    std::vector<std::size_t> r(d);
    Shape out_shape;
    for (std::size_t a = 0; a < d; ++a) {
      shape.push_back(1 + rng() % 4);
      r[a] = 1 + rng() % 4;
      out_shape.push_back(shape[a] * r[a]);
    }
    shape.push_back(2);
    out_shape.push_back(2);
    const auto x = random_tensor(shape, 100 + k);
    const auto g = random_tensor(out_shape, 200 + k);
    std::vector<double> back(x.size(), 0.0);
    ops::upsample_nearest_backward(shape, r, g.values(), back.data());
    CHECK(std::abs(dot(ops::upsample_nearest(x, r).values(), g.values()) - dot(x.values(), back)) <= 1e-10);
    std::vector<double> back_t(x.size(), 0.0);
    ops::tile_replicate_backward(shape, r, g.values(), back_t.data());
    CHECK(std::abs(dot(ops::tile_replicate(x, r).values(), g.values()) - dot(x.values(), back_t)) <= 1e-10);
  }
}

TEST_CASE("mse examples") {
  const auto x = random_tensor({4, 3}, 4);
  CHECK(ops::mse(x, x)[0] == 0.0);
  CHECK(ops::mse(Tensor({1}, {0.0}), Tensor({1}, {1.0}))[0] == 1.0);
  CHECK_THROWS_AS(ops::mse(Tensor({2}), Tensor({3})), Error);
  CHECK_THROWS_AS(ops::add(Tensor({2}), Tensor({3})), Error);
}

TEST_CASE("every op passes a finite-difference check") {
  // 100 random points per op; the scalar probe is <op(x), g> with fixed g.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto x = random_tensor({3, 2}, seed);
    auto w = random_tensor({2, 3}, seed + 1000);
    auto b = random_tensor({3}, seed + 2000);
    auto y = random_tensor({3, 2}, seed + 3000);
    auto v = random_tensor({2}, seed + 6000);
    const auto g3 = random_tensor({3, 3}, seed + 4000);
    const auto g2 = random_tensor({3, 2}, seed + 5000);

    {
      auto probe = [&] { return dot(ops::affine(x, w, &b).values(), g3.values()); };
      std::vector<double> gx(x.size(), 0.0), gw(w.size(), 0.0), gb(b.size(), 0.0);
      ops::affine_backward(x, w, g3.values(), gx.data(), gw.data(), gb.data());
      check_gradient(gx, central_difference(probe, x.values()));
      check_gradient(gw, central_difference(probe, w.values()));
      check_gradient(gb, central_difference(probe, b.values()));
    }
    {
      auto probe = [&] { return dot(ops::sine(x, 3.0).values(), g2.values()); };
      std::vector<double> gx(x.size(), 0.0);
      ops::sine_backward(x, 3.0, g2.values(), gx.data());
      check_gradient(gx, central_difference(probe, x.values()));
    }
    {
      auto probe = [&] { return ops::mse(x, y)[0]; };
      std::vector<double> gx(x.size(), 0.0);
      ops::mse_backward(x, y, 1.0, gx.data());
      check_gradient(gx, central_difference(probe, x.values()));
    }
    {
      // add, add_rows, upsample and tile through the tape
      const Tensor target({6, 2}, 0.25);
      auto run = [&](bool record) {
        Tape t(record);
        Var u = t.upsample_nearest(t.parameter(x), {2});
        Var r = t.tile_replicate(t.parameter(y), {2});
        Var loss = t.mse(t.add_rows(t.add(u, r), t.parameter(v)), t.view(target));
        if (record) t.backward(loss);
        return loss.value()[0];
      };
      for (auto* p : {&x, &y, &v}) p->zero_grad();
      run(true);
      const auto gx = x.grad(), gy = y.grad(), gv = v.grad();
      auto probe = [&] { return run(false); };
      check_gradient(gx, central_difference(probe, x.values()));
      check_gradient(gy, central_difference(probe, y.values()));
      check_gradient(gv, central_difference(probe, v.values()));
    }
  }
}

TEST_CASE("tape gradients of a composed graph") {
  auto x = random_tensor({2, 3}, 1);
  auto w = random_tensor({3, 2}, 2);
  auto b = random_tensor({2}, 3);
  auto m = random_tensor({2, 1, 2}, 4);
  const auto target = random_tensor({4, 2, 2}, 5);

  auto run = [&](bool record) {
    Tape t(record);
    Var h = t.sine(t.affine(t.parameter(x), t.parameter(w), t.parameter(b)), 2.0);  // [2, 2]
    Var grid = t.upsample_nearest(h, {2});                                          // [4, 2]
    Var tiled = t.tile_replicate(t.parameter(m), {2, 2});                           // [4, 2, 2]
    Var lifted = t.upsample_nearest(tiled, {1, 1});
    Var loss = t.mse(t.add_rows(lifted, t.constant(Tensor({2}, 0.1))), t.view(target));
    Var total = t.add(loss, t.mse(grid, t.constant(Tensor({4, 2}, 0.3))));
    if (record) t.backward(total);
    return total.value()[0];
  };

  for (auto* p : {&x, &w, &b, &m}) p->zero_grad();
  run(true);
  const auto gx = x.grad(), gw = w.grad(), gb = b.grad(), gm = m.grad();
  auto loss = [&] { return run(false); };
  auto check = [&](const std::vector<double>& analytic, Tensor& t) {
    const auto numeric = testing::finite_difference(loss, t.values());
    for (std::size_t i = 0; i < analytic.size(); ++i) CHECK(relative_error(analytic[i], numeric[i]) <= 1e-7);
  };
  check(gx, x);
  check(gw, w);
  check(gb, b);
  check(gm, m);
}

TEST_CASE("non-recording tape keeps no closures and counts MACs") {
  auto x = random_tensor({5, 3}, 1);
  auto w = random_tensor({3, 4}, 2);
  Tape off(false);
  Var y = off.matmul(off.parameter(x), off.parameter(w));
  CHECK(off.recorded_ops() == 0);
  CHECK(off.macs() == 60);
  CHECK(y.value().shape() == Shape{5, 4});
  Tape on;
  Var z = on.matmul(on.constant(x), on.view(w));
  CHECK(on.recorded_ops() == 0);
  Var p = on.matmul(on.constant(x), on.parameter(w));
  CHECK(on.recorded_ops() == 1);
  CHECK(on.macs() == 120);
  (void)z;
  (void)p;
}

TEST_CASE("gradients accumulate until zeroed") {
  auto w = random_tensor({2, 1}, 7);
  const auto x = random_tensor({3, 2}, 8);
  const Tensor target({3, 1}, 0.0);
  auto step = [&] {
    Tape t;
    t.backward(t.mse(t.matmul(t.view(x), t.parameter(w)), t.view(target)));
  };
  w.zero_grad();
  step();
  const auto once = w.grad();
  step();
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(w.grad()[i] == doctest::Approx(2 * once[i]));
  w.zero_grad();
  for (double g : w.grad()) CHECK(g == 0.0);
}
