#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "asmr/error.hpp"
#include "asmr/model.hpp"
#include "asmr/profiler.hpp"
#include "oracles.hpp"

using namespace asmr;
using asmr::testing::relative_error;

namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<std::int64_t> all_indices(const PartitionScheme& s) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(s.total_points()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i);
  return idx;
}

InstanceModulation random_phi(const SirenModel& net, std::uint64_t seed) {
  auto phi = InstanceModulation::zeros(net);
  for (auto& p : phi.phi) p.values() = testing::random_values(p.size(), seed++, -0.3, 0.3);
  return phi;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("asmr_test_model_" + name);
}

}  // namespace

TEST_CASE("SIREN parameter count") {
  const auto m = init_siren({2, 256, 256, 256, 1}, 30.0, 0);
  const std::size_t expected = 2 * 256 + 256 + 2 * (256 * 256 + 256) + 256 * 1 + 1;
  CHECK(m.parameter_count() == expected);
  CHECK(expected == 132609);
  CHECK(siren_parameter_count({2, 256, 256, 256, 1}) == expected);
}

TEST_CASE("ASMR parameter counts") {
  const auto m = init_asmr({2, 256, 256, 256, 1}, 30.0, PartitionScheme::parse("4x4x4x8").broadcast(2), 0);
  CHECK(m.parameter_count() == 132609 + 3 * (2 * 256));
  CHECK(asmr_parameter_count({2, 256, 256, 256, 1}) == m.parameter_count());

  const auto audio = init_asmr({1, 128, 128, 128, 1}, 30.0, PartitionScheme::parse("10x10x16x20"), 0);
  const std::size_t expected = 1 * 128 + 128 + 2 * (128 * 128 + 128) + 128 + 1 + 3 * (1 * 128);
  CHECK(audio.parameter_count() == expected);
  CHECK(expected == 33793);
}

TEST_CASE("initialization bounds and determinism") {
  const auto a = init_asmr({2, 256, 256, 256, 1}, 30.0, PartitionScheme::parse("4x4x4x8").broadcast(2), 42);
  const auto b = init_asmr({2, 256, 256, 256, 1}, 30.0, PartitionScheme::parse("4x4x4x8").broadcast(2), 42);
  const auto c = init_asmr({2, 256, 256, 256, 1}, 30.0, PartitionScheme::parse("4x4x4x8").broadcast(2), 43);
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  const auto pc = c.parameters();
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->values() == pb[i]->values());
    differs = differs || pa[i]->values() != pc[i]->values();
  }
  CHECK(differs);

  const auto& net = a.backbone;
  for (double w : net.weights[0].values()) CHECK(std::abs(w) <= 1.0 / 2.0);
  const double hidden = std::sqrt(6.0 / 256.0) / 30.0;
  CHECK(hidden == doctest::Approx(0.00510).epsilon(1e-3));
  double largest = 0.0;
  for (std::size_t l = 1; l < net.layers(); ++l)
    for (double w : net.weights[l].values()) largest = std::max(largest, std::abs(w));
  CHECK(largest <= hidden);
  CHECK(largest > 0.9 * hidden);
  for (const auto& bias : net.biases)
    for (double v : bias.values()) CHECK(v == 0.0);
  for (const auto& m : a.modulators)
    for (double v : m.values()) CHECK(std::abs(v) <= std::sqrt(1.0 / 2.0));
}

TEST_CASE("init errors") {
  CHECK_THROWS_AS(init_siren({2}, 30.0, 0), Error);
  CHECK_THROWS_AS(init_siren({2, 0, 1}, 30.0, 0), Error);
  try {
    init_asmr({1, 8, 8, 8, 1}, 30.0, PartitionScheme::parse("2x2x2"), 0);
    FAIL("expected LevelCountMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LevelCountMismatch);
  }
  CHECK_THROWS_AS(init_asmr({2, 8, 1}, 30.0, PartitionScheme::parse("2x2"), 0), Error);
}

TEST_CASE("constant network") {
  auto m = init_asmr({2, 5, 5, 3}, 30.0, PartitionScheme::parse("2x2x4").broadcast(2), 1);
  for (auto* p : m.parameters()) std::fill(p->values().begin(), p->values().end(), 0.0);
  m.backbone.biases.back().values() = {0.5, -1.25, 2.0};
  const auto out = forward_shared(m);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    CHECK(out.at(r, 0) == 0.5);
    CHECK(out.at(r, 1) == -1.25);
    CHECK(out.at(r, 2) == 2.0);
  }
}

TEST_CASE("hand-unrolled two-layer network") {
  // widths [1,3,1], bases [2,2]: z0 = x0_hat; z1 = sin(w0 (z0 W1 + b1 + x1_hat Wm));
  // out = z1 W2 + b2, with x0 = floor(x/2), x1 = x mod 2, hats in {-1, 1}.
  auto m = init_asmr({1, 3, 1}, 2.0, PartitionScheme::parse("2x2"), 0);
  m.backbone.weights[0].values() = {0.3, -0.2, 0.5};
  m.backbone.biases[0].values() = {0.1, 0.0, -0.1};
  m.modulators[0].values() = {0.7, 0.4, -0.6};
  m.backbone.weights[1].values() = {1.0, -2.0, 0.5};
  m.backbone.biases[1].values() = {0.25};
  for (std::int64_t x = 0; x < 4; ++x) {
    const double x0 = (x / 2) == 0 ? -1.0 : 1.0;
    const double x1 = (x % 2) == 0 ? -1.0 : 1.0;
    const double h0 = std::sin(2.0 * (x0 * 0.3 + 0.1 + x1 * 0.7));
    const double h1 = std::sin(2.0 * (x0 * -0.2 + 0.0 + x1 * 0.4));
    const double h2 = std::sin(2.0 * (x0 * 0.5 - 0.1 + x1 * -0.6));
    const double expected = h0 * 1.0 + h1 * -2.0 + h2 * 0.5 + 0.25;
    const auto out = forward_naive(m, std::span<const std::int64_t>(&x, 1));
    CHECK(out[0] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("naive forward matches the scalar oracle") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 20; ++k) {
    const std::size_t dims = 1 + k % 3;
    const std::size_t levels = 2 + k % 4;
    const auto s = testing::random_scheme(rng, dims, levels, dims == 3 ? 3 : 4);
    std::vector<std::size_t> widths{dims};
    for (std::size_t l = 1; l < levels; ++l) widths.push_back(2 + rng() % 5);
    widths.push_back(1 + rng() % 3);
    auto m = init_asmr(widths, 3.0, s, k);
    testing::randomize(m, k);
    const auto phi = random_phi(m.backbone, 100 + k);
    const auto idx = all_indices(s);
    const auto naive = forward_naive(m, idx, k % 2 ? &phi : nullptr);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto expected = testing::hand_forward(m, s.unravel(idx[r]), k % 2 ? &phi : nullptr);
      for (std::size_t c = 0; c < expected.size(); ++c) REQUIRE(std::abs(naive.at(r, c) - expected[c]) <= 1e-12);
    }
  }
}

TEST_CASE("shared and naive forwards agree") {
  std::mt19937_64 rng(2024);
  int configs = 0;
  for (int k = 0; k < 60; ++k) {
    const std::size_t dims = 1 + k % 3;
    const std::size_t levels = 2 + (k / 3) % 4;
    const std::int64_t max_base = dims == 1 ? 6 : (dims == 2 ? 4 : 3);
    const auto s = testing::random_scheme(rng, dims, levels, max_base, 0.25);
    if (s.total_points() > 20000) continue;
    std::vector<std::size_t> widths{dims};
    for (std::size_t l = 1; l < levels; ++l) widths.push_back(3 + rng() % 6);
    widths.push_back(1 + rng() % 3);
    auto m = init_asmr(widths, 30.0, s, k);
    if (k % 3 == 0) testing::randomize(m, k, 0.1);
    const bool with_phi = k % 2 == 1;
    const auto phi = random_phi(m.backbone, k);
    const auto shared = forward_shared(m, with_phi ? &phi : nullptr);
    const auto naive = forward_naive(m, all_indices(s), with_phi ? &phi : nullptr);
    CHECK(max_abs_diff(shared, naive) <= 1e-10);
    ++configs;
  }
  CHECK(configs >= 50);
}

TEST_CASE("coordinate-list and index forms agree") {
  auto m = init_asmr({2, 6, 6, 1}, 30.0, PartitionScheme::parse("axis0=2x3x2;axis1=3x1x4"), 3);
  std::vector<Coord> coords = {{0, 0}, {11, 11}, {5, 7}, {7, 2}};
  std::vector<std::int64_t> idx;
  for (const auto& c : coords) idx.push_back(m.scheme.ravel(c));
  CHECK(forward_naive(m, coords).values() == forward_naive(m, idx).values());
  std::vector<Coord> bad = {{12, 0}};
  CHECK_THROWS_AS(forward_naive(m, bad), Error);
}

TEST_CASE("zero phi equals no phi") {
  auto m = init_asmr({2, 6, 6, 1}, 30.0, PartitionScheme::parse("2x2x4").broadcast(2), 3);
  const auto zero = InstanceModulation::zeros(m.backbone);
  CHECK(forward_shared(m, &zero).values() == forward_shared(m).values());
  const auto idx = all_indices(m.scheme);
  CHECK(forward_naive(m, idx, &zero).values() == forward_naive(m, idx).values());
}

TEST_CASE("base-1 levels after level 0 reduce to a SIREN on the level-0 lattice") {
  auto m = init_asmr({2, 8, 8, 1}, 30.0, PartitionScheme::parse("4x1x1").broadcast(2), 5);
  testing::randomize(m, 5, 0.2);
  // Level-1/2 inputs are 0, so modulations vanish.
  SirenModel plain = m.backbone;
  const auto coords = level_lattice(m.scheme, 0).reshaped({16, 2});
  CHECK(max_abs_diff(forward_shared(m), forward_siren(plain, coords)) <= 1e-14);
}

TEST_CASE("zero modulators give outputs constant within level-1 cells") {
  auto m = init_asmr({1, 6, 6, 1}, 30.0, PartitionScheme::parse("4x2x8"), 9);
  for (auto& mod : m.modulators) std::fill(mod.values().begin(), mod.values().end(), 0.0);
  const auto out = forward_shared(m);
  // G_1 = 8: cells of 8 consecutive samples share every digit that still matters.
  for (std::int64_t x = 0; x < 64; ++x) CHECK(out[x] == out[(x / 8) * 8]);
}

TEST_CASE("SIREN forward") {
  auto s = init_siren({2, 4, 3}, 30.0, 1);
  for (auto* p : s.parameters()) std::fill(p->values().begin(), p->values().end(), 0.0);
  s.biases.back().values() = {1, 2, 3};
  const auto out = forward_siren(s, siren_coordinates(std::vector<std::int64_t>{3, 3}));
  for (std::size_t r = 0; r < 9; ++r) CHECK(out.at(r, 2) == 3.0);

  auto lin = init_siren({2, 2}, 30.0, 1);
  lin.weights[0].values() = {1, 2, 3, 4};
  lin.biases[0].values() = {0.5, -0.5};
  const auto y = forward_siren(lin, Tensor({1, 2}, {1.0, -1.0}));
  CHECK(y.values() == std::vector<double>{1 - 3 + 0.5, 2 - 4 - 0.5});
  CHECK_THROWS_AS(forward_siren(lin, Tensor({1, 3})), Error);

  const auto c = siren_coordinates(std::vector<std::int64_t>{3, 2});
  CHECK(c.values() == std::vector<double>{-1, -1, -1, 1, 0, -1, 0, 1, 1, -1, 1, 1});
}

TEST_CASE("SIREN gradient with respect to coordinates") {
  auto s = init_siren({2, 5, 5, 2}, 3.0, 4);
  auto coords = testing::random_tensor({6, 2}, 8);
  const auto target = testing::random_tensor({6, 2}, 9);
  auto run = [&](bool record) {
    Tape t(record);
    Var c = t.parameter(coords);
    Var z = t.affine(c, t.view(s.weights[0]), t.view(s.biases[0]));
    z = t.sine(z, s.omega0);
    z = t.sine(t.affine(z, t.view(s.weights[1]), t.view(s.biases[1])), s.omega0);
    Var out = t.affine(z, t.view(s.weights[2]), t.view(s.biases[2]));
    Var loss = t.mse(out, t.view(target));
    if (record) t.backward(loss);
    return loss.value()[0];
  };
  coords.zero_grad();
  run(true);
  const auto analytic = coords.grad();
  const auto numeric = testing::finite_difference([&] { return run(false); }, coords.values());
  for (std::size_t i = 0; i < analytic.size(); ++i) CHECK(relative_error(analytic[i], numeric[i]) <= 1e-7);
  // Same graph through the library forward.
  const auto direct = forward_siren(s, coords);
  Tape t(false);
  CHECK(forward_siren(t, s, coords).value().values() == direct.values());
}

TEST_CASE("tape forwards equal inference forwards") {
  auto m = init_asmr({2, 5, 4, 2}, 30.0, PartitionScheme::parse("axis0=2x2x3;axis1=3x2x1"), 12);
  auto phi = random_phi(m.backbone, 3);
  Tape t;
  const Var shared = forward_shared(t, m, &phi);
  CHECK(shared.value().shape() == Shape{12, 6, 2});
  CHECK(shared.value().values() == forward_shared(m, &phi).values());
  const auto idx = all_indices(m.scheme);
  Tape t2;
  CHECK(forward_naive(t2, m, idx, &phi).value().values() == forward_naive(m, idx, &phi).values());
}

TEST_CASE("end-to-end gradient of a tiny ASMR") {
  for (bool shared_path : {true, false}) {
    auto m = init_asmr({1, 4, 4, 1}, 30.0, PartitionScheme::parse("2x2x2"), 7);
    auto phi = random_phi(m.backbone, 21);
    const auto target = testing::random_tensor({8, 1}, 99);
    const auto idx = all_indices(m.scheme);
    auto run = [&](bool record) {
      Tape t(record);
      Var out = shared_path ? forward_shared(t, m, &phi) : forward_naive(t, m, idx, &phi);
      Var loss = t.mse(out, t.constant(target.reshaped(out.value().shape())));
      if (record) t.backward(loss);
      return loss.value()[0];
    };
    auto params = m.parameters();
    for (auto& p : phi.phi) params.push_back(&p);
    for (auto* p : params) p->zero_grad();
    run(true);
    std::vector<std::vector<double>> analytic;
    for (auto* p : params) analytic.push_back(p->grad());
    for (std::size_t k = 0; k < params.size(); ++k) {
      const auto numeric = testing::finite_difference([&] { return run(false); }, params[k]->values());
      for (std::size_t i = 0; i < numeric.size(); ++i) CHECK(relative_error(analytic[k][i], numeric[i]) <= 1e-5);
    }
  }
}

TEST_CASE("shared and naive training steps agree") {
  auto a = init_asmr({2, 6, 6, 1}, 30.0, PartitionScheme::parse("2x2x4").broadcast(2), 4);
  auto b = a;
  const auto target = testing::random_tensor({256, 1}, 3);
  const auto idx = all_indices(a.scheme);
  {
    Tape t;
    Var out = forward_shared(t, a);
    t.backward(t.mse(out, t.constant(target.reshaped(out.value().shape()))));
  }
  {
    Tape t;
    Var out = forward_naive(t, b, idx);
    t.backward(t.mse(out, t.view(target)));
  }
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  for (std::size_t k = 0; k < pa.size(); ++k)
    for (std::size_t i = 0; i < pa[k]->size(); ++i) CHECK(std::abs(pa[k]->grad()[i] - pb[k]->grad()[i]) <= 1e-9);
}

TEST_CASE("executed MACs equal the analytic count") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const std::size_t dims = 1 + k % 3;
    const auto s = testing::random_scheme(rng, dims, 2 + k % 4, dims == 3 ? 3 : 4);
    std::vector<std::size_t> widths{dims};
    for (std::size_t l = 1; l < s.levels(); ++l) widths.push_back(2 + rng() % 7);
    widths.push_back(1 + rng() % 3);
    const auto m = init_asmr(widths, 30.0, s, k);
    CHECK(count_shared_macs(m) == mac_asmr(widths, s).total_macs);
  }
}

TEST_CASE("checkpoint round trip") {
  auto m = init_asmr({2, 6, 5, 3}, 17.5, PartitionScheme::parse("axis0=2x2x4;axis1=4x1x2"), 6);
  testing::randomize(m, 6);
  const auto bytes = serialize(m);
  CHECK(bytes.substr(0, 5) == "ASMR1");
  const auto back = std::get<AsmrModel>(deserialize(bytes));
  CHECK(serialize(back) == bytes);
  CHECK(back.scheme == m.scheme);
  CHECK(back.backbone.omega0 == m.backbone.omega0);
  CHECK(forward_shared(back).values() == forward_shared(m).values());

  const auto path = temp_path("asmr.ckpt");
  save(m, path);
  save(load_asmr(path), path.string() + "2");
  std::ifstream f1(path, std::ios::binary), f2(path.string() + "2", std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);

  const auto siren = init_siren({1, 7, 1}, 30.0, 2);
  save(siren, temp_path("siren.ckpt"));
  CHECK(serialize(load_siren(temp_path("siren.ckpt"))) == serialize(siren));
  try {
    load_asmr(temp_path("siren.ckpt"));
    FAIL("expected a kind error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VersionMismatch);
  }
}

TEST_CASE("checkpoint errors") {
  const auto bytes = serialize(init_asmr({1, 4, 1}, 30.0, PartitionScheme::parse("2x4"), 1));
  auto code = [](std::string_view b) {
    try {
      deserialize(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ConfigError;
  };
  CHECK(code(bytes.substr(0, bytes.size() - 3)) == ErrorCode::CorruptCheckpoint);
  CHECK(code(bytes.substr(0, 4)) == ErrorCode::CorruptCheckpoint);
  CHECK(code(bytes + "x") == ErrorCode::CorruptCheckpoint);
  CHECK(code("GARBAGE!") == ErrorCode::CorruptCheckpoint);
  std::string v2 = bytes;
  v2[4] = '2';
  CHECK(code(v2) == ErrorCode::VersionMismatch);
  CHECK_THROWS_AS(load_model(temp_path("does-not-exist")), Error);
}
