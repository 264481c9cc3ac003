#include "l2nas/space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

using namespace l2nas;
using l2nas::testing::argmax_oracle;
using l2nas::testing::darts_band_oracle;

namespace {

Matrix make_matrix(int rows, int cols, std::vector<double> v) {
  Matrix m(rows, cols);
  m.data = std::move(v);
  return m;
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& v : m.data) v = rng.next_unit();
  return m;
}

ContinuousAction arch_to_action(const DiscreteArch& arch) {
  ContinuousAction a;
  for (const auto& b : arch.blocks) a.blocks.push_back(b.to_real());
  return a;
}

}  // namespace

TEST_CASE("splitmix64 matches the published reference outputs") {
  std::uint64_t s = 1234567;
  CHECK(splitmix64(s) == 6457827717110365317ULL);
  CHECK(splitmix64(s) == 3203168211198807973ULL);
  CHECK(splitmix64(s) == 9817491932198370423ULL);
  CHECK(splitmix64(s) == 4593380528125082431ULL);
  CHECK(splitmix64(s) == 16408922859458223821ULL);
}

TEST_CASE("builtin spaces have the documented layouts") {
  const auto nb = builtin_space("nb201");
  CHECK(nb.block_count() == 1);
  CHECK(nb.block(0).rows == 6);
  CHECK(nb.block(0).cols == 5);
  CHECK(nb.total_dim == 30);
  CHECK(arch_count(nb) == doctest::Approx(15625));

  const auto da = builtin_space("darts");
  CHECK(da.block_count() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(da.block(i).rows == 14);
    CHECK(da.block(i).cols == 7);
    CHECK(da.block(i).node_count == 4);
    CHECK(da.block(i).discretizer == Discretizer::kDartsTop2);
  }
  CHECK(da.total_dim == 196);

  const auto ofa = builtin_space("ofa_mbv3");
  CHECK(ofa.block_count() == 2);
  CHECK(ofa.block(0).rows == 20);
  CHECK(ofa.block(0).cols == 9);
  CHECK(ofa.block(1).rows == 5);
  CHECK(ofa.block(1).cols == 3);

  const auto syn = builtin_space("synthetic", 2, 2);
  CHECK(syn.total_dim == 4);
  CHECK(arch_count(syn) == doctest::Approx(4));

  CHECK_THROWS_AS(builtin_space("frankenspace"), std::invalid_argument);
  CHECK_THROWS_AS(builtin_space("synthetic", 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(builtin_space("synthetic", 3, 1), std::invalid_argument);
}

TEST_CASE("row argmax discretization") {
  const auto d = discretize_row_argmax(make_matrix(2, 2, {0.1, 0.9, 0.7, 0.3}));
  CHECK(d.at(0, 1) == 1);
  CHECK(d.at(1, 0) == 1);
  CHECK(d.row_sum(0) == 1);
  CHECK(d.row_sum(1) == 1);

  // one-hot input is a fixed point
  const auto hot = make_matrix(2, 2, {0, 1, 1, 0});
  const auto dd = discretize_row_argmax(hot);
  CHECK(dd.at(0, 1) == 1);
  CHECK(dd.at(1, 0) == 1);

  // ties resolve to the lowest column
  const auto tie = discretize_row_argmax(make_matrix(1, 3, {0.5, 0.5, 0.2}));
  CHECK(tie == argmax_oracle(make_matrix(1, 3, {0.5, 0.5, 0.2})));
  CHECK(tie.at(0, 0) == 1);
}

TEST_CASE("row argmax matches the scan oracle on random matrices") {
  Rng rng(11);
  for (int it = 0; it < 500; ++it) {
    const auto m = random_matrix(6, 5, rng);
    CHECK(discretize_row_argmax(m) == argmax_oracle(m));
  }
}

TEST_CASE("darts discretization on a single node") {
  const auto d = discretize_darts(make_matrix(2, 2, {0.9, 0.1, 0.2, 0.8}), 1);
  CHECK(d.at(0, 0) == 1);
  CHECK(d.at(1, 1) == 1);
  CHECK(d.row_sum(0) == 1);
  CHECK(d.row_sum(1) == 1);
}

TEST_CASE("darts discretization skips the row already selected") {
  // Top two values share row 0; the second pick must come from another row.
  Matrix m(2, 3);
  m.at(0, 0) = 0.9;
  m.at(0, 1) = 0.8;
  m.at(1, 2) = 0.3;
  const auto d = discretize_darts(m, 1);
  CHECK(d.at(0, 0) == 1);
  CHECK(d.at(1, 2) == 1);
  CHECK(d == darts_band_oracle(m, 1));
}

TEST_CASE("darts discretization matches the exhaustive band oracle") {
  Rng rng(23);
  for (int it = 0; it < 300; ++it) {
    const auto m = random_matrix(5, 3, rng);  // node_count 2: bands of 2 and 3
    CHECK(discretize_darts(m, 2) == darts_band_oracle(m, 2));
  }
  for (int it = 0; it < 100; ++it) {
    const auto m = random_matrix(14, 7, rng);  // full darts cell
    CHECK(discretize_darts(m, 4) == darts_band_oracle(m, 4));
  }
  CHECK_THROWS_AS(discretize_darts(Matrix(13, 7), 4), std::invalid_argument);
}

TEST_CASE("discretize applies per-block rules and validates shape") {
  const auto nb = builtin_space("nb201");
  ContinuousAction uniform;
  uniform.blocks.push_back(Matrix(6, 5, 0.4));
  const auto arch = discretize(nb, uniform);
  for (int r = 0; r < 6; ++r) CHECK(arch.blocks[0].at(r, 0) == 1);  // tie rule

  ContinuousAction bad;
  bad.blocks.push_back(Matrix(5, 5, 0.0));
  CHECK_THROWS_AS(discretize(nb, bad), std::invalid_argument);

  const auto ofa = builtin_space("ofa_mbv3");
  Rng rng(3);
  const auto a = random_action(ofa, rng);
  const auto d = discretize(ofa, a);
  CHECK(d.blocks[0] == argmax_oracle(a.blocks[0]));
  CHECK(d.blocks[1] == argmax_oracle(a.blocks[1]));
}

TEST_CASE("discretize is idempotent and monotone-transform invariant") {
  Rng rng(5);
  const std::vector<SearchSpaceSpec> spaces = {
      builtin_space("nb201"), builtin_space("darts"), builtin_space("ofa_mbv3")};
  for (const auto& space : spaces) {
    for (int it = 0; it < 50; ++it) {
      const auto a = random_action(space, rng);
      const auto d = discretize(space, a);
      CHECK(discretize(space, arch_to_action(d)) == d);

      ContinuousAction warped = a;
      for (auto& blk : warped.blocks)
        for (auto& v : blk.data) v = std::exp(3.0 * v) + v;  // strictly increasing
      CHECK(discretize(space, warped) == d);
    }
  }
}

TEST_CASE("arch_key format, injectivity and round trip") {
  const auto nb = builtin_space("nb201");
  ContinuousAction zeros;
  zeros.blocks.push_back(Matrix(6, 5, 0.0));
  const auto arch = discretize(nb, zeros);
  CHECK(arch_key(nb, arch) == "0:0=0|0:1=0|0:2=0|0:3=0|0:4=0|0:5=0");

  Rng rng(7);
  const std::vector<SearchSpaceSpec> spaces = {builtin_space("nb201"),
                                               builtin_space("darts")};
  for (const auto& space : spaces) {
    std::set<std::string> keys;
    std::vector<DiscreteArch> archs;
    for (int it = 0; it < 500; ++it) {
      const auto a = random_arch(space, rng);
      const auto key = arch_key(space, a);
      CHECK(parse_arch_key(space, key) == a);
      const bool fresh = keys.insert(key).second;
      for (std::size_t i = 0; fresh && i < archs.size(); ++i)
        CHECK(!(archs[i] == a));
      archs.push_back(a);
    }
  }

  CHECK_THROWS_AS(parse_arch_key(nb, "0:0=0"), std::invalid_argument);  // rows missing
  CHECK_THROWS_AS(parse_arch_key(nb, "junk"), std::invalid_argument);
  CHECK_THROWS_AS(parse_arch_key(nb, "0:0=9|0:1=0|0:2=0|0:3=0|0:4=0|0:5=0"),
                  std::invalid_argument);
}

TEST_CASE("nb201 arch string emits the public format and round trips") {
  const auto nb = builtin_space("nb201");
  ContinuousAction a;
  a.blocks.push_back(Matrix(6, 5, 0.0));
  for (int r = 0; r < 6; ++r) a.blocks[0].at(r, 1) = 1.0;  // all skip_connect
  const auto arch = discretize(nb, a);
  CHECK(nb201_arch_str(nb, arch) ==
        "|skip_connect~0|+|skip_connect~0|skip_connect~1|+|skip_connect~0|"
        "skip_connect~1|skip_connect~2|");

  Rng rng(13);
  for (int it = 0; it < 1000; ++it) {
    const auto x = random_arch(nb, rng);
    CHECK(parse_nb201_arch_str(nb, nb201_arch_str(nb, x)) == x);
  }

  CHECK_THROWS_AS(
      parse_nb201_arch_str(
          nb, "|warp_drive~0|+|none~0|none~1|+|none~0|none~1|none~2|"),
      std::invalid_argument);
  CHECK_THROWS_AS(parse_nb201_arch_str(nb, "|none~0|+|none~0|none~1|"),
                  std::invalid_argument);
}

TEST_CASE("random_action is reproducible, in range, and uniform in the mean") {
  const auto nb = builtin_space("nb201");
  Rng a(42), b(42);
  const auto x = random_action(nb, a);
  const auto y = random_action(nb, b);
  CHECK(x.blocks[0].data == y.blocks[0].data);

  Rng rng(99);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.next_unit();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    sum += v;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("flatten and unflatten round trip") {
  const auto da = builtin_space("darts");
  Rng rng(17);
  const auto a = random_action(da, rng);
  const auto v = flatten(da, a);
  CHECK(v.size() == 196);
  const auto back = unflatten(da, v);
  for (int i = 0; i < 2; ++i) CHECK(back.blocks[i].data == a.blocks[i].data);
  CHECK_THROWS_AS(unflatten(da, std::vector<double>(17)), std::invalid_argument);
}

TEST_CASE("random_arch produces valid architectures") {
  Rng rng(31);
  for (const auto& name : {"nb201", "darts", "ofa_mbv3"}) {
    const auto space = builtin_space(name);
    for (int it = 0; it < 200; ++it)
      CHECK_NOTHROW(check_arch_shape(space, random_arch(space, rng)));
  }
}

TEST_CASE("for_each_arch enumerates exactly arch_count architectures") {
  const auto syn = builtin_space("synthetic", 2, 2);
  std::set<std::string> keys;
  for_each_arch(syn, [&](const DiscreteArch& a) {
    keys.insert(arch_key(syn, a));
    return true;
  });
  CHECK(keys.size() == 4);

  // A toy DARTS-style space: one node, 2 edges, 3 ops -> C(2,2)=1 pair, 9 op pairs.
  SearchSpaceSpec toy;
  toy.name = "toy";
  toy.blocks.push_back({2, 3, {"a", "b", "c"}, Discretizer::kDartsTop2, 1});
  toy.total_dim = 6;
  validate_space(toy);
  int count = 0;
  for_each_arch(toy, [&](const DiscreteArch& a) {
    check_arch_shape(toy, a);
    ++count;
    return true;
  });
  CHECK(count == static_cast<int>(arch_count(toy)));
  CHECK(count == 9);
}
