#include <map>
#include <set>
#include <tuple>

#include <catch2/catch_amalgamated.hpp>

#include "cursamp/samplers.hpp"

using namespace cursamp;

namespace {

std::vector<u64> rand_tuple(Rng& rng, const Field& f, u32 len) {
  std::vector<u64> v(len);
  for (auto& c : v) c = rng.below(f.q());
  return v;
}

}  // namespace

TEST_CASE("line sampler matches the worked example") {
  Field f5 = Field::parse("5");
  Sampler line = line_sampler(f5, 2);
  REQUIRE(line.n() == 4);
  REQUIRE(line.d() == 1);
  REQUIRE(line.m() == 2);
  REQUIRE(line.degree_bound() == 2);

  // a = (1,2), b = (3,4), y = 2: (1*2+3, 2*2+4) = (0, 3) mod 5.
  std::vector<u64> x = {1, 2, 3, 4}, y = {2};
  REQUIRE(line.eval(x, y) == std::vector<u64>{0, 3});
}

TEST_CASE("curve sampler matches the worked example") {
  Field f5 = Field::parse("5");
  Sampler curve = curve_sampler(f5, 2, 4);
  REQUIRE(curve.n() == 8);
  REQUIRE(curve.d() == 1);
  REQUIRE(curve.degree_bound() == 4);

  // c_0 = (1,0), c_1 = (0,1), c_2 = c_3 = 0, y = 3: (1, 3).
  std::vector<u64> x = {1, 0, 0, 1, 0, 0, 0, 0}, y = {3};
  REQUIRE(curve.eval(x, y) == std::vector<u64>{1, 3});
}

TEST_CASE("a line is a two-block curve with swapped blocks") {
  Field f3 = Field::parse("3");
  Sampler line = line_sampler(f3, 2);
  Sampler curve = curve_sampler(f3, 2, 2);
  std::vector<u64> x(4), y(1);
  do {
    // line layout (a, b) versus curve layout (c_0, c_1) = (b, a)
    std::vector<u64> cx = {x[2], x[3], x[0], x[1]};
    for (y[0] = 0; y[0] < 3; ++y[0])
      REQUIRE(line.eval(x, y) == curve.eval(cx, y));
  } while (next_tuple(x, 3));
}

TEST_CASE("error reduction feeds the sampler's randomness port") {
  Field f3 = Field::parse("3");
  Sampler S = line_sampler(f3, 1);   // n = 2
  Sampler f = line_sampler(f3, 2);   // m = 2 = S.n
  Sampler red = reduce_error(S, f);

  REQUIRE(red.n() == f.n());
  REQUIRE(red.d() == f.d() + S.d());
  REQUIRE(red.m() == S.m());
  REQUIRE(red.degree_bound() == S.degree_bound() * f.degree_bound());

  std::vector<u64> x(4), y(2);
  do {
    std::fill(y.begin(), y.end(), 0);
    do {
      auto got = red.eval(x, y);
      auto mid = f.eval(x, std::vector<u64>{y[0]});
      auto want = S.eval(mid, std::vector<u64>{y[1]});
      REQUIRE(got == want);
    } while (next_tuple(y, 3));
  } while (next_tuple(x, 3));
}

TEST_CASE("error reduction with a curve feeder, random spot checks") {
  Field f7 = Field::parse("7");
  Sampler S = line_sampler(f7, 2);      // n = 4
  Sampler f = curve_sampler(f7, 4, 3);  // m = 4 = S.n, degree 3
  Sampler red = reduce_error(S, f);
  REQUIRE(red.degree_bound() == 6);

  Rng rng(2024, 1);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = rand_tuple(rng, f7, red.n());
    auto y = rand_tuple(rng, f7, red.d());
    auto mid = f.eval(x, std::vector<u64>{y[0]});
    auto want = S.eval(mid, std::vector<u64>{y[1]});
    REQUIRE(red.eval(x, y) == want);
  }
}

TEST_CASE("subsampling chains the seed through the inner sampler") {
  Field f3 = Field::parse("3");
  Sampler S1 = line_sampler(f3, 2);  // d = 1
  Sampler S2 = line_sampler(f3, 1);  // m = 1 = S1.d
  Sampler sub = subsample(S1, S2);

  REQUIRE(sub.n() == S1.n() + S2.n());
  REQUIRE(sub.d() == S2.d());
  REQUIRE(sub.m() == S1.m());
  REQUIRE(sub.degree_bound() == 4);

  std::vector<u64> x(6), y(1);
  do {
    for (y[0] = 0; y[0] < 3; ++y[0]) {
      std::vector<u64> x1(x.begin(), x.begin() + 4);
      std::vector<u64> x2(x.begin() + 4, x.end());
      auto want = S1.eval(x1, S2.eval(x2, y));
      REQUIRE(sub.eval(x, y) == want);
    }
  } while (next_tuple(x, 3));
}

TEST_CASE("projection keeps the leading output coordinates") {
  Field f3 = Field::parse("3");
  Sampler full = line_sampler(f3, 3);
  Sampler proj = project_output(full, 2);
  REQUIRE(proj.n() == full.n());
  REQUIRE(proj.m() == 2);
  REQUIRE(proj.degree_bound() == full.degree_bound());

  Rng rng(77, 0);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = rand_tuple(rng, f3, full.n());
    auto rows_full = full.sample_set(x);
    auto rows_proj = proj.sample_set(x);
    REQUIRE(rows_full.size() == rows_proj.size());
    for (size_t i = 0; i < rows_full.size(); ++i) {
      REQUIRE(rows_proj[i] ==
              std::vector<u64>(rows_full[i].begin(), rows_full[i].begin() + 2));
    }
  }
}

TEST_CASE("sample set enumerates seeds in canonical order") {
  Field f3 = Field::parse("3");
  Sampler line = line_sampler(f3, 1);
  std::vector<u64> x = {1, 2};  // y + 2
  auto rows = line.sample_set(x);
  REQUIRE(rows == std::vector<std::vector<u64>>{{2}, {0}, {1}});

  // Multi-coordinate seeds tick with the first coordinate most significant.
  Sampler pre = seed_prefix_sampler(f3, 1, 2, 2);
  auto tuples = pre.sample_set(std::vector<u64>{0});
  REQUIRE(tuples.size() == 9);
  REQUIRE(tuples[0] == std::vector<u64>{0, 0});
  REQUIRE(tuples[1] == std::vector<u64>{0, 1});
  REQUIRE(tuples[3] == std::vector<u64>{1, 0});
  REQUIRE(tuples[8] == std::vector<u64>{2, 2});
}

TEST_CASE("per-slice output coordinates interpolate within the degree bound") {
  Field f7 = Field::parse("7");
  Rng rng(11, 3);

  Sampler curve = curve_sampler(f7, 2, 3);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = rand_tuple(rng, f7, curve.n());
    auto rows = curve.sample_set(x);
    for (u32 c = 0; c < curve.m(); ++c) {
      std::vector<u64> vals(7);
      for (u64 y = 0; y < 7; ++y) vals[y] = rows[y][c];
      // t coefficient blocks leave slice degree at most t-1.
      REQUIRE(interpolated_degree(f7, vals) <= 2);
    }
  }

  // Lines stay linear in the seed.
  Sampler line = line_sampler(f7, 2);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = rand_tuple(rng, f7, line.n());
    auto rows = line.sample_set(x);
    for (u32 c = 0; c < line.m(); ++c) {
      std::vector<u64> vals(7);
      for (u64 y = 0; y < 7; ++y) vals[y] = rows[y][c];
      REQUIRE(interpolated_degree(f7, vals) <= 1);
    }
  }

  Sampler sub = subsample(line_sampler(f7, 1), line_sampler(f7, 1));
  for (int trial = 0; trial < 20; ++trial) {
    auto x = rand_tuple(rng, f7, sub.n());
    auto rows = sub.sample_set(x);
    std::vector<u64> vals(7);
    for (u64 y = 0; y < 7; ++y) vals[y] = rows[y][0];
    REQUIRE(interpolated_degree(f7, vals) <= sub.degree_bound());
  }
}

TEST_CASE("symbolic forms agree with evaluation") {
  Field f4 = Field::parse("2^2");
  Rng rng(404, 0);
  Caps caps;

  auto check = [&](const Sampler& s, int trials) {
    PolyMap sym = s.symbolic();
    REQUIRE(sym.arity() == s.n() + s.d());
    REQUIRE(sym.components().size() == s.m());
    REQUIRE(sym.degree() <= s.degree_bound());
    for (int i = 0; i < trials; ++i) {
      auto x = rand_tuple(rng, f4, s.n());
      auto y = rand_tuple(rng, f4, s.d());
      std::vector<u64> xy = x;
      xy.insert(xy.end(), y.begin(), y.end());
      REQUIRE(sym.eval(xy) == s.eval(x, y));
    }
  };

  check(line_sampler(f4, 2), 60);
  check(curve_sampler(f4, 1, 3), 60);
  check(seed_prefix_sampler(f4, 2, 2, 1), 60);
  check(reduce_error(line_sampler(f4, 1), line_sampler(f4, 2)), 100);
  check(subsample(line_sampler(f4, 2), line_sampler(f4, 1)), 100);
  check(project_output(curve_sampler(f4, 3, 2), 2), 60);

  // Line components carry total degree exactly 2: a_c * y + b_c.
  REQUIRE(line_sampler(f4, 2).symbolic().degree() == 2);
}

TEST_CASE("flattening rewrites an extension sampler over the base field") {
  Field f2 = Field::parse("2");
  ExtensionTower tower = ExtensionTower::make(f2, 2);
  Field f4 = tower.ext();

  Sampler ext_line = line_sampler(f4, 1);
  Sampler flat = flatten_sampler(ext_line, tower);
  REQUIRE(flat.field().same(f2));
  REQUIRE(flat.n() == 4);
  REQUIRE(flat.d() == 2);
  REQUIRE(flat.m() == 2);
  REQUIRE(flat.degree_bound() == ext_line.degree_bound());

  PolyMap sym = flat.symbolic();
  std::vector<u64> x(4), y(2);
  do {
    std::fill(y.begin(), y.end(), 0);
    do {
      // Reference: lift each pair, run over F_4, flatten the output.
      u64 a = tower.lift(std::span<const u64>(x).subspan(0, 2));
      u64 b = tower.lift(std::span<const u64>(x).subspan(2, 2));
      u64 yy = tower.lift(y);
      auto ext_out = ext_line.eval(std::vector<u64>{a, b}, std::vector<u64>{yy});
      auto want = tower.flatten(ext_out[0]);

      REQUIRE(flat.eval(x, y) == want);
      std::vector<u64> xy = x;
      xy.insert(xy.end(), y.begin(), y.end());
      REQUIRE(sym.eval(xy) == want);
    } while (next_tuple(y, 2));
  } while (next_tuple(x, 2));
}

TEST_CASE("opaque samplers evaluate but have no symbolic form") {
  Field f5 = Field::parse("5");
  Sampler swap = opaque_sampler(
      f5, 2, 1, 2, 1,
      [](std::span<const u64> x, std::span<const u64> y, std::span<u64> out) {
        out[0] = x[1];
        out[1] = x[0];
        (void)y;
      });
  REQUIRE(swap.eval(std::vector<u64>{3, 4}, std::vector<u64>{0}) ==
          std::vector<u64>{4, 3});
  REQUIRE_THROWS_AS(swap.symbolic(), ValueError);

  // Opaque pieces still compose.
  Sampler red = reduce_error(line_sampler(f5, 1), swap);
  REQUIRE(red.eval(std::vector<u64>{3, 4}, std::vector<u64>{0, 2}) ==
          std::vector<u64>{(4 * 2 + 3) % 5});
}

TEST_CASE("port mismatches are rejected") {
  Field f5 = Field::parse("5");
  Field f7 = Field::parse("7");
  Sampler a = line_sampler(f5, 2);
  Sampler b = line_sampler(f5, 3);

  REQUIRE_THROWS_AS(reduce_error(a, b), ValueError);     // b.m = 3 != a.n = 4
  REQUIRE_THROWS_AS(subsample(a, b), ValueError);        // b.m = 3 != a.d = 1
  REQUIRE_THROWS_AS(project_output(a, 0), ValueError);
  REQUIRE_THROWS_AS(project_output(a, 3), ValueError);
  REQUIRE_THROWS_AS(reduce_error(a, line_sampler(f7, 2)), ValueError);
  REQUIRE_THROWS_AS(seed_prefix_sampler(f5, 1, 2, 3), ValueError);

  ExtensionTower tower = ExtensionTower::make(f5, 2);
  REQUIRE_THROWS_AS(flatten_sampler(a, tower), ValueError);

  REQUIRE_THROWS_AS(a.eval(std::vector<u64>{1, 2}, std::vector<u64>{0}),
                    ValueError);
}

TEST_CASE("sample set enumeration respects the state cap") {
  Field f16 = Field::parse("16");
  Sampler pre = seed_prefix_sampler(f16, 1, 3, 1);
  Caps tight;
  tight.state_cap = 100;  // 16^3 = 4096 seeds
  REQUIRE_THROWS_AS(pre.sample_set(std::vector<u64>{0}, tight), CapExceeded);
}

TEST_CASE("descriptors report structure and ports") {
  Field f16 = Field::parse("2^4");
  Sampler s = subsample(line_sampler(f16, 2), curve_sampler(f16, 1, 3));
  json d = s.descriptor();
  REQUIRE(d["schema"] == "cursamp/sampler/v1");
  REQUIRE(d["field"] == "2^4:1,1,0,0,1");
  REQUIRE(d["n"] == 7);
  REQUIRE(d["d"] == 1);
  REQUIRE(d["m"] == 2);
  REQUIRE(d["declared_degree"] == 6);
  REQUIRE(d["provenance"]["kind"] == "subsample");
  REQUIRE(d["provenance"]["outer"]["kind"] == "line");
  REQUIRE(d["provenance"]["inner"]["t"] == 3);
}

TEST_CASE("identity pieces make the combinators transparent") {
  Field f3 = Field::parse("3");
  auto copy_x = [](std::span<const u64> x, std::span<const u64>, std::span<u64> out) {
    std::copy(x.begin(), x.end(), out.begin());
  };
  // Seedless identity on randomness: S(x, ()) = x.
  Sampler ident2 = opaque_sampler(f3, 2, 0, 2, 1, copy_x);

  Sampler f = line_sampler(f3, 2);
  Sampler left = reduce_error(ident2, f);  // should behave exactly like f
  std::vector<u64> x(4);
  do {
    for (u64 y = 0; y < 3; ++y)
      REQUIRE(left.eval(x, std::vector<u64>{y}) == f.eval(x, std::vector<u64>{y}));
  } while (next_tuple(x, 3));

  // Identity feeder: (S * id)(x, ((), y)) = S(x, y).
  Sampler S = line_sampler(f3, 1);
  Sampler right = reduce_error(S, ident2);
  std::vector<u64> x2(2);
  do {
    for (u64 y = 0; y < 3; ++y)
      REQUIRE(right.eval(x2, std::vector<u64>{y}) ==
              S.eval(x2, std::vector<u64>{y}));
  } while (next_tuple(x2, 3));
}

TEST_CASE("line slices through uniform randomness are pairwise independent") {
  Field f3 = Field::parse("3");
  Sampler line = line_sampler(f3, 2);

  for (u64 y1 = 0; y1 < 3; ++y1) {
    for (u64 y2 = 0; y2 < 3; ++y2) {
      if (y1 == y2) continue;
      std::map<std::pair<u64, u64>, u32> joint;
      std::vector<u64> x(4);
      do {
        auto p1 = line.eval(x, std::vector<u64>{y1});
        auto p2 = line.eval(x, std::vector<u64>{y2});
        joint[{p1[0] * 3 + p1[1], p2[0] * 3 + p2[1]}]++;
      } while (next_tuple(x, 3));
      REQUIRE(joint.size() == 81);  // all (F_3^2)^2 pairs...
      for (const auto& [k, v] : joint) REQUIRE(v == 1);  // ...exactly once
    }
  }
}

TEST_CASE("curve slices through uniform randomness are t-wise independent") {
  Field f5 = Field::parse("5");
  Sampler curve = curve_sampler(f5, 1, 3);

  // Three distinct seeds; each output triple appears once per 125 coefficients.
  std::map<std::tuple<u64, u64, u64>, u32> joint;
  std::vector<u64> x(3);
  do {
    auto a = curve.eval(x, std::vector<u64>{1});
    auto b = curve.eval(x, std::vector<u64>{2});
    auto c = curve.eval(x, std::vector<u64>{4});
    joint[{a[0], b[0], c[0]}]++;
  } while (next_tuple(x, 5));
  REQUIRE(joint.size() == 125);
  for (const auto& [k, v] : joint) REQUIRE(v == 1);
}

TEST_CASE("degenerate lines and curves are constant") {
  Field f5 = Field::parse("5");
  Sampler line = line_sampler(f5, 2);
  // a = 0: constant b.
  for (u64 y = 0; y < 5; ++y)
    REQUIRE(line.eval(std::vector<u64>{0, 0, 3, 4}, std::vector<u64>{y}) ==
            std::vector<u64>{3, 4});

  Sampler curve = curve_sampler(f5, 2, 3);
  std::vector<u64> zeros(6, 0);
  for (u64 y = 0; y < 5; ++y)
    REQUIRE(curve.eval(zeros, std::vector<u64>{y}) == std::vector<u64>{0, 0});

  // Nonconstant lines over F_3 hit every value exactly once.
  Field f3 = Field::parse("3");
  Sampler l1 = line_sampler(f3, 1);
  for (u64 a = 1; a < 3; ++a) {
    for (u64 b = 0; b < 3; ++b) {
      auto rows = l1.sample_set(std::vector<u64>{a, b});
      std::set<u64> seen;
      for (const auto& r : rows) seen.insert(r[0]);
      REQUIRE(seen.size() == 3);
    }
  }
}
