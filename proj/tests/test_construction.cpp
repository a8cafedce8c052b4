#include <catch2/catch_amalgamated.hpp>

#include "cursamp/construction.hpp"

using namespace cursamp;

namespace {

std::vector<u64> rand_tuple(Rng& rng, const Field& f, u32 len) {
  std::vector<u64> v(len);
  for (auto& c : v) c = rng.below(f.q());
  return v;
}

bool has_warning(const std::vector<Warning>& ws, const std::string& kind) {
  for (const auto& w : ws)
    if (w.kind == kind) return true;
  return false;
}

}  // namespace

TEST_CASE("outer parameters match the worked example") {
  Field f16 = Field::parse("16");
  OuterParams p = outer_params(4, Rat(1, 256), f16);
  REQUIRE(p.m == 4);
  REQUIRE(p.s == 2);
  REQUIRE(p.d == 3);
  REQUIRE(p.n == 19);  // 16 + ceil(log_16 512)
  REQUIRE(p.ext_dims == std::vector<u32>{2, 1});
  REQUIRE(p.block_widths == std::vector<u32>{8, 4});
  REQUIRE(p.degree == 76);
  REQUIRE(!has_warning(p.warnings, "converter-width"));

  // Block widths total 4(2^s - 1), strictly below n.
  u32 total = 0;
  for (u32 w : p.block_widths) total += w;
  REQUIRE(total == 4 * (4 - 1));
  REQUIRE(total < p.n);
}

TEST_CASE("outer parameters round m up and record the projection") {
  Field f16 = Field::parse("16");
  OuterParams p3 = outer_params(3, Rat(1, 256), f16);
  REQUIRE(p3.m_requested == 3);
  REQUIRE(p3.m == 4);
  REQUIRE(p3.s == 2);

  OuterParams p1 = outer_params(1, Rat(1, 16), f16);
  REQUIRE(p1.m == 1);
  REQUIRE(p1.s == 0);
  REQUIRE(p1.d == 1);
  REQUIRE(p1.ext_dims.empty());
  REQUIRE(p1.n == 4 + 2);  // ceil(log_16 32) = 2
}

TEST_CASE("construction parameter ranges are enforced") {
  Field f16 = Field::parse("16");
  REQUIRE_THROWS_AS(outer_params(0, Rat(1, 2), f16), ValueError);
  REQUIRE_THROWS_AS(outer_params(2, Rat(0), f16), ValueError);
  REQUIRE_THROWS_AS(outer_params(2, Rat(1), f16), ValueError);
  REQUIRE_THROWS_AS(outer_params(2, Rat(3, 2), f16), ValueError);
  REQUIRE_THROWS_AS(inner_params(0, Rat(1, 2), f16), ValueError);
  REQUIRE_THROWS_AS(inner_params(2, Rat(2), f16), ValueError);
}

TEST_CASE("oversized converter blocks warn in params and fail the build") {
  Field f16 = Field::parse("16");
  OuterParams p = outer_params(64, Rat(1, 16), f16);
  REQUIRE(has_warning(p.warnings, "converter-width"));  // 4*32 = 128 > 16
  REQUIRE_THROWS_AS(build_outer(64, Rat(1, 16), f16), ValueError);
}

TEST_CASE("outer build matches an independent straight-line oracle") {
  Field f4 = Field::parse("2^2");
  Sampler outer = build_outer(2, Rat(1, 4), f4);
  REQUIRE(outer.n() == 10);  // 8 + ceil(log_4 8)
  REQUIRE(outer.d() == 2);
  REQUIRE(outer.m() == 2);
  REQUIRE(outer.degree_bound() == 20);

  Rng rng(808, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = rand_tuple(rng, f4, 10);
    u64 y1 = rng.below(4), y2 = rng.below(4);

    // Converter: f_x evaluated at y1 and its zeta-shifts.
    auto fx = [&](u64 pt) {
      u64 acc = 0;
      for (size_t i = x.size(); i-- > 0;) acc = f4.add(f4.mul(acc, pt), x[i]);
      return acc;
    };
    u64 c0 = y1;
    u64 c1 = fx(y1);
    u64 c2 = fx(f4.mul(f4.zeta(), y1));
    u64 c3 = fx(f4.mul(f4.zeta(), f4.mul(f4.zeta(), y1)));
    // Line over F_4 with a = (c0, c1), b = (c2, c3) at seed y2.
    std::vector<u64> want = {f4.add(f4.mul(c0, y2), c2), f4.add(f4.mul(c1, y2), c3)};

    REQUIRE(outer.eval(x, std::vector<u64>{y1, y2}) == want);
  }
}

TEST_CASE("outer build at the example scale has the declared shape") {
  Field f16 = Field::parse("16");
  Sampler s4 = build_outer(4, Rat(1, 256), f16);
  REQUIRE(s4.n() == 19);
  REQUIRE(s4.d() == 3);
  REQUIRE(s4.m() == 4);
  REQUIRE(s4.degree_bound() == 76);

  // Projection to 3 coordinates reuses the same power-of-two chain.
  Sampler s3 = build_outer(3, Rat(1, 256), f16);
  REQUIRE(s3.m() == 3);
  Rng rng(13, 0);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = rand_tuple(rng, f16, 19);
    auto y = rand_tuple(rng, f16, 3);
    auto full = s4.eval(x, y);
    REQUIRE(s3.eval(x, y) ==
            std::vector<u64>(full.begin(), full.begin() + 3));
  }
}

TEST_CASE("trivial outer sampler passes the seed through") {
  Field f16 = Field::parse("16");
  Sampler s = build_outer(1, Rat(1, 16), f16);
  Rng rng(3, 0);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = rand_tuple(rng, f16, s.n());
    u64 y = rng.below(16);
    REQUIRE(s.eval(x, std::vector<u64>{y}) == std::vector<u64>{y});
  }
}

TEST_CASE("inner parameters match the worked example") {
  Field f16 = Field::parse("16");
  InnerParams p = inner_params(4, rat_pow(Rat(16), -4), f16);
  REQUIRE(p.s == 2);
  REQUIRE(p.levels.size() == 3);
  REQUIRE(p.levels[0].dim == 4);
  REQUIRE(p.levels[1].dim == 2);
  REQUIRE(p.levels[2].dim == 1);
  REQUIRE(p.levels[0].n_i == 1);
  REQUIRE(p.levels[1].n_i == 16);
  REQUIRE(p.levels[2].n_i == 336);  // 256 + 20*4
  REQUIRE(p.n == 336);
  REQUIRE(p.degree == 16 * 84 * 84);  // (16/4)^2 * (336/4)^2

  // The level-2 condenser needs width 32 but q^{d_2} = 16.
  REQUIRE(has_warning(p.warnings, "condenser-width"));
}

TEST_CASE("inner parameter ledgers balance") {
  for (u64 q : {16ull, 64ull, 256ull}) {
    Field f = Field::parse(std::to_string(q));
    for (u32 m = 1; m <= 16; ++m) {
      InnerParams p = inner_params(m, rat_pow(Rat(BigInt(q)), -2), f);
      REQUIRE(m <= p.levels[0].dim);
      for (u32 i = 1; i < p.levels.size(); ++i) {
        const auto& lv = p.levels[i];
        const auto& prev = p.levels[i - 1];
        REQUIRE(lv.n_i % 4 == 0);
        // randomness split: condenser part + three curve blocks
        REQUIRE(lv.curve_t * lv.dim + 3 * lv.curve_t * lv.dim == lv.randomness);
        // condenser output refills the previous level's randomness
        REQUIRE(lv.rscon_width * lv.dim == prev.randomness);
      }
    }
  }
}

TEST_CASE("inner build wires level one through the curve seed") {
  Field f5 = Field::parse("5");
  Sampler inner = build_inner(2, Rat(1, 5), f5);
  REQUIRE(inner.d() == 1);
  REQUIRE(inner.m() == 2);
  u64 n1 = 16 + 20;  // 16 + 20*ceil(log_5 5)
  REQUIRE(inner.n() == n1);
  REQUIRE(inner.degree_bound() == (n1 / 4) * (n1 / 4));

  // At level one the projection ignores the condensed randomness, so the
  // output is exactly the last two coordinates of the curve block.
  Sampler curve = curve_sampler(f5, 3, u32(n1 / 4));
  Rng rng(99, 0);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = rand_tuple(rng, f5, u32(n1));
    u64 y = rng.below(5);
    std::vector<u64> xc(x.begin() + n1 / 4, x.end());
    auto c = curve.eval(xc, std::vector<u64>{y});
    REQUIRE(inner.eval(x, std::vector<u64>{y}) ==
            std::vector<u64>{c[1], c[2]});
  }
}

TEST_CASE("inner build fails with a clear report when widths collide") {
  Field f16 = Field::parse("16");
  try {
    build_inner(4, rat_pow(Rat(16), -4), f16);
    FAIL("expected a parameter error");
  } catch (const ValueError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("level 2") != std::string::npos);
    REQUIRE(msg.find("32") != std::string::npos);
  }
}

TEST_CASE("inner build crosses extension levels") {
  Field f64 = Field::parse("64");
  Sampler inner = build_inner(4, rat_pow(Rat(64), -2), f64);
  u64 n2 = 256 + 20 * 2;
  REQUIRE(inner.n() == n2);
  REQUIRE(inner.d() == 1);
  REQUIRE(inner.m() == 4);
  REQUIRE(inner.degree_bound() == 16 * (n2 / 4) * (n2 / 4));

  // Deterministic and in-range outputs.
  Rng rng(7, 7);
  auto x = rand_tuple(rng, f64, u32(n2));
  auto a = inner.eval(x, std::vector<u64>{5});
  auto b = inner.eval(x, std::vector<u64>{5});
  REQUIRE(a == b);
  for (u64 c : a) REQUIRE(c < 64);
}

TEST_CASE("combined report adds the two randomness ledgers") {
  Field f16 = Field::parse("16");
  ConstructionReport r = samp_params(4, Rat(1, 256), f16);
  REQUIRE(r.outer.n == 19);
  REQUIRE(r.inner.m == 3);       // inner target = outer seed length
  REQUIRE(r.inner.n == 316);     // 256 + 20*ceil(log_16 512)
  REQUIRE(r.n == 335);
  REQUIRE(r.seed == 1);
  REQUIRE(r.degree == BigInt(76) * (16 * 79 * 79));

  json j = r.to_json();
  REQUIRE(j["schema"] == "cursamp/construction-report/v1");
  REQUIRE(j["n"] == 335);
  REQUIRE(j["outer"]["block_widths"] == json({8, 4}));
  REQUIRE(j["inner"]["levels"].size() == 3);
}

TEST_CASE("combined build chains outer and inner") {
  Field f64 = Field::parse("64");
  Rat delta = rat_pow(Rat(2), -12);
  Sampler samp = build_samp(2, delta, f64);
  ConstructionReport r = samp_params(2, delta, f64);
  REQUIRE(samp.n() == r.n);
  REQUIRE(samp.d() == 1);
  REQUIRE(samp.m() == 2);

  Sampler outer = build_outer(2, delta / 2, f64);
  Sampler inner = build_inner(outer.d(), delta / 2, f64);
  Rng rng(606, 0);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = rand_tuple(rng, f64, samp.n());
    u64 y = rng.below(64);
    std::vector<u64> xo(x.begin(), x.begin() + outer.n());
    std::vector<u64> xi(x.begin() + outer.n(), x.end());
    auto mid = inner.eval(xi, std::vector<u64>{y});
    REQUIRE(samp.eval(x, std::vector<u64>{y}) == outer.eval(xo, mid));
  }
}

TEST_CASE("combined build slices interpolate within the degree budget") {
  Field f64 = Field::parse("64");
  Sampler samp = build_samp(2, rat_pow(Rat(2), -12), f64);
  Rng rng(42, 0);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = rand_tuple(rng, f64, samp.n());
    auto rows = samp.sample_set(x);
    for (u32 c = 0; c < samp.m(); ++c) {
      std::vector<u64> vals(64);
      for (u64 y = 0; y < 64; ++y) vals[y] = rows[y][c];
      REQUIRE(interpolated_degree(f64, vals) <= samp.degree_bound());
    }
  }
}

TEST_CASE("trivial combined sampler is the identity on its seed") {
  Field f16 = Field::parse("16");
  Sampler samp = build_samp(1, Rat(1, 256), f16);
  REQUIRE(samp.m() == 1);
  REQUIRE(samp.d() == 1);
  Rng rng(21, 0);
  auto x = rand_tuple(rng, f16, samp.n());
  for (u64 y = 0; y < 16; ++y)
    REQUIRE(samp.eval(x, std::vector<u64>{y}) == std::vector<u64>{y});
}
