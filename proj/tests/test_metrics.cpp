// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "figdiff/core/rng.hpp"
#include "figdiff/metrics/alignment.hpp"
#include "figdiff/metrics/frechet.hpp"
#include "figdiff/metrics/ms_ssim.hpp"
#include "figdiff/synthkit/generate.hpp"
#include "msssim_ref.hpp"

using namespace figdiff;

namespace {

using figdiff::oracle::ref_msssim;

ImageF noisy(const ImageF& src, double sigma, std::uint64_t seed) {
  ImageF out = src;
  Rng rng(seed);
  for (auto& v : out.rgb) v = clamp01(v + static_cast<float>(sigma * rng.normal()));
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("ms_ssim: identity, symmetry, degradation monotonicity") {
  const PartCatalog cat = PartCatalog::toy_default();
  const SemanticScene scene = generate_scene(cat, 17);
  const ImageF& x = scene.image;

  CHECK(ms_ssim(x, x) == doctest::Approx(1.0).epsilon(1e-6));

  const ImageF weak = noisy(x, 0.03, 1), strong = noisy(x, 0.25, 2);
  CHECK(ms_ssim(x, strong) < ms_ssim(x, weak));
  CHECK(ms_ssim(x, weak) == doctest::Approx(ms_ssim(weak, x)).epsilon(1e-6));
}

TEST_CASE("ms_ssim: level auto-selection and too-small errors") {
  const MsSsimResult r = ms_ssim_ex(ImageF(64, 32), ImageF(64, 32), 5, 11);
  CHECK(r.levels_used == 2);  // 32 -> 16 supports two 11-tap levels
  CHECK(r.downgraded);

  CHECK_THROWS_WITH_AS(ms_ssim(ImageF(8, 8), ImageF(8, 8)), doctest::Contains("too small"),
                       std::invalid_argument);
  CHECK_THROWS_AS(ms_ssim(ImageF(32, 32), ImageF(16, 16)), std::invalid_argument);
}

TEST_CASE("ms_ssim matches the independent reference implementation") {
  const PartCatalog cat = PartCatalog::toy_default();
  for (std::uint64_t seed = 60; seed < 64; ++seed) {
    const ImageF x = generate_scene(cat, seed).image;
    const ImageF y = noisy(x, 0.1, seed);
    const MsSsimResult got = ms_ssim_ex(x, y);
    const double want = ref_msssim(x, y, 5, 11);
    CHECK(got.value == doctest::Approx(want).epsilon(1e-5));
  }
}

TEST_CASE("frechet_distance hand cases") {
  SUBCASE("identical stats give zero") {
    FeatureStats s;
    s.mean = {0.3, -0.7, 1.1};
    s.cov = {1.0, 0.2, 0.0, 0.2, 2.0, -0.1, 0.0, -0.1, 0.5};
    s.count = 10;
    CHECK(frechet_distance(s, s) == doctest::Approx(0.0).epsilon(1e-6));
  }

  SUBCASE("identity covariances: distance is the squared mean gap") {
    FeatureStats a, b;
    a.mean = {0.0, 0.0};
    b.mean = {3.0, 4.0};
    a.cov = {1, 0, 0, 1};
    b.cov = a.cov;
    a.count = b.count = 5;
    CHECK(frechet_distance(a, b) == doctest::Approx(25.0).epsilon(1e-6));
  }

  SUBCASE("1-D case reduces to (sigma1 - sigma2)^2") {
    FeatureStats a, b;
    a.mean = {0.0};
    b.mean = {0.0};
    a.cov = {1.0};
    b.cov = {4.0};
    a.count = b.count = 5;
    CHECK(frechet_distance(a, b) == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("symmetry on random PSD stats") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const int k = 4;
      std::vector<std::vector<double>> fa, fb;
      for (int i = 0; i < 20; ++i) {
        std::vector<double> va(k), vb(k);
        for (auto& v : va) v = rng.normal();
        for (auto& v : vb) v = 0.5 * rng.normal() + 1.0;
        fa.push_back(va);
        fb.push_back(vb);
      }
      const FeatureStats sa = FeatureStats::from_vectors(fa);
      const FeatureStats sb = FeatureStats::from_vectors(fb);
      const double dab = frechet_distance(sa, sb);
      const double dba = frechet_distance(sb, sa);
      CHECK(dab >= 0.0);
      CHECK(dab == doctest::Approx(dba).epsilon(1e-6));
    }
  }

  SUBCASE("non-PSD covariance beyond tolerance is rejected") {
    FeatureStats a, b;
    a.mean = {0.0, 0.0};
    b.mean = {0.0, 0.0};
    a.cov = {1.0, 0.0, 0.0, -1.0};
    b.cov = {1.0, 0.0, 0.0, 1.0};
    a.count = b.count = 5;
    CHECK_THROWS_AS(frechet_distance(a, b), std::invalid_argument);
  }

  SUBCASE("fewer than two samples rejected") {
    CHECK_THROWS_AS(FeatureStats::from_vectors({{1.0, 2.0}}), std::invalid_argument);
  }
}

TEST_CASE("alignment_score on ground truth and under corruption") {
  const PartCatalog cat = PartCatalog::toy_default();
  const ReferenceEncoder enc(cat, EncoderConfig{});

  SUBCASE("ground-truth scenes score high") {
    double sum = 0;
    int n = 0;
    for (std::uint64_t seed = 500; seed < 530; ++seed) {
      const SemanticScene s = generate_scene(cat, seed);
      sum += alignment_score(s.image, s.map, s.captions, enc, cat.n).mean;
      ++n;
    }
    CHECK(sum / n >= 0.8);
  }

  SUBCASE("recoloring the top away from its caption drops its score") {
    const SceneDetail d = generate_scene_detail(cat, 501);
    const AlignmentScore before =
        alignment_score(d.scene.image, d.scene.map, d.scene.captions, enc, cat.n);
    ImageF corrupted = d.scene.image;
    const int top_color = d.attrs[1].color;
    const Rgb other = cat.color_rgb[static_cast<std::size_t>((top_color + 3) % 6)];
    for (int y = 0; y < cat.H; ++y)
      for (int x = 0; x < cat.W; ++x)
        if (d.scene.map[static_cast<std::size_t>(y) * cat.W + x] == 1)
          corrupted.set(y, x, other.r, other.g, other.b);
    const AlignmentScore after =
        alignment_score(corrupted, d.scene.map, d.scene.captions, enc, cat.n);
    CHECK(after.per_part.at(1) < before.per_part.at(1));
  }

  SUBCASE("missing caption and all-background map are errors") {
    const SemanticScene s = generate_scene(cat, 502);
    std::map<int, std::string> missing = s.captions;
    missing.erase(1);
    CHECK_THROWS_WITH_AS(alignment_score(s.image, s.map, missing, enc, cat.n),
                         doctest::Contains("caption"), std::invalid_argument);
    const std::vector<std::uint8_t> bg(s.map.size(), 0);
    CHECK_THROWS_AS(alignment_score(s.image, bg, s.captions, enc, cat.n),
                    std::invalid_argument);
  }
}

TEST_CASE("toy-FID separates real scenes from uniform noise by a wide margin") {
  const PartCatalog cat = PartCatalog::toy_default();
  const ReferenceEncoder enc(cat, EncoderConfig{});
  std::vector<std::vector<double>> real_a, real_b, noise;
  Rng rng(99);
  for (std::uint64_t i = 0; i < 40; ++i) {
    const SemanticScene sa = generate_scene(cat, 2000 + i);
    const SemanticScene sb = generate_scene(cat, 3000 + i);
    real_a.push_back(scene_features(sa.image, sa.map, enc, cat.n));
    real_b.push_back(scene_features(sb.image, sb.map, enc, cat.n));
    ImageF un(cat.H, cat.W);
    for (auto& v : un.rgb) v = static_cast<float>(rng.uniform());
    noise.push_back(scene_features(un, sb.map, enc, cat.n));
  }
  const double d_real = frechet_distance(FeatureStats::from_vectors(real_a),
                                         FeatureStats::from_vectors(real_b));
  const double d_noise = frechet_distance(FeatureStats::from_vectors(real_a),
                                          FeatureStats::from_vectors(noise));
  MESSAGE("toy-FID real-vs-real ", d_real, " real-vs-noise ", d_noise);
  CHECK(d_noise > 5.0 * d_real);
}

TEST_CASE("feature distance is zero for identical images and positive otherwise") {
  const PartCatalog cat = PartCatalog::toy_default();
  const ReferenceEncoder enc(cat, EncoderConfig{});
  const SemanticScene s = generate_scene(cat, 601);
  CHECK(feature_distance(s.image, s.image, s.map, enc, cat.n) == doctest::Approx(0.0));
  const ImageF other = noisy(s.image, 0.2, 4);
  CHECK(feature_distance(s.image, other, s.map, enc, cat.n) > 0.0);
}

}  // TEST_SUITE
