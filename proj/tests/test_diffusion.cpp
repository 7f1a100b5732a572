// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "figdiff/diffusion/sampler.hpp"
#include "figdiff/diffusion/trainer.hpp"
#include "figdiff/encoder/encoder.hpp"
#include "figdiff/synthkit/generate.hpp"

using namespace figdiff;

namespace {

ModelConfig micro_config() {
  ModelConfig cfg;
  cfg.base_channels = 8;
  cfg.channel_mults = {1, 2};
  cfg.num_blocks = 1;
  cfg.attn_widths = {8};
  cfg.n_parts = 6;
  cfg.c_embed = 64;
  cfg.d_attn = 64;
  cfg.cond_width = 32;
  cfg.time_dim = 16;
  cfg.groups = 4;
  cfg.spade_hidden = 4;
  cfg.H = 32;
  cfg.W = 16;
  return cfg;
}

PartCatalog micro_catalog() {
  PartCatalog cat = PartCatalog::toy_default();
  cat.H = 32;
  cat.W = 16;
  return cat;
}

MemoryBank<float> micro_bank(const PartCatalog& cat, const PartEncoder& enc, int m) {
  std::vector<std::vector<std::vector<float>>> ex(static_cast<std::size_t>(cat.n));
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const SemanticScene s = generate_scene(cat, 70000 + seed);
    for (int p = 0; p < cat.n; ++p) {
      const PartImage pi = extract_part(s, p, cat.n);
      if (pi.empty) continue;
      bool null_flag = false;
      auto e = enc.encode_image(pi.image, p, null_flag);
      if (!null_flag) ex[static_cast<std::size_t>(p)].push_back(std::move(e));
    }
  }
  std::string warn;
  return MemoryBank<float>::init(ex, m, 0.995, &warn);
}

}  // namespace

TEST_SUITE("diffusion") {

TEST_CASE("make_schedule: hand values and invariants") {
  SUBCASE("T=4 linear interpolation and cumulative products") {
    const NoiseSchedule s = make_schedule(4, 0.1, 0.4);
    CHECK(s.beta_at(1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.beta_at(2) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s.beta_at(3) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(s.beta_at(4) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(s.abar(1) == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(s.abar(2) == doctest::Approx(0.72).epsilon(1e-9));
    CHECK(s.abar(3) == doctest::Approx(0.504).epsilon(1e-9));
    CHECK(s.abar(4) == doctest::Approx(0.3024).epsilon(1e-9));
    CHECK(s.abar(0) == 1.0);
  }

  SUBCASE("T=1 degenerate") {
    const NoiseSchedule s = make_schedule(1, 0.25, 0.25);
    CHECK(s.beta.size() == 1);
    CHECK(s.beta_at(1) == 0.25);
    CHECK(s.posterior_var_at(1) == doctest::Approx(0.25));
  }

  SUBCASE("invalid bounds rejected") {
    CHECK_THROWS_AS(make_schedule(4, 0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_schedule(4, 0.2, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_schedule(4, 0.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_schedule(0, 0.1, 0.2), std::invalid_argument);
  }

  SUBCASE("alpha_bar strictly decreasing, posterior variance in (0, beta_t]") {
    for (const auto& [T, b0, b1] :
         std::vector<std::tuple<int, double, double>>{{10, 1e-4, 0.02}, {200, 5e-4, 0.1},
                                                      {50, 0.01, 0.2}, {2, 0.3, 0.3}}) {
      const NoiseSchedule s = make_schedule(T, b0, b1);
      for (int t = 1; t <= T; ++t) {
        CHECK(s.abar(t) < s.abar(t - 1));
        CHECK(s.posterior_var_at(t) > 0.0);
        CHECK(s.posterior_var_at(t) <= s.beta_at(t) + 1e-15);
      }
    }
  }
}

TEST_CASE("q_sample: degenerate noise, range checks, hand value") {
  const NoiseSchedule s = make_schedule(4, 0.1, 0.4);
  Tensor<double> x0({2, 2});
  x0.data = {1.0, -0.5, 0.25, 0.0};

  SUBCASE("eps = 0 scales by sqrt(abar)") {
    Tensor<double> eps({2, 2});
    const Tensor<double> xt = q_sample(x0, 3, eps, s);
    for (int i = 0; i < 4; ++i)
      CHECK(xt.data[static_cast<std::size_t>(i)] ==
            doctest::Approx(std::sqrt(0.504) * x0.data[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }

  SUBCASE("hand value at t=2 with x0 = eps = 1") {
    Tensor<double> ones({1});
    ones.data = {1.0};
    Tensor<double> eps({1});
    eps.data = {1.0};
    const Tensor<double> xt = q_sample(ones, 2, eps, s);
    CHECK(xt.data[0] == doctest::Approx(1.3778).epsilon(1e-3));
  }

  SUBCASE("t outside [1, T] rejected") {
    Tensor<double> eps({2, 2});
    CHECK_THROWS_AS(q_sample(x0, 0, eps, s), std::out_of_range);
    CHECK_THROWS_AS(q_sample(x0, 5, eps, s), std::out_of_range);
  }
}

TEST_CASE("condition fuser: determinism, t sensitivity, zero final layer") {
  Rng rng(1);
  ConditionFuser<float> fuser;
  fuser.init(4, 8, 16, 24, rng);
  Tensor<float> f({2, 4, 8});
  Rng r2(2);
  r2.fill_normal(f.ptr(), f.numel());

  const Tensor<float> a = fuser.forward(f, {1, 5});
  const Tensor<float> b = fuser.forward(f, {1, 5});
  CHECK(a.data == b.data);

  // zeroing the final layer collapses t' to the zero vector
  {
    ConditionFuser<float> zeroed;
    Rng rz(1);
    zeroed.init(4, 8, 16, 24, rz);
    zeroed.fc2.w.value.zero();
    zeroed.fc2.b.value.zero();
    const Tensor<float> z = zeroed.forward(f, {1, 5});
    for (const float v : z.data) CHECK(v == 0.f);
  }

  Rng r3(3);
  r3.fill_normal(fuser.fc2.w.value.ptr(), fuser.fc2.w.value.numel(), 0.1);
  const Tensor<float> c1 = fuser.forward(f, {1, 5});
  const Tensor<float> c2 = fuser.forward(f, {200, 5});
  bool differ = false;
  for (int i = 0; i < 24; ++i) differ = differ || c1.at2(0, i) != c2.at2(0, i);
  CHECK(differ);
  // second sample unchanged (same t)
  for (int i = 0; i < 24; ++i) CHECK(c1.at2(1, i) == c2.at2(1, i));

  SUBCASE("sum fusion variant runs and differs from concat") {
    Rng r4(4);
    ConditionFuser<float> sum_fuser;
    sum_fuser.init(4, 8, 16, 24, r4, FuseMode::sum);
    Rng r5(5);
    r5.fill_normal(sum_fuser.fc2.w.value.ptr(), sum_fuser.fc2.w.value.numel(), 0.1);
    const Tensor<float> d1 = sum_fuser.forward(f, {1, 5});
    const Tensor<float> d2 = sum_fuser.forward(f, {7, 5});
    bool sum_differs = false;
    for (int i = 0; i < 24; ++i) sum_differs = sum_differs || d1.at2(0, i) != d2.at2(0, i);
    CHECK(sum_differs);
  }
}

TEST_CASE("p_sample: terminal rule, posterior-mean oracle, determinism") {
  const NoiseSchedule s = make_schedule(20, 1e-3, 0.1);
  Rng rng(7);
  Tensor<double> x0({1, 3, 4, 4});
  for (auto& v : x0.data) v = rng.uniform(-0.9, 0.9);

  SUBCASE("exact-eps recovery matches the analytic posterior mean") {
    for (const int t : {1, 5, 20}) {
      Tensor<double> eps(x0.shape);
      rng.fill_normal(eps.ptr(), eps.numel());
      const Tensor<double> xt = q_sample(x0, t, eps, s);
      const Tensor<double> out = p_sample_from_eps<double>(xt, t, eps, s, nullptr, false);
      // analytic posterior mean of q(x_{t-1} | x_t, x_0)
      const double c0 = std::sqrt(s.abar(t - 1)) * s.beta_at(t) / (1.0 - s.abar(t));
      const double ct = std::sqrt(s.alpha_at(t)) * (1.0 - s.abar(t - 1)) / (1.0 - s.abar(t));
      for (std::size_t i = 0; i < x0.numel(); ++i)
        CHECK(out[i] == doctest::Approx(c0 * x0[i] + ct * xt[i]).epsilon(1e-5));
    }
  }

  SUBCASE("t=1 adds no noise even when z is supplied") {
    Tensor<double> eps(x0.shape);
    rng.fill_normal(eps.ptr(), eps.numel());
    const Tensor<double> x1 = q_sample(x0, 1, eps, s);
    Tensor<double> z(x0.shape);
    rng.fill_normal(z.ptr(), z.numel());
    const Tensor<double> a = p_sample_from_eps(x1, 1, eps, s, &z, false);
    const Tensor<double> b = p_sample_from_eps<double>(x1, 1, eps, s, nullptr, false);
    CHECK(a.data == b.data);
    // and with exact eps the terminal step recovers x0
    for (std::size_t i = 0; i < x0.numel(); ++i)
      CHECK(a[i] == doctest::Approx(x0[i]).epsilon(1e-9));
  }
}

TEST_CASE("oracle-eps ancestral chain reconstructs x0 for T <= 50") {
  Rng rng(11);
  for (const int T : {1, 7, 50}) {
    const NoiseSchedule s = make_schedule(T, 1e-3, 0.15);
    Tensor<float> x0({1, 3, 8, 8});
    for (auto& v : x0.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    Tensor<float> epsT(x0.shape);
    rng.fill_normal(epsT.ptr(), epsT.numel());
    Tensor<float> x = q_sample(x0, T, epsT, s);
    Rng zrng(17);
    for (int t = T; t >= 1; --t) {
      // oracle eps for the current state: eps = (x_t - sqrt(abar) x0)/sqrt(1-abar)
      Tensor<float> eps_hat(x.shape);
      const float a = static_cast<float>(std::sqrt(s.abar(t)));
      const float b = static_cast<float>(std::sqrt(1.0 - s.abar(t)));
      for (std::size_t i = 0; i < x.numel(); ++i) eps_hat[i] = (x[i] - a * x0[i]) / b;
      Tensor<float> z(x.shape);
      zrng.fill_normal(z.ptr(), z.numel());
      x = p_sample_from_eps(x, t, eps_hat, s, t > 1 ? &z : nullptr, true);
    }
    double md = 0;
    for (std::size_t i = 0; i < x.numel(); ++i)
      md = std::max(md, std::fabs(static_cast<double>(x[i]) - x0[i]));
    CHECK(md < 1e-4);
  }
}

TEST_CASE("training_step: determinism, init loss near 1, bank evolution") {
  const PartCatalog cat = micro_catalog();
  const ModelConfig mcfg = micro_config();
  const ReferenceEncoder enc(cat, EncoderConfig{});
  const NoiseSchedule sch = make_schedule(50, 1e-3, 0.1);

  std::vector<PreppedScene<float>> data;
  for (std::uint64_t seed = 0; seed < 8; ++seed)
    data.push_back(prep_scene<float>(generate_scene(cat, 100 + seed), enc, mcfg));
  std::vector<const PreppedScene<float>*> refs;
  for (const auto& p : data) refs.push_back(&p);
  const BatchTensors<float> batch = make_batch(refs, mcfg);

  SUBCASE("identical seeds give identical losses and banks") {
    DiffusionModel<float> m1(mcfg, 5), m2(mcfg, 5);
    MemoryBank<float> b1 = micro_bank(cat, enc, 8);
    MemoryBank<float> b2 = b1;
    StepOptions opts;
    opts.noise_seed = 99;
    const double l1 = training_step(m1, &b1, sch, batch, opts);
    const double l2 = training_step(m2, &b2, sch, batch, opts);
    CHECK(l1 == l2);
    CHECK(b1.slots().data == b2.slots().data);
    CHECK(b1.update_count() == batch.x0.dim(0));
  }

  SUBCASE("loss at identity-at-init weights is about 1") {
    DiffusionModel<float> model(mcfg, 6);
    MemoryBank<float> bank = micro_bank(cat, enc, 8);
    // 64-sample batch built by repeating the prepped scenes
    std::vector<const PreppedScene<float>*> big;
    for (int i = 0; i < 64; ++i) big.push_back(&data[static_cast<std::size_t>(i % data.size())]);
    StepOptions opts;
    opts.noise_seed = 123;
    opts.compute_grads = false;
    const double loss = training_step(model, &bank, sch, make_batch(big, mcfg), opts);
    CHECK(loss == doctest::Approx(1.0).epsilon(0.1));
  }

  SUBCASE("update_bank=false leaves the bank untouched") {
    DiffusionModel<float> model(mcfg, 7);
    MemoryBank<float> bank = micro_bank(cat, enc, 8);
    const auto before = bank.slots().data;
    StepOptions opts;
    opts.noise_seed = 5;
    opts.update_bank = false;
    opts.compute_grads = false;
    training_step(model, &bank, sch, batch, opts);
    CHECK(bank.slots().data == before);
  }

  SUBCASE("non-finite model output names the offending sample") {
    DiffusionModel<float> model(mcfg, 8);
    MemoryBank<float> bank = micro_bank(cat, enc, 8);
    model.find_param("head.w")->value.fill(3e38f);
    model.find_param("head.b")->value.fill(3e38f);
    StepOptions opts;
    opts.noise_seed = 5;
    CHECK_THROWS_WITH_AS(training_step(model, &bank, sch, batch, opts),
                         doctest::Contains("sample"), std::runtime_error);
  }
}

TEST_CASE("sampling: determinism per seed, diversity across seeds") {
  const PartCatalog cat = micro_catalog();
  const ModelConfig mcfg = micro_config();
  const ReferenceEncoder enc(cat, EncoderConfig{});
  const NoiseSchedule sch = make_schedule(8, 1e-2, 0.2);
  DiffusionModel<float> model(mcfg, 9);
  // non-zero head so samples carry model signal
  Rng hr(10);
  hr.fill_normal(model.find_param("head.w")->value.ptr(),
                 model.find_param("head.w")->value.numel(), 0.05);
  MemoryBank<float> bank = micro_bank(cat, enc, 8);
  bank.freeze();

  const SemanticScene scene = generate_scene(cat, 55);
  SampleRequest<float> req;
  req.map = scene.map;
  req.cond = text_condition<float>(scene.captions, enc, cat.n);
  req.seed = 77;

  const auto a = sample(model, &bank, sch, {req});
  const auto b = sample(model, &bank, sch, {req});
  CHECK(a[0].rgb == b[0].rgb);

  SampleRequest<float> req2 = req;
  req2.seed = 78;
  const auto c = sample(model, &bank, sch, {req2});
  CHECK(a[0].rgb != c[0].rgb);

  SUBCASE("request results do not depend on batch composition") {
    const auto batch2 = sample(model, &bank, sch, {req2, req});
    CHECK(batch2[1].rgb == a[0].rgb);
    CHECK(batch2[0].rgb == c[0].rgb);
  }

  SUBCASE("unfrozen bank rejected") {
    MemoryBank<float> thawed = micro_bank(cat, enc, 8);
    CHECK_THROWS_AS(sample(model, &thawed, sch, {req}), std::invalid_argument);
  }
}

TEST_CASE("text-free/text-driven symmetry through the bank") {
  const PartCatalog cat = micro_catalog();
  const ReferenceEncoder enc(cat, EncoderConfig{});
  MemoryBank<float> bank = micro_bank(cat, enc, 16);

  int checked = 0;
  for (std::uint64_t seed = 300; seed < 330; ++seed) {
    const SemanticScene scene = generate_scene(cat, seed);
    const PartEmbeddings<float> fi = image_condition<float>(scene, enc, cat.n);
    const PartEmbeddings<float> ft = text_condition<float>(scene.captions, enc, cat.n);
    const PartEmbeddings<float> ri = bank.read(fi);
    const PartEmbeddings<float> rt = bank.read(ft);
    for (int p = 1; p < cat.n; ++p) {
      if (ri.is_null(p) || rt.is_null(p)) continue;
      std::vector<float> a(ri.values.ptr() + static_cast<std::size_t>(p) * ri.c(),
                           ri.values.ptr() + static_cast<std::size_t>(p + 1) * ri.c());
      std::vector<float> b(rt.values.ptr() + static_cast<std::size_t>(p) * rt.c(),
                           rt.values.ptr() + static_cast<std::size_t>(p + 1) * rt.c());
      CHECK(cosine(a, b) >= 0.9);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

}  // TEST_SUITE
