#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "temg/rng.hpp"
#include "temg/tta.hpp"

using namespace temg;
using namespace temg::test;

namespace {

bool params_equal(const ModelParams& a, const ModelParams& b) {
  auto ta = a.tensors();
  auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (size_t i = 0; i < ta.size(); ++i)
    if (ta[i].second->raw() != tb[i].second->raw()) return false;
  return true;
}

double max_param_delta(const ModelParams& a, const ModelParams& b) {
  auto ta = a.tensors();
  auto tb = b.tensors();
  double m = 0.0;
  for (size_t i = 0; i < ta.size(); ++i) {
    const auto& av = ta[i].second->raw();
    const auto& bv = tb[i].second->raw();
    for (size_t j = 0; j < av.size(); ++j) m = std::max(m, std::abs(av[j] - bv[j]));
  }
  return m;
}

Matrix random_rows(size_t n, size_t d, uint64_t seed) {
  Matrix m(n, d);
  Rng rng(seed);
  for (double& v : m.raw()) v = rng.normal();
  return m;
}

double rel_l2(const std::vector<double>& fd, const std::vector<double>& an) {
  double diff2 = 0.0, an2 = 0.0;
  for (size_t i = 0; i < fd.size(); ++i) {
    double d = fd[i] - an[i];
    diff2 += d * d;
    an2 += an[i] * an[i];
  }
  return std::sqrt(diff2) / std::max(std::sqrt(an2), 1e-12);
}

}  // namespace

TEST_CASE("tta config validation") {
  TtaConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  auto bad = [&](auto&& mutate) {
    TtaConfig c;
    mutate(c);
    CHECK_THROWS_AS(validate(c), ConfigError);
  };
  bad([](TtaConfig& c) { c.tau_low = -0.1; });
  bad([](TtaConfig& c) { c.tau_low = c.tau_high; });
  bad([](TtaConfig& c) { c.tau_high = 1.1; });
  bad([](TtaConfig& c) { c.alpha = 1.5; });
  bad([](TtaConfig& c) { c.alpha = -0.1; });
  bad([](TtaConfig& c) { c.beta = -0.5; });
  bad([](TtaConfig& c) { c.temperature = 0.0; });
  bad([](TtaConfig& c) { c.gamma = 1.0; });
  bad([](TtaConfig& c) { c.gamma = -1.0; });
  bad([](TtaConfig& c) { c.edge_drop_p = 1.0; });
  bad([](TtaConfig& c) { c.edge_drop_p = -0.2; });
  bad([](TtaConfig& c) { c.lr = 0.0; });
  bad([](TtaConfig& c) { c.steps = -1; });
  bad([](TtaConfig& c) { c.neg_samples = 0; });
}

TEST_CASE("binary confidence and the confidence band") {
  CHECK(binary_confidence(0.0) == 0.5);
  const double ln3 = std::log(3.0);
  CHECK(binary_confidence(ln3) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(binary_confidence(-ln3) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(binary_confidence(100.0) == 1.0);
  CHECK(binary_confidence(-100.0) == 1.0);
  CHECK(binary_confidence(1.7) == binary_confidence(-1.7));

  // Band is exclusive below, inclusive above: logit 0 sits exactly on the
  // default lower bound and must not be picked.
  std::vector<double> logits = {0.0, ln3, 100.0, -ln3};
  std::vector<uint32_t> mask = confidence_mask(logits, 0.5, 0.9);
  CHECK(mask == std::vector<uint32_t>{1, 3});
  // Inclusive upper bound: conf(ln3) == 0.75 passes a band ending there.
  mask = confidence_mask(logits, 0.5, 0.75);
  CHECK(mask == std::vector<uint32_t>{1, 3});
  mask = confidence_mask(logits, 0.75, 1.0);
  CHECK(mask == std::vector<uint32_t>{2});
  mask = confidence_mask(logits, 0.0, 1.0);
  CHECK(mask.size() == 4);

  SUBCASE("widening the band never loses nodes") {
    Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> z(20);
      for (double& v : z) v = 4.0 * rng.normal();
      double lo = 0.5 + 0.4 * rng.uniform();
      double hi = lo + (1.0 - lo) * rng.uniform() + 1e-9;
      hi = std::min(hi, 1.0);
      double lo2 = 0.5 * lo;  // lower the lower bound
      double hi2 = std::min(1.0, hi + 0.5 * (1.0 - hi) + 1e-12);
      auto inner = confidence_mask(z, lo, hi);
      auto outer = confidence_mask(z, lo2, hi2);
      CHECK(std::includes(outer.begin(), outer.end(), inner.begin(), inner.end()));
    }
  }
}

TEST_CASE("embedding consistency loss") {
  SUBCASE("identical embeddings give zero loss and vanishing gradient") {
    Matrix t = random_rows(5, 4, 1);
    Matrix s = t;
    Matrix grad(5, 4);
    std::vector<uint32_t> mask = {0, 2, 4};
    double l = sim_loss(t, s, mask, &grad);
    // cos(x, x) lands within an ulp of 1, so loss and gradient are only
    // zero up to that rounding
    CHECK(std::abs(l) < 1e-14);
    for (double v : grad.raw()) CHECK(std::abs(v) < 1e-14);
  }

  SUBCASE("opposite embeddings give the maximum loss of two") {
    Matrix t = random_rows(3, 4, 2);
    Matrix s = t;
    for (double& v : s.raw()) v = -v;
    std::vector<uint32_t> mask = {0, 1, 2};
    CHECK(sim_loss(t, s, mask) == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("zero-norm rows count as cosine zero") {
    Matrix t = random_rows(2, 3, 3);
    Matrix s = t;
    for (size_t j = 0; j < 3; ++j) s(1, j) = 0.0;
    Matrix grad(2, 3);
    double l = sim_loss(t, s, {1}, &grad);
    CHECK(l == 1.0);
    for (double v : grad.raw()) CHECK(v == 0.0);

    // mean over the mask: a perfect row and a zero row average to 1/2
    CHECK(sim_loss(t, s, {0, 1}) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("range stays within [0, 2] on random inputs") {
    Rng rng(4);
    for (int rep = 0; rep < 100; ++rep) {
      Matrix t = random_rows(6, 5, 100 + rep);
      Matrix s = random_rows(6, 5, 200 + rep);
      std::vector<uint32_t> mask = {0, 1, 2, 3, 4, 5};
      double l = sim_loss(t, s, mask);
      CHECK(l >= 0.0);
      CHECK(l <= 2.0);
    }
  }

  SUBCASE("gradient matches finite differences and stays inside the mask") {
    Matrix t = random_rows(6, 4, 5);
    Matrix s = random_rows(6, 4, 6);
    std::vector<uint32_t> mask = {1, 3, 4};
    Matrix grad(6, 4);
    sim_loss(t, s, mask, &grad);
    const double h = 1e-5;
    std::vector<double> fd(s.size()), an(grad.raw());
    for (size_t i = 0; i < s.size(); ++i) {
      double keep = s.raw()[i];
      s.raw()[i] = keep + h;
      double up = sim_loss(t, s, mask);
      s.raw()[i] = keep - h;
      double dn = sim_loss(t, s, mask);
      s.raw()[i] = keep;
      fd[i] = (up - dn) / (2.0 * h);
    }
    CHECK(rel_l2(fd, an) < 1e-6);
    for (size_t r = 0; r < 6; ++r) {
      if (std::find(mask.begin(), mask.end(), r) != mask.end()) continue;
      for (size_t j = 0; j < 4; ++j) CHECK(grad(r, j) == 0.0);
    }
  }

  SUBCASE("errors") {
    Matrix t = random_rows(3, 4, 7);
    Matrix s = random_rows(3, 5, 8);
    CHECK_THROWS_AS(sim_loss(t, s, {0}), ConfigError);
    Matrix s2 = random_rows(3, 4, 9);
    CHECK_THROWS_AS(sim_loss(t, s2, {}), ConfigError);
  }
}

TEST_CASE("contrastive loss hand case") {
  // Three nodes; the pool around the anchor necessarily holds both others.
  // Motif features make node 1 the only positive and node 2 the negative;
  // embeddings give cos(anchor,pos)=1 and cos(anchor,neg)=0 so with
  // temperature 1 the loss is log(1 + e^-1).
  Matrix hidden(3, 2);
  hidden(0, 0) = 1.0;
  hidden(1, 0) = 2.0;
  hidden(2, 1) = 5.0;
  Matrix xm(3, 2);
  xm(0, 0) = 1.0;
  xm(1, 0) = 1.0;
  xm(2, 0) = -1.0;

  TtaConfig cfg;
  cfg.gamma = 0.9;
  cfg.temperature = 1.0;
  cfg.neg_samples = 16;
  cfg.seed = 7;

  InfoNceStats st = info_nce_loss(hidden, xm, {0}, cfg, 99);
  CHECK(st.contributors == 1);
  CHECK(st.skipped == 0);
  CHECK(st.loss == doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-12));

  SUBCASE("temperature scales the logits of the softmax") {
    cfg.temperature = 0.5;
    InfoNceStats st2 = info_nce_loss(hidden, xm, {0}, cfg, 99);
    // -log(e^2 / (e^2 + e^0)) = log(1 + e^-2)
    CHECK(st2.loss == doctest::Approx(std::log1p(std::exp(-2.0))).epsilon(1e-12));
  }

  SUBCASE("anchors without a motif-similar candidate are skipped") {
    Matrix h2(2, 2);
    h2(0, 0) = 1.0;
    h2(1, 1) = 1.0;
    Matrix x2(2, 2);
    x2(0, 0) = 1.0;
    x2(1, 0) = -1.0;
    InfoNceStats s2 = info_nce_loss(h2, x2, {0}, cfg, 99);
    CHECK(s2.contributors == 0);
    CHECK(s2.skipped == 1);
    CHECK(s2.loss == 0.0);
  }

  SUBCASE("a positive with no negatives contributes zero loss") {
    Matrix x3(3, 2);
    x3(0, 0) = 1.0;
    x3(1, 0) = 1.0;
    x3(2, 0) = 1.0;
    InfoNceStats s3 = info_nce_loss(hidden, x3, {0}, cfg, 99);
    CHECK(s3.contributors == 1);
    CHECK(s3.loss == 0.0);
  }

  SUBCASE("single-node graphs skip every anchor") {
    Matrix h1(1, 2);
    h1(0, 0) = 1.0;
    InfoNceStats s1 = info_nce_loss(h1, h1, {0}, cfg, 99);
    CHECK(s1.contributors == 0);
    CHECK(s1.skipped == 1);
  }
}

TEST_CASE("contrastive loss respects the negative cap") {
  // Four nodes: the pool always covers all three non-anchors. One is a
  // motif positive, two are motif negatives with different embedding
  // cosines. Allowing a second negative strictly grows the denominator.
  Matrix hidden(4, 2);
  hidden(0, 0) = 1.0;
  hidden(1, 0) = 1.0;
  hidden(1, 1) = 1.0;
  hidden(2, 1) = 1.0;
  hidden(3, 0) = -1.0;
  hidden(3, 1) = 1.0;
  Matrix xm(4, 2);
  xm(0, 0) = 1.0;
  xm(1, 0) = 1.0;
  xm(2, 0) = -1.0;
  xm(3, 0) = -1.0;

  TtaConfig cfg;
  cfg.gamma = 0.9;
  cfg.temperature = 1.0;
  cfg.seed = 3;

  cfg.neg_samples = 1;
  InfoNceStats one = info_nce_loss(hidden, xm, {0}, cfg, 5);
  cfg.neg_samples = 2;
  InfoNceStats two = info_nce_loss(hidden, xm, {0}, cfg, 5);
  CHECK(one.contributors == 1);
  CHECK(two.contributors == 1);
  CHECK(one.loss < two.loss);

  // With the cap at one, the loss matches one of the two single-negative
  // possibilities exactly: the kept negative is node 2 (embedding cosine 0)
  // or node 3 (embedding cosine -1/sqrt2), whichever the pool draw saw first.
  double s_pos = std::exp(1.0 / std::sqrt(2.0));
  double cand_a = -std::log(s_pos / (s_pos + std::exp(0.0)));
  double cand_b = -std::log(s_pos / (s_pos + std::exp(-1.0 / std::sqrt(2.0))));
  bool matches =
      std::abs(one.loss - cand_a) < 1e-12 || std::abs(one.loss - cand_b) < 1e-12;
  CHECK(matches);
}

TEST_CASE("contrastive loss determinism and gradient") {
  Matrix hidden = random_rows(8, 4, 11);
  Matrix xm = random_rows(8, 3, 12);
  std::vector<uint32_t> mask = {0, 2, 5, 7};
  TtaConfig cfg;
  cfg.gamma = 0.0;
  cfg.temperature = 0.7;
  cfg.neg_samples = 3;
  cfg.seed = 21;

  InfoNceStats a = info_nce_loss(hidden, xm, mask, cfg, 17);
  InfoNceStats b = info_nce_loss(hidden, xm, mask, cfg, 17);
  CHECK(a.loss == b.loss);
  CHECK(a.contributors == b.contributors);
  CHECK(a.skipped == b.skipped);
  CHECK(a.contributors + a.skipped == mask.size());
  CHECK(a.loss >= 0.0);

  SUBCASE("gradient matches finite differences") {
    Matrix grad(8, 4);
    info_nce_loss(hidden, xm, mask, cfg, 17, &grad);
    const double h = 1e-5;
    std::vector<double> fd(hidden.size()), an(grad.raw());
    for (size_t i = 0; i < hidden.size(); ++i) {
      double keep = hidden.raw()[i];
      hidden.raw()[i] = keep + h;
      double up = info_nce_loss(hidden, xm, mask, cfg, 17).loss;
      hidden.raw()[i] = keep - h;
      double dn = info_nce_loss(hidden, xm, mask, cfg, 17).loss;
      hidden.raw()[i] = keep;
      fd[i] = (up - dn) / (2.0 * h);
    }
    CHECK(rel_l2(fd, an) < 1e-6);
  }

  SUBCASE("shape mismatch is rejected") {
    Matrix xbad = random_rows(7, 3, 13);
    CHECK_THROWS_AS(info_nce_loss(hidden, xbad, mask, cfg, 17), ConfigError);
  }
}

TEST_CASE("teacher ema update") {
  ModelConfig mc;
  mc.layers = 1;
  mc.hidden = 4;
  mc.input_dim = 3;
  mc.head_hidden = 2;
  mc.fusion_depth = 0;
  mc.seed = 100;

  SUBCASE("hand value") {
    ModelParams t = ModelParams::init(mc);
    ModelParams s = ModelParams::init(mc);
    for (auto& [n, m] : t.tensors())
      for (double& v : m->raw()) v = 1.0;
    for (auto& [n, m] : s.tensors())
      for (double& v : m->raw()) v = 0.0;
    ema_update(t, s, 0.9);
    for (auto& [n, m] : t.tensors())
      for (double v : m->raw()) CHECK(v == doctest::Approx(0.9).epsilon(1e-15));
  }

  SUBCASE("alpha zero copies the student, alpha one is bit-stable") {
    ModelParams t = ModelParams::init(mc);
    mc.seed = 101;
    ModelParams s = ModelParams::init(mc);
    ModelParams t_keep = t;
    ema_update(t, s, 1.0);
    CHECK(params_equal(t, t_keep));
    ema_update(t, s, 0.0);
    CHECK(params_equal(t, s));
  }

  SUBCASE("update stays inside the teacher-student envelope") {
    Rng rng(55);
    ModelParams t = ModelParams::init(mc);
    mc.seed = 102;
    ModelParams s = ModelParams::init(mc);
    for (int rep = 0; rep < 20; ++rep) {
      double alpha = rng.uniform();
      ModelParams before = t;
      ema_update(t, s, alpha);
      auto tb = before.tensors();
      auto ta = t.tensors();
      auto ts = s.tensors();
      for (size_t i = 0; i < ta.size(); ++i) {
        const auto& bv = tb[i].second->raw();
        const auto& av = ta[i].second->raw();
        const auto& sv = ts[i].second->raw();
        for (size_t j = 0; j < av.size(); ++j) {
          CHECK(av[j] >= std::min(bv[j], sv[j]) - 1e-12);
          CHECK(av[j] <= std::max(bv[j], sv[j]) + 1e-12);
        }
      }
    }
  }

  SUBCASE("mismatched architectures are rejected") {
    ModelParams t = ModelParams::init(mc);
    ModelConfig other = mc;
    other.layers = 2;
    ModelParams s = ModelParams::init(other);
    CHECK_THROWS_AS(ema_update(t, s, 0.5), ConfigError);
  }
}

TEST_CASE("single adaptation step") {
  GradFixture f = make_fixture(0, 314);
  ModelParams ckpt = ModelParams::init(f.cfg);
  TtaConfig cfg;
  cfg.lr = 1e-3;
  cfg.edge_drop_p = 0.2;
  cfg.beta = 0.1;
  cfg.seed = 9;

  SUBCASE("an unreachable band leaves the student untouched") {
    ForwardResult r = forward(ckpt, f.mg, f.g.features, f.counts, f.tax, Mode::eval, 0);
    double max_conf = 0.0;
    for (double z : r.logits) max_conf = std::max(max_conf, binary_confidence(z));
    REQUIRE(max_conf < 1.0);
    TtaConfig none = cfg;
    none.tau_low = max_conf;  // exclusive: nothing passes
    none.tau_high = 1.0;
    TtaState state(ckpt, none.lr);
    TtaStepDiag d = tta_step(state, f.mg, f.g.features, f.counts, f.tax, none);
    CHECK(d.mask_size == 0);
    CHECK(d.l_sim == 0.0);
    CHECK(d.l_info == 0.0);
    CHECK(d.l_total == 0.0);
    CHECK(params_equal(state.student, ckpt));
    // teacher had an EMA step against an identical student: numerically a
    // no-op up to rounding
    CHECK(max_param_delta(state.teacher, ckpt) < 1e-15);
  }

  SUBCASE("a full band adapts the student and moves the teacher gently") {
    TtaConfig all = cfg;
    all.tau_low = 0.5;
    all.tau_high = 1.0;
    TtaState state(ckpt, all.lr);
    TtaStepDiag d = tta_step(state, f.mg, f.g.features, f.counts, f.tax, all);
    CHECK(d.step == 1);
    CHECK(d.mask_size > 0);
    CHECK(d.mask_size <= f.g.num_nodes());
    CHECK(d.l_total == d.l_sim + all.beta * d.l_info);
    CHECK(std::isfinite(d.l_sim));
    CHECK(d.l_sim >= 0.0);
    CHECK(d.l_sim <= 2.0);
    CHECK(d.l_info >= 0.0);
    CHECK_FALSE(params_equal(state.student, ckpt));
    // teacher follows by EMA with retention alpha: strictly between the old
    // teacher and the student, much closer to the former
    double d_teacher = max_param_delta(state.teacher, ckpt);
    double d_student = max_param_delta(state.student, ckpt);
    CHECK(d_teacher > 0.0);
    CHECK(d_teacher < d_student);

    TtaStepDiag d2 = tta_step(state, f.mg, f.g.features, f.counts, f.tax, all);
    CHECK(d2.step == 2);
  }

  SUBCASE("beta zero skips the contrastive term") {
    TtaConfig nob = cfg;
    nob.beta = 0.0;
    nob.tau_low = 0.5;
    nob.tau_high = 1.0;
    TtaState state(ckpt, nob.lr);
    TtaStepDiag d = tta_step(state, f.mg, f.g.features, f.counts, f.tax, nob);
    CHECK(d.l_info == 0.0);
    CHECK(d.info_skipped == 0);
    CHECK(d.l_total == d.l_sim);
  }
}

TEST_CASE("full adaptation run") {
  GradFixture f = make_fixture(0, 2718);
  ModelParams ckpt = ModelParams::init(f.cfg);
  ModelParams ckpt_copy = ckpt;
  TtaConfig cfg;
  cfg.steps = 4;
  cfg.lr = 1e-3;
  cfg.edge_drop_p = 0.15;
  cfg.tau_low = 0.5;
  cfg.tau_high = 1.0;
  cfg.seed = 77;

  AdaptResult a = adapt(ckpt, f.mg, f.g.features, f.counts, f.tax, cfg);
  CHECK(a.steps.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(a.steps[i].step == i + 1);
  CHECK(a.final_logits.size() == f.g.num_nodes());
  for (double z : a.final_logits) CHECK(std::isfinite(z));

  // the checkpoint is never mutated
  CHECK(params_equal(ckpt, ckpt_copy));

  SUBCASE("bitwise reproducible") {
    AdaptResult b = adapt(ckpt, f.mg, f.g.features, f.counts, f.tax, cfg);
    CHECK(a.final_logits == b.final_logits);
    CHECK(params_equal(a.teacher, b.teacher));
    CHECK(params_equal(a.student, b.student));
    for (size_t i = 0; i < a.steps.size(); ++i) {
      CHECK(a.steps[i].l_sim == b.steps[i].l_sim);
      CHECK(a.steps[i].l_info == b.steps[i].l_info);
      CHECK(a.steps[i].mask_size == b.steps[i].mask_size);
    }
  }

  SUBCASE("a different seed adapts differently") {
    TtaConfig c2 = cfg;
    c2.seed = 78;
    AdaptResult b = adapt(ckpt, f.mg, f.g.features, f.counts, f.tax, c2);
    CHECK_FALSE(params_equal(a.student, b.student));
  }

  SUBCASE("zero steps returns the checkpoint's own scores") {
    TtaConfig c0 = cfg;
    c0.steps = 0;
    AdaptResult b = adapt(ckpt, f.mg, f.g.features, f.counts, f.tax, c0);
    ForwardResult r = forward(ckpt, f.mg, f.g.features, f.counts, f.tax, Mode::eval, 0);
    CHECK(b.final_logits == r.logits);
    CHECK(params_equal(b.teacher, ckpt));
    CHECK(params_equal(b.student, ckpt));
  }

  SUBCASE("prediction side switch") {
    TtaConfig cs = cfg;
    cs.predict_with_student = true;
    AdaptResult b = adapt(ckpt, f.mg, f.g.features, f.counts, f.tax, cs);
    // same adaptation trajectory, different reporting side
    CHECK(params_equal(a.teacher, b.teacher));
    CHECK(params_equal(a.student, b.student));
    ForwardResult rs =
        forward(b.student, f.mg, f.g.features, f.counts, f.tax, Mode::eval, 0);
    CHECK(b.final_logits == rs.logits);
    CHECK(a.final_logits != b.final_logits);
  }
}
