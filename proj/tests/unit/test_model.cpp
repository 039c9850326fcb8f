#include "crisp/data.hpp"
#include "crisp/errors.hpp"
#include "crisp/eval.hpp"
#include "crisp/model.hpp"
#include "crisp/serialize.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace crisp;
using fixtures::model200;

TEST_CASE("model configuration") {
  const auto mc = fixtures::config(200);
  CHECK(mc.ec_dim() == 220);
  CHECK(mc.ca3_dim() == 500);
  CHECK(mc.dg_dim() == 2400);
  CHECK(mc.cycle_length() == 200);
  CHECK(mc.learning_rate().value() == doctest::Approx(0.1));
  CHECK(static_cast<double>(mc.n) / static_cast<double>(mc.ca3_dim()) == doctest::Approx(0.4));
  CHECK_THROWS_AS(fixtures::config(19).validate(), ConfigError);
  CHECK_NOTHROW(fixtures::config(20).validate());
  auto bad = mc;
  bad.ca3_activity = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(variant_from_string("model-b") == Variant::ModelB);
  CHECK_THROWS_AS(variant_from_string("model-c"), ConfigError);
}

TEST_CASE("Model-B needs a dentate gyrus") {
  CHECK_THROWS_AS(HippocampusModel(fixtures::config(200, Variant::ModelB), fixtures::scaffold200()),
                  ConfigError);
}

TEST_CASE("one-shot storage") {
  auto model = model200();
  const auto data = gen_rand(200, 220, 0.35, 31);

  SUBCASE("a single stored pattern is encoded and decoded") {
    const auto store = model.store_sequence(data.patterns.leftCols(1), 0);
    CHECK(store.length == 1);
    CHECK(pearson(model.encode(data.pattern(0)), store.intrinsic.col(0)) >= 0.9);
  }

  SUBCASE("full sequence") {
    const Pathway recurrent_before = model.recurrent();
    const auto store = model.store_sequence(data.patterns, 0);
    CHECK(model.stored_count() == 200);
    CHECK(sha1_hex(serialize(model.recurrent())) == sha1_hex(serialize(recurrent_before)));
    CHECK(pearson(model.encode(data.pattern(199)), store.intrinsic.col(199)) >= 0.95);
    CHECK(pearson(model.decode(store.intrinsic.col(199)), data.pattern(199)) >= 0.95);

    const auto dec = forgetting_curve(model, store, CurveMode::decoder());
    CHECK(dec.correlation.back() >= 0.95);
    CHECK(dec.mean_newest(0.5) > dec.mean_oldest(0.5));
    CHECK(dec.trend.slope > 0.0);  // pattern index grows towards the newest pattern
    CHECK_THROWS_AS(model.store_sequence(data.patterns.leftCols(1), 0), UsageError);
  }

  SUBCASE("continued storage must be contiguous") {
    model.store_sequence(data.patterns.leftCols(50), 10);
    CHECK(model.start_index() == 10);
    CHECK_THROWS_AS(model.store_sequence(data.patterns.middleCols(50, 10), 0), UsageError);
    const auto store = model.store_sequence(data.patterns.middleCols(50, 10), 60);
    CHECK(store.start == 60);
    CHECK(store.length == 10);
    CHECK(store.position(9) == 69);
    CHECK(model.stored_count() == 60);
  }

  SUBCASE("non-binary input is rejected") {
    Matrix bad = data.patterns.leftCols(2);
    bad(0, 0) = 0.5;
    CHECK_THROWS_AS(model.store_sequence(bad, 0), UsageError);
  }
}

TEST_CASE("transition dynamics") {
  const auto model = model200();
  const auto& seq = model.intrinsic();
  CHECK(model.transition(seq.pattern(3), 0) == seq.pattern(3));

  double closure = 0.0;
  for (Index i = 0; i < seq.length(); i += 20) {
    closure += pearson(model.transition(seq.pattern(i), seq.length()), seq.pattern(i)) / 10.0;
  }
  CHECK(closure >= 0.99);

  // Cues at correlation 0.8 with the truth: a 7% flip at 20% activity.
  Index improved = 0;
  for (Index i = 0; i < seq.length(); ++i) {
    const Vector cue = corrupt(seq.pattern(i), {0.08, derive_seed(3, std::to_string(i))});
    const double one = pearson(model.transition(cue, 1), seq.pattern(seq.advance(i, 1)));
    const double five = pearson(model.transition(cue, 5), seq.pattern(seq.advance(i, 5)));
    improved += five > one || five >= 0.999;
  }
  CHECK(improved >= 180);
}

TEST_CASE("recall traces and relaxation labels") {
  auto model = model200();
  const auto data = gen_rand(200, 220, 0.35, 41);
  const auto store = model.store_sequence(data.patterns, 0);

  const auto trace = model.recall(data.pattern(120), 15, false, 120);
  CHECK(trace.steps.size() == 16);
  CHECK(trace.steps[0].ca3 == model.encode(data.pattern(120)));
  CHECK_FALSE(trace.steps[0].si.has_value());

  SUBCASE("ground-truth seeded trace is Correct") {
    RecallTrace t;
    t.cue_index = 120;
    t.transitions = 15;
    Vector s = store.intrinsic.col(120);
    for (Index k = 0; k <= 15; ++k) {
      t.steps.push_back({s, model.decode(s), std::nullopt});
      s = model.transition(s, 1);
    }
    CHECK(classify_relaxation(t, store) == Relaxation::Correct);
    t.cue_index = 40;
    CHECK(classify_relaxation(t, store) == Relaxation::ShiftedPosition);
  }
  SUBCASE("random CA3 states are Spurious") {
    RecallTrace t;
    t.cue_index = 0;
    t.transitions = 15;
    const auto noise = gen_rand(16, 500, 0.2, 43);
    for (Index k = 0; k <= 15; ++k) t.steps.push_back({noise.pattern(k), Vector::Zero(220), std::nullopt});
    CHECK(classify_relaxation(t, store) == Relaxation::Spurious);
  }
  SUBCASE("a novel cue relaxes into a spurious sequence") {
    const auto novel = gen_rand(1, 220, 0.35, 44);
    const auto t = model.recall(novel.pattern(0), 15, false, 0);
    CHECK(classify_relaxation(t, store) != Relaxation::Correct);
  }
}

TEST_CASE("dreaming") {
  auto model = model200();
  const auto data = gen_rand_corr(200, 220, 0.35, 0.10, 51);
  const auto store = model.store_sequence(data.patterns, 0);

  const auto before = serialize(model);
  model.dream(0, DreamOrder::Sequential);
  CHECK(serialize(model) == before);

  const double pre = forgetting_curve(model, store, CurveMode::encode_decode()).mean();
  const double enc_pre = forgetting_curve(model, store, CurveMode::encoder()).mean();
  model.dream(10, DreamOrder::Sequential, std::nullopt, 5);
  const double post = forgetting_curve(model, store, CurveMode::encode_decode()).mean();
  const double enc_post = forgetting_curve(model, store, CurveMode::encoder()).mean();
  MESSAGE("encode+decode " << pre << " -> " << post << ", encoder " << enc_pre << " -> " << enc_post);
  CHECK(post >= pre + 0.2);
  CHECK(enc_post > enc_pre);
}

TEST_CASE("encoder struggles on correlated input, DG rescues it") {
  auto a_rand = model200();
  auto a_corr = model200();
  auto b_corr = model200(Variant::ModelB);
  const auto rand = gen_rand(200, 220, 0.35, 61);
  const auto corr = gen_rand_corr(200, 220, 0.35, 0.10, 62);
  const double ar = forgetting_curve(a_rand, a_rand.store_sequence(rand.patterns, 0), CurveMode::encoder()).mean();
  const auto sa = a_corr.store_sequence(corr.patterns, 0);
  const auto sb = b_corr.store_sequence(corr.patterns, 0);
  const double ac = forgetting_curve(a_corr, sa, CurveMode::encoder()).mean();
  const double bc = forgetting_curve(b_corr, sb, CurveMode::encoder()).mean();
  MESSAGE("encoder RAND " << ar << " RAND-CORR " << ac << " Model-B " << bc);
  CHECK(ac <= ar - 0.2);
  CHECK(bc > ac);

  CHECK_THROWS_AS(forgetting_curve(a_rand, SequenceStore{}, CurveMode::decoder()), UsageError);
  const double dec_a = forgetting_curve(a_corr, sa, CurveMode::decoder()).mean();
  auto a_rand2 = model200();
  const double dec_r = forgetting_curve(a_rand2, a_rand2.store_sequence(rand.patterns, 0), CurveMode::decoder()).mean();
  CHECK(std::abs(dec_a - dec_r) <= 0.05);
}

TEST_CASE("untouched decoder sits at the baseline") {
  const auto model = model200();
  const auto data = gen_rand(200, 220, 0.35, 71);
  SequenceStore store;
  store.ec = data.patterns;
  store.intrinsic = model.intrinsic().patterns;
  store.length = 200;
  const auto dec = forgetting_curve(model, store, CurveMode::decoder());
  CHECK(std::abs(dec.mean() - dec.baseline) < 0.1);
}

TEST_CASE("standard framework") {
  auto cfg = fixtures::config(200, Variant::StandardFramework);
  auto model = HippocampusModel::standard_framework(cfg, 81);
  const auto ca3 = gen_rand(200, 500, 0.2, 82);
  const auto store = model.store_standard(ca3.patterns, LearningRate(0.01));
  CHECK(store.cycle() == 200);
  const auto k1 = forgetting_curve(model, store, CurveMode::recall(1));
  CHECK(k1.mean_newest(0.25) >= 0.7);
  CHECK_THROWS_AS(forgetting_curve(model, store, CurveMode::decoder()), UsageError);
  CHECK_THROWS_AS(model.store_sequence(Matrix::Zero(220, 1), 0), UsageError);
}
