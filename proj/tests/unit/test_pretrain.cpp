#include "crisp/data.hpp"
#include "crisp/eval.hpp"
#include "crisp/pretrain.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace crisp;

TEST_CASE("CA3 pre-training learns the cyclic chain") {
  const auto& s = fixtures::scaffold200();
  const auto& seq = s.sequence;
  REQUIRE(seq.dim() == 500);
  REQUIRE(seq.length() == 200);
  for (Index i = 0; i < seq.length(); ++i) CHECK(seq.pattern(i).sum() == 100.0);

  const Matrix next = forward_batch(s.recurrent, seq.patterns);
  double sum = 0.0, worst = 1.0;
  for (Index i = 0; i < seq.length(); ++i) {
    const double c = pearson(next.col(i), seq.pattern(seq.successor(i)));
    sum += c;
    worst = std::min(worst, c);
  }
  MESSAGE("successor correlation mean " << sum / 200 << " min " << worst);
  CHECK(sum / 200 >= 0.99);
  CHECK(worst >= 0.95);

  SUBCASE("noisy cues converge within five transitions") {
    Index converged = 0;
    for (Index i = 0; i < seq.length(); ++i) {
      Vector state = corrupt(seq.pattern(i), {0.10, derive_seed(5, std::to_string(i))});
      bool ok = false;
      for (Index k = 1; k <= 5 && !ok; ++k) {
        state = forward(s.recurrent, state);
        ok = pearson(state, seq.pattern(seq.advance(i, k))) >= 0.99;
      }
      converged += ok;
    }
    CHECK(converged >= 190);
  }
}

TEST_CASE("CA3 pre-training with zero epochs stays at initialization") {
  auto cfg = fixtures::ca3_config(fixtures::config(40));
  cfg.epochs = 0;
  const auto s = pretrain_ca3(cfg, 3);
  Matrix init(cfg.dim, cfg.dim);
  const Matrix next = forward_batch(s.recurrent, s.sequence.patterns);
  double sum = 0.0;
  Index defined = 0;
  for (Index i = 0; i < s.sequence.length(); ++i) {
    const double c = pearson_or(next.col(i), s.sequence.pattern(s.sequence.successor(i)), 0.0);
    sum += c;
    ++defined;
  }
  CHECK(std::abs(sum / static_cast<double>(defined)) < 0.1);
  CHECK(s.recurrent.update_count == 0);
  CHECK(s.recurrent.bias.isZero());
  CHECK(s.recurrent.weights.cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("dentate gyrus codes are sparse and decorrelated") {
  const auto& dg = fixtures::dentate200();
  CHECK(dg.visible_dim() == 220);
  CHECK(dg.hidden_dim() == 2400);
  CHECK(static_cast<double>(dg.hidden_dim()) / dg.visible_dim() == doctest::Approx(10.9).epsilon(0.01));

  const auto fresh = gen_rand(200, 220, 0.35, 77);
  const Matrix codes = encode_batch(dg, fresh.patterns);
  const double activity = codes.mean();
  MESSAGE("DG activity " << activity);
  CHECK(activity >= 0.02);
  CHECK(activity <= 0.05);

  const auto chain = gen_rand_corr(200, 220, 0.35, 0.10, 78);
  const auto ec_profile = max_correlation_profile(chain.patterns);
  const auto dg_profile = max_correlation_profile(encode_batch(dg, chain.patterns));
  double ec_mean = 0.0, dg_mean = 0.0;
  for (std::size_t i = 0; i < ec_profile.size(); ++i) {
    ec_mean += ec_profile[i] / 200.0;
    dg_mean += dg_profile[i] / 200.0;
  }
  MESSAGE("max-correlation profile EC " << ec_mean << " DG " << dg_mean);
  CHECK(ec_mean == doctest::Approx(0.8).epsilon(0.0375));
  CHECK(dg_mean <= 0.55);
}

TEST_CASE("SI codec") {
  // Incompressible binary data needs more updates than the image setup.
  const auto data = gen_rand(2000, 220, 0.35, 90);
  SiCodecConfig cfg;
  cfg.ec_dim = 220;
  cfg.epochs = 30;
  cfg.learning_rate = 0.1;
  auto round_trip = [&](const AutoEncoderPathway& codec) {
    const Matrix back = decode_batch(codec, encode_batch(codec, data.patterns.leftCols(200)));
    double sum = 0.0;
    for (Index t = 0; t < 200; ++t) sum += pearson_or(back.col(t), data.pattern(t), 0.0);
    return sum / 200.0;
  };

  const auto codec = pretrain_si_codec(data.patterns, cfg, 91);
  const Matrix ec = encode_batch(codec, data.patterns);
  CHECK(is_binary(ec));
  MESSAGE("EC code activity " << ec.mean());
  CHECK(ec.mean() >= 0.30);
  CHECK(ec.mean() <= 0.40);
  const double trained = round_trip(codec);
  MESSAGE("round trip " << trained);
  CHECK(trained >= 0.9);

  // Tied weights make even a random codec a crude projection of its input,
  // so the untrained round trip is compared with the trained one.
  cfg.epochs = 0;
  const double untrained = round_trip(pretrain_si_codec(data.patterns, cfg, 91));
  MESSAGE("untrained round trip " << untrained);
  CHECK(untrained < trained - 0.1);
}
