// Acceptance run: one PASS/FAIL line per criterion, means over seeds 1..10.
//
//   crisp_acceptance [--mnist-dir DIR] [--seeds K] [--skip-n1000] [--strict]
//
// The exit status is non-zero on errors, and on failed criteria with --strict.

#include "crisp/data.hpp"
#include "crisp/errors.hpp"
#include "crisp/eval.hpp"
#include "crisp/experiment.hpp"
#include "crisp/plasticity.hpp"
#include "crisp/rng.hpp"
#include "crisp/serialize.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace crisp;
namespace fs = std::filesystem;

namespace {

struct Settings {
  int seeds = 10;
  bool skip_n1000 = false;
  fs::path mnist_dir;
  fs::path work = fs::temp_directory_path() / "crisp-acceptance";
};

Settings settings;
int failures = 0;

void verdict(const std::string& id, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

void skipped(const std::string& id, const std::string& why) {
  std::printf("SKIP %s: %s\n", id.c_str(), why.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunOptions options() {
  RunOptions o;
  o.cache_dir = settings.work / "cache";
  o.write_files = false;
  return o;
}

Report run(const std::string& preset, std::uint64_t seed,
           const std::function<void(ExperimentSpec&)>& tweak = {}) {
  ExperimentSpec spec = preset_spec(preset);
  spec.seed = seed;
  if (tweak) tweak(spec);
  return run_experiment(spec, options());
}

const ForgettingCurve& curve(const Report& r, const std::string& name) {
  for (const auto& c : r.curves) {
    if (c.name == name) return c;
  }
  throw Error("report " + r.experiment + " has no curve " + name);
}

// Mean over seeds of f(report).
struct SeedMean {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
  }
};

std::vector<Report> runs(const std::string& preset,
                         const std::function<void(ExperimentSpec&)>& tweak = {}) {
  std::vector<Report> out;
  for (int s = 1; s <= settings.seeds; ++s) out.push_back(run(preset, static_cast<std::uint64_t>(s), tweak));
  return out;
}

SeedMean over(const std::vector<Report>& reports, const std::function<double(const Report&)>& f) {
  SeedMean m;
  for (const auto& r : reports) m.add(f(r));
  return m;
}

bool criterion1(const std::vector<Report>& a, double worst_seconds) {
  const auto last = over(a, [](const Report& r) { return curve(r, "decoder").correlation.back(); });
  const auto newest = over(a, [](const Report& r) { return curve(r, "decoder").mean_newest(0.5); });
  // Forgetting is a negative slope against pattern age (newest = age 0).
  const auto age_slope = over(a, [](const Report& r) { return -curve(r, "decoder").trend.slope; });
  const bool ok = last.mean() >= 0.95 && newest.mean() >= 0.85 && age_slope.mean() < 0.0 &&
                  worst_seconds < 180.0;
  verdict("criterion 1 (one-shot storage)", ok,
          "decoder last " + fmt(last.mean()) + " (>= 0.95), newest 50% " + fmt(newest.mean()) +
              " (>= 0.85), slope vs age " + std::to_string(age_slope.mean()) +
              " (< 0), slowest run " + fmt(worst_seconds) + " s (< 180)");
  return ok;
}

void criterion2(const std::vector<Report>& a) {
  const auto k1 = over(a, [](const Report& r) { return curve(r, "recall_k1").mean(); });
  const auto k5 = over(a, [](const Report& r) { return curve(r, "recall_k5").mean(); });
  const auto full = over(a, [](const Report& r) { return curve(r, "full_recall").mean(); });
  const auto full70 = over(a, [](const Report& r) { return curve(r, "full_recall").mean_newest(0.7); });
  const auto dec70 = over(a, [](const Report& r) { return curve(r, "decoder").mean_newest(0.7); });
  const bool ok = k1.mean() < k5.mean() && k5.mean() <= full.mean() &&
                  std::abs(full70.mean() - dec70.mean()) <= 0.05;
  verdict("criterion 2 (recall recovery)", ok,
          "RecallK(1) " + fmt(k1.mean()) + " < RecallK(5) " + fmt(k5.mean()) + " <= FullRecall " +
              fmt(full.mean()) + "; newest 70% FullRecall " + fmt(full70.mean()) + " vs decoder " +
              fmt(dec70.mean()) + " (within 0.05)");
}

void criterion3() {
  const auto a = runs("randcorr-modelA-n200");
  const auto b = runs("randcorr-modelB-n200");
  const double fa = over(a, [](const Report& r) { return curve(r, "full_recall").mean(); }).mean();
  const double fb = over(b, [](const Report& r) { return curve(r, "full_recall").mean(); }).mean();
  const double eb = over(b, [](const Report& r) { return curve(r, "encoder").mean(); }).mean();
  verdict("criterion 3 (correlated input, DG rescue)", fb - fa >= 0.3 && eb >= 0.8,
          "FullRecall Model-B " + fmt(fb) + " - Model-A " + fmt(fa) + " = " + fmt(fb - fa) +
              " (>= 0.3), Model-B encoder " + fmt(eb) + " (>= 0.8)");

  // Criterion 4 reads the DG metrics of the same Model-B runs.
  const double ec = over(b, [](const Report& r) { return r.metrics.at("ec.max_correlation_mean"); }).mean();
  const double dg = over(b, [](const Report& r) { return r.metrics.at("dg.max_correlation_mean"); }).mean();
  const double dgmax = over(b, [](const Report& r) { return r.metrics.at("dg.max_correlation_max"); }).mean();
  const double act = over(b, [](const Report& r) { return r.metrics.at("dg.activity"); }).mean();
  verdict("criterion 4 (DG decorrelation)",
          std::abs(ec - 0.8) <= 0.03 && dg <= 0.55 && act >= 0.02 && act <= 0.05,
          "max pairwise correlation per pattern, mean: EC " + fmt(ec) + " (0.8 +- 0.03) -> DG " +
              fmt(dg) + " (<= 0.55); largest single DG pair " + fmt(dgmax) + "; DG activity " +
              fmt(act) + " (in [0.02, 0.05])");
}

void criterion5() {
  const auto d = runs("randcorr-modelA-dream-n200");
  const double pre = over(d, [](const Report& r) { return curve(r, "encode_decode").mean(); }).mean();
  const double post = over(d, [](const Report& r) { return curve(r, "encode_decode_after_dream").mean(); }).mean();
  const double fpre = over(d, [](const Report& r) { return curve(r, "full_recall").mean(); }).mean();
  const double fpost = over(d, [](const Report& r) { return curve(r, "full_recall_after_dream").mean(); }).mean();
  verdict("criterion 5 (dreaming)", post - pre >= 0.2 && post >= 0.85 && fpost > fpre,
          "encode+decode " + fmt(pre) + " -> " + fmt(post) + " (gain >= 0.2, final >= 0.85), FullRecall " +
              fmt(fpre) + " -> " + fmt(fpost) + " (improves)");
}

void criterion6() {
  const auto s = runs("standard-n200");
  const double k1 = over(s, [](const Report& r) { return curve(r, "recall_k1").mean_newest(0.25); }).mean();
  const double k500 = over(s, [](const Report& r) { return curve(r, "recall_k500").mean(); }).mean();
  const double base = over(s, [](const Report& r) { return curve(r, "recall_k500").baseline; }).mean();
  verdict("criterion 6 (standard framework fails)", k1 >= 0.7 && k500 <= base + 0.1,
          "1 transition newest 25% " + fmt(k1) + " (>= 0.7), 500 transitions " + fmt(k500) +
              " vs baseline " + fmt(base) + " (<= baseline + 0.1)");
}

void criterion7(bool criterion1_ok) {
  const auto c = runs("capacity-2n-n200");
  const double oldest = over(c, [](const Report& r) { return curve(r, "full_recall").mean_oldest(0.5); }).mean();
  const double newest = over(c, [](const Report& r) { return curve(r, "full_recall").mean_newest(0.5); }).mean();
  const double ratio = 200.0 / static_cast<double>(ModelConfig{}.ca3_dim());
  verdict("criterion 7 (capacity)", criterion1_ok && oldest < 0.5 && std::abs(ratio - 0.4) < 1e-12,
          std::string("N patterns meets criterion 1: ") + (criterion1_ok ? "yes" : "no") +
              "; 2N patterns oldest-half FullRecall " + fmt(oldest) + " (< 0.5), newest half " +
              fmt(newest) + "; N / CA3 = " + fmt(ratio));
}

void criterion8() {
  const auto hi = runs("activity10-modelB-n200");
  const auto lo = runs("activity3-modelB-n200");
  const double fhi = over(hi, [](const Report& r) { return curve(r, "full_recall").mean(); }).mean();
  const double flo = over(lo, [](const Report& r) { return curve(r, "full_recall").mean(); }).mean();
  std::string big = "N=1000 at 3.2% skipped";
  bool big_ok = true;
  if (!settings.skip_n1000) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run("activity3-modelB-n1000", 1);
    const double secs = seconds_since(t0);
    const double f = curve(r, "full_recall").mean();
    big_ok = f >= 0.8 && secs < 1800.0;
    big = "N=1000 at 3.2% " + fmt(f) + " (>= 0.8) in " + fmt(secs) + " s (< 1800, seed 1)";
  }
  verdict("criterion 8 (activity scaling)", fhi >= 0.8 && flo < 0.8 && big_ok,
          "FullRecall N=200 at 10% " + fmt(fhi) + " (>= 0.8), N=200 at 3.2% " + fmt(flo) +
              " (< 0.8), " + big);
}

// Compact versions of the property suites; the unit tests cover them in depth.
void criterion9() {
  std::vector<std::string> broken;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) broken.push_back(what);
  };
  Rng rng(99);
  Pathway p(6, 4, 0.3, Activation::Sigmoid);
  init_gaussian(p.weights, 0.5, 1);
  const Matrix x = gen_rand(5, 6, 0.5, 2).patterns;
  const Matrix t = gen_rand(5, 4, 0.5, 3).patterns;

  Pathway q = p;
  q.offsets.array() += 1.7;
  const Matrix xs = (x.array() + 1.7).matrix();
  expect(forward_batch(q, xs).isApprox(forward_batch(p, x)) &&
             hetero_delta(q, xs, t, LearningRate(0.3)).weights.isApprox(
                 hetero_delta(p, x, t, LearningRate(0.3)).weights),
         "centering invariance");
  const auto fixed = hetero_delta(p, x, forward_batch(p, x), LearningRate(0.5));
  expect(fixed.weights.isZero() && fixed.bias.isZero(), "zero-update fixed point");
  expect((2.0 * hetero_delta(p, x, t, LearningRate(0.2)).weights)
             .isApprox(hetero_delta(p, x, t, LearningRate(0.4)).weights),
         "eta linearity");

  bool pearson_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(10), b(10);
    for (Index i = 0; i < 10; ++i) a(i) = rng.normal(), b(i) = a(i) + rng.normal();
    const double r = pearson(a, b);
    pearson_ok &= r >= -1.0 && r <= 1.0 && std::abs(pearson(b, a) - r) < 1e-12 &&
                  std::abs(pearson((3.0 * a.array() - 2.0).matrix(), b) - r) < 1e-9;
  }
  expect(pearson_ok, "pearson symmetry/bounds/affine invariance");

  const auto rand = gen_rand(100, 100, 0.35, 4);
  bool act = true;
  for (Index i = 0; i < rand.size(); ++i) act &= rand.pattern(i).sum() == 35.0;
  expect(act, "exact generator activity");
  const auto chain = gen_rand_corr(100, 100, 0.35, 0.1, 5);
  bool ham = true;
  for (Index i = 1; i < chain.size(); ++i) {
    ham &= (chain.pattern(i) - chain.pattern(i - 1)).cwiseAbs().sum() == 10.0 &&
           chain.pattern(i).sum() == 35.0;
  }
  expect(ham, "RAND-CORR Hamming/activity conservation");

  fs::create_directories(settings.work / "props");
  const Matrix img = gen_rand(4, 12, 0.5, 6).patterns;
  write_idx_images(settings.work / "props" / "i.idx", img, 3, 4);
  write_idx_labels(settings.work / "props" / "l.idx", {1, 2, 3, 4});
  const auto back = load_mnist(settings.work / "props" / "i.idx", settings.work / "props" / "l.idx");
  expect(back.patterns == img && back.labels.size() == 4, "IDX round trip");
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> rgb(3072, 2);
  for (Index i = 0; i < rgb.size(); ++i) rgb.data()[i] = static_cast<std::uint8_t>(i % 251);
  write_cifar_batch(settings.work / "props" / "c.bin", rgb, {7, 8});
  std::vector<std::uint8_t> labels;
  const Matrix gray = load_cifar_gray({settings.work / "props" / "c.bin"}, &labels);
  expect(labels == std::vector<std::uint8_t>{7, 8} &&
             std::abs(gray(0, 0) - (rgb(0, 0) + rgb(1024, 0) + rgb(2048, 0)) / 3.0) < 1e-12,
         "CIFAR round trip");

  ExperimentSpec spec = parse_spec("[model]\nvariant = model-b\nn = 30\n[recall]\nnoise = 0.2\n[dream]\nloops = 1\n");
  spec.seed = 3;
  const auto a = run_experiment(spec, options());
  const auto b = run_experiment(spec, options());
  expect(a.hashes == b.hashes, "frozen-pathway checksums");
  spec.out = settings.work / "det-a";
  run_experiment(spec, RunOptions{});
  spec.out = settings.work / "det-b";
  run_experiment(spec, RunOptions{});
  bool same = true;
  for (const auto& e : fs::directory_iterator(settings.work / "det-a")) {
    same &= read_bytes(e.path()) == read_bytes(settings.work / "det-b" / e.path().filename());
  }
  expect(same, "byte-identical reports");

  std::string detail = broken.empty() ? "all property checks hold" : "broken:";
  for (const auto& b2 : broken) detail += " " + b2 + ";";
  verdict("criterion 9 (property suites)", broken.empty(), detail);
}

void criterion10() {
  const auto r = runs("rand-modelB-n200");
  const double clean = over(r, [](const Report& x) { return curve(x, "full_recall").mean_newest(0.5); }).mean();
  const double noisy = over(r, [](const Report& x) { return curve(x, "full_recall_noise10").mean_newest(0.5); }).mean();
  const double spurious = over(r, [](const Report& x) { return x.metrics.at("noise50.spurious"); }).mean();
  verdict("criterion 10 (noise robustness)", std::abs(clean - noisy) <= 0.1 && spurious >= 0.8,
          "newest 50% FullRecall clean " + fmt(clean) + " vs 10% noise " + fmt(noisy) +
              " (within 0.1); Spurious at 50% noise " + fmt(spurious) + " (>= 0.8)");
}

void mnist_smoke() {
  const auto images = settings.mnist_dir / "train-images-idx3-ubyte";
  const auto labels = settings.mnist_dir / "train-labels-idx1-ubyte";
  if (settings.mnist_dir.empty() || !fs::exists(images)) {
    skipped("MNIST smoke", "no IDX files in '" + settings.mnist_dir.string() + "'");
    return;
  }
  ExperimentSpec spec = preset_spec("mnist-modelB-n200");
  spec.data.images = images;
  spec.data.labels = labels;
  spec.out = settings.work / "mnist";
  RunOptions o = options();
  o.write_files = true;
  const auto r = run_experiment(spec, o);
  const double full = curve(r, "full_recall").mean();
  bool grids = r.images.size() == 3;
  for (const auto& g : r.images) grids &= fs::exists(spec.out / (g.name + ".pgm"));
  verdict("MNIST smoke", full >= 0.6 && grids,
          "FullRecall mean " + fmt(full) + " (>= 0.6), " + std::to_string(r.images.size()) +
              " image grids written to " + spec.out.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRISP acceptance criteria"};
  bool strict = false;
  std::string work;
  app.add_option("--mnist-dir", settings.mnist_dir, "directory with MNIST IDX files");
  app.add_option("--seeds", settings.seeds, "seeds per stochastic criterion")->check(CLI::PositiveNumber);
  app.add_flag("--skip-n1000", settings.skip_n1000, "skip the N = 1000 run of criterion 8");
  app.add_flag("--strict", strict, "exit non-zero when a criterion fails");
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);
  if (!work.empty()) settings.work = work;
  fs::create_directories(settings.work);

  try {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Report> a;
    double worst = 0.0;
    for (int s = 1; s <= settings.seeds; ++s) {
      const auto t = std::chrono::steady_clock::now();
      a.push_back(run("rand-modelA-n200", static_cast<std::uint64_t>(s)));
      worst = std::max(worst, seconds_since(t));
    }
    const bool c1 = criterion1(a, worst);
    criterion2(a);
    criterion3();
    criterion5();
    criterion6();
    criterion7(c1);
    criterion8();
    criterion9();
    criterion10();
    mnist_smoke();
    std::printf("%d criteria failed, %.0f s total\n", failures, seconds_since(t0));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 2;
  }
  return strict && failures > 0 ? 1 : 0;
}
