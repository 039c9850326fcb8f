#include "crisp/experiment.hpp"

#include "crisp/errors.hpp"
#include "crisp/rng.hpp"
#include "crisp/serialize.hpp"
#include "text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace crisp {

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

template <typename T>
T parse_integer(const std::string& field, const std::string& text) {
  T value{};
  const auto t = detail::trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(field + ": expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& field, const std::string& text) {
  double value = 0.0;
  const auto t = detail::trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ConfigError(field + ": expected a number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const auto t = detail::trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(field + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> items;
  for (const auto part : detail::split(text, ',')) {
    const auto t = detail::trim(part);
    if (!t.empty()) items.emplace_back(t);
  }
  return items;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

std::string num(double v) { return detail::format_double(v); }

// One key of the INI schema: how to read it into and write it from a spec.
struct Field {
  std::string section;
  std::string key;
  std::function<void(ExperimentSpec&, const std::string& path, const std::string& value)> read;
  std::function<std::string(const ExperimentSpec&)> write;
};

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    auto add = [&](std::string section, std::string key, auto read, auto write) {
      f.push_back(Field{std::move(section), std::move(key), read, write});
    };
    using S = ExperimentSpec;
    using P = const std::string&;

    add("experiment", "name", [](S& s, P, P v) { s.name = std::string(detail::trim(v)); },
        [](const S& s) { return s.name; });
    add("experiment", "seed", [](S& s, P p, P v) { s.seed = parse_integer<std::uint64_t>(p, v); },
        [](const S& s) { return std::to_string(s.seed); });
    add("experiment", "out", [](S& s, P, P v) { s.out = std::string(detail::trim(v)); },
        [](const S& s) { return s.out.string(); });
    add("experiment", "length", [](S& s, P p, P v) { s.length = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.length); });
    add("experiment", "start_index",
        [](S& s, P p, P v) { s.start_index = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.start_index); });
    add("experiment", "images", [](S& s, P p, P v) { s.images = parse_bool(p, v); },
        [](const S& s) { return std::string(s.images ? "true" : "false"); });

    add("model", "variant",
        [](S& s, P p, P v) {
          try {
            s.model.variant = variant_from_string(detail::trim(v));
          } catch (const ConfigError& e) {
            throw ConfigError(p + ": " + e.what());
          }
        },
        [](const S& s) { return std::string(to_string(s.model.variant)); });
    add("model", "n", [](S& s, P p, P v) { s.model.n = parse_integer<int>(p, v); },
        [](const S& s) { return std::to_string(s.model.n); });
    add("model", "ca3_activity", [](S& s, P p, P v) { s.model.ca3_activity = parse_real(p, v); },
        [](const S& s) { return num(s.model.ca3_activity); });
    add("model", "dg_activity", [](S& s, P p, P v) { s.model.dg_activity = parse_real(p, v); },
        [](const S& s) { return num(s.model.dg_activity); });
    add("model", "ec_activity", [](S& s, P p, P v) { s.model.ec_activity = parse_real(p, v); },
        [](const S& s) { return num(s.model.ec_activity); });
    add("model", "eta",
        [](S& s, P p, P v) {
          if (detail::trim(v) == "auto") {
            s.model.eta.reset();
          } else {
            s.model.eta = parse_real(p, v);
          }
        },
        [](const S& s) { return s.model.eta ? num(*s.model.eta) : std::string("auto"); });
    add("model", "intrinsic_length",
        [](S& s, P p, P v) { s.model.intrinsic_length = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.model.intrinsic_length); });
    add("model", "init_std", [](S& s, P p, P v) { s.model.init_std = parse_real(p, v); },
        [](const S& s) { return num(s.model.init_std); });
    add("model", "standard_eta", [](S& s, P p, P v) { s.standard_eta = parse_real(p, v); },
        [](const S& s) { return num(s.standard_eta); });

    add("data", "kind",
        [](S& s, P p, P v) {
          try {
            s.data.kind = dataset_kind_from_string(detail::trim(v));
          } catch (const Error& e) {
            throw ConfigError(p + ": " + e.what());
          }
        },
        [](const S& s) { return std::string(to_string(s.data.kind)); });
    add("data", "activity", [](S& s, P p, P v) { s.data.activity = parse_real(p, v); },
        [](const S& s) { return num(s.data.activity); });
    add("data", "corr_flip", [](S& s, P p, P v) { s.data.corr_flip = parse_real(p, v); },
        [](const S& s) { return num(s.data.corr_flip); });
    add("data", "pool", [](S& s, P p, P v) { s.data.pool = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.data.pool); });
    add("data", "images", [](S& s, P, P v) { s.data.images = std::string(detail::trim(v)); },
        [](const S& s) { return s.data.images.string(); });
    add("data", "labels", [](S& s, P, P v) { s.data.labels = std::string(detail::trim(v)); },
        [](const S& s) { return s.data.labels.string(); });
    add("data", "batches",
        [](S& s, P, P v) {
          s.data.batches.clear();
          for (auto& item : parse_list(v)) s.data.batches.emplace_back(item);
        },
        [](const S& s) {
          std::vector<std::string> items;
          for (const auto& b : s.data.batches) items.push_back(b.string());
          return join(items);
        });

    add("pretrain.ca3", "epochs", [](S& s, P p, P v) { s.ca3.epochs = parse_integer<int>(p, v); },
        [](const S& s) { return std::to_string(s.ca3.epochs); });
    add("pretrain.ca3", "batch_size",
        [](S& s, P p, P v) { s.ca3.batch_size = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.ca3.batch_size); });
    add("pretrain.ca3", "learning_rate",
        [](S& s, P p, P v) { s.ca3.learning_rate = parse_real(p, v); },
        [](const S& s) { return num(s.ca3.learning_rate); });
    add("pretrain.ca3", "input_noise",
        [](S& s, P p, P v) { s.ca3.input_noise = parse_real(p, v); },
        [](const S& s) { return num(s.ca3.input_noise); });
    add("pretrain.ca3", "noise",
        [](S& s, P p, P v) {
          try {
            s.ca3.noise = ca3_noise_from_string(detail::trim(v));
          } catch (const ConfigError& e) {
            throw ConfigError(p + ": " + e.what());
          }
        },
        [](const S& s) { return std::string(to_string(s.ca3.noise)); });
    add("pretrain.ca3", "init_std", [](S& s, P p, P v) { s.ca3.init_std = parse_real(p, v); },
        [](const S& s) { return num(s.ca3.init_std); });

    add("pretrain.dg", "patterns",
        [](S& s, P p, P v) { s.dg.patterns = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.dg.patterns); });
    add("pretrain.dg", "epochs", [](S& s, P p, P v) { s.dg.epochs = parse_integer<int>(p, v); },
        [](const S& s) { return std::to_string(s.dg.epochs); });
    add("pretrain.dg", "batch_size",
        [](S& s, P p, P v) { s.dg.batch_size = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.dg.batch_size); });
    add("pretrain.dg", "learning_rate",
        [](S& s, P p, P v) { s.dg.learning_rate = parse_real(p, v); },
        [](const S& s) { return num(s.dg.learning_rate); });
    add("pretrain.dg", "init_std", [](S& s, P p, P v) { s.dg.init_std = parse_real(p, v); },
        [](const S& s) { return num(s.dg.init_std); });

    add("pretrain.si", "epochs", [](S& s, P p, P v) { s.si.epochs = parse_integer<int>(p, v); },
        [](const S& s) { return std::to_string(s.si.epochs); });
    add("pretrain.si", "batch_size",
        [](S& s, P p, P v) { s.si.batch_size = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.si.batch_size); });
    add("pretrain.si", "learning_rate",
        [](S& s, P p, P v) { s.si.learning_rate = parse_real(p, v); },
        [](const S& s) { return num(s.si.learning_rate); });
    add("pretrain.si", "momentum", [](S& s, P p, P v) { s.si.momentum = parse_real(p, v); },
        [](const S& s) { return num(s.si.momentum); });
    add("pretrain.si", "init_std", [](S& s, P p, P v) { s.si.init_std = parse_real(p, v); },
        [](const S& s) { return num(s.si.init_std); });

    add("recall", "curves",
        [](S& s, P p, P v) {
          s.curves.clear();
          for (const auto& item : parse_list(v)) {
            try {
              s.curves.push_back(CurveMode::parse(item));
            } catch (const ConfigError& e) {
              throw ConfigError(p + ": " + e.what());
            }
          }
        },
        [](const S& s) {
          std::vector<std::string> items;
          for (const auto& c : s.curves) items.push_back(c.name());
          return join(items);
        });
    add("recall", "noise",
        [](S& s, P p, P v) {
          s.noise_levels.clear();
          for (const auto& item : parse_list(v)) s.noise_levels.push_back(parse_real(p, item));
        },
        [](const S& s) {
          std::vector<std::string> items;
          for (double x : s.noise_levels) items.push_back(num(x));
          return join(items);
        });
    add("recall", "relaxation_transitions",
        [](S& s, P p, P v) { s.relaxation_transitions = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.relaxation_transitions); });
    add("recall", "relaxation_window",
        [](S& s, P p, P v) { s.relaxation_window = parse_integer<Index>(p, v); },
        [](const S& s) { return std::to_string(s.relaxation_window); });
    add("recall", "relaxation_threshold",
        [](S& s, P p, P v) { s.relaxation_threshold = parse_real(p, v); },
        [](const S& s) { return num(s.relaxation_threshold); });

    add("dream", "loops",
        [](S& s, P p, P v) {
          const int loops = parse_integer<int>(p, v);
          if (loops == 0) {
            s.dream.reset();
          } else {
            if (!s.dream) s.dream = DreamSpec{};
            s.dream->loops = loops;
          }
        },
        [](const S& s) { return std::to_string(s.dream ? s.dream->loops : 0); });
    add("dream", "order",
        [](S& s, P p, P v) {
          const auto t = detail::trim(v);
          DreamOrder order;
          if (t == "sequential") {
            order = DreamOrder::Sequential;
          } else if (t == "random") {
            order = DreamOrder::Random;
          } else {
            throw ConfigError(p + ": expected sequential or random, got '" + v + "'");
          }
          if (!s.dream) s.dream = DreamSpec{0, order};
          s.dream->order = order;
        },
        [](const S& s) {
          return std::string(s.dream && s.dream->order == DreamOrder::Random ? "random"
                                                                             : "sequential");
        });
    return f;
  }();
  return fields;
}

std::vector<CurveMode> default_curves(Variant variant) {
  if (variant == Variant::StandardFramework) {
    return {CurveMode::recall(1), CurveMode::recall(5), CurveMode::recall(25),
            CurveMode::recall(500)};
  }
  return {CurveMode::encoder(),   CurveMode::decoder(),   CurveMode::encode_decode(),
          CurveMode::recall(1),   CurveMode::recall(5),   CurveMode::full_recall()};
}

void log_line(const RunOptions& options, const std::string& text) {
  if (options.log) *options.log << "[crisp] " << text << '\n';
}

std::string percent_label(double fraction) {
  return std::to_string(static_cast<long long>(std::llround(fraction * 100.0)));
}

}  // namespace

void ExperimentSpec::resolve() {
  ca3.dim = model.ca3_dim();
  ca3.length = model.cycle_length();
  ca3.activity = model.ca3_activity;
  dg.ec_dim = model.ec_dim();
  dg.dg_dim = model.dg_dim();
  dg.ec_activity = model.ec_activity;
  dg.dg_activity = model.dg_activity;
  si.ec_dim = model.ec_dim();
  si.ec_activity = model.ec_activity;
  if (curves.empty()) curves = default_curves(model.variant);
  if (dream && dream->loops == 0) dream.reset();
}

void ExperimentSpec::validate() const {
  if (model.n < 20) {
    throw ConfigError("model.n: N = " + std::to_string(model.n) +
                      " is below the supported range (N >= 20)");
  }
  if (model.n > 5000) throw ConfigError("model.n: N = " + std::to_string(model.n) + " is too large");
  try {
    model.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (name.empty()) throw ConfigError("experiment.name: must not be empty");
  if (length < 0) throw ConfigError("experiment.length: must be non-negative");
  if (model.variant != Variant::StandardFramework && stored_length() > model.cycle_length()) {
    throw ConfigError("experiment.length: " + std::to_string(stored_length()) +
                      " patterns exceed the intrinsic cycle of " +
                      std::to_string(model.cycle_length()) + " (raise model.intrinsic_length)");
  }
  if (start_index < 0 || start_index >= model.cycle_length()) {
    throw ConfigError("experiment.start_index: out of range");
  }
  if (!(standard_eta > 0.0)) throw ConfigError("model.standard_eta: must be positive");
  if (!(data.activity > 0.0 && data.activity < 1.0)) {
    throw ConfigError("data.activity: must lie in (0, 1)");
  }
  if (data.kind == DatasetKind::RandCorr) {
    const Index k = active_count(data.corr_flip, model.ec_dim());
    if (k < 2 || k % 2 != 0) {
      throw ConfigError("data.corr_flip: round(corr_flip * EC) = " + std::to_string(k) +
                        " must be even and at least 2");
    }
  }
  if (data.pool != 0 && data.pool < stored_length()) {
    throw ConfigError("data.pool: smaller than the stored length");
  }
  if (data.kind == DatasetKind::Mnist) {
    if (data.images.empty()) throw ConfigError("data.images: required for mnist");
    if (!std::filesystem::exists(data.images)) {
      throw ConfigError("data.images: file not found: " + data.images.string());
    }
    if (!data.labels.empty() && !std::filesystem::exists(data.labels)) {
      throw ConfigError("data.labels: file not found: " + data.labels.string());
    }
  }
  if (data.kind == DatasetKind::Cifar) {
    if (data.batches.empty()) throw ConfigError("data.batches: required for cifar");
    for (const auto& b : data.batches) {
      if (!std::filesystem::exists(b)) throw ConfigError("data.batches: file not found: " + b.string());
    }
  }
  auto positive = [](Index v, const char* field) {
    if (v <= 0) throw ConfigError(std::string(field) + ": must be positive");
  };
  positive(ca3.batch_size, "pretrain.ca3.batch_size");
  positive(dg.batch_size, "pretrain.dg.batch_size");
  positive(dg.patterns, "pretrain.dg.patterns");
  positive(si.batch_size, "pretrain.si.batch_size");
  if (ca3.epochs < 0) throw ConfigError("pretrain.ca3.epochs: must be non-negative");
  if (dg.epochs < 0) throw ConfigError("pretrain.dg.epochs: must be non-negative");
  if (si.epochs < 0) throw ConfigError("pretrain.si.epochs: must be non-negative");
  if (!(ca3.learning_rate > 0.0)) throw ConfigError("pretrain.ca3.learning_rate: must be positive");
  if (!(dg.learning_rate > 0.0)) throw ConfigError("pretrain.dg.learning_rate: must be positive");
  if (!(si.learning_rate > 0.0)) throw ConfigError("pretrain.si.learning_rate: must be positive");
  if (!(ca3.input_noise >= 0.0 && ca3.input_noise <= 1.0)) {
    throw ConfigError("pretrain.ca3.input_noise: must lie in [0, 1]");
  }
  if (!(si.momentum >= 0.0 && si.momentum < 1.0)) {
    throw ConfigError("pretrain.si.momentum: must lie in [0, 1)");
  }
  for (double level : noise_levels) {
    if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("recall.noise: levels must lie in [0, 1]");
  }
  for (const auto& c : curves) {
    if (c.transitions < 0) throw ConfigError("recall.curves: negative transition count");
    const bool transition_curve = c.kind == CurveMode::Kind::RecallK ||
                                  c.kind == CurveMode::Kind::FullRecall ||
                                  c.kind == CurveMode::Kind::EncoderTransitionK;
    if (model.variant == Variant::StandardFramework && !transition_curve) {
      throw ConfigError("recall.curves: '" + c.name() +
                        "' is not available for the standard framework");
    }
  }
  if (relaxation_transitions < 0) {
    throw ConfigError("recall.relaxation_transitions: must be non-negative");
  }
  if (relaxation_window <= 0) throw ConfigError("recall.relaxation_window: must be positive");
  if (dream) {
    if (dream->loops < 0) throw ConfigError("dream.loops: must be non-negative");
    if (model.variant == Variant::StandardFramework) {
      throw ConfigError("dream.loops: dreaming is not available for the standard framework");
    }
  }
}

ExperimentSpec parse_spec(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ExperimentSpec spec;
  const auto& fields = schema();
  std::set<std::string> sections;
  for (const auto& f : fields) sections.insert(f.section);
  for (const auto& [section, body] : tree) {
    if (!sections.count(section)) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError(section + ": key outside of any section");
      }
      throw ConfigError(section + ": unknown section");
    }
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      const auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == fields.end()) throw ConfigError(path + ": unknown key");
      it->read(spec, path, value.data());
    }
  }
  spec.resolve();
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str());
}

std::string render_spec(const ExperimentSpec& spec) {
  std::ostringstream out;
  std::string current;
  for (const auto& f : schema()) {
    if (f.section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << f.section << "]\n";
      current = f.section;
    }
    out << f.key << " = " << f.write(spec) << '\n';
  }
  return out.str();
}

std::map<std::string, std::string> spec_entries(const ExperimentSpec& spec) {
  std::map<std::string, std::string> entries;
  for (const auto& f : schema()) entries[f.section + "." + f.key] = f.write(spec);
  return entries;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = {
      {"rand-modelA-n200", "Model-A on RAND: one-shot storage and recall curves",
       "[experiment]\nname = rand-modelA-n200\n[model]\nvariant = model-a\nn = 200\n"
       "[data]\nkind = rand\n"},
      {"rand-modelA-n1000", "Model-A on RAND at reference scale",
       "[experiment]\nname = rand-modelA-n1000\n[model]\nvariant = model-a\nn = 1000\n"
       "[data]\nkind = rand\n"},
      {"rand-modelB-n200", "Model-B on RAND with cue-noise analysis",
       "[experiment]\nname = rand-modelB-n200\n[model]\nvariant = model-b\nn = 200\n"
       "[data]\nkind = rand\n[recall]\nnoise = 0.1, 0.2, 0.5\n"},
      {"randcorr-modelA-n200", "Model-A on RAND-CORR: correlated input breaks the encoder",
       "[experiment]\nname = randcorr-modelA-n200\n[model]\nvariant = model-a\nn = 200\n"
       "[data]\nkind = rand-corr\n"},
      {"randcorr-modelB-n200", "Model-B on RAND-CORR: DG decorrelation",
       "[experiment]\nname = randcorr-modelB-n200\n[model]\nvariant = model-b\nn = 200\n"
       "[data]\nkind = rand-corr\n"},
      {"randcorr-modelA-dream-n200", "Model-A on RAND-CORR followed by 10 dreaming loops",
       "[experiment]\nname = randcorr-modelA-dream-n200\n[model]\nvariant = model-a\nn = 200\n"
       "[data]\nkind = rand-corr\n[dream]\nloops = 10\norder = sequential\n"},
      {"standard-n200", "Standard framework: sequences stored in plastic CA3",
       "[experiment]\nname = standard-n200\n[model]\nvariant = standard\nn = 200\n"
       "standard_eta = 0.01\n"},
      {"capacity-2n-n200", "Model-A storing 2N patterns on a 2N intrinsic cycle",
       "[experiment]\nname = capacity-2n-n200\nlength = 400\n[model]\nvariant = model-a\n"
       "n = 200\nintrinsic_length = 400\n[data]\nkind = rand\n"
       "[recall]\ncurves = decoder, encode_decode, full_recall\n"},
      {"activity10-modelB-n200", "Model-B on RAND with 10% CA3 activity",
       "[experiment]\nname = activity10-modelB-n200\n[model]\nvariant = model-b\nn = 200\n"
       "ca3_activity = 0.1\n[data]\nkind = rand\n[recall]\ncurves = encoder, decoder, full_recall\n"},
      {"activity3-modelB-n200", "Model-B on RAND with 3.2% CA3 activity",
       "[experiment]\nname = activity3-modelB-n200\n[model]\nvariant = model-b\nn = 200\n"
       "ca3_activity = 0.032\n[data]\nkind = rand\n[recall]\ncurves = encoder, decoder, full_recall\n"},
      {"activity3-modelB-n1000", "Model-B on RAND with 3.2% CA3 activity at N = 1000",
       "[experiment]\nname = activity3-modelB-n1000\n[model]\nvariant = model-b\nn = 1000\n"
       "ca3_activity = 0.032\n[data]\nkind = rand\n[recall]\ncurves = encoder, decoder, full_recall\n"},
      {"mnist-modelB-n200", "Model-B on an MNIST sequence (set data.images)",
       "[experiment]\nname = mnist-modelB-n200\n[model]\nvariant = model-b\nn = 200\n"
       "[data]\nkind = mnist\nimages = train-images-idx3-ubyte\n"
       "[recall]\nnoise = 0.1, 0.2, 0.5\n"},
      {"cifar-modelB-n200", "Model-B on a CIFAR-10 sequence (set data.batches)",
       "[experiment]\nname = cifar-modelB-n200\n[model]\nvariant = model-b\nn = 200\n"
       "[data]\nkind = cifar\nbatches = data_batch_1.bin\n"},
  };
  return list;
}

ExperimentSpec preset_spec(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) {
      // Presets pointing at external files are parsed without the existence check.
      namespace pt = boost::property_tree;
      ExperimentSpec spec;
      pt::ptree tree;
      std::istringstream in(p.ini);
      pt::ini_parser::read_ini(in, tree);
      for (const auto& [section, body] : tree) {
        for (const auto& [key, value] : body) {
          for (const auto& f : schema()) {
            if (f.section == section && f.key == key) f.read(spec, section + "." + key, value.data());
          }
        }
      }
      spec.out = spec.name;
      spec.resolve();
      return spec;
    }
  }
  throw ConfigError("unknown preset '" + name + "' (see list-presets)");
}

std::map<std::string, std::uint64_t> stage_seeds(std::uint64_t master) {
  std::map<std::string, std::uint64_t> seeds;
  for (const char* stage : {"data", "selection", "init", "noise", "dream", "ca3", "dg", "si"}) {
    seeds[stage] = derive_seed(master, stage);
  }
  return seeds;
}

std::string pretrain_key(const ExperimentSpec& spec, const std::string& stage,
                         const std::string& data_fingerprint) {
  const auto seeds = stage_seeds(spec.seed);
  std::ostringstream text;
  text << "crisp-pretrain-v" << kFormatVersion << '\n' << stage << '\n';
  if (stage == "ca3") {
    const auto& c = spec.ca3;
    text << c.dim << ' ' << c.length << ' ' << num(c.activity) << ' ' << c.epochs << ' '
         << c.batch_size << ' ' << num(c.learning_rate) << ' ' << num(c.input_noise) << ' '
         << to_string(c.noise) << ' ' << num(c.init_std);
  } else if (stage == "dg") {
    const auto& c = spec.dg;
    text << c.ec_dim << ' ' << c.dg_dim << ' ' << num(c.ec_activity) << ' ' << num(c.dg_activity)
         << ' ' << c.patterns << ' ' << c.epochs << ' ' << c.batch_size << ' '
         << num(c.learning_rate) << ' ' << num(c.init_std);
  } else if (stage == "si") {
    const auto& c = spec.si;
    text << c.ec_dim << ' ' << num(c.ec_activity) << ' ' << c.batch_size << ' '
         << num(c.learning_rate) << ' ' << num(c.momentum) << ' ' << c.epochs << ' '
         << num(c.init_std) << ' ' << data_fingerprint;
  } else {
    throw UsageError("unknown pre-training stage '" + stage + "'");
  }
  text << "\nseed " << seeds.at(stage);
  const std::string s = text.str();
  return sha1_hex(Bytes(s.begin(), s.end())).substr(0, 16);
}

std::optional<Dataset> load_sensory_data(const ExperimentSpec& spec) {
  if (spec.data.kind == DatasetKind::Mnist) return load_mnist(spec.data.images, spec.data.labels);
  if (spec.data.kind == DatasetKind::Cifar) return load_cifar(spec.data.batches);
  return std::nullopt;
}

namespace {

std::string fingerprint(const Dataset& data) {
  Bytes bytes;
  bytes.reserve(static_cast<std::size_t>(data.patterns.size()) * 8 + 16);
  Matrix copy = data.patterns;
  const auto* raw = reinterpret_cast<const std::uint8_t*>(copy.data());
  bytes.insert(bytes.end(), raw, raw + copy.size() * static_cast<Index>(sizeof(double)));
  return sha1_hex(bytes);
}

// Loads a cached artifact or builds and stores it. Corrupt entries are rebuilt.
template <typename T>
T cached(const RunOptions& options, const std::string& file, const std::function<T()>& build,
         const std::function<Bytes(const T&)>& save, const std::function<T(const Bytes&)>& load,
         std::string& hash) {
  if (options.cache_dir) {
    const auto path = *options.cache_dir / file;
    if (std::filesystem::exists(path)) {
      try {
        T value = load(read_bytes(path));
        hash = content_hash(read_bytes(path));
        log_line(options, "using cached " + path.string() + ", skipping pre-training");
        return value;
      } catch (const Error& e) {
        log_line(options, "warning: cache file " + path.string() + " is unusable (" + e.what() +
                              "); re-training");
      }
    }
  }
  T value = build();
  const Bytes bytes = save(value);
  hash = content_hash(bytes);
  if (options.cache_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.cache_dir, ec);
    const auto path = *options.cache_dir / file;
    const auto tmp = path.string() + ".tmp";
    write_bytes(tmp, bytes);
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move cache file into place: " + path.string());
    log_line(options, "cached pre-trained pathway at " + path.string());
  }
  return value;
}

}  // namespace

Pretrained cache_pretrained(const ExperimentSpec& spec, const RunOptions& options,
                            const std::optional<Dataset>& sensory) {
  const auto seeds = stage_seeds(spec.seed);
  Pretrained out;
  if (spec.model.variant != Variant::StandardFramework) {
    std::string hash;
    out.ca3 = cached<Ca3Scaffold>(
        options, "ca3-" + pretrain_key(spec, "ca3") + ".crsp",
        [&] {
          log_line(options, "pre-training CA3 (" + std::to_string(spec.ca3.length) + " patterns)");
          return pretrain_ca3(spec.ca3, seeds.at("ca3"));
        },
        [](const Ca3Scaffold& s) { return serialize(s); },
        [](const Bytes& b) { return deserialize_ca3(b); }, hash);
    out.hashes["ca3"] = hash;
  }
  if (spec.model.variant == Variant::ModelB) {
    std::string hash;
    out.dentate = cached<AutoEncoderPathway>(
        options, "dg-" + pretrain_key(spec, "dg") + ".crsp",
        [&] {
          log_line(options, "pre-training DG");
          return pretrain_dg(spec.dg, seeds.at("dg"));
        },
        [](const AutoEncoderPathway& a) { return serialize(a); },
        [](const Bytes& b) { return deserialize_autoencoder(b); }, hash);
    out.hashes["dg"] = hash;
  }
  if (sensory) {
    std::string hash;
    out.si_codec = cached<AutoEncoderPathway>(
        options, "si-" + pretrain_key(spec, "si", fingerprint(*sensory)) + ".crsp",
        [&] {
          log_line(options, "pre-training SI codec on " + std::to_string(sensory->size()) +
                                " samples");
          return pretrain_si_codec(sensory->patterns, spec.si, seeds.at("si"));
        },
        [](const AutoEncoderPathway& a) { return serialize(a); },
        [](const Bytes& b) { return deserialize_autoencoder(b); }, hash);
    out.hashes["si"] = hash;
  }
  return out;
}

double RelaxationCounts::fraction(Relaxation r) const {
  const Index n = total();
  if (n == 0) return 0.0;
  Index k = 0;
  switch (r) {
    case Relaxation::Correct:
      k = correct;
      break;
    case Relaxation::ShiftedPosition:
      k = shifted;
      break;
    case Relaxation::Spurious:
      k = spurious;
      break;
    case Relaxation::Unlabeled:
      break;
  }
  return static_cast<double>(k) / static_cast<double>(n);
}

RelaxationCounts relaxation_counts(const HippocampusModel& model, const SequenceStore& store,
                                   double noise, std::uint64_t seed, Index transitions,
                                   Index window, double threshold) {
  RelaxationCounts counts;
  const bool standard = model.variant() == Variant::StandardFramework;
  for (Index t = 0; t < store.size(); ++t) {
    const Vector source = standard ? Vector(store.intrinsic.col(store.position(t)))
                                   : Vector(store.ec.col(t));
    const Vector cue =
        noise > 0.0 ? corrupt(source, NoiseSpec{noise, derive_seed(seed, "cue." + std::to_string(t))})
                    : source;
    RecallTrace trace = model.recall(cue, transitions, false, t);
    trace.relaxation = classify_relaxation(trace, store, threshold, window);
    switch (trace.relaxation) {
      case Relaxation::Correct:
        ++counts.correct;
        break;
      case Relaxation::ShiftedPosition:
        ++counts.shifted;
        break;
      default:
        ++counts.spurious;
        break;
    }
  }
  return counts;
}

Report run_experiment(const ExperimentSpec& input, const RunOptions& options) {
  ExperimentSpec spec = input;
  spec.resolve();
  spec.validate();
  const auto seeds = stage_seeds(spec.seed);
  const Index length = spec.stored_length();
  const ModelConfig& mc = spec.model;

  Report report;
  report.experiment = spec.name;
  report.config = spec_entries(spec);
  // The output location does not influence results.
  report.config.erase("experiment.out");
  report.seeds = seeds;
  report.seeds["master"] = spec.seed;

  const auto sensory = load_sensory_data(spec);
  Pretrained pre = cache_pretrained(spec, options, sensory);
  report.hashes = pre.hashes;

  if (mc.variant == Variant::StandardFramework) {
    HippocampusModel model = HippocampusModel::standard_framework(mc, seeds.at("init"));
    const Dataset ca3 = gen_rand(length, mc.ca3_dim(), mc.ca3_activity, seeds.at("data"));
    log_line(options, "storing " + std::to_string(length) + " CA3 pairs in the plastic pathway");
    const SequenceStore store = model.store_standard(ca3.patterns, LearningRate(spec.standard_eta));
    for (const auto& mode : spec.curves) report.curves.push_back(forgetting_curve(model, store, mode));
  } else {
    // EC side of the input.
    Dataset ec_data;
    const Index pool = spec.data.pool > 0 ? spec.data.pool : length;
    std::optional<SequenceSelection> si_selection;
    if (sensory) {
      if (sensory->size() < length) {
        throw Error("data: " + std::to_string(sensory->size()) + " samples, need " +
                    std::to_string(length));
      }
      const AutoEncoderPathway& codec = *pre.si_codec;
      si_selection = make_sequence(*sensory, length, seeds.at("selection"));
      ec_data.patterns = encode_batch(codec, si_selection->patterns);
      ec_data.kind = sensory->kind;
      for (Index t = 0; t < ec_data.size(); ++t) {
        const auto col = ec_data.patterns.col(t);
        if ((col.array() == col(0)).all()) {
          throw Error("SI codec produced a constant EC code for sequence position " +
                      std::to_string(t));
        }
      }
      report.metrics["si.ec_activity"] = ec_data.patterns.mean();
    } else if (spec.data.kind == DatasetKind::Rand) {
      ec_data = gen_rand(pool, mc.ec_dim(), spec.data.activity, seeds.at("data"));
    } else {
      ec_data = gen_rand_corr(pool, mc.ec_dim(), spec.data.activity, spec.data.corr_flip,
                              seeds.at("data"));
    }
    const Matrix sequence = sensory ? ec_data.patterns
                                    : make_sequence(ec_data, length, seeds.at("selection")).patterns;

    HippocampusModel model(mc, *pre.ca3, pre.dentate, pre.si_codec, seeds.at("init"));
    log_line(options, "storing " + std::to_string(length) + " patterns (" +
                          std::string(to_string(mc.variant)) + ")");
    const SequenceStore store = model.store_sequence(sequence, spec.start_index);

    for (const auto& mode : spec.curves) report.curves.push_back(forgetting_curve(model, store, mode));

    if (mc.variant == Variant::ModelB) {
      const Matrix dg = model.encoder_input(sequence);
      report.metrics["dg.activity"] = dg.mean();
      const auto ec_profile = max_correlation_profile(sequence);
      const auto dg_profile = max_correlation_profile(dg);
      auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      report.metrics["ec.max_correlation_mean"] = mean(ec_profile);
      report.metrics["ec.max_correlation_max"] = *std::max_element(ec_profile.begin(), ec_profile.end());
      report.metrics["dg.max_correlation_mean"] = mean(dg_profile);
      report.metrics["dg.max_correlation_max"] = *std::max_element(dg_profile.begin(), dg_profile.end());
    }

    for (double level : spec.noise_levels) {
      const std::string label = "noise" + percent_label(level);
      const auto noise_seed = derive_seed(seeds.at("noise"), label);
      auto curve = forgetting_curve(model, store, CurveMode::full_recall(), CueNoise{level, noise_seed});
      curve.name = "full_recall_" + label;
      report.curves.push_back(std::move(curve));
      const auto counts = relaxation_counts(model, store, level, noise_seed,
                                            spec.relaxation_transitions, spec.relaxation_window,
                                            spec.relaxation_threshold);
      report.metrics[label + ".correct"] = counts.fraction(Relaxation::Correct);
      report.metrics[label + ".shifted"] = counts.fraction(Relaxation::ShiftedPosition);
      report.metrics[label + ".spurious"] = counts.fraction(Relaxation::Spurious);
    }

    if (spec.images && sensory && si_selection) {
      const Index side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(sensory->dim()))));
      if (side * side == sensory->dim()) {
        const int s = static_cast<int>(side);
        const bool rescale = sensory->kind == DatasetKind::Cifar;
        report.images.push_back({"si_input", si_selection->patterns, s, s, 20, rescale});
        report.images.push_back({"si_reconstruction", model.ec_to_si(store.ec), s, s, 20, rescale});
        const Matrix recalled = model.decode_batch(
            model.transition_batch(model.encode_batch(store.ec), store.cycle()));
        report.images.push_back({"si_full_recall", model.ec_to_si(recalled), s, s, 20, rescale});
      }
    }

    if (spec.dream && spec.dream->loops > 0) {
      log_line(options, "dreaming for " + std::to_string(spec.dream->loops) + " loops");
      model.dream(spec.dream->loops, spec.dream->order, std::nullopt, seeds.at("dream"));
      for (const auto& mode : spec.curves) {
        auto curve = forgetting_curve(model, store, mode);
        curve.name += "_after_dream";
        report.curves.push_back(std::move(curve));
      }
    }
  }

  if (options.write_files) {
    emit_report(report, spec.out);
    log_line(options, "wrote report to " + spec.out.string());
  }
  return report;
}

}  // namespace crisp
