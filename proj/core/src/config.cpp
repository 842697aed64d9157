#include "openmix/config.hpp"

#include <charconv>
#include <functional>
#include <string>

#include "openmix/error.hpp"
#include "openmix/io.hpp"

namespace openmix {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) +
                    "'; expected " + std::string(expected));
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  value = trim(value);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    bad_value(key, value, "a nonnegative integer");
  }
  return out;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(to_u64(key, value));
}

double to_double(std::string_view key, std::string_view value) {
  auto v = parse_double(value);
  if (!v) bad_value(key, value, "a number");
  return *v;
}

bool to_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  value = trim(value);
  if (value.empty()) return out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = value.find(',', pos);
    out.push_back(trim(value.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <typename T, typename F>
std::vector<T> to_list(std::string_view key, std::string_view value, F&& convert) {
  std::vector<T> out;
  for (auto item : split_list(value)) out.push_back(convert(key, item));
  return out;
}

std::string from_double(double v) { return format_double(v); }
std::string from_bool(bool v) { return v ? "true" : "false"; }

template <typename T, typename F>
std::string join(const std::vector<T>& values, F&& fmt) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += fmt(values[i]);
  }
  return s;
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
};

#define OPENMIX_SIZE(KEY, MEMBER)                                                        \
  Field{KEY, [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); },         \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.MEMBER = to_size(k, v); }}
#define OPENMIX_U64(KEY, MEMBER)                                                         \
  Field{KEY, [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); },         \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.MEMBER = to_u64(k, v); }}
#define OPENMIX_DOUBLE(KEY, MEMBER)                                                      \
  Field{KEY, [](const ExperimentConfig& c) { return from_double(c.MEMBER); },            \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.MEMBER = to_double(k, v); }}
#define OPENMIX_BOOL(KEY, MEMBER)                                                        \
  Field{KEY, [](const ExperimentConfig& c) { return from_bool(c.MEMBER); },              \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.MEMBER = to_bool(k, v); }}
#define OPENMIX_STRING(KEY, MEMBER)                                                      \
  Field{KEY, [](const ExperimentConfig& c) { return c.MEMBER; },                         \
        [](ExperimentConfig&c, std::string_view, std::string_view v) { c.MEMBER = std::string(trim(v)); }}

std::vector<Field> outlier_fields(const std::string& prefix, OutlierSpec ExperimentConfig::*spec) {
  auto field = [&](const char* name, auto getter, auto setter) {
    return Field{prefix + "." + name,
                 [spec, getter](const ExperimentConfig& c) { return getter(c.*spec); },
                 [spec, setter](ExperimentConfig& c, std::string_view k, std::string_view v) {
                   setter(c.*spec, k, v);
                 }};
  };
  return {
      field("family", [](const OutlierSpec& s) { return s.family; },
            [](OutlierSpec& s, std::string_view k, std::string_view v) {
              v = trim(v);
              if (v != "none" && v != "csv") {
                try {
                  parse_outlier_family(v);
                } catch (const ConfigError&) {
                  bad_value(k, v, "one of {gaussian_noise, rademacher, annulus_blob, held_out_class, csv, none}");
                }
              }
              s.family = std::string(v);
            }),
      field("m", [](const OutlierSpec& s) { return std::to_string(s.m); },
            [](OutlierSpec& s, std::string_view k, std::string_view v) { s.m = to_size(k, v); }),
      field("scale", [](const OutlierSpec& s) { return from_double(s.scale); },
            [](OutlierSpec& s, std::string_view k, std::string_view v) { s.scale = to_double(k, v); }),
      field("r_inner", [](const OutlierSpec& s) { return from_double(s.r_inner); },
            [](OutlierSpec& s, std::string_view k, std::string_view v) { s.r_inner = to_double(k, v); }),
      field("r_outer", [](const OutlierSpec& s) { return from_double(s.r_outer); },
            [](OutlierSpec& s, std::string_view k, std::string_view v) { s.r_outer = to_double(k, v); }),
      field("extra_sigma", [](const OutlierSpec& s) { return from_double(s.extra_sigma); },
            [](OutlierSpec& s, std::string_view k, std::string_view v) { s.extra_sigma = to_double(k, v); }),
      field("extra_radius_factor", [](const OutlierSpec& s) { return from_double(s.extra_radius_factor); },
            [](OutlierSpec& s, std::string_view k, std::string_view v) {
              s.extra_radius_factor = to_double(k, v);
            }),
      field("seed", [](const OutlierSpec& s) { return std::to_string(s.seed); },
            [](OutlierSpec& s, std::string_view k, std::string_view v) { s.seed = to_u64(k, v); }),
      field("csv", [](const OutlierSpec& s) { return s.csv; },
            [](OutlierSpec& s, std::string_view, std::string_view v) { s.csv = std::string(trim(v)); }),
  };
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f = {
        Field{"data.source", [](const ExperimentConfig& c) { return c.data.source; },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                v = trim(v);
                if (v != "blobs" && v != "csv") bad_value(k, v, "one of {blobs, csv}");
                c.data.source = std::string(v);
              }},
        OPENMIX_SIZE("data.n_per_class", data.n_per_class),
        OPENMIX_DOUBLE("data.side", data.side),
        OPENMIX_DOUBLE("data.sigma", data.sigma),
        OPENMIX_DOUBLE("data.test_fraction", data.test_fraction),
        OPENMIX_U64("data.seed", data.seed),
        OPENMIX_STRING("data.train_csv", data.train_csv),
        OPENMIX_STRING("data.test_csv", data.test_csv),
    };
    for (auto& x : outlier_fields("outliers", &ExperimentConfig::outliers)) f.push_back(std::move(x));
    for (auto& x : outlier_fields("ood", &ExperimentConfig::ood)) f.push_back(std::move(x));
    std::vector<Field> rest = {
        Field{"train.objective",
              [](const ExperimentConfig& c) { return std::string(to_string(c.train.objective)); },
              [](ExperimentConfig& c, std::string_view, std::string_view v) {
                c.train.objective = parse_objective(trim(v));
              }},
        OPENMIX_SIZE("train.epochs", train.epochs),
        OPENMIX_SIZE("train.batch_size", train.batch_size),
        OPENMIX_DOUBLE("train.lr", train.lr),
        OPENMIX_DOUBLE("train.momentum", train.momentum),
        OPENMIX_DOUBLE("train.weight_decay", train.weight_decay),
        Field{"train.lr_decay_epochs",
              [](const ExperimentConfig& c) { return join(c.train.lr_decay_epochs, from_double); },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                c.train.lr_decay_epochs = to_list<double>(k, v, to_double);
              }},
        OPENMIX_DOUBLE("train.lr_decay_factor", train.lr_decay_factor),
        OPENMIX_U64("train.seed", train.seed),
        Field{"model.hidden",
              [](const ExperimentConfig& c) {
                return join(c.train.hidden, [](std::size_t h) { return std::to_string(h); });
              },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                c.train.hidden = to_list<std::size_t>(k, v, to_size);
              }},
        OPENMIX_DOUBLE("mix.alpha", train.params.mix.alpha),
        OPENMIX_DOUBLE("mix.gamma", train.params.mix.gamma),
        OPENMIX_BOOL("mix.per_pair_lambda", train.params.mix.per_pair_lambda),
        Field{"mix.fixed_lambda",
              [](const ExperimentConfig& c) {
                const auto& f = c.train.params.mix.fixed_lambda;
                return f ? from_double(*f) : std::string("none");
              },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                if (trim(v) == "none") {
                  c.train.params.mix.fixed_lambda.reset();
                } else {
                  c.train.params.mix.fixed_lambda = to_double(k, v);
                }
              }},
        OPENMIX_DOUBLE("oe.weight", train.params.oe_weight),
        OPENMIX_DOUBLE("mixup.alpha", train.params.mixup_alpha),
        Field{"eval.scorer", [](const ExperimentConfig& c) { return std::string(to_string(c.eval.scorer)); },
              [](ExperimentConfig& c, std::string_view, std::string_view v) {
                c.eval.scorer = parse_scorer(trim(v));
              }},
        OPENMIX_BOOL("eval.renormalize", eval.renormalize),
        OPENMIX_SIZE("eval.fsu_max_pairs", eval.fsu_max_pairs),
        OPENMIX_U64("eval.fsu_seed", eval.fsu_seed),
        OPENMIX_SIZE("theorem.d", theorem.d),
        Field{"theorem.sigma", [](const ExperimentConfig& c) { return join(c.theorem.sigma, from_double); },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                c.theorem.sigma = to_list<double>(k, v, to_double);
              }},
        Field{"theorem.mu_bar", [](const ExperimentConfig& c) { return join(c.theorem.mu_bar, from_double); },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                c.theorem.mu_bar = to_list<double>(k, v, to_double);
              }},
        OPENMIX_DOUBLE("theorem.extent", theorem.extent),
        OPENMIX_SIZE("theorem.resolution", theorem.resolution),
        OPENMIX_DOUBLE("theorem.margin", theorem.margin),
        OPENMIX_DOUBLE("theorem.alpha", theorem.alpha),
        OPENMIX_DOUBLE("theorem.outlier_mean", theorem.outlier_mean),
        OPENMIX_SIZE("theorem.n_samples", theorem.n_samples),
        OPENMIX_SIZE("theorem.n_mix", theorem.n_mix),
        OPENMIX_DOUBLE("theorem.hist_lo", theorem.hist_lo),
        OPENMIX_DOUBLE("theorem.hist_hi", theorem.hist_hi),
        OPENMIX_SIZE("theorem.hist_bins", theorem.hist_bins),
        OPENMIX_U64("theorem.seed", theorem.seed),
        Field{"experiment.seeds",
              [](const ExperimentConfig& c) {
                return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
              },
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                c.seeds = to_list<std::uint64_t>(k, v, to_u64);
              }},
        Field{"experiment.methods",
              [](const ExperimentConfig& c) {
                return join(c.methods, [](Objective o) { return std::string(to_string(o)); });
              },
              [](ExperimentConfig& c, std::string_view, std::string_view v) {
                std::vector<Objective> methods;
                for (auto item : split_list(v)) methods.push_back(parse_objective(item));
                c.methods = std::move(methods);
              }},
        OPENMIX_STRING("experiment.out", out),
    };
    for (auto& x : rest) f.push_back(std::move(x));
    return f;
  }();
  return table;
}

#undef OPENMIX_SIZE
#undef OPENMIX_U64
#undef OPENMIX_DOUBLE
#undef OPENMIX_BOOL
#undef OPENMIX_STRING

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(cfg, key, value);
      return;
    }
  }
  std::string accepted;
  for (const auto& f : fields()) accepted += (accepted.empty() ? "" : ", ") + f.key;
  throw ConfigError("unknown config key '" + std::string(key) + "'; accepted keys: {" + accepted + "}");
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::string s;
  for (const auto& f : fields()) s += f.key + " = " + f.get(cfg) + "\n";
  return s;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("experiment.seeds must be nonempty");
  if (methods.empty()) throw ConfigError("experiment.methods must be nonempty");
  train.validate();
  if (data.source == "csv") {
    for (const auto& p : {data.train_csv, data.test_csv}) {
      if (p.empty() || !std::filesystem::exists(p)) {
        throw ConfigError("data CSV '" + p + "' does not exist");
      }
    }
  } else {
    if (!(data.sigma > 0.0)) throw ConfigError("data.sigma must be positive");
    if (data.n_per_class < 2) throw ConfigError("data.n_per_class must be at least 2");
    if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0)) {
      throw ConfigError("data.test_fraction must lie in (0, 1)");
    }
  }
  for (const auto* spec : {&outliers, &ood}) {
    if (spec->family == "csv" && (spec->csv.empty() || !std::filesystem::exists(spec->csv))) {
      throw ConfigError("outlier CSV '" + spec->csv + "' does not exist");
    }
  }
  for (auto m : methods) {
    if (uses_outliers(m) && outliers.family == "none") {
      throw ConfigError("method '" + std::string(to_string(m)) + "' requires outliers.family");
    }
  }
}

}  // namespace openmix
