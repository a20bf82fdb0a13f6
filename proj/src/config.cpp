#include "recharge/config.hpp"

#include <functional>
#include <set>
#include <sstream>

#include "recharge/errors.hpp"
#include "recharge/io.hpp"
#include "recharge/text.hpp"

namespace recharge {

std::string to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::fit: return "fit";
    case Command::score: return "score";
    case Command::compare: return "compare";
    case Command::summarize: return "summarize";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (auto c : {Command::simulate, Command::fit, Command::score, Command::compare, Command::summarize})
    if (to_string(c) == s) return c;
  throw ValidationError("unknown command '" + s + "'");
}

PriorSpec prior_preset(const std::string& name) {
  if (name == "simulation") return PriorSpec::simulation_defaults();
  if (name == "mountain_lion") return PriorSpec::mountain_lion();
  if (name == "african_buffalo") return PriorSpec::african_buffalo();
  throw ValidationError("unknown prior preset '" + name +
                        "' (expected simulation, mountain_lion or african_buffalo)");
}

std::filesystem::path RunConfig::resolve(const std::string& p) const {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

void RunConfig::require_for(Command c) const {
  if (c == Command::fit || c == Command::score) {
    if (telemetry.empty()) throw ValidationError("missing required key 'telemetry'");
    if (has_drift(variant) && movement_covariates.empty())
      throw ValidationError("missing required key 'movement_covariates' for variant " + to_string(variant));
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void bad(const std::string& key, int line, const std::string& what) {
  throw ParseError("config line " + std::to_string(line) + ", key '" + key + "': " + what);
}

double as_double(const std::string& key, const Entry& e) {
  auto v = text::to_double(e.value);
  if (!v || !std::isfinite(*v)) bad(key, e.line, "expected a number, got '" + e.value + "'");
  return *v;
}

double as_positive(const std::string& key, const Entry& e) {
  const double v = as_double(key, e);
  if (!(v > 0.0)) bad(key, e.line, "must be positive");
  return v;
}

std::size_t as_count(const std::string& key, const Entry& e) {
  auto v = text::to_integer(e.value);
  if (!v || *v < 0) bad(key, e.line, "expected a non-negative integer, got '" + e.value + "'");
  return static_cast<std::size_t>(*v);
}

bool as_bool(const std::string& key, const Entry& e) {
  const auto v = text::lower(e.value);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad(key, e.line, "expected true or false, got '" + e.value + "'");
}

std::vector<std::string> as_list(const Entry& e) {
  std::vector<std::string> out;
  if (text::trim(e.value).empty()) return out;
  for (auto part : text::split(e.value, ',')) out.emplace_back(text::trim(part));
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string num(double v) { return text::format_shortest(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string flag(bool v) { return v ? "true" : "false"; }

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&, const Entry&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key dbl(std::string name, T RunConfig::*member, double T::*field, bool positive = false) {
  return {name,
          [=](RunConfig& c, const std::string& k, const Entry& e) {
            (c.*member).*field = positive ? as_positive(k, e) : as_double(k, e);
          },
          [=](const RunConfig& c) { return num((c.*member).*field); }};
}

const std::vector<Key>& key_table() {
  using S = SimulationSettings;
  static const std::vector<Key> keys = {
      {"telemetry", [](RunConfig& c, const std::string&, const Entry& e) { c.telemetry = e.value; },
       [](const RunConfig& c) { return c.telemetry; }},
      {"derived_template",
       [](RunConfig& c, const std::string&, const Entry& e) { c.derived_template = e.value; },
       [](const RunConfig& c) { return c.derived_template; }},
      {"movement_covariates",
       [](RunConfig& c, const std::string&, const Entry& e) { c.movement_covariates = as_list(e); },
       [](const RunConfig& c) { return join(c.movement_covariates); }},
      {"recharge_covariates",
       [](RunConfig& c, const std::string&, const Entry& e) { c.recharge_covariates = as_list(e); },
       [](const RunConfig& c) { return join(c.recharge_covariates); }},
      {"variant",
       [](RunConfig& c, const std::string& k, const Entry& e) {
         try {
           c.variant = parse_variant(e.value);
         } catch (const Error& err) {
           bad(k, e.line, err.what());
         }
       },
       [](const RunConfig& c) { return to_string(c.variant); }},
      {"standardize", [](RunConfig& c, const std::string& k, const Entry& e) { c.standardize = as_bool(k, e); },
       [](const RunConfig& c) { return flag(c.standardize); }},
      {"m", [](RunConfig& c, const std::string& k, const Entry& e) { c.m = as_count(k, e); },
       [](const RunConfig& c) { return num(c.m); }},
      // prior.preset is applied before the individual prior.* keys.
      {"prior.preset", [](RunConfig&, const std::string&, const Entry&) {},
       [](const RunConfig& c) { return c.prior_preset; }},
      {"prior.q_s", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.sigma2_s.shape = as_double(k, e); },
       [](const RunConfig& c) { return num(c.prior.sigma2_s.shape); }},
      {"prior.r_s", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.sigma2_s.scale = as_positive(k, e); },
       [](const RunConfig& c) { return num(c.prior.sigma2_s.scale); }},
      {"prior.q_0", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.sigma2_0.shape = as_double(k, e); },
       [](const RunConfig& c) { return num(c.prior.sigma2_0.shape); }},
      {"prior.r_0", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.sigma2_0.scale = as_positive(k, e); },
       [](const RunConfig& c) { return num(c.prior.sigma2_0.scale); }},
      {"prior.q_1", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.sigma2_1.shape = as_double(k, e); },
       [](const RunConfig& c) { return num(c.prior.sigma2_1.shape); }},
      {"prior.r_1", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.sigma2_1.scale = as_positive(k, e); },
       [](const RunConfig& c) { return num(c.prior.sigma2_1.scale); }},
      {"prior.beta_mean", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.beta.mean = {as_double(k, e)}; },
       [](const RunConfig& c) { return num(c.prior.beta.mean.at(0)); }},
      {"prior.beta_var", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.beta.variance = {as_positive(k, e)}; },
       [](const RunConfig& c) { return num(c.prior.beta.variance.at(0)); }},
      {"prior.theta_mean", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.theta.mean = {as_double(k, e)}; },
       [](const RunConfig& c) { return num(c.prior.theta.mean.at(0)); }},
      {"prior.theta_var", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.theta.variance = {as_positive(k, e)}; },
       [](const RunConfig& c) { return num(c.prior.theta.variance.at(0)); }},
      {"prior.g0_mean", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.g0_mean = as_double(k, e); },
       [](const RunConfig& c) { return num(c.prior.g0_mean); }},
      {"prior.g0_var", [](RunConfig& c, const std::string& k, const Entry& e) { c.prior.g0_var = as_positive(k, e); },
       [](const RunConfig& c) { return num(c.prior.g0_var); }},
      {"n_iter", [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.n_iter = as_count(k, e); },
       [](const RunConfig& c) { return num(c.chain.n_iter); }},
      {"n_burn", [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.n_burn = as_count(k, e); },
       [](const RunConfig& c) { return num(c.chain.n_burn); }},
      {"thin", [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.thin = as_count(k, e); },
       [](const RunConfig& c) { return num(c.chain.thin); }},
      {"seed",
       [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.seed = as_count(k, e); },
       [](const RunConfig& c) { return std::to_string(c.chain.seed); }},
      {"random_scan", [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.random_scan = as_bool(k, e); },
       [](const RunConfig& c) { return flag(c.chain.random_scan); }},
      {"write_paths", [](RunConfig& c, const std::string& k, const Entry& e) { c.write_paths = as_bool(k, e); },
       [](const RunConfig& c) { return flag(c.write_paths); }},
      {"adapt.target_position",
       [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.adapt.target_position = as_double(k, e); },
       [](const RunConfig& c) { return num(c.chain.adapt.target_position); }},
      {"adapt.target_block",
       [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.adapt.target_block = as_double(k, e); },
       [](const RunConfig& c) { return num(c.chain.adapt.target_block); }},
      {"adapt.shaping_start",
       [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.adapt.shaping_start = as_count(k, e); },
       [](const RunConfig& c) { return num(c.chain.adapt.shaping_start); }},
      {"adapt.decay", [](RunConfig& c, const std::string& k, const Entry& e) { c.chain.adapt.decay = as_double(k, e); },
       [](const RunConfig& c) { return num(c.chain.adapt.decay); }},
      {"folds", [](RunConfig& c, const std::string& k, const Entry& e) { c.folds = as_count(k, e); },
       [](const RunConfig& c) { return num(c.folds); }},
      {"fold_scheme",
       [](RunConfig& c, const std::string& k, const Entry& e) {
         try {
           c.fold_scheme = parse_fold_scheme(e.value);
         } catch (const Error& err) {
           bad(k, e.line, err.what());
         }
       },
       [](const RunConfig& c) { return to_string(c.fold_scheme); }},
      {"kde_bandwidth_scale",
       [](RunConfig& c, const std::string& k, const Entry& e) { c.kde_bandwidth_scale = as_positive(k, e); },
       [](const RunConfig& c) { return num(c.kde_bandwidth_scale); }},
      {"out", [](RunConfig& c, const std::string&, const Entry& e) { c.out = e.value; },
       [](const RunConfig& c) { return c.out; }},
      {"sim.m", [](RunConfig& c, const std::string& k, const Entry& e) { c.sim.m = as_count(k, e); },
       [](const RunConfig& c) { return num(c.sim.m); }},
      dbl("sim.dt", &RunConfig::sim, &S::dt, true),
      {"sim.obs_every", [](RunConfig& c, const std::string& k, const Entry& e) { c.sim.obs_every = as_count(k, e); },
       [](const RunConfig& c) { return num(c.sim.obs_every); }},
      dbl("sim.beta", &RunConfig::sim, &S::beta),
      dbl("sim.start_x", &RunConfig::sim, &S::start_x),
      dbl("sim.start_y", &RunConfig::sim, &S::start_y),
      dbl("sim.g0", &RunConfig::sim, &S::g0),
      dbl("sim.theta0", &RunConfig::sim, &S::theta0),
      dbl("sim.theta1", &RunConfig::sim, &S::theta1),
      dbl("sim.sigma2_s", &RunConfig::sim, &S::sigma2_s),
      dbl("sim.sigma2_0", &RunConfig::sim, &S::sigma2_0),
      dbl("sim.sigma2_1", &RunConfig::sim, &S::sigma2_1),
      dbl("sim.half_width", &RunConfig::sim, &S::half_width, true),
      dbl("sim.cell", &RunConfig::sim, &S::cell, true),
      dbl("sim.patch_half", &RunConfig::sim, &S::patch_half, true),
  };
  return keys;
}

const char* const kMapPrefixes[] = {"covariate.", "polygon.", "distance_covariate.", "indicator_covariate."};

std::map<std::string, std::string>& map_for(RunConfig& c, std::string_view prefix) {
  if (prefix == "covariate.") return c.covariates;
  if (prefix == "polygon.") return c.polygons;
  if (prefix == "distance_covariate.") return c.distance_covariates;
  return c.indicator_covariates;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) return false;
  return true;
}

void validate_config(const RunConfig& c, const std::map<std::string, Entry>& entries) {
  auto line_of = [&](const std::string& key) {
    auto it = entries.find(key);
    return it == entries.end() ? 0 : it->second.line;
  };
  auto fail = [&](const std::string& key, const std::string& what) {
    const int line = line_of(key);
    if (line > 0) bad(key, line, what);
    throw ValidationError("config key '" + key + "': " + what);
  };

  auto exists = [&](const std::string& key, const std::string& p) {
    if (!p.empty() && !std::filesystem::exists(c.resolve(p)))
      fail(key, "file '" + c.resolve(p).string() + "' does not exist");
  };
  exists("telemetry", c.telemetry);
  for (const auto& [n, p] : c.covariates) exists("covariate." + n, p);
  for (const auto& [n, p] : c.polygons) exists("polygon." + n, p);

  std::set<std::string> names;
  for (const auto& [n, p] : c.covariates) names.insert(n);
  for (const auto* derived : {&c.distance_covariates, &c.indicator_covariates}) {
    const std::string prefix = derived == &c.distance_covariates ? "distance_covariate." : "indicator_covariate.";
    for (const auto& [n, poly] : *derived) {
      if (!c.polygons.count(poly)) fail(prefix + n, "polygon '" + poly + "' is not defined");
      if (c.derived_template.empty()) fail(prefix + n, "derived covariates need 'derived_template'");
      if (!names.insert(n).second) fail(prefix + n, "covariate name '" + n + "' is defined twice");
    }
  }
  if (!c.derived_template.empty() && !c.covariates.count(c.derived_template))
    fail("derived_template", "'" + c.derived_template + "' is not a covariate.* entry");
  for (const auto& n : c.movement_covariates)
    if (!names.count(n)) fail("movement_covariates", "covariate '" + n + "' is not defined");
  for (const auto& n : c.recharge_covariates)
    if (!names.count(n)) fail("recharge_covariates", "covariate '" + n + "' is not defined");

  try {
    c.chain.validate();
  } catch (const ValidationError& e) {
    fail(line_of("n_burn") ? "n_burn" : "n_iter", e.what());
  }
  try {
    c.prior.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config prior: ") + e.what());
  }
  if (c.folds < 2) fail("folds", "need at least 2 folds");

  if (!c.telemetry.empty()) {
    const auto data = load_telemetry(c.resolve(c.telemetry));
    if (c.m != 0 && c.m < data.size())
      fail("m", "m = " + std::to_string(c.m) + " is smaller than the " + std::to_string(data.size()) +
                    " observations");
  }
}

}  // namespace

RunConfig parse_config_text(std::string_view textv, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= textv.size()) {
    const auto nl = textv.find('\n', pos);
    std::string_view raw = textv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? textv.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("config line " + std::to_string(line_no) + ": empty key");
    if (entries.count(key)) bad(key, line_no, "duplicate key (first set on line " +
                                                  std::to_string(entries[key].line) + ")");
    entries[key] = {value, line_no};
    order.push_back(key);
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.source_text = std::string(textv);
  if (auto it = entries.find("prior.preset"); it != entries.end()) {
    try {
      cfg.prior = prior_preset(it->second.value);
    } catch (const Error& e) {
      bad("prior.preset", it->second.line, e.what());
    }
    cfg.prior_preset = it->second.value;
  }

  const auto& keys = key_table();
  for (const auto& key : order) {
    const Entry& e = entries[key];
    bool handled = false;
    for (const char* prefix : kMapPrefixes) {
      const std::string_view pfx(prefix);
      if (key.size() > pfx.size() && key.compare(0, pfx.size(), pfx) == 0) {
        const std::string name = key.substr(pfx.size());
        if (!valid_name(name)) bad(key, e.line, "invalid name '" + name + "'");
        if (e.value.empty()) bad(key, e.line, "empty value");
        map_for(cfg, pfx)[name] = e.value;
        handled = true;
        break;
      }
    }
    if (handled) continue;
    auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
    if (it == keys.end()) bad(key, e.line, "unknown key");
    it->set(cfg, key, e);
  }
  validate_config(cfg, entries);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  const std::string body = text::read_file(path.string());
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  return parse_config_text(body, dir);
}

std::string dump_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& k : key_table()) os << k.name << " = " << k.get(cfg) << '\n';
  const std::pair<const char*, const std::map<std::string, std::string>*> maps[] = {
      {"covariate.", &cfg.covariates},
      {"polygon.", &cfg.polygons},
      {"distance_covariate.", &cfg.distance_covariates},
      {"indicator_covariate.", &cfg.indicator_covariates}};
  for (const auto& [prefix, m] : maps)
    for (const auto& [name, value] : *m) os << prefix << name << " = " << value << '\n';
  return os.str();
}

}  // namespace recharge
