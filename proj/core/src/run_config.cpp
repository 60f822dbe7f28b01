#include "sae/run_config.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "sae/csv.hpp"

namespace sae {

ConfigError::ConfigError(std::string key, std::size_t line, const std::string& message)
    : Error((line ? "line " + std::to_string(line) + ": " : std::string()) +
            (key.empty() ? std::string() : "key '" + key + "': ") + message),
      key_(std::move(key)),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& RunConfigFile::known_keys() {
  static const std::vector<std::string> keys{
      "scenario", "lambda_u",     "lambda_v",         "lambda_e",      "sigma_u",      "sigma_v",
      "sigma_e",  "beta",         "areas",            "subareas",      "units",        "case",
      "m_d",      "n_dj",         "I",                "B",             "estimators",   "alphas",
      "seed",     "poverty_line", "poverty_fraction", "sample_policy", "subarea_pool", "workers",
      "out"};
  return keys;
}

RunConfigFile RunConfigFile::parse(std::istream& in) {
  RunConfigFile cfg;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", line_no, "empty key");
    if (cfg.get(key)) throw ConfigError(key, line_no, "duplicate key");
    cfg.set(key, trim(line.substr(eq + 1)), line_no);
  }
  return cfg;
}

RunConfigFile RunConfigFile::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

void RunConfigFile::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("", 0, "override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfigFile::set(const std::string& key, const std::string& value, std::size_t line) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(key, line, "unknown key");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first == key) {
      entries_[i].second = value;
      lines_[i] = line;
      return;
    }
  }
  entries_.emplace_back(key, value);
  lines_.push_back(line);
}

std::optional<std::string> RunConfigFile::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::size_t RunConfigFile::line_of(const std::string& key) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first == key) return lines_[i];
  }
  return 0;
}

struct ConfigReader {
  const RunConfigFile& cfg;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(key, cfg.line_of(key), message);
  }
  std::optional<double> real(const std::string& key) const {
    const auto v = cfg.get(key);
    if (!v) return std::nullopt;
    const auto x = csv::parse_double(*v);
    if (!x) fail(key, "expected a number, got '" + *v + "'");
    return x;
  }
  std::optional<long long> integer(const std::string& key, long long min) const {
    const auto v = cfg.get(key);
    if (!v) return std::nullopt;
    const auto x = csv::parse_int(*v);
    if (!x) fail(key, "expected an integer, got '" + *v + "'");
    if (*x < min) fail(key, "must be at least " + std::to_string(min));
    return x;
  }
  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    for (auto& item : csv::split(*cfg.get(key))) {
      if (item.empty()) fail(key, "empty list item");
      out.push_back(item);
    }
    return out;
  }
};

RunSettings to_run_settings(const RunConfigFile& cfg) {
  const ConfigReader r{cfg};
  RunSettings out;
  auto& st = out.study;

  const std::string scenario = cfg.get("scenario").value_or("e_skew");
  try {
    st.scenario = ScenarioSpec::preset(scenario == "custom" ? "all_normal" : scenario);
  } catch (const InvalidInput& e) {
    r.fail("scenario", e.what());
  }
  st.scenario.name = scenario;

  auto& model = st.scenario.model;
  auto spec = [&](const char* lambda_key, const char* sigma_key, const SkewNormalSpec& current) {
    const double shape = r.real(lambda_key).value_or(current.shape());
    const double sd = r.real(sigma_key).value_or(current.target_sd());
    try {
      return SkewNormalSpec(shape, sd);
    } catch (const InvalidParameter& e) {
      r.fail(sigma_key, e.what());
    }
  };
  model.area_effect = spec("lambda_u", "sigma_u", model.area_effect);
  model.subarea_effect = spec("lambda_v", "sigma_v", model.subarea_effect);
  model.unit_error = spec("lambda_e", "sigma_e", model.unit_error);
  if (cfg.get("beta")) {
    const auto items = r.list("beta");
    if (items.size() != 3) r.fail("beta", "expected three coefficients");
    model.beta.resize(3);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto v = csv::parse_double(items[i]);
      if (!v) r.fail("beta", "malformed coefficient '" + items[i] + "'");
      model.beta[static_cast<Eigen::Index>(i)] = *v;
    }
  }

  const auto areas = r.integer("areas", 1).value_or(40);
  const auto subareas = r.integer("subareas", 1).value_or(10);
  const auto units = r.integer("units", 1).value_or(50);
  st.scenario.layout = PopulationLayout::balanced(static_cast<std::size_t>(areas), static_cast<std::size_t>(subareas),
                                                  static_cast<std::size_t>(units));

  const std::string case_name = cfg.get("case").value_or("I");
  if (case_name == "custom") {
    if (!cfg.get("m_d")) r.fail("m_d", "required when case = custom");
    if (!cfg.get("n_dj")) r.fail("n_dj", "required when case = custom");
    st.sampling.name = "custom";
  } else {
    try {
      st.sampling = SamplingCase::preset(case_name);
    } catch (const InvalidInput& e) {
      r.fail("case", e.what());
    }
  }
  if (const auto m = r.integer("m_d", 1)) st.sampling.design.subareas_per_area = {static_cast<std::size_t>(*m)};
  if (const auto n = r.integer("n_dj", 1)) st.sampling.design.units_per_subarea = {static_cast<std::size_t>(*n)};

  st.replicates = static_cast<std::size_t>(r.integer("I", 1).value_or(200));
  st.censuses = static_cast<std::size_t>(r.integer("B", 1).value_or(100));

  if (cfg.get("estimators")) {
    st.estimators.clear();
    for (const auto& name : r.list("estimators")) {
      try {
        const auto kind = parse_estimator(name);
        if (std::find(st.estimators.begin(), st.estimators.end(), kind) != st.estimators.end()) {
          r.fail("estimators", "duplicate estimator '" + name + "'");
        }
        st.estimators.push_back(kind);
      } catch (const InvalidInput& e) {
        r.fail("estimators", e.what());
      }
    }
  }
  if (cfg.get("alphas")) {
    st.scenario.alphas.clear();
    for (const auto& a : r.list("alphas")) {
      const auto v = csv::parse_int(a);
      if (!v || *v < 0 || *v > 2) r.fail("alphas", "alpha must be 0, 1 or 2, got '" + a + "'");
      if (std::find(st.scenario.alphas.begin(), st.scenario.alphas.end(), *v) != st.scenario.alphas.end()) {
        r.fail("alphas", "duplicate alpha");
      }
      st.scenario.alphas.push_back(static_cast<int>(*v));
    }
  }

  const auto seed_text = cfg.get("seed");
  if (!seed_text) r.fail("seed", "missing required key");
  const auto seed = csv::parse_int(*seed_text);
  if (!seed || *seed < 0) r.fail("seed", "expected a non-negative integer");
  st.seed = static_cast<std::uint64_t>(*seed);

  const std::string line_policy = cfg.get("poverty_line").value_or("fixed-reference");
  if (line_policy == "fixed-reference") {
    st.scenario.poverty_line = PovertyLinePolicy::FixedReference;
  } else if (line_policy == "per-population") {
    st.scenario.poverty_line = PovertyLinePolicy::PerPopulation;
  } else {
    r.fail("poverty_line", "expected fixed-reference or per-population");
  }
  st.scenario.poverty_fraction = r.real("poverty_fraction").value_or(0.6);
  if (!(st.scenario.poverty_fraction > 0.0)) r.fail("poverty_fraction", "must be positive");

  const std::string sample_policy = cfg.get("sample_policy").value_or("redraw");
  if (sample_policy == "redraw") {
    st.sample_policy = SamplePolicy::Redraw;
  } else if (sample_policy == "fixed") {
    st.sample_policy = SamplePolicy::Fixed;
  } else {
    r.fail("sample_policy", "expected redraw or fixed");
  }
  const std::string pool = cfg.get("subarea_pool").value_or("pooled");
  if (pool == "pooled") {
    st.subarea_pool = SubareaPool::Pooled;
  } else if (pool == "per-area") {
    st.subarea_pool = SubareaPool::PerArea;
  } else {
    r.fail("subarea_pool", "expected pooled or per-area");
  }

  out.workers = static_cast<unsigned>(r.integer("workers", 0).value_or(0));
  out.out_dir = cfg.get("out").value_or("out");

  try {
    st.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("", 0, e.what());
  }
  return out;
}

}  // namespace sae
