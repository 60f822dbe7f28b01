#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sae/error.hpp"
#include "sae/study.hpp"

namespace sae {

/// Configuration problem; `line` is 0 when the issue is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& message);
  [[nodiscard]] const std::string& key() const noexcept { return key_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

/**
 * Flat `key = value` configuration. `#` starts a comment; blank lines are
 * ignored; keys are case-sensitive.
 *
 *   scenario          all_normal | e_skew | ve_skew | custom   (default e_skew)
 *   lambda_u/v/e      skew normal shapes (override the scenario preset)
 *   sigma_u/v/e       standard deviations (override the scenario preset)
 *   beta              comma list, three entries (default 3,0.03,-0.04)
 *   areas, subareas, units   balanced layout (default 40, 10, 50)
 *   case              I | II | custom                           (default I)
 *   m_d, n_dj         design (required for case = custom, else override)
 *   I, B              replicates and censuses                   (default 200, 100)
 *   estimators        comma list of ELL, MELL1, MELL2, ELL1     (default ELL,MELL1,MELL2)
 *   alphas            comma list from {0, 1, 2}                 (default 0,1)
 *   seed              required
 *   poverty_line      fixed-reference | per-population          (default fixed-reference)
 *   poverty_fraction  default 0.6
 *   sample_policy     redraw | fixed                            (default redraw)
 *   subarea_pool      pooled | per-area                         (default pooled)
 *   workers           0 means available parallelism             (default 0)
 *   out               output directory                          (default out)
 */
class RunConfigFile {
 public:
  static RunConfigFile parse(std::istream& in);
  static RunConfigFile parse_string(const std::string& text);

  /// Applies `key=value`; later values win. Unknown keys are rejected.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value, std::size_t line = 0);

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return entries_;
  }

  [[nodiscard]] static const std::vector<std::string>& known_keys();

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::size_t> lines_;
  [[nodiscard]] std::size_t line_of(const std::string& key) const;
  friend struct ConfigReader;
};

struct RunSettings {
  StudyConfig study;
  std::string out_dir = "out";
  unsigned workers = 0;  ///< 0: available parallelism
};

/// Builds the study configuration. Throws ConfigError on missing or malformed values.
RunSettings to_run_settings(const RunConfigFile& config);

}  // namespace sae
