#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sae/study.hpp"

namespace sae {

/// One per-entity row of the boxplot dataset.
/// `subarea` is 0 for area rows, otherwise the 1-based subarea label j.
/// Subarea rows are emitted once per sampling status seen across replicates;
/// `replicates` counts the replicates behind the row.
struct EntityRow {
  std::string case_name;
  std::string scenario;
  std::string estimator;
  int alpha = 0;
  std::size_t area = 0;
  std::size_t subarea = 0;
  double mse_x1e4 = 0.0;
  double bias_x100 = 0.0;
  Group group = Group::Area;
  std::size_t replicates = 0;
};

/// One row of the grouped table: group-average MSE x 1e4 and bias x 100.
struct TableRow {
  std::string case_name;
  std::string scenario;
  Group group = Group::Area;
  std::string indicator;  ///< inc, gap or sev
  std::string estimator;
  double avg_mse_x1e4 = 0.0;
  double avg_bias_x100 = 0.0;
};

std::string indicator_name(int alpha);

std::vector<EntityRow> emit_boxplot_data(const StudyMetrics& metrics, const std::string& case_name,
                                         const std::string& scenario);

/**
 * Groups entity rows into table rows. Area groups average the per-area
 * values; subarea groups weight each row by its replicate count, which
 * pools (replicate, subarea) contributions. Sampled and non-sampled groups
 * appear only when both are present. Blocks keep first-seen order of
 * (case, scenario), estimators and alphas.
 */
std::vector<TableRow> tables_from_entities(const std::vector<EntityRow>& rows);

std::vector<TableRow> emit_tables(const StudyMetrics& metrics, const std::string& case_name,
                                  const std::string& scenario);

void write_entities_csv(std::ostream& out, const std::vector<EntityRow>& rows);
/// Throws InvalidInput naming the row on schema or value errors.
std::vector<EntityRow> read_entities_csv(std::istream& in);

void write_tables_csv(std::ostream& out, const std::vector<TableRow>& rows);

/// Plain key=value manifest; `entries` are written in the given order.
void write_manifest(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace sae
