#include "sae/report.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "sae/csv.hpp"
#include "sae/error.hpp"

namespace sae {

std::string indicator_name(int alpha) {
  switch (alpha) {
    case 0:
      return "inc";
    case 1:
      return "gap";
    case 2:
      return "sev";
    default:
      return "alpha" + std::to_string(alpha);
  }
}

std::vector<EntityRow> emit_boxplot_data(const StudyMetrics& metrics, const std::string& case_name,
                                         const std::string& scenario) {
  std::vector<EntityRow> rows;
  const auto& layout = metrics.layout;
  for (std::size_t e = 0; e < metrics.estimators.size(); ++e) {
    const std::string est(to_string(metrics.estimators[e]));
    for (std::size_t a = 0; a < metrics.alphas.size(); ++a) {
      for (std::size_t d = 0; d < layout.num_areas(); ++d) {
        const auto& s = metrics.area[e][a][d];
        rows.push_back({case_name, scenario, est, metrics.alphas[a], d + 1, 0, s.mse() * 1e4, s.bias() * 100.0,
                        Group::Area, s.count});
      }
      for (std::size_t d = 0; d < layout.num_areas(); ++d) {
        for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
          const auto& split = metrics.split[e][a][layout.subarea_index(d, j)];
          for (std::size_t status = 0; status < 2; ++status) {
            if (split[status].count == 0) continue;
            rows.push_back({case_name, scenario, est, metrics.alphas[a], d + 1, j + 1, split[status].mse() * 1e4,
                            split[status].bias() * 100.0,
                            status == 0 ? Group::SampledSubarea : Group::NonsampledSubarea, split[status].count});
          }
        }
      }
    }
  }
  return rows;
}

std::vector<TableRow> tables_from_entities(const std::vector<EntityRow>& rows) {
  struct Sums {
    double mse = 0.0;
    double bias = 0.0;
    double weight = 0.0;
  };
  using BlockKey = std::pair<std::string, std::string>;
  std::vector<BlockKey> blocks;
  std::map<BlockKey, std::vector<std::string>> block_estimators;
  std::map<BlockKey, std::vector<int>> block_alphas;
  std::map<std::tuple<BlockKey, std::string, int, Group>, Sums> sums;

  auto remember = [](auto& list, const auto& value) {
    if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
  };
  for (const auto& r : rows) {
    const BlockKey block{r.case_name, r.scenario};
    remember(blocks, block);
    remember(block_estimators[block], r.estimator);
    remember(block_alphas[block], r.alpha);
    auto add = [&](Group g, double w) {
      auto& s = sums[{block, r.estimator, r.alpha, g}];
      s.mse += w * r.mse_x1e4;
      s.bias += w * r.bias_x100;
      s.weight += w;
    };
    if (r.group == Group::Area) {
      add(Group::Area, 1.0);
    } else {
      const double w = static_cast<double>(r.replicates);
      add(Group::Subarea, w);
      add(r.group, w);
    }
  }

  std::vector<TableRow> out;
  for (const auto& block : blocks) {
    auto has = [&](Group g) {
      for (const auto& [key, s] : sums) {
        if (std::get<0>(key) == block && std::get<3>(key) == g && s.weight > 0) return true;
      }
      return false;
    };
    std::vector<Group> groups{Group::Area, Group::Subarea};
    if (has(Group::SampledSubarea) && has(Group::NonsampledSubarea)) {
      groups.push_back(Group::SampledSubarea);
      groups.push_back(Group::NonsampledSubarea);
    }
    for (const auto g : groups) {
      for (const int alpha : block_alphas[block]) {
        for (const auto& est : block_estimators[block]) {
          const auto it = sums.find({block, est, alpha, g});
          if (it == sums.end() || it->second.weight == 0) continue;
          const auto& s = it->second;
          out.push_back({block.first, block.second, g, indicator_name(alpha), est, s.mse / s.weight,
                         s.bias / s.weight});
        }
      }
    }
  }
  return out;
}

std::vector<TableRow> emit_tables(const StudyMetrics& metrics, const std::string& case_name,
                                  const std::string& scenario) {
  return tables_from_entities(emit_boxplot_data(metrics, case_name, scenario));
}

namespace {

const std::vector<std::string> kEntityHeader{"case",      "scenario",  "estimator", "alpha",
                                             "d",         "j_or_blank", "mse_x1e4", "bias_x100",
                                             "group",     "replicates"};

}  // namespace

void write_entities_csv(std::ostream& out, const std::vector<EntityRow>& rows) {
  for (std::size_t i = 0; i < kEntityHeader.size(); ++i) out << (i ? "," : "") << kEntityHeader[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.case_name << ',' << r.scenario << ',' << r.estimator << ',' << r.alpha << ',' << r.area << ',';
    if (r.subarea) out << r.subarea;
    out << ',' << csv::format_double(r.mse_x1e4) << ',' << csv::format_double(r.bias_x100) << ','
        << to_string(r.group) << ',' << r.replicates << '\n';
  }
}

std::vector<EntityRow> read_entities_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) throw InvalidInput("entities csv: missing header");
  if (csv::split(line) != kEntityHeader) throw InvalidInput("entities csv: unexpected header");
  std::vector<EntityRow> rows;
  while (csv::next_line(in, line, line_no)) {
    auto fail = [&](const std::string& what) {
      throw InvalidInput("entities csv: row " + std::to_string(line_no) + ": " + what);
    };
    const auto f = csv::split(line);
    if (f.size() != kEntityHeader.size()) fail("expected " + std::to_string(kEntityHeader.size()) + " fields");
    EntityRow r;
    r.case_name = f[0];
    r.scenario = f[1];
    r.estimator = f[2];
    const auto alpha = csv::parse_int(f[3]);
    const auto d = csv::parse_int(f[4]);
    const auto mse = csv::parse_double(f[6]);
    const auto bias = csv::parse_double(f[7]);
    const auto reps = csv::parse_int(f[9]);
    if (!alpha || !d || *d < 1 || !mse || !bias || !reps || *reps < 0) fail("malformed value");
    r.alpha = static_cast<int>(*alpha);
    r.area = static_cast<std::size_t>(*d);
    if (!f[5].empty()) {
      const auto j = csv::parse_int(f[5]);
      if (!j || *j < 1) fail("malformed subarea label");
      r.subarea = static_cast<std::size_t>(*j);
    }
    r.mse_x1e4 = *mse;
    r.bias_x100 = *bias;
    try {
      r.group = parse_group(f[8]);
    } catch (const InvalidInput&) {
      fail("unknown group '" + f[8] + "'");
    }
    if ((r.group == Group::Area) != (r.subarea == 0)) fail("group does not match subarea label");
    r.replicates = static_cast<std::size_t>(*reps);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_tables_csv(std::ostream& out, const std::vector<TableRow>& rows) {
  out << "case,scenario,group,indicator,estimator,avg_mse_x1e4,avg_bias_x100\n";
  for (const auto& r : rows) {
    out << r.case_name << ',' << r.scenario << ',' << to_string(r.group) << ',' << r.indicator << ','
        << r.estimator << ',' << csv::format_fixed(r.avg_mse_x1e4, 4) << ',' << csv::format_fixed(r.avg_bias_x100, 4)
        << '\n';
  }
}

void write_manifest(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& entries) {
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
}

}  // namespace sae
