#include "sae/population.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "sae/csv.hpp"
#include "sae/error.hpp"

namespace sae {

PopulationLayout::PopulationLayout(std::vector<std::vector<std::size_t>> units) : units_(std::move(units)) {
  if (units_.empty()) throw InvalidInput("layout needs at least one area");
  area_size_.reserve(units_.size());
  for (std::size_t d = 0; d < units_.size(); ++d) {
    if (units_[d].empty()) throw InvalidInput("area " + std::to_string(d + 1) + " has no subareas");
    std::size_t total = 0;
    for (std::size_t j = 0; j < units_[d].size(); ++j) {
      const auto n = units_[d][j];
      if (n == 0) {
        throw InvalidInput("subarea (" + std::to_string(d + 1) + ", " + std::to_string(j + 1) +
                           ") has no units");
      }
      total += n;
      unit_offset_.push_back(unit_offset_.back() + n);
      area_of_.push_back(d);
    }
    area_size_.push_back(total);
    subarea_begin_.push_back(subarea_begin_.back() + units_[d].size());
  }
}

PopulationLayout PopulationLayout::balanced(std::size_t areas, std::size_t subareas, std::size_t units) {
  return PopulationLayout(std::vector<std::vector<std::size_t>>(areas, std::vector<std::size_t>(subareas, units)));
}

CovariateCensus::CovariateCensus(PopulationLayout layout, std::size_t p, std::vector<double> x)
    : layout_(std::move(layout)), p_(p), x_(std::move(x)) {
  if (p_ == 0) throw InvalidInput("census needs at least one covariate");
  if (x_.size() != layout_.total_units() * p_) {
    throw InvalidInput("census has " + std::to_string(x_.size()) + " values, expected " +
                       std::to_string(layout_.total_units() * p_));
  }
}

std::vector<double> CovariateCensus::linear_predictor(const Eigen::VectorXd& beta) const {
  if (static_cast<std::size_t>(beta.size()) != p_) {
    throw InvalidInput("beta has " + std::to_string(beta.size()) + " entries, census has " +
                       std::to_string(p_) + " covariates");
  }
  const std::size_t n = layout_.total_units();
  std::vector<double> eta(n);
  const double* x = x_.data();
  for (std::size_t u = 0; u < n; ++u, x += p_) {
    double s = 0.0;
    for (std::size_t c = 0; c < p_; ++c) s += x[c] * beta[static_cast<Eigen::Index>(c)];
    eta[u] = s;
  }
  return eta;
}

CovariateCensus generate_covariates(const PopulationLayout& layout, RngStream& rng) {
  constexpr std::size_t p = 3;
  std::vector<double> x;
  x.reserve(layout.total_units() * p);
  const double big_d = static_cast<double>(layout.num_areas());
  for (std::size_t d = 0; d < layout.num_areas(); ++d) {
    const double m = static_cast<double>(layout.num_subareas(d));
    for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
      const double p1 = std::min(1.0, 0.2 + 0.4 * static_cast<double>(d + 1) / big_d +
                                          0.4 * static_cast<double>(j + 1) / m);
      for (std::size_t k = 0; k < layout.subarea_size(d, j); ++k) {
        x.push_back(1.0);
        x.push_back(sample_bernoulli(p1, rng));
        x.push_back(sample_bernoulli(0.2, rng));
      }
    }
  }
  return CovariateCensus(layout, p, std::move(x));
}

Population generate_population(std::shared_ptr<const CovariateCensus> census, const ModelParams& params,
                               RngStream& rng) {
  if (!census) throw InvalidInput("generate_population: null census");
  const auto& layout = census->layout();
  Population pop;
  pop.y = census->linear_predictor(params.beta);

  auto area_rng = rng.substream(StreamPurpose::AreaEffect);
  auto subarea_rng = rng.substream(StreamPurpose::SubareaEffect);
  auto unit_rng = rng.substream(StreamPurpose::UnitError);
  pop.true_u = sample_skew_normal(params.area_effect, layout.num_areas(), area_rng);
  pop.true_v = sample_skew_normal(params.subarea_effect, layout.total_subareas(), subarea_rng);

  for (std::size_t s = 0; s < layout.total_subareas(); ++s) {
    const double shift = pop.true_u[layout.area_of(s)] + pop.true_v[s];
    for (std::size_t u = layout.unit_offset(s); u < layout.unit_offset(s + 1); ++u) {
      pop.y[u] += shift + params.unit_error.draw(unit_rng);
    }
  }
  pop.welfare.resize(pop.y.size());
  std::transform(pop.y.begin(), pop.y.end(), pop.welfare.begin(), [](double v) { return std::exp(v); });
  pop.census = std::move(census);
  return pop;
}

Population population_from_values(std::shared_ptr<const CovariateCensus> census, std::vector<double> y) {
  if (!census) throw InvalidInput("population_from_values: null census");
  if (y.size() != census->layout().total_units()) {
    throw InvalidInput("population has " + std::to_string(y.size()) + " values, layout expects " +
                       std::to_string(census->layout().total_units()));
  }
  Population pop;
  pop.y = std::move(y);
  pop.welfare.resize(pop.y.size());
  std::transform(pop.y.begin(), pop.y.end(), pop.welfare.begin(), [](double v) { return std::exp(v); });
  pop.census = std::move(census);
  return pop;
}

double poverty_line(std::span<const double> welfare, double fraction) {
  if (welfare.empty()) throw InvalidInput("poverty_line: empty population");
  std::vector<double> v(welfare.begin(), welfare.end());
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  double median = *mid;
  if (n % 2 == 0) {
    const double lower = *std::max_element(v.begin(), mid);
    median = 0.5 * (lower + median);
  }
  return fraction * median;
}

double poverty_line(const Population& population, double fraction) {
  return poverty_line(population.welfare, fraction);
}

FgtParams::FgtParams(double z, int alpha, double c) : z_(z), alpha_(alpha), c_(c) {
  if (!(z > 0.0) || !std::isfinite(z)) throw InvalidParameter("poverty line must be positive");
  if (alpha < 0 || alpha > 2) throw InvalidParameter("FGT alpha must be 0, 1 or 2");
  if (!std::isfinite(c)) throw InvalidParameter("welfare shift must be finite");
}

double fgt_unit(double y, const FgtParams& fgt) noexcept {
  const double e = std::exp(y) - fgt.c();
  if (!(e < fgt.z())) return 0.0;
  switch (fgt.alpha()) {
    case 0:
      return 1.0;
    case 1:
      return (fgt.z() - e) / fgt.z();
    default: {
      const double g = (fgt.z() - e) / fgt.z();
      return g * g;
    }
  }
}

FgtEvaluator::FgtEvaluator(std::span<const FgtParams> params)
    : params_(params.begin(), params.end()), max_cutoff_(-std::numeric_limits<double>::infinity()) {
  cutoff_.reserve(params_.size());
  for (const auto& p : params_) {
    const double bound = p.z() + p.c();
    // exp(y) - c < z needs exp(y) < z + c; the small margin absorbs exp rounding.
    const double cut = bound > 0.0 ? std::log(bound) + 1e-9 : -std::numeric_limits<double>::infinity();
    cutoff_.push_back(cut);
    max_cutoff_ = std::max(max_cutoff_, cut);
  }
}

double fgt_subarea(std::span<const double> unit_values) {
  if (unit_values.empty()) throw InvalidInput("fgt_subarea: empty subarea");
  double s = 0.0;
  for (double v : unit_values) s += v;
  return s / static_cast<double>(unit_values.size());
}

double fgt_area(std::span<const double> subarea_values, const PopulationLayout& layout, std::size_t d) {
  if (subarea_values.size() != layout.num_subareas(d)) {
    throw InvalidInput("fgt_area: subarea count does not match layout");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < subarea_values.size(); ++j) {
    s += static_cast<double>(layout.subarea_size(d, j)) * subarea_values[j];
  }
  return s / static_cast<double>(layout.area_size(d));
}

FgtMeasures compute_fgt(std::span<const double> y, const PopulationLayout& layout,
                        std::span<const FgtParams> params) {
  if (y.size() != layout.total_units()) throw InvalidInput("compute_fgt: value count does not match layout");
  const FgtEvaluator eval(params);
  const std::size_t na = params.size();
  FgtMeasures out;
  out.area.assign(na, std::vector<double>(layout.num_areas(), 0.0));
  out.subarea.assign(na, std::vector<double>(layout.total_subareas(), 0.0));
  std::vector<double> acc(na);
  for (std::size_t d = 0; d < layout.num_areas(); ++d) {
    std::vector<double> area_sum(na, 0.0);
    for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
      const std::size_t s = layout.subarea_index(d, j);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t u = layout.unit_offset(s); u < layout.unit_offset(s + 1); ++u) {
        eval.accumulate(y[u], acc.data());
      }
      for (std::size_t a = 0; a < na; ++a) {
        out.subarea[a][s] = acc[a] / static_cast<double>(layout.flat_subarea_size(s));
        area_sum[a] += acc[a];
      }
    }
    for (std::size_t a = 0; a < na; ++a) {
      out.area[a][d] = area_sum[a] / static_cast<double>(layout.area_size(d));
    }
  }
  return out;
}

void write_population_csv(std::ostream& out, const Population& population) {
  const auto& census = *population.census;
  const auto& layout = census.layout();
  const std::size_t p = census.num_covariates();
  out << "d,j,k";
  for (std::size_t c = 2; c <= p; ++c) out << ",x" << c;
  out << ",y\n";
  for (std::size_t d = 0; d < layout.num_areas(); ++d) {
    for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
      const std::size_t begin = layout.unit_offset(d, j);
      for (std::size_t k = 0; k < layout.subarea_size(d, j); ++k) {
        const auto row = census.row(begin + k);
        out << d + 1 << ',' << j + 1 << ',' << k + 1;
        for (std::size_t c = 1; c < p; ++c) out << ',' << csv::format_double(row[c]);
        out << ',' << csv::format_double(population.y[begin + k]) << '\n';
      }
    }
  }
}

Population read_population_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) throw InvalidInput("population csv: missing header");
  const auto header = csv::split(line);
  if (header.size() < 4 || header[0] != "d" || header[1] != "j" || header[2] != "k" || header.back() != "y") {
    throw InvalidInput("population csv: header must be d,j,k,x2..xp,y");
  }
  const std::size_t extra = header.size() - 4;
  for (std::size_t c = 0; c < extra; ++c) {
    if (header[3 + c] != "x" + std::to_string(c + 2)) {
      throw InvalidInput("population csv: unexpected column '" + header[3 + c] + "'");
    }
  }
  const std::size_t p = extra + 1;

  std::vector<std::vector<std::size_t>> units;
  std::vector<double> x;
  std::vector<double> y;
  auto fail = [&](const std::string& what) {
    throw InvalidInput("population csv: row " + std::to_string(line_no) + ": " + what);
  };
  while (csv::next_line(in, line, line_no)) {
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) fail("expected " + std::to_string(header.size()) + " fields");
    const auto d = csv::parse_int(fields[0]);
    const auto j = csv::parse_int(fields[1]);
    const auto k = csv::parse_int(fields[2]);
    if (!d || !j || !k || *d < 1 || *j < 1 || *k < 1) fail("labels must be positive integers");
    const auto di = static_cast<std::size_t>(*d);
    const auto ji = static_cast<std::size_t>(*j);
    const auto ki = static_cast<std::size_t>(*k);
    if (di == units.size() + 1) {
      if (ji != 1) fail("subareas must start at 1");
      units.emplace_back();
    } else if (di != units.size()) {
      fail("rows must be sorted by area");
    }
    auto& area = units.back();
    if (ji == area.size() + 1) {
      if (ki != 1) fail("units must start at 1");
      area.push_back(0);
    } else if (ji != area.size()) {
      fail("rows must be sorted by subarea");
    }
    if (ki != area.back() + 1) fail("unit labels must be contiguous");
    ++area.back();
    x.push_back(1.0);
    for (std::size_t c = 0; c < extra; ++c) {
      const auto v = csv::parse_double(fields[3 + c]);
      if (!v) fail("malformed number '" + fields[3 + c] + "'");
      x.push_back(*v);
    }
    const auto yv = csv::parse_double(fields.back());
    if (!yv) fail("malformed number '" + fields.back() + "'");
    y.push_back(*yv);
  }
  if (units.empty()) throw InvalidInput("population csv: no data rows");
  auto census = std::make_shared<const CovariateCensus>(PopulationLayout(std::move(units)), p, std::move(x));
  return population_from_values(std::move(census), std::move(y));
}

}  // namespace sae
