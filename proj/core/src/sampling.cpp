#include "sae/sampling.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "sae/error.hpp"

namespace sae {
namespace {

std::size_t pick(const std::vector<std::size_t>& v, std::size_t d, const char* what) {
  if (v.size() == 1) return v.front();
  if (d >= v.size()) throw InvalidInput(std::string("sampling design: missing ") + what + " for area");
  return v[d];
}

}  // namespace

std::size_t SamplingDesign::subareas_in(std::size_t d) const { return pick(subareas_per_area, d, "m_d"); }
std::size_t SamplingDesign::units_in(std::size_t d) const { return pick(units_per_subarea, d, "n_dj"); }

void SamplingDesign::validate(const PopulationLayout& layout) const {
  const std::size_t areas = layout.num_areas();
  for (const auto* v : {&subareas_per_area, &units_per_subarea}) {
    if (v->size() != 1 && v->size() != areas) {
      throw InvalidInput("sampling design: expected 1 or " + std::to_string(areas) + " values, got " +
                         std::to_string(v->size()));
    }
  }
  for (std::size_t d = 0; d < areas; ++d) {
    const auto m = subareas_in(d);
    const auto n = units_in(d);
    const auto label = std::to_string(d + 1);
    if (m < 1 || m > layout.num_subareas(d)) {
      throw InvalidInput("sampling design: m_d = " + std::to_string(m) + " infeasible in area " + label);
    }
    for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
      if (n < 1 || n > layout.subarea_size(d, j)) {
        throw InvalidInput("sampling design: n_dj = " + std::to_string(n) + " infeasible in subarea (" + label +
                           ", " + std::to_string(j + 1) + ")");
      }
    }
  }
}

SampleIndex::SampleIndex(PopulationLayout layout, std::vector<std::vector<std::size_t>> subareas,
                         std::vector<std::vector<std::size_t>> units)
    : layout_(std::move(layout)), subareas_(std::move(subareas)), units_(std::move(units)) {
  if (subareas_.size() != layout_.num_areas() || units_.size() != layout_.total_subareas()) {
    throw InvalidInput("sample index does not match layout");
  }
  subarea_member_.assign(layout_.total_subareas(), 0);
  unit_member_.assign(layout_.total_units(), 0);
  for (std::size_t d = 0; d < layout_.num_areas(); ++d) {
    for (std::size_t i = 0; i < subareas_[d].size(); ++i) {
      const auto j = subareas_[d][i];
      if (j >= layout_.num_subareas(d) || (i > 0 && subareas_[d][i - 1] >= j)) {
        throw InvalidInput("sample index: subarea labels must be sorted, unique and in range");
      }
      const auto s = layout_.subarea_index(d, j);
      if (units_[s].empty()) throw InvalidInput("sample index: sampled subarea without units");
      subarea_member_[s] = 1;
      ++num_sampled_subareas_;
    }
  }
  for (std::size_t s = 0; s < layout_.total_subareas(); ++s) {
    const auto& list = units_[s];
    if (!list.empty() && !subarea_member_[s]) {
      throw InvalidInput("sample index: units listed for a non-sampled subarea");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i] >= layout_.flat_subarea_size(s) || (i > 0 && list[i - 1] >= list[i])) {
        throw InvalidInput("sample index: unit labels must be sorted, unique and in range");
      }
      unit_member_[layout_.unit_offset(s) + list[i]] = 1;
    }
    sample_size_ += list.size();
  }
}

SampleIndex SampleIndex::census(const PopulationLayout& layout) {
  std::vector<std::vector<std::size_t>> subareas(layout.num_areas());
  std::vector<std::vector<std::size_t>> units(layout.total_subareas());
  for (std::size_t d = 0; d < layout.num_areas(); ++d) {
    for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
      subareas[d].push_back(j);
      auto& u = units[layout.subarea_index(d, j)];
      for (std::size_t k = 0; k < layout.subarea_size(d, j); ++k) u.push_back(k);
    }
  }
  return SampleIndex(layout, std::move(subareas), std::move(units));
}

std::vector<std::size_t> srswor(std::size_t n, std::size_t k, RngStream& rng) {
  if (k > n) throw InvalidInput("srswor: sample larger than population");
  // Partial Fisher-Yates over a virtual identity array; only displaced slots are stored.
  std::unordered_map<std::size_t, std::size_t> displaced;
  displaced.reserve(2 * k);
  auto at = [&](std::size_t i) {
    const auto it = displaced.find(i);
    return it == displaced.end() ? i : it->second;
  };
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t r = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    const std::size_t vi = at(i);
    const std::size_t vr = at(r);
    out[i] = vr;
    displaced[r] = vi;
  }
  std::sort(out.begin(), out.end());
  return out;
}

SampleIndex draw_sample(const PopulationLayout& layout, const SamplingDesign& design, RngStream& rng) {
  design.validate(layout);
  std::vector<std::vector<std::size_t>> subareas(layout.num_areas());
  std::vector<std::vector<std::size_t>> units(layout.total_subareas());
  for (std::size_t d = 0; d < layout.num_areas(); ++d) {
    auto area_rng = rng.substream(d);
    subareas[d] = srswor(layout.num_subareas(d), design.subareas_in(d), area_rng);
    for (const auto j : subareas[d]) {
      auto unit_rng = area_rng.substream(j);
      units[layout.subarea_index(d, j)] = srswor(layout.subarea_size(d, j), design.units_in(d), unit_rng);
    }
  }
  return SampleIndex(layout, std::move(subareas), std::move(units));
}

void SampleData::validate() const {
  const std::size_t n = size();
  if (static_cast<std::size_t>(x.rows()) != n || area.size() != n || subarea.size() != n) {
    throw InvalidInput("sample data: column lengths differ");
  }
  if (!unit.empty() && unit.size() != n) throw InvalidInput("sample data: unit labels have wrong length");
  for (std::size_t i = 1; i < n; ++i) {
    const bool same_subarea = subarea[i] == subarea[i - 1];
    if (same_subarea && area[i] != area[i - 1]) {
      throw InvalidInput("sample data: subarea label shared across areas");
    }
    if (area[i] < area[i - 1] || (area[i] == area[i - 1] && subarea[i] < subarea[i - 1]) ||
        (area[i] != area[i - 1] && subarea[i] <= subarea[i - 1])) {
      throw InvalidInput("sample data: rows must be sorted by (area, subarea)");
    }
  }
}

SampleData extract_sample(const Population& population, const SampleIndex& index) {
  const auto& layout = population.layout();
  if (!(layout == index.layout())) throw InvalidInput("extract_sample: index was drawn for a different layout");
  const auto& census = *population.census;
  const std::size_t n = index.sample_size();
  const auto p = static_cast<Eigen::Index>(census.num_covariates());
  SampleData out;
  out.y.resize(static_cast<Eigen::Index>(n));
  out.x.resize(static_cast<Eigen::Index>(n), p);
  out.area.reserve(n);
  out.subarea.reserve(n);
  out.unit.reserve(n);
  Eigen::Index row = 0;
  for (std::size_t d = 0; d < layout.num_areas(); ++d) {
    for (const auto j : index.sampled_subareas(d)) {
      const auto s = layout.subarea_index(d, j);
      for (const auto k : index.sampled_units(s)) {
        const std::size_t u = layout.unit_offset(s) + k;
        out.y[row] = population.y[u];
        const auto xr = census.row(u);
        for (Eigen::Index c = 0; c < p; ++c) out.x(row, c) = xr[static_cast<std::size_t>(c)];
        out.area.push_back(d);
        out.subarea.push_back(s);
        out.unit.push_back(u);
        ++row;
      }
    }
  }
  return out;
}

}  // namespace sae
