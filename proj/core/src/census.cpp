#include "sae/census.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "sae/csv.hpp"
#include "sae/error.hpp"

namespace sae {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ELL:
      return "ELL";
    case EstimatorKind::MELL1:
      return "MELL1";
    case EstimatorKind::MELL2:
      return "MELL2";
    case EstimatorKind::ELL1_onefold:
      return "ELL1";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "ELL") return EstimatorKind::ELL;
  if (upper == "MELL1") return EstimatorKind::MELL1;
  if (upper == "MELL2") return EstimatorKind::MELL2;
  if (upper == "ELL1" || upper == "ELL1_ONEFOLD") return EstimatorKind::ELL1_onefold;
  throw InvalidInput("unknown estimator '" + std::string(name) + "'");
}

CensusRun::CensusRun(std::size_t alphas, std::size_t censuses, std::size_t areas, std::size_t subareas)
    : alphas_(alphas),
      censuses_(censuses),
      areas_(areas),
      subareas_(subareas),
      area_(alphas * censuses * areas, 0.0),
      subarea_(alphas * censuses * subareas, 0.0) {}

namespace {

void mean_and_mse(const CensusRun& run, bool areas, std::vector<std::vector<double>>& mean,
                  std::vector<std::vector<double>>& mse) {
  const std::size_t entities = areas ? run.areas() : run.subareas();
  const std::size_t b_count = run.censuses();
  mean.assign(run.alphas(), std::vector<double>(entities, 0.0));
  mse.assign(run.alphas(), std::vector<double>(entities, 0.0));
  if (b_count == 0) return;
  const double inv_b = 1.0 / static_cast<double>(b_count);
  for (std::size_t a = 0; a < run.alphas(); ++a) {
    for (std::size_t b = 0; b < b_count; ++b) {
      const auto row = areas ? run.area_row(a, b) : run.subarea_row(a, b);
      for (std::size_t e = 0; e < entities; ++e) mean[a][e] += row[e];
    }
    for (auto& m : mean[a]) m *= inv_b;
    for (std::size_t b = 0; b < b_count; ++b) {
      const auto row = areas ? run.area_row(a, b) : run.subarea_row(a, b);
      for (std::size_t e = 0; e < entities; ++e) {
        const double dev = row[e] - mean[a][e];
        mse[a][e] += dev * dev;
      }
    }
    for (auto& m : mse[a]) m *= inv_b;
    if (b_count == 1) std::fill(mse[a].begin(), mse[a].end(), 0.0);
  }
}

// Draws from the empirical pools with the stream layout documented on CensusSimulator.
class RngDrawer {
 public:
  RngDrawer(const RngStream& census_rng, const MvnFactor* factor, const Eigen::VectorXd& beta_hat)
      : census_(census_rng), unit_rng_(census_rng), factor_(factor), beta_hat_(beta_hat) {}

  Eigen::VectorXd beta() {
    auto rng = census_.substream(StreamPurpose::Beta);
    return factor_->draw(beta_hat_, rng);
  }
  double area(std::size_t d, std::span<const double> pool) {
    auto rng = census_.substream({static_cast<std::uint64_t>(StreamPurpose::AreaEffect), d});
    return pool[rng.uniform_index(pool.size())];
  }
  double subarea(std::size_t s, std::span<const double> pool) {
    auto rng = census_.substream({static_cast<std::uint64_t>(StreamPurpose::SubareaEffect), s});
    return pool[rng.uniform_index(pool.size())];
  }
  void begin_units(std::size_t s) {
    unit_rng_ = census_.substream({static_cast<std::uint64_t>(StreamPurpose::UnitError), s});
  }
  double unit(std::size_t /*u*/, std::span<const double> pool) { return pool[unit_rng_.uniform_index(pool.size())]; }

 private:
  RngStream census_;
  RngStream unit_rng_;
  const MvnFactor* factor_;
  const Eigen::VectorXd& beta_hat_;
};

class FixedDrawer {
 public:
  explicit FixedDrawer(const CensusDraw& draw) : draw_(draw) {}

  Eigen::VectorXd beta() { return draw_.beta; }
  double area(std::size_t d, std::span<const double> pool) { return pool[checked(draw_.area_pick, d, pool)]; }
  double subarea(std::size_t s, std::span<const double> pool) {
    return pool[checked(draw_.subarea_pick, s, pool)];
  }
  void begin_units(std::size_t) {}
  double unit(std::size_t u, std::span<const double> pool) { return pool[checked(draw_.unit_pick, u, pool)]; }

 private:
  static std::size_t checked(const std::vector<std::size_t>& picks, std::size_t i, std::span<const double> pool) {
    if (i >= picks.size() || picks[i] >= pool.size()) throw InvalidInput("census draw: pick out of range");
    return picks[i];
  }
  const CensusDraw& draw_;
};

// Accumulates h_alpha sums for one census into a CensusRun.
class FgtSink {
 public:
  FgtSink(const FgtEvaluator& eval, const PopulationLayout& layout, CensusRun& run, std::size_t b)
      : eval_(eval), layout_(layout), run_(run), b_(b), sub_(eval.size(), 0.0), area_(eval.size(), 0.0) {}

  void unit(std::size_t /*u*/, double y) { eval_.accumulate(y, sub_.data()); }
  void end_subarea(std::size_t s) {
    const double n = static_cast<double>(layout_.flat_subarea_size(s));
    for (std::size_t a = 0; a < sub_.size(); ++a) {
      run_.subarea(a, b_, s) = sub_[a] / n;
      area_[a] += sub_[a];
      sub_[a] = 0.0;
    }
  }
  void end_area(std::size_t d) {
    const double n = static_cast<double>(layout_.area_size(d));
    for (std::size_t a = 0; a < area_.size(); ++a) {
      run_.area(a, b_, d) = area_[a] / n;
      area_[a] = 0.0;
    }
  }

 private:
  const FgtEvaluator& eval_;
  const PopulationLayout& layout_;
  CensusRun& run_;
  std::size_t b_;
  std::vector<double> sub_;
  std::vector<double> area_;
};

class ValueSink {
 public:
  explicit ValueSink(std::size_t n) : values(n, 0.0) {}
  void unit(std::size_t u, double y) { values[u] = y; }
  void end_subarea(std::size_t) {}
  void end_area(std::size_t) {}
  std::vector<double> values;
};

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

NaiveMse naive_mse(const CensusRun& run) {
  NaiveMse out;
  std::vector<std::vector<double>> mean;
  mean_and_mse(run, true, mean, out.area);
  mean_and_mse(run, false, mean, out.subarea);
  return out;
}

FgtEstimates summarize(EstimatorKind kind, std::span<const FgtParams> params, const CensusRun& run) {
  if (params.size() != run.alphas()) throw InvalidInput("summarize: parameter count does not match run");
  FgtEstimates est;
  est.kind = kind;
  est.params.assign(params.begin(), params.end());
  mean_and_mse(run, true, est.area_estimate, est.area_mse);
  mean_and_mse(run, false, est.subarea_estimate, est.subarea_mse);
  return est;
}

CensusSimulator::CensusSimulator(const CovariateCensus& census, const SampleIndex& index, const OlsFit& fit,
                                 const RandomEffectEstimates& effects, const OneFoldEffects* onefold,
                                 CensusOptions options)
    : census_(census), index_(index), fit_(fit), effects_(effects), onefold_(onefold), options_(options) {
  if (!(census.layout() == index.layout())) throw InvalidInput("census simulator: index and census layouts differ");
  if (static_cast<std::size_t>(fit.beta_hat.size()) != census.num_covariates()) {
    throw InvalidInput("census simulator: coefficient count does not match census covariates");
  }
  if (effects.u_hat.empty() || effects.v_hat.empty() || effects.e_hat.empty()) {
    throw InvalidInput("census simulator: empty residual pools");
  }
  eta_hat_ = census.linear_predictor(fit.beta_hat);
  beta_factor_.emplace(fit.cov_beta);

  const auto& layout = census.layout();
  area_v_pool_.assign(layout.num_areas(), {});
  for (std::size_t t = 0; t < effects.v_hat.size(); ++t) {
    const std::size_t d = effects.area_label[effects.subarea_area[t]];
    if (d >= layout.num_areas()) throw InvalidInput("census simulator: effect labels exceed layout");
    area_v_pool_[d].push_back(effects.v_hat[t]);
  }
}

void CensusSimulator::check_supported(EstimatorKind kind) const {
  const auto& layout = census_.layout();
  if (kind == EstimatorKind::ELL1_onefold) {
    if (onefold_ == nullptr || onefold_->u_hat.empty() || onefold_->e_hat.empty()) {
      throw Unsupported("ELL1 needs a one-fold decomposition");
    }
    return;
  }
  const bool uses_u_hat = kind == EstimatorKind::MELL1 || kind == EstimatorKind::MELL2;
  for (std::size_t d = 0; d < layout.num_areas(); ++d) {
    if (uses_u_hat && effects_.area_slot(d) == RandomEffectEstimates::npos) {
      throw Unsupported(std::string(to_string(kind)) + " needs sampled units in every area; area " +
                        std::to_string(d + 1) + " has none");
    }
    if (options_.subarea_pool == SubareaPool::PerArea && area_v_pool_[d].empty()) {
      throw Unsupported("per-area subarea pool is empty for area " + std::to_string(d + 1));
    }
  }
}

template <class Drawer, class Sink>
void CensusSimulator::run_census(EstimatorKind kind, Drawer& drawer, Sink& sink) const {
  const auto& layout = census_.layout();
  const bool redraw_beta = kind == EstimatorKind::ELL || kind == EstimatorKind::ELL1_onefold;
  const bool onefold = kind == EstimatorKind::ELL1_onefold;
  const std::size_t p = census_.num_covariates();

  Eigen::VectorXd beta;
  if (redraw_beta) {
    beta = drawer.beta();
    if (static_cast<std::size_t>(beta.size()) != p) throw InvalidInput("census draw: beta has wrong dimension");
  }
  const std::span<const double> e_pool = onefold ? std::span<const double>(onefold_->e_hat) : effects_.e_hat;
  const double* x = census_.data().data();

  for (std::size_t d = 0; d < layout.num_areas(); ++d) {
    double u = 0.0;
    if (kind == EstimatorKind::ELL) {
      u = drawer.area(d, effects_.u_hat);
    } else if (!onefold) {
      u = effects_.u_hat[effects_.area_slot(d)];
    }
    const std::span<const double> v_pool =
        onefold ? std::span<const double>(onefold_->u_hat)
                : (options_.subarea_pool == SubareaPool::PerArea ? std::span<const double>(area_v_pool_[d])
                                                                 : std::span<const double>(effects_.v_hat));
    for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
      const std::size_t s = layout.subarea_index(d, j);
      double v;
      if (kind == EstimatorKind::MELL2 && index_.is_sampled_subarea(s)) {
        v = effects_.v_hat[effects_.subarea_slot(s)];
      } else {
        v = drawer.subarea(s, v_pool);
      }
      const double shift = u + v;
      drawer.begin_units(s);
      const std::size_t end = layout.unit_offset(s + 1);
      if (redraw_beta) {
        for (std::size_t i = layout.unit_offset(s); i < end; ++i) {
          const double* xi = x + i * p;
          double eta = 0.0;
          for (std::size_t c = 0; c < p; ++c) eta += xi[c] * beta[static_cast<Eigen::Index>(c)];
          sink.unit(i, eta + shift + drawer.unit(i, e_pool));
        }
      } else {
        for (std::size_t i = layout.unit_offset(s); i < end; ++i) {
          sink.unit(i, eta_hat_[i] + shift + drawer.unit(i, e_pool));
        }
      }
      sink.end_subarea(s);
    }
    sink.end_area(d);
  }
}

CensusRun CensusSimulator::simulate(EstimatorKind kind, std::span<const FgtParams> params, std::size_t censuses,
                                    const RngStream& rng) const {
  if (censuses == 0) throw InvalidInput("census count B must be at least 1");
  if (params.empty()) throw InvalidInput("at least one FGT parameter set is required");
  check_supported(kind);
  const auto& layout = census_.layout();
  const FgtEvaluator eval(params);
  CensusRun run(params.size(), censuses, layout.num_areas(), layout.total_subareas());
  parallel_for(censuses, options_.workers, [&](std::size_t b) {
    RngDrawer drawer(rng.substream(b), &*beta_factor_, fit_.beta_hat);
    FgtSink sink(eval, layout, run, b);
    run_census(kind, drawer, sink);
  });
  return run;
}

CensusRun CensusSimulator::simulate(EstimatorKind kind, std::span<const FgtParams> params,
                                    std::span<const CensusDraw> draws) const {
  if (draws.empty()) throw InvalidInput("census count B must be at least 1");
  if (params.empty()) throw InvalidInput("at least one FGT parameter set is required");
  check_supported(kind);
  const auto& layout = census_.layout();
  const FgtEvaluator eval(params);
  CensusRun run(params.size(), draws.size(), layout.num_areas(), layout.total_subareas());
  for (std::size_t b = 0; b < draws.size(); ++b) {
    FixedDrawer drawer(draws[b]);
    FgtSink sink(eval, layout, run, b);
    run_census(kind, drawer, sink);
  }
  return run;
}

std::vector<double> CensusSimulator::simulated_values(EstimatorKind kind, std::size_t b,
                                                      const RngStream& rng) const {
  check_supported(kind);
  RngDrawer drawer(rng.substream(b), &*beta_factor_, fit_.beta_hat);
  ValueSink sink(census_.layout().total_units());
  run_census(kind, drawer, sink);
  return std::move(sink.values);
}

FgtEstimates run_estimator(EstimatorKind kind, const CensusSimulator& simulator, std::span<const FgtParams> params,
                           std::size_t censuses, const RngStream& rng) {
  return summarize(kind, params, simulator.simulate(kind, params, censuses, rng));
}

void write_census_run_csv(std::ostream& out, EstimatorKind kind, std::span<const FgtParams> params,
                          const CensusRun& run, const PopulationLayout& layout) {
  out << "kind,alpha,b,d,j,value\n";
  for (std::size_t a = 0; a < run.alphas(); ++a) {
    for (std::size_t b = 0; b < run.censuses(); ++b) {
      for (std::size_t d = 0; d < layout.num_areas(); ++d) {
        out << to_string(kind) << ',' << params[a].alpha() << ',' << b + 1 << ',' << d + 1 << ",,"
            << csv::format_double(run.area(a, b, d)) << '\n';
        for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
          out << to_string(kind) << ',' << params[a].alpha() << ',' << b + 1 << ',' << d + 1 << ',' << j + 1 << ','
              << csv::format_double(run.subarea(a, b, layout.subarea_index(d, j))) << '\n';
        }
      }
    }
  }
}

}  // namespace sae
