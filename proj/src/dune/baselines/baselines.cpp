// SPDX-License-Identifier: Apache-2.0
#include "dune/baselines/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "dune/common/error.hpp"
#include "dune/forecast/regrid.hpp"

namespace dune::baselines {

std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::persist_prior_step: return "persistence_prior_step";
    case BaselineKind::persist_prior_year: return "persistence_prior_year";
    case BaselineKind::climatology: return "climatology";
    case BaselineKind::mlr: return "mlr";
  }
  return "?";
}

BaselineKind parse_baseline_kind(std::string_view t) {
  if (t == "persistence_prior_step" || t == "pm" || t == "ps") return BaselineKind::persist_prior_step;
  if (t == "persistence_prior_year" || t == "pysm" || t == "pyss") return BaselineKind::persist_prior_year;
  if (t == "climatology") return BaselineKind::climatology;
  if (t == "mlr") return BaselineKind::mlr;
  throw UsageError("unknown baseline '" + std::string(t) +
                   "' (persistence_prior_step, persistence_prior_year, climatology, mlr)");
}

Field persistence_forecast(BaselineKind kind, const AnomalySeries& history, const Stamp& target) {
  Stamp source;
  if (kind == BaselineKind::persist_prior_step)
    source = target.prev();
  else if (kind == BaselineKind::persist_prior_year)
    source = target.prev(slots_per_year(target.kind));
  else
    throw UsageError("persistence_forecast needs a persistence baseline kind");
  auto it = history.find(source);
  if (it == history.end()) throw DataError("persistence for " + target.str() + " needs " + source.str());
  Field f = it->second;
  f.stamp = target;
  return f;
}

Field climatology_forecast(const GridPtr& grid, const Stamp& target) {
  return Field(Variable::blended_t, target, grid, 0.0f);
}

std::vector<double> MlrModel::design_row(double prior, const Stamp& target) {
  if (target.kind == PeriodKind::annual) return {1.0, prior};
  const double angle = 2.0 * std::numbers::pi * target.slot_index() / slots_per_year(target.kind);
  return {1.0, prior, std::sin(angle), std::cos(angle)};
}

MlrModel MlrModel::fit(const AnomalySeries& series, std::span<const Stamp> targets) {
  std::vector<std::pair<const Field*, const Field*>> rows;
  std::vector<Stamp> stamps;
  for (const auto& t : targets) {
    auto y = series.find(t), x = series.find(t.prev());
    if (y == series.end() || x == series.end()) continue;
    rows.emplace_back(&x->second, &y->second);
    stamps.push_back(t);
  }
  if (rows.empty()) throw DataError("MLR fit has no (prior, target) pairs");
  MlrModel m;
  m.kind_ = stamps.front().kind;
  m.grid_ = rows.front().second->grid;
  m.predictors_ = m.kind_ == PeriodKind::annual ? 2 : 4;
  const auto p = static_cast<Eigen::Index>(m.predictors_);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const std::size_t cells = m.grid_->size();
  m.coef_.assign(cells * m.predictors_, 0.0);
  m.fallback_.assign(cells, 0);

  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = design_row(0.0, stamps[r]);
    for (Eigen::Index c = 0; c < p; ++c) X(r, c) = row[c];
  }
  for (std::size_t k = 0; k < cells; ++k) {
    for (Eigen::Index r = 0; r < n; ++r) {
      X(r, 1) = rows[r].first->values[k];
      y(r) = rows[r].second->values[k];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p) {
      m.fallback_[k] = 1;
      ++m.fallback_count_;
      continue;
    }
    const Eigen::VectorXd b = qr.solve(y);
    for (Eigen::Index c = 0; c < p; ++c) m.coef_[k * m.predictors_ + c] = b(c);
  }
  return m;
}

std::span<const double> MlrModel::coefficients(std::size_t k) const {
  return {coef_.data() + k * predictors_, static_cast<std::size_t>(predictors_)};
}

Field MlrModel::forecast(const Field& prior, const Stamp& target) const {
  if (target.kind != kind_) throw DataError("MLR model kind does not match the target period");
  if (!(*prior.grid == *grid_)) throw DataError("MLR prior anomaly is on a different grid");
  Field out(Variable::blended_t, target, grid_, 0.0f);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (fallback_[k]) continue;
    const auto row = design_row(prior.values[k], target);
    double v = 0;
    for (int c = 0; c < predictors_; ++c) v += coef_[k * predictors_ + c] * row[c];
    out.values[k] = static_cast<float>(v);
  }
  return out;
}

int coarse_factor(const GridSpec& grid, double target_degrees) {
  int f = std::max(1, static_cast<int>(std::lround(target_degrees / grid.resolution())));
  while (f > 1 && !(grid.n_lat() % f == 0 && grid.n_lon() % f == 0)) --f;
  return f;
}

CoarseMlr CoarseMlr::fit(const AnomalySeries& fine, std::span<const Stamp> targets, int factor) {
  if (fine.empty()) throw DataError("MLR needs a non-empty anomaly series");
  CoarseMlr c;
  c.factor = factor;
  c.fine = fine.begin()->second.grid;
  c.coarse = make_grid(c.fine->coarsened(static_cast<std::size_t>(factor)));
  AnomalySeries coarse;
  for (const auto& [s, f] : fine) coarse.emplace(s, dune::forecast::block_mean(f, factor, c.coarse));
  c.model = MlrModel::fit(coarse, targets);
  return c;
}

Field CoarseMlr::forecast(const AnomalySeries& series, const Stamp& target) const {
  auto it = series.find(target.prev());
  if (it == series.end()) throw DataError("MLR forecast for " + target.str() + " needs " + target.prev().str());
  const Field prior = dune::forecast::block_mean(it->second, factor, coarse);
  Field out = model.forecast(prior, target);
  if (factor == 1) return out;
  return dune::forecast::bilinear_regrid(out, fine);
}

}  // namespace dune::baselines
