#include "mcagg/pipeline.hpp"

#include <algorithm>

namespace mcagg {

std::vector<AnnealEntry> aggregate(const StochasticMatrix& pi, const StateWeights& rho, const AnnealConfig& cfg,
                                   AnnealResult* sweep) {
  AnnealResult res = anneal(pi, rho, cfg);
  std::map<std::size_t, AnnealEntry> by_k;
  for (auto& e : res.entries) by_k.emplace(e.k, e);

  const std::size_t k_max = cfg.k_max == 0 ? pi.size() : cfg.k_max;
  // also fill up to the distinct count the sweep ended with, when it
  // stopped without recording that many superstates
  const std::size_t top = std::max(by_k.rbegin()->first, std::min(res.state.effective_count, k_max));
  std::vector<std::size_t> missing;
  for (std::size_t k = 1; k <= top; ++k) {
    if (!by_k.count(k)) missing.push_back(k);
  }
  if (!missing.empty()) {
    for (auto& e : anneal_per_k(pi, rho, cfg, missing)) by_k.emplace(e.k, std::move(e));
  }

  std::vector<AnnealEntry> out;
  for (auto& [k, e] : by_k) {
    if (k != out.size() + 1) break;
    out.push_back(std::move(e));
  }
  if (sweep) *sweep = std::move(res);
  return out;
}

PipelineResult run_pipeline(const StochasticMatrix& pi, const StateWeights& rho, const AnnealConfig& cfg,
                            const SelectionOptions& options) {
  PipelineResult out;
  out.entries = aggregate(pi, rho, cfg, &out.sweep);
  for (const auto& e : out.entries) out.partitions.emplace(e.k, e.partition);
  out.report = select_k(pi, out.partitions, rho, options);
  return out;
}

}  // namespace mcagg
