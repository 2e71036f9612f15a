#pragma once

// Aggregate then select: one annealing sweep, per-k runs for any k the sweep
// skipped, then model-order selection over the consecutive range from 1.

#include <map>
#include <vector>

#include "mcagg/annealer.hpp"
#include "mcagg/selection.hpp"

namespace mcagg {

struct PipelineResult {
  std::vector<AnnealEntry> entries;  // consecutive k from 1
  std::map<std::size_t, Partition> partitions;
  SelectionReport report;
  AnnealResult sweep;
};

/// Entries from anneal, with gaps below the largest recorded k filled by
/// anneal_per_k. The consecutive prefix starting at 1 is kept.
std::vector<AnnealEntry> aggregate(const StochasticMatrix& pi, const StateWeights& rho, const AnnealConfig& cfg,
                                   AnnealResult* sweep = nullptr);

PipelineResult run_pipeline(const StochasticMatrix& pi, const StateWeights& rho, const AnnealConfig& cfg,
                            const SelectionOptions& options = {});

}  // namespace mcagg
