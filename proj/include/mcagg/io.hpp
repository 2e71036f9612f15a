#pragma once

// File formats: transition matrices (csv, json), letter-bigram counts,
// partition files keyed by k, aggregated models and selection reports.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcagg/annealer.hpp"
#include "mcagg/core.hpp"
#include "mcagg/selection.hpp"

namespace mcagg {

enum class Format { Csv, Json };

Format parse_format(std::string_view name);
std::string_view to_string(Format f);

/// Reads a file into memory; IoError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// csv: N lines of N comma-separated reals, optionally preceded by a line of
/// labels. json: {"labels": [...], "matrix": [[...], ...]}. Rows are checked
/// at tolerance 1e-6 and then renormalized.
StochasticMatrix parse_matrix_text(std::string_view text, Format format);
StochasticMatrix parse_matrix(const std::filesystem::path& path, Format format);

/// 17 significant digits, so values round-trip exactly.
std::string format_matrix(const StochasticMatrix& pi, Format format);
void write_matrix(const StochasticMatrix& pi, const std::filesystem::path& path, Format format);

/// Letter-bigram counts ("th 123" per line, case-folded) into a 26-state
/// chain labelled a..z; every cell gets eta added before row normalization.
StochasticMatrix ingest_bigrams_text(std::string_view text, double eta = 1.0);
StochasticMatrix ingest_bigrams(const std::filesystem::path& path, double eta = 1.0);

/// {"k": [assignment...]} or {"k": [["a", "e"], ["b", ...]]}; label sets are
/// resolved against labels and must cover each label exactly once.
std::map<std::size_t, Partition> parse_partitions_text(std::string_view text, std::size_t n,
                                                       const std::vector<std::string>& labels = {});
std::map<std::size_t, Partition> parse_partitions(const std::filesystem::path& path, std::size_t n,
                                                  const std::vector<std::string>& labels = {});

std::string format_partitions(const std::map<std::size_t, Partition>& partitions);
void write_partitions(const std::map<std::size_t, Partition>& partitions, const std::filesystem::path& path);

/// Aggregated models of an annealing run as json, keyed by k.
std::string format_models(const std::vector<AnnealEntry>& entries, const std::vector<std::string>& labels = {});

struct ReportMeta {
  std::string input_hash;
  std::vector<std::pair<std::string, std::string>> options;
};

/// csv: '#' metadata lines, then "k,t_bar,nu" rows with 12 decimals and an
/// empty nu for the first k. json: full precision, per-superstate values,
/// options and k_t; infinities as the string "inf".
std::string format_report(const SelectionReport& report, const ReportMeta& meta, Format format);
void write_report(const SelectionReport& report, const ReportMeta& meta, const std::filesystem::path& path,
                  Format format);

/// Inverse of the json report format.
SelectionReport parse_report_json(std::string_view text, ReportMeta* meta = nullptr);

}  // namespace mcagg
