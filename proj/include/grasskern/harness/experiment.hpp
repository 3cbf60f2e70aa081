#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "grasskern/harness/config.hpp"
#include "grasskern/harness/dataset.hpp"

namespace grasskern::harness {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

struct Report {
  std::string document;  // JSON report (the dataset file itself for `generate`)
  std::string table;     // aligned plain-text summary
  std::vector<std::pair<std::string, std::string>> attachments;  // (file suffix, content)
  int exit_code = 0;     // 1 when a pd-check or counterexample assertion fails
};

/// Runs `config.task`. Per-kernel failures are recorded in the report next
/// to the kernel that caused them; input problems (bad dataset, unknown
/// kernel record, missing labels) throw.
Report run_experiment(const ExperimentConfig& config);

/// <out>, <out>.txt and <out>.<suffix> for every attachment.
void write_report(const Report& report, const std::string& out);

Dataset load_or_generate(const ExperimentConfig& config);

/// The config's kernel records for subspace dimension p, or the task
/// default when none are given.
std::vector<KernelSpec> resolve_kernels(const ExperimentConfig& config, Eigen::Index p, std::string_view task);

/// Mixes several integers into one 64-bit seed (std::seed_seq based).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace grasskern::harness
