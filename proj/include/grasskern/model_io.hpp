#pragma once

// Plain-text model artifacts. The first line names the artifact type and
// format version ("grasskern-svm-model 1", "grasskern-hash-family 1"); the
// rest are `key = value` lines with doubles printed to 17 significant
// digits and subspace bases written column-major.
//
// The per-sample alphas of an SvmModel are training diagnostics and are not
// stored.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grasskern/machines/klsh.hpp"
#include "grasskern/machines/svm.hpp"

namespace grasskern {

std::string serialize_svm(const machines::SvmModel& model);
machines::SvmModel parse_svm(std::string_view text);

std::string serialize_hash_family(const machines::HashFamily& family);
machines::HashFamily parse_hash_family(std::string_view text);

/// One hex key per line.
std::string serialize_hash_keys(std::span<const machines::HashKey> keys);
std::vector<machines::HashKey> parse_hash_keys(std::string_view text, int bits);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace grasskern
