#pragma once

#include "threatgeo/analytics.hpp"
#include "threatgeo/spread.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace threatgeo::report {

/// Square matrix with row/column names; std::nullopt marks an Undefined cell.
struct NamedMatrix {
	std::vector<std::string> names;
	std::vector<std::vector<std::optional<double>>> values;
};

/// Deterministic SVG: one rect per cell, gray level proportional to |value|
/// (0 white, 1 black), Undefined cells hatched, names on both axes.
std::string svg_heatmap(const NamedMatrix &matrix);
void emit_svg_heatmap(const NamedMatrix &matrix, const std::filesystem::path &path);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

std::string counts_json(const analytics::CountryCounts &counts, std::size_t top);
std::string counts_csv(const analytics::CountryCounts &counts, std::size_t top);
std::string cumulative_json(const std::vector<std::pair<std::string, double>> &share);
std::string cumulative_csv(const std::vector<std::pair<std::string, double>> &share);
std::string pairs_json(const analytics::PairCounts &pairs);
std::string pairs_csv(const analytics::PairCounts &pairs);
std::string ranking_json(const analytics::Ranking &ranking, std::string_view key);
std::string transitions_json(const std::map<std::string, spread::TransitionMatrix> &groups);

} // namespace threatgeo::report
