#pragma once

// JSON documents for sequences and feasible sets. Reals in sequence files are
// hex-float strings ("%a"), so a save/load round trip is bit-exact.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dynregret/losses.hpp"

namespace dynregret {

using Json = nlohmann::json;

std::string hex_float(double v);
/// Accepts a JSON number, a hex-float string or a decimal string.
double parse_real(const Json& j, const char* what);
Vector parse_vector(const Json& j, const char* what);
Json vector_to_hex(const Vector& v);

Json feasible_set_to_json(const FeasibleSet& set);
FeasibleSet feasible_set_from_json(const Json& j);

Json sequence_to_json(const FunctionSequence& seq);
FunctionSequence sequence_from_json(const Json& j);

void save_sequence_json(const FunctionSequence& seq, const std::filesystem::path& path);
FunctionSequence load_sequence_json(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Parses TOML (the subset used by configs: tables, arrays of tables,
/// strings, numbers, booleans, arrays, inline tables) into JSON.
Json parse_toml(const std::string& text);

/// Chooses TOML or JSON by extension (.toml, otherwise JSON).
Json load_document(const std::filesystem::path& path);

}  // namespace dynregret
