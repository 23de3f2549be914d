#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "blochwave/modes.hpp"

namespace blochwave::io {

/// Raw little-endian array: two float64 per sample (re, im), row-major.
void write_complex_array(const std::string& path,
                         const std::vector<cdouble>& data);
std::vector<cdouble> read_complex_array(const std::string& path);

void write_text(const std::string& path, const std::string& content);
void write_json(const std::string& path, const nlohmann::json& j);

/// CSV with a '#'-prefixed metadata block followed by a header line.
void write_csv(const std::string& path,
               const std::vector<std::string>& metadata,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

nlohmann::json sigma_to_json(const SigmaPoint& s);
nlohmann::json certificate_to_json(const ClosureCertificate& cert);

/// FNV-1a hash of a canonical JSON dump, as hex (provenance chain).
std::string json_hash(const nlohmann::json& j);

void ensure_directory(const std::string& path);

}  // namespace blochwave::io
