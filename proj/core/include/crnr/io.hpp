#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crnr/classify.hpp"
#include "crnr/geometry.hpp"
#include "crnr/numrange.hpp"
#include "crnr/signal.hpp"

namespace crnr::io {

using nlohmann::json;

// Signal: {"T", "K", "samples": [[re, im], ...] t-major, "meta": {...}}.
// A noiseless snr_db is written as the string "inf".
json to_json(const Signal& signal);
Signal signal_from_json(const json& doc);

// CandidateClass: {"name", "freqs": [[re, im], ...]}.
json to_json(const CandidateClass& cls);
CandidateClass class_from_json(const json& doc);

/// Parses text, mapping syntax errors and field errors to SchemaError with
/// a line number and the offending field.
Signal parse_signal(const std::string& text);
CandidateClass parse_class(const std::string& text);

Signal load_signal(const std::filesystem::path& path);
CandidateClass load_class(const std::filesystem::path& path);
void save_signal(const Signal& signal, const std::filesystem::path& path);
void save_class(const CandidateClass& cls, const std::filesystem::path& path);

json to_json(const MembershipResult& r);
json to_json(const ClassDecision& d);
json to_json(const SweepReport& report);
json to_json(const GridField& field);
json to_json(const Polygon& polygon);

/// Columns: snr_db,method,error_rate,disk_center_re,disk_center_im,disk_radius,variant.
/// Error-rate rows leave the disk columns empty and vice versa.
std::string report_csv(const SweepReport& report);
/// Columns: re,im,value.
std::string grid_csv(const GridField& field);
/// Columns: re,im (vertex order).
std::string polygon_csv(const Polygon& polygon);
/// Columns: index,sigma.
std::string singular_values_csv(const RVector& sv);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace crnr::io
