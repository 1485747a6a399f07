#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tailrisk/pipeline.hpp"

namespace tailrisk::io {

enum class Format { kAuto, kCsv, kJsonl };

/// One numeric column from an RFC-4180-style CSV (quoted fields, CRLF, an
/// optional header row). Non-numeric or non-finite entries raise DataError
/// with the 1-based line number.
std::vector<double> read_csv_column(std::istream& in, std::size_t column,
                                    const std::string& name);

/// One JSON number per line.
std::vector<double> read_jsonl(std::istream& in, const std::string& name);

/// Loads a file, dispatching on `format` (kAuto: by extension, defaulting
/// to CSV). Also returns the raw bytes' digest through `digest_out`.
std::vector<double> read_values(const std::string& path, Format format,
                                std::size_t column, std::string* digest_out);

std::string fnv1a64_hex(std::string_view bytes);

/// Shortest text keeping the double bit-exact on round trip (17 significant
/// digits).
std::string format_full(double v);

/// ISO-8601 UTC timestamp; honors SOURCE_DATE_EPOCH for reproducible runs.
std::string utc_timestamp();

/// Fixed field order, 17-significant-digit numbers, two-space indent: the
/// golden-file contract for reports.
void write_report_json(const pipeline::RiskReport& report, std::ostream& out);
std::string report_to_json(const pipeline::RiskReport& report);

pipeline::RiskReport read_report_json(std::istream& in);

}  // namespace tailrisk::io
