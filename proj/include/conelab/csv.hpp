#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace conelab {

inline constexpr std::string_view kCsvVersionLine = "# conelab-csv v1";

std::uint64_t fnv1a64(std::string_view bytes);
/// 16 hex digits of the FNV-1a hash of the compact JSON dump (keys sorted).
std::string config_hash(const nlohmann::json& config);

/// Shortest round-trip decimal form.
std::string format_number(double value);

/// Comma-separated, LF line ends, version comment line then header row.
/// A trailing `config_hash` column is appended to every row.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header, std::string hash);
    void row(const std::vector<std::string>& cells);
    std::size_t columns() const { return header_.size(); }

private:
    std::ostream& out_;
    std::vector<std::string> header_;
    std::string hash_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Reads a file written by CsvWriter (comment lines skipped).
CsvTable read_csv(std::istream& in);

} // namespace conelab
