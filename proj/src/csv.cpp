#include "conelab/csv.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "conelab/errors.hpp"

namespace conelab {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const nlohmann::json& config) {
    static constexpr char digits[] = "0123456789abcdef";
    std::uint64_t h = fnv1a64(config.dump());
    std::string out(16, '0');
    for (int k = 15; k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header, std::string hash)
    : out_(out), header_(std::move(header)), hash_(std::move(hash)) {
    out_ << kCsvVersionLine << '\n';
    for (const auto& h : header_) out_ << h << ',';
    out_ << "config_hash\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) {
        throw DomainError("CsvWriter: row width does not match the header");
    }
    for (const auto& c : cells) {
        if (c.find_first_of(",\n") != std::string::npos) {
            throw DomainError("CsvWriter: cell contains a separator: " + c);
        }
        out_ << c << ',';
    }
    out_ << hash_ << '\n';
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

} // namespace conelab
