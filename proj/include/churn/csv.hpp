#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace churn {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a UTF-8 CSV with a header row. Handles double-quoted fields and CRLF.
CsvTable read_csv(const std::filesystem::path& path);

// Writes rows as-is; fields containing commas or quotes get quoted.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace churn
