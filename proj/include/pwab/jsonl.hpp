#pragma once
// Line-delimited JSON helpers.

#include <pwab/error.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pwab::jsonl {

// Calls `on_record` for every non-blank line. Parse failures become
// ParseError carrying the 1-based line number; exceptions thrown by the
// callback are rethrown as ParseError with the line number prepended.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const nlohmann::json&, std::size_t line)>& on_record);

std::vector<nlohmann::json> read_all(const std::filesystem::path& path);

// One compact object per line, '\n' terminated.
std::string dump_lines(const std::vector<nlohmann::json>& records);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace pwab::jsonl
