#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace erl::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kComputationError = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kScenarioFailed = 3;

using Cell = std::variant<long long, double, bool, std::string>;

// Shortest round-trip text for numbers, so CSV is bit-stable and re-reads
// to the same text.
std::string format_cell(const Cell& cell);
Cell parse_cell(const std::string& text);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string to_csv(const Table& table);
Table from_csv(const std::string& text);
nlohmann::json to_json(const std::string& command, const Table& table);
Table table_from_json(const nlohmann::json& j);

// Markdown summary that depends only on the command name and the table.
std::string make_report(const std::string& command, const Table& table);

// Runs one command from its effective JSON config.
Table run_command(const std::string& command, const nlohmann::json& config, std::size_t jobs);

// Parses argv (argv[0] is the program name), runs the command, writes the run
// directory and returns the exit status.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace erl::cli
