#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtk::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigEntry {
    std::string value;
    int line = 0;
};

// key=value lines, optional [section] headers, '#' or ';' comments. Keys inside a
// section are stored as "section.key".
struct RawConfig {
    std::map<std::string, ConfigEntry> entries;
    std::string text;
};

RawConfig parse_raw(const std::string& text);

enum class ValueType { Int, UInt64, Double, DoubleList, IntList, String };

struct KeySpec {
    std::string name;
    ValueType type;
    std::optional<std::string> fallback;  // absent: the key is required
    std::string section;                  // section the key may also appear under
};

// Typed and resolved configuration of one job.
class JobConfig {
public:
    std::string subcommand;
    std::map<std::string, std::string> resolved;  // every schema key, after defaults
    std::string text;                             // original config text

    double number(const std::string& key) const;
    long long integer(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<long long> integers(const std::string& key) const;
    const std::string& string(const std::string& key) const;
};

const std::vector<std::string>& subcommands();
const std::vector<KeySpec>& schema(const std::string& subcommand);

// Validates against the subcommand schema: unknown keys, missing keys and type
// mismatches raise ConfigError with the line number. Overrides (command-line values)
// replace or supply keys after the file is read.
JobConfig parse_config(const std::string& subcommand, const std::string& text,
                       const std::map<std::string, std::string>& overrides = {});

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string format_double(double x);
std::string csv_escape(const std::string& field);
std::string to_csv(const CsvTable& t);
// Git blob object id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_sha1(const std::string& content);

CsvTable run_job(const JobConfig& cfg, int threads);

// Full command line entry point. Returns 0, 2 (configuration error) or 3 (numerical failure).
int main_entry(int argc, char** argv);

}  // namespace qtk::cli
