#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  Parse,
  Schema,
  Checksum,
  Network,
  Auth,
  NotFound,
  RateLimited,
  Numeric,
  Runtime,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &message);

using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DDTHH:MM:SSZ` (fractional seconds and numeric offsets are
/// accepted and folded into UTC). Throws Error{Parse} on anything else.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

double hours_between(Timestamp from, Timestamp to);
double days_between(Timestamp from, Timestamp to);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path &path);

std::string read_file(const std::filesystem::path &path);
/// Writes via a sibling temporary file and rename, so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path &path, std::string_view bytes);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);

/// Number of Unicode code points in a UTF-8 string (invalid bytes count as one).
std::size_t utf8_length(std::string_view s);

/// RFC 4180 style: comma separated, double-quoted fields may hold commas,
/// quotes ("") and newlines. Blank lines are skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

/// SplitMix64 step, used to derive independent child seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace triage
