#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mgt::bridge {

/// One request line and the response it drew from the reference backend.
struct Exchange {
  std::string request;  // raw line, possibly malformed on purpose
  nlohmann::json response;
};

/// Sends a raw request line, returns the raw response line.
using LineChannel = std::function<std::string(std::string_view)>;

/// Fixed request set covering every request kind, optional fields, and
/// malformed input.
std::vector<std::string> conformance_requests();

std::vector<Exchange> record(const LineChannel& channel, const std::vector<std::string>& requests);
void save_transcript(const std::filesystem::path& path, const std::vector<Exchange>& transcript);
std::vector<Exchange> load_transcript(const std::filesystem::path& path);

/// strict: responses must equal the transcript exactly.
/// shape: same version, id and ok flag; results must have the same keys and
/// value types, recursively; error texts are not compared.
enum class CheckMode { strict, shape };

/// Replays the transcript and returns one message per mismatch.
std::vector<std::string> check(const std::vector<Exchange>& transcript, const LineChannel& channel, CheckMode mode);

/// Shape mismatches between two JSON values, prefixed with `path`.
void compare_shape(const nlohmann::json& expected, const nlohmann::json& actual, const std::string& path,
                   std::vector<std::string>& problems);

}  // namespace mgt::bridge
