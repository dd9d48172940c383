#include "mgt/bridge.hpp"

#include <fmt/format.h>

#include <fstream>

#include "mgt/backend.hpp"
#include "mgt/error.hpp"

namespace mgt::bridge {

using nlohmann::json;

namespace {

constexpr std::string_view kText =
    "The school announced the new program on Monday. Many students opposed the recent change, and the teacher "
    "reviewed the plan.";

std::string request(const json& id, std::string_view kind, json payload) {
  return json{{"v", backend::kProtocolVersion}, {"id", id}, {"kind", kind}, {"payload", std::move(payload)}}.dump();
}

std::string type_name(const json& v) {
  if (v.is_number()) return "number";
  return v.type_name();
}

}  // namespace

std::vector<std::string> conformance_requests() {
  const std::string text(kText);
  return {
      request(1, "score", {{"text", text}}),
      request(2, "score", {{"text", "Hi"}}),
      request(3, "generate", {{"prompt", "The school announced"}, {"max_tokens", 12}, {"min_tokens", 4}, {"seed", 7}}),
      request(4, "generate",
              {{"prompt", "Many students"}, {"max_tokens", 8}, {"temperature", 0.7}, {"top_p", 0.9}, {"seed", 8}}),
      request(5, "mask_fill", {{"text", text}, {"spans", json::array({json::array({1, 3}), json::array({6, 7})})}, {"seed", 3}}),
      request(6, "paraphrase", {{"text", "The teacher reviewed the plan."}, {"lex_diversity", 60}, {"order_diversity", 0}, {"seed", 5}}),
      request(7, "paraphrase", {{"text", text}, {"lex_diversity", 100}, {"order_diversity", 100}, {"seed", 9}}),
      request(8, "synonyms", {{"sentence", text}, {"word", "announced"}, {"k", 3}}),
      request(9, "synonyms", {{"sentence", text}, {"rate", 0.5}, {"seed", 11}}),
      request("text-id", "score", {{"text", "Many students opposed the recent change."}}),
      request(10, "translate", {{"text", text}}),
      request(11, "score", json::object()),
      request(12, "mask_fill", {{"text", text}, {"spans", json::array({json::array({3, 2})})}, {"seed", 1}}),
      json{{"v", 99}, {"id", 13}, {"kind", "score"}, {"payload", {{"text", text}}}}.dump(),
      "{\"v\": 1, \"id\": 14, \"kind\": \"score\"",
      "[1, 2, 3]",
  };
}

std::vector<Exchange> record(const LineChannel& channel, const std::vector<std::string>& requests) {
  std::vector<Exchange> out;
  for (const auto& r : requests) {
    Exchange e;
    e.request = r;
    try {
      e.response = json::parse(channel(r));
    } catch (const json::parse_error& err) {
      throw BackendError(fmt::format("reference backend sent a malformed response: {}", err.what()));
    }
    out.push_back(std::move(e));
  }
  return out;
}

void save_transcript(const std::filesystem::path& path, const std::vector<Exchange>& transcript) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  for (const auto& e : transcript) out << json{{"request", e.request}, {"response", e.response}}.dump() << '\n';
}

std::vector<Exchange> load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open transcript {}", path.string()));
  std::vector<Exchange> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Exchange e;
      e.request = j.at("request").get<std::string>();
      e.response = j.at("response");
      out.push_back(std::move(e));
    } catch (const json::exception& err) {
      throw DataError(fmt::format("{}:{}: bad transcript entry: {}", path.string(), line_no, err.what()));
    }
  }
  return out;
}

void compare_shape(const json& expected, const json& actual, const std::string& path, std::vector<std::string>& problems) {
  if (type_name(expected) != type_name(actual)) {
    problems.push_back(fmt::format("{}: expected {}, got {}", path, type_name(expected), type_name(actual)));
    return;
  }
  if (expected.is_object()) {
    for (const auto& [k, v] : expected.items()) {
      if (!actual.contains(k)) problems.push_back(fmt::format("{}.{}: missing", path, k));
      else compare_shape(v, actual.at(k), path + "." + k, problems);
    }
    for (const auto& [k, v] : actual.items()) {
      if (!expected.contains(k)) problems.push_back(fmt::format("{}.{}: unexpected field", path, k));
    }
  } else if (expected.is_array() && !expected.empty()) {
    for (std::size_t i = 0; i < actual.size(); ++i) {
      compare_shape(expected.front(), actual[i], fmt::format("{}[{}]", path, i), problems);
    }
  }
}

std::vector<std::string> check(const std::vector<Exchange>& transcript, const LineChannel& channel, CheckMode mode) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    const auto& e = transcript[i];
    const std::string where = fmt::format("exchange {}", i + 1);
    json actual;
    try {
      actual = json::parse(channel(e.request));
    } catch (const json::parse_error&) {
      problems.push_back(fmt::format("{}: response is not JSON", where));
      continue;
    } catch (const BackendError& err) {
      problems.push_back(fmt::format("{}: {}", where, err.what()));
      break;
    }
    if (mode == CheckMode::strict) {
      if (actual != e.response) problems.push_back(fmt::format("{}: expected {}, got {}", where, e.response.dump(), actual.dump()));
      continue;
    }
    if (!actual.is_object()) {
      problems.push_back(fmt::format("{}: response is not an object", where));
      continue;
    }
    for (const char* key : {"v", "id", "ok"}) {
      if (actual.value(key, json()) != e.response.value(key, json())) {
        problems.push_back(fmt::format("{}: field '{}' is {}, expected {}", where, key, actual.value(key, json()).dump(),
                                       e.response.value(key, json()).dump()));
      }
    }
    if (e.response.value("ok", false)) {
      if (!actual.contains("result")) problems.push_back(fmt::format("{}: missing result", where));
      else compare_shape(e.response.at("result"), actual.at("result"), where + " result", problems);
    } else if (!actual.contains("error") || !actual.at("error").is_string()) {
      problems.push_back(fmt::format("{}: failed response lacks an error string", where));
    }
  }
  return problems;
}

}  // namespace mgt::bridge
