#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgt/synonyms.hpp"
#include "mgt/toylm.hpp"

namespace mgt::backend {

inline constexpr int kProtocolVersion = 1;

enum class Kind { score, generate, mask_fill, paraphrase, synonyms };

Kind parse_kind(std::string_view s);
std::string_view to_string(Kind kind);

struct Request {
  nlohmann::json id;
  Kind kind = Kind::score;
  nlohmann::json payload = nlohmann::json::object();
};

struct Response {
  nlohmann::json id;
  bool ok = false;
  nlohmann::json result;  // set when ok
  std::string error;      // set when !ok
};

nlohmann::json to_json(const Request& request);
nlohmann::json to_json(const Response& response);
/// Throws DataError with a diagnostic when the line is not a valid request.
Request parse_request(std::string_view line);
/// Throws BackendError when the line is not a valid response.
Response parse_response(std::string_view line);

struct Substitution {
  std::size_t index = 0;  // whitespace-word index in the sentence
  std::string replacement;
};

/// One connection to a scorer/generator. Handles are strictly serial and
/// must not be shared across threads.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Response dispatch(const Request& request) = 0;

  /// Typed calls; a response with ok=false raises BackendError.
  toylm::ScoreResult score(std::string_view text);
  toylm::GenerationResult generate(std::string_view prompt, const toylm::SamplingConfig& sampling, std::uint64_t seed);
  std::string mask_fill(std::string_view text, const std::vector<std::pair<std::size_t, std::size_t>>& spans,
                        std::uint64_t seed);
  std::string paraphrase(std::string_view text, double lex_diversity, double order_diversity, std::uint64_t seed);
  std::vector<std::string> synonyms(std::string_view sentence, std::string_view word, std::size_t k);
  /// Lets the backend pick which words of `sentence` to replace.
  std::vector<Substitution> select_substitutions(std::string_view sentence, double rate, std::uint64_t seed);

 protected:
  nlohmann::json call(Kind kind, nlohmann::json payload);

 private:
  std::uint64_t next_id_ = 1;
};

enum class ParaphraseMode { toy, echo };

/// In-process backend over the n-gram model and the bundled dictionary.
class ToyBackend final : public Backend {
 public:
  ToyBackend(const toylm::NGramModel& model, const attacks::SynonymDictionary& dictionary,
             ParaphraseMode mode = ParaphraseMode::toy);
  Response dispatch(const Request& request) override;

 private:
  nlohmann::json handle(const Request& request) const;

  const toylm::NGramModel& model_;
  const attacks::SynonymDictionary& dictionary_;
  ParaphraseMode mode_;
};

/// Child process speaking the wire protocol on its stdin/stdout.
class ExternalBackend final : public Backend {
 public:
  explicit ExternalBackend(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(120));
  ~ExternalBackend() override;
  ExternalBackend(const ExternalBackend&) = delete;
  ExternalBackend& operator=(const ExternalBackend&) = delete;

  Response dispatch(const Request& request) override;
  /// Sends one raw line and returns the raw response line.
  std::string exchange(std::string_view request_line);

 private:
  std::string read_line();
  void shutdown();

  std::string command_;
  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

using BackendFactory = std::function<std::unique_ptr<Backend>()>;

/// Response line (no newline) for one request line; never throws on bad input.
std::string handle_line(Backend& backend, std::string_view line);

/// Answers requests line by line until end of input. Malformed lines get
/// ok=false responses; the loop never stops on a bad request.
void serve(Backend& backend, std::istream& in, std::ostream& out);

}  // namespace mgt::backend
