#include "mgt/backend.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <istream>
#include <ostream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "mgt/error.hpp"
#include "mgt/rng.hpp"
#include "mgt/text.hpp"

namespace mgt::backend {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Kind, std::string_view>, 5> kKinds{{
    {Kind::score, "score"},
    {Kind::generate, "generate"},
    {Kind::mask_fill, "mask_fill"},
    {Kind::paraphrase, "paraphrase"},
    {Kind::synonyms, "synonyms"},
}};

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(fmt::format("missing field '{}'", key));
  return *it;
}

std::string string_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_string()) throw DataError(fmt::format("field '{}' must be a string", key));
  return v.get<std::string>();
}

double number_field(const json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw DataError(fmt::format("field '{}' must be a number", key));
  return it->get<double>();
}

std::uint64_t unsigned_field(const json& obj, const char* key, std::uint64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned()) throw DataError(fmt::format("field '{}' must be a non-negative integer", key));
  return it->get<std::uint64_t>();
}

std::vector<std::pair<std::size_t, std::size_t>> spans_field(const json& obj) {
  const json& v = field(obj, "spans");
  if (!v.is_array()) throw DataError("field 'spans' must be an array");
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& s : v) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_unsigned() || !s[1].is_number_unsigned()) {
      throw DataError("each span must be a pair of non-negative integers");
    }
    spans.emplace_back(s[0].get<std::size_t>(), s[1].get<std::size_t>());
  }
  return spans;
}

bool valid_id(const json& id) { return id.is_string() || id.is_number_integer(); }

}  // namespace

Kind parse_kind(std::string_view s) {
  for (const auto& [k, name] : kKinds) {
    if (name == s) return k;
  }
  throw DataError(fmt::format("unknown request kind '{}'", s));
}

std::string_view to_string(Kind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

json to_json(const Request& r) {
  return json{{"v", kProtocolVersion}, {"id", r.id}, {"kind", std::string(to_string(r.kind))}, {"payload", r.payload}};
}

json to_json(const Response& r) {
  json j{{"v", kProtocolVersion}, {"id", r.id}, {"ok", r.ok}};
  if (r.ok) {
    j["result"] = r.result;
  } else {
    j["error"] = r.error;
  }
  return j;
}

Request parse_request(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("malformed request: {}", e.what()));
  }
  if (!j.is_object()) throw DataError("request must be an object");
  Request r;
  if (auto id = j.find("id"); id != j.end()) r.id = *id;
  if (!valid_id(r.id)) throw DataError("request id must be a string or an integer");
  auto v = j.find("v");
  if (v == j.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
    throw DataError(fmt::format("unsupported protocol version (expected v={})", kProtocolVersion));
  }
  r.kind = parse_kind(string_field(j, "kind"));
  const json& payload = field(j, "payload");
  if (!payload.is_object()) throw DataError("payload must be an object");
  r.payload = payload;
  return r;
}

Response parse_response(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw BackendError(fmt::format("malformed response: {}", e.what()));
  }
  if (!j.is_object()) throw BackendError("response must be an object");
  auto v = j.find("v");
  if (v == j.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
    throw BackendError("response has an unsupported protocol version");
  }
  Response r;
  if (auto id = j.find("id"); id != j.end()) r.id = *id;
  auto ok = j.find("ok");
  if (ok == j.end() || !ok->is_boolean()) throw BackendError("response lacks a boolean 'ok'");
  r.ok = ok->get<bool>();
  if (r.ok) {
    auto res = j.find("result");
    if (res == j.end() || !res->is_object()) throw BackendError("ok response lacks a result object");
    r.result = *res;
  } else {
    auto err = j.find("error");
    if (err == j.end() || !err->is_string()) throw BackendError("error response lacks an error string");
    r.error = err->get<std::string>();
  }
  return r;
}

json Backend::call(Kind kind, json payload) {
  Request req;
  req.id = next_id_++;
  req.kind = kind;
  req.payload = std::move(payload);
  Response resp = dispatch(req);
  if (resp.id != req.id) throw BackendError(fmt::format("response id {} does not match request id {}", resp.id.dump(), req.id.dump()));
  if (!resp.ok) throw BackendError(fmt::format("backend {} failed: {}", to_string(kind), resp.error));
  return std::move(resp.result);
}

namespace {

// Shape errors in a result are the backend's fault.
template <typename F>
auto checked(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw BackendError(fmt::format("bad {} result: {}", what, e.what()));
  } catch (const DataError& e) {
    throw BackendError(fmt::format("bad {} result: {}", what, e.what()));
  }
}

}  // namespace

toylm::ScoreResult Backend::score(std::string_view text) {
  json res = call(Kind::score, json{{"text", std::string(text)}});
  return checked("score", [&] {
    toylm::ScoreResult r;
    for (const auto& t : res.at("tokens")) {
      toylm::TokenScore ts;
      ts.token = t.at("token").get<std::string>();
      ts.logprob = t.at("logprob").get<double>();
      ts.rank = t.at("rank").get<std::uint64_t>();
      ts.entropy = t.at("entropy").get<double>();
      r.tokens.push_back(std::move(ts));
    }
    if (auto f = res.find("flagged"); f != res.end()) r.flagged = f->get<bool>();
    return r;
  });
}

toylm::GenerationResult Backend::generate(std::string_view prompt, const toylm::SamplingConfig& sampling,
                                          std::uint64_t seed) {
  json res = call(Kind::generate, json{{"prompt", std::string(prompt)},
                                       {"max_tokens", sampling.max_tokens},
                                       {"min_tokens", sampling.min_tokens},
                                       {"temperature", sampling.temperature},
                                       {"top_p", sampling.top_p},
                                       {"seed", seed}});
  return checked("generate", [&] {
    toylm::GenerationResult r;
    r.text = res.at("text").get<std::string>();
    r.tokens = toylm::tokenize(r.text);
    if (auto f = res.find("flagged"); f != res.end()) r.flagged = f->get<bool>();
    return r;
  });
}

std::string Backend::mask_fill(std::string_view text, const std::vector<std::pair<std::size_t, std::size_t>>& spans,
                               std::uint64_t seed) {
  json js = json::array();
  for (const auto& [b, e] : spans) js.push_back(json::array({b, e}));
  json res = call(Kind::mask_fill, json{{"text", std::string(text)}, {"spans", js}, {"seed", seed}});
  return checked("mask_fill", [&] { return res.at("text").get<std::string>(); });
}

std::string Backend::paraphrase(std::string_view text, double lex_diversity, double order_diversity,
                                std::uint64_t seed) {
  json res = call(Kind::paraphrase, json{{"text", std::string(text)},
                                         {"lex_diversity", lex_diversity},
                                         {"order_diversity", order_diversity},
                                         {"seed", seed}});
  return checked("paraphrase", [&] { return res.at("text").get<std::string>(); });
}

std::vector<std::string> Backend::synonyms(std::string_view sentence, std::string_view word, std::size_t k) {
  json res = call(Kind::synonyms, json{{"sentence", std::string(sentence)}, {"word", std::string(word)}, {"k", k}});
  return checked("synonyms", [&] { return res.at("synonyms").get<std::vector<std::string>>(); });
}

std::vector<Substitution> Backend::select_substitutions(std::string_view sentence, double rate, std::uint64_t seed) {
  json res = call(Kind::synonyms, json{{"sentence", std::string(sentence)}, {"rate", rate}, {"seed", seed}});
  return checked("synonyms", [&] {
    std::vector<Substitution> out;
    for (const auto& s : res.at("substitutions")) {
      out.push_back({s.at("index").get<std::size_t>(), s.at("replacement").get<std::string>()});
    }
    return out;
  });
}

ToyBackend::ToyBackend(const toylm::NGramModel& model, const attacks::SynonymDictionary& dictionary,
                       ParaphraseMode mode)
    : model_(model), dictionary_(dictionary), mode_(mode) {}

Response ToyBackend::dispatch(const Request& request) {
  Response r;
  r.id = request.id;
  try {
    r.result = handle(request);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

json ToyBackend::handle(const Request& request) const {
  const json& p = request.payload;
  switch (request.kind) {
    case Kind::score: {
      const auto scored = model_.score(string_field(p, "text"));
      json tokens = json::array();
      for (const auto& t : scored.tokens) {
        tokens.push_back(json{{"token", t.token}, {"logprob", t.logprob}, {"rank", t.rank}, {"entropy", t.entropy}});
      }
      return json{{"tokens", tokens}, {"flagged", scored.flagged}};
    }
    case Kind::generate: {
      toylm::GenerateOptions o;
      o.sampling.max_tokens = unsigned_field(p, "max_tokens", o.sampling.max_tokens);
      o.sampling.min_tokens = unsigned_field(p, "min_tokens", o.sampling.min_tokens);
      o.sampling.temperature = number_field(p, "temperature", o.sampling.temperature);
      o.sampling.top_p = number_field(p, "top_p", o.sampling.top_p);
      o.seed = unsigned_field(p, "seed", 0);
      const auto g = model_.generate(string_field(p, "prompt"), o);
      return json{{"text", g.text}, {"flagged", g.flagged}};
    }
    case Kind::mask_fill: {
      const std::string t = model_.mask_fill(string_field(p, "text"), spans_field(p), unsigned_field(p, "seed", 0));
      return json{{"text", t}};
    }
    case Kind::paraphrase: {
      const std::string src = string_field(p, "text");
      if (mode_ == ParaphraseMode::echo) return json{{"text", src}};
      const std::string t = attacks::toy_paraphrase(src, number_field(p, "lex_diversity", 30.0),
                                                    number_field(p, "order_diversity", 0.0),
                                                    unsigned_field(p, "seed", 0), dictionary_, &model_);
      return json{{"text", t}};
    }
    case Kind::synonyms: {
      const std::string sentence = string_field(p, "sentence");
      if (p.contains("word")) {
        const std::string word = string_field(p, "word");
        const auto k = unsigned_field(p, "k", 5);
        std::vector<std::string> out;
        if (const auto* list = dictionary_.lookup(word)) {
          for (std::size_t i = 0; i < list->size() && out.size() < k; ++i) {
            out.push_back(attacks::match_case(word, (*list)[i]));
          }
        }
        return json{{"synonyms", out}};
      }
      const double rate = number_field(p, "rate", 0.0);
      if (!(rate >= 0.0 && rate <= 1.0)) throw DataError("rate must be in [0, 1]");
      Rng rng(unsigned_field(p, "seed", 0));
      const auto words = text::split_words(sentence);
      json subs = json::array();
      for (std::size_t i = 0; i < words.size(); ++i) {
        const auto parts = text::split_affixes(words[i]);
        if (parts.core.empty() || attacks::is_stop_word(parts.core)) continue;
        const auto* list = dictionary_.lookup(parts.core);
        if (!list || !rng.bernoulli(rate)) continue;
        const std::string repl = std::string(parts.prefix) + attacks::match_case(parts.core, list->front()) +
                                 std::string(parts.suffix);
        subs.push_back(json{{"index", i}, {"replacement", repl}});
      }
      return json{{"substitutions", subs}};
    }
  }
  throw DataError("unhandled request kind");
}

ExternalBackend::ExternalBackend(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  if (command_.empty()) throw UsageError("empty backend command");
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) throw BackendError(fmt::format("pipe: {}", std::strerror(errno)));
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw BackendError(fmt::format("pipe: {}", std::strerror(errno)));
  }
  const pid_t pid = fork();
  if (pid < 0) throw BackendError(fmt::format("fork: {}", std::strerror(errno)));
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ExternalBackend::~ExternalBackend() { shutdown(); }

void ExternalBackend::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ <= 0) return;
  int status = 0;
  for (int i = 0; i < 100; ++i) {
    if (waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      return;
    }
    usleep(10000);
  }
  kill(pid_, SIGKILL);
  waitpid(pid_, &status, 0);
  pid_ = -1;
}

std::string ExternalBackend::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      shutdown();
      throw BackendError(fmt::format("backend timed out after {} ms", timeout_.count()));
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw BackendError(fmt::format("poll: {}", std::strerror(errno)));
    }
    if (rc == 0) continue;
    char chunk[65536];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BackendError(fmt::format("read: {}", std::strerror(errno)));
    }
    if (n == 0) {
      shutdown();
      throw BackendError("backend closed the connection");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string ExternalBackend::exchange(std::string_view request_line) {
  if (to_child_ < 0) throw BackendError("backend connection is closed");
  std::string line(request_line);
  line += '\n';
  std::size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      shutdown();
      throw BackendError(fmt::format("write to backend: {}", std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }
  return read_line();
}

Response ExternalBackend::dispatch(const Request& request) {
  return parse_response(exchange(to_json(request).dump(-1, ' ', false, json::error_handler_t::strict)));
}

std::string handle_line(Backend& backend, std::string_view line) {
  Response resp;
  try {
    const Request req = parse_request(line);
    resp = backend.dispatch(req);
  } catch (const std::exception& e) {
    resp.ok = false;
    resp.error = e.what();
    try {
      const json j = json::parse(line);
      if (j.is_object() && j.contains("id") && valid_id(j["id"])) resp.id = j["id"];
    } catch (const json::exception&) {
    }
  }
  return to_json(resp).dump(-1, ' ', false, json::error_handler_t::replace);
}

void serve(Backend& backend, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << handle_line(backend, line) << '\n';
    out.flush();
  }
}

}  // namespace mgt::backend
