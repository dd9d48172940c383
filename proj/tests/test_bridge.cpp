#include <doctest.h>

#include <set>
#include <sstream>

#include "mgt/backend.hpp"
#include "mgt/bridge.hpp"
#include "mgt/error.hpp"
#include "support.hpp"

using namespace mgt;
using nlohmann::json;

namespace {

const std::string kText = "The school announced the new program on Monday. Many students opposed the recent change.";

std::string serve_command(const std::string& extra = "") {
  return std::string("'") + MGT_CLI_PATH + "' serve --train '" + (testing::data_dir() / "news_train.jsonl").string() +
         "' " + extra;
}

std::filesystem::path transcript_path() { return testing::data_dir() / "bridge" / "transcript.jsonl"; }

void check_same_calls(backend::Backend& a, backend::Backend& b) {
  CHECK(a.score(kText).tokens == b.score(kText).tokens);
  const toylm::SamplingConfig s{0.8, 0.9, 30, 10};
  CHECK(a.generate("The school", s, 4).text == b.generate("The school", s, 4).text);
  CHECK(a.mask_fill(kText, {{1, 3}, {6, 7}}, 9) == b.mask_fill(kText, {{1, 3}, {6, 7}}, 9));
  CHECK(a.paraphrase(kText, 60, 50, 2) == b.paraphrase(kText, 60, 50, 2));
  CHECK(a.synonyms(kText, "School", 3) == b.synonyms(kText, "School", 3));
  const auto sa = a.select_substitutions(kText, 0.5, 1), sb = b.select_substitutions(kText, 0.5, 1);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].index == sb[i].index);
    CHECK(sa[i].replacement == sb[i].replacement);
  }
}

}  // namespace

TEST_CASE("request and response wire format") {
  backend::Request r{json(7), backend::Kind::mask_fill, json{{"text", "a b"}}};
  const auto line = backend::to_json(r).dump();
  const auto back = backend::parse_request(line);
  CHECK(back.id == 7);
  CHECK(back.kind == backend::Kind::mask_fill);
  CHECK(back.payload == r.payload);
  CHECK_THROWS_AS(backend::parse_request("{"), DataError);
  CHECK_THROWS_AS(backend::parse_request(R"({"v":2,"id":1,"kind":"score","payload":{}})"), DataError);
  CHECK_THROWS_AS(backend::parse_request(R"({"v":1,"id":1,"kind":"translate","payload":{}})"), DataError);
  CHECK_THROWS_AS(backend::parse_request("[1]"), DataError);

  backend::Response ok{json("x"), true, json{{"text", "t"}}, ""};
  const auto j = backend::to_json(ok);
  CHECK(j.contains("result"));
  CHECK_FALSE(j.contains("error"));
  const auto parsed = backend::parse_response(j.dump());
  CHECK(parsed.ok);
  CHECK(parsed.id == "x");
  backend::Response err{json(3), false, nullptr, "boom"};
  CHECK(backend::to_json(err).contains("error"));
  CHECK_FALSE(backend::to_json(err).contains("result"));
  CHECK_THROWS_AS(backend::parse_response("nope"), BackendError);
  CHECK_THROWS_AS(backend::parse_response(R"({"v":1,"id":1,"ok":true})"), BackendError);
}

TEST_CASE("handle_line answers every line") {
  backend::ToyBackend toy(testing::mini_model(), testing::dictionary());
  for (const std::string line : {"", "garbage", "{}", "[1,2]", R"({"v":1,"id":5,"kind":"score"})",
                                 R"({"v":1,"id":5,"kind":"mask_fill","payload":{"text":"a b c","spans":[[2,1]]}})"}) {
    const auto j = json::parse(backend::handle_line(toy, line));
    CHECK(j.at("v") == 1);
    CHECK(j.at("ok") == false);
    CHECK_FALSE(j.at("error").get<std::string>().empty());
  }
  const auto echoed = json::parse(backend::handle_line(toy, R"({"v":1,"id":"abc","kind":"score"})"));
  CHECK(echoed.at("id") == "abc");
  std::istringstream in("garbage\n{\"v\":1,\"id\":2,\"kind\":\"score\",\"payload\":{\"text\":\"a b c d\"}}\n");
  std::ostringstream out;
  backend::serve(toy, in, out);
  std::istringstream lines(out.str());
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  CHECK(json::parse(first).at("ok") == false);
  CHECK(json::parse(second).at("ok") == true);
}

TEST_CASE("builtin backend equals direct model calls") {
  const auto& m = testing::news_model();
  const auto& d = testing::dictionary();
  backend::ToyBackend toy(m, d);
  CHECK(toy.score(kText).tokens == m.score(kText).tokens);
  toylm::GenerateOptions o;
  o.sampling = {0.8, 0.9, 30, 10};
  o.seed = 4;
  CHECK(toy.generate("The school", o.sampling, 4).text == m.generate("The school", o).text);
  CHECK(toy.mask_fill(kText, {{1, 3}}, 9) == m.mask_fill(kText, {{1, 3}}, 9));
  CHECK(toy.paraphrase(kText, 60, 50, 2) == attacks::toy_paraphrase(kText, 60, 50, 2, d, &m));
  CHECK(toy.synonyms(kText, "school", 2) == std::vector<std::string>(d.lookup("school")->begin(),
                                                                      d.lookup("school")->begin() + 2));
  CHECK_THROWS_AS(toy.mask_fill(kText, {{3, 1}}, 1), BackendError);
}

TEST_CASE("protocol round trip through a child process is transparent") {
  backend::ToyBackend toy(testing::news_model(), testing::dictionary());
  backend::ExternalBackend child(serve_command());
  check_same_calls(toy, child);
  CHECK_THROWS_AS(child.mask_fill(kText, {{3, 1}}, 1), BackendError);
  CHECK(child.score(kText).tokens == toy.score(kText).tokens);
}

TEST_CASE("transport failures raise BackendError") {
  CHECK_THROWS_AS(
      [] {
        backend::ExternalBackend dead("exit 0");
        dead.score(kText);
      }(),
      BackendError);
  CHECK_THROWS_AS(
      [] {
        backend::ExternalBackend slow("sleep 5", std::chrono::milliseconds(200));
        slow.score(kText);
      }(),
      BackendError);
  CHECK_THROWS_AS(
      [] {
        backend::ExternalBackend liar("echo not-json; sleep 5");
        liar.score(kText);
      }(),
      BackendError);
}

TEST_CASE("conformance transcript") {
  const auto t = bridge::load_transcript(transcript_path());
  CHECK(t.size() == bridge::conformance_requests().size());
  std::set<std::string> kinds;
  std::size_t failures = 0;
  for (const auto& e : t) {
    failures += e.response.at("ok") == false;
    try {
      kinds.insert(json::parse(e.request).at("kind").get<std::string>());
    } catch (const std::exception&) {
    }
  }
  CHECK(failures >= 5);
  for (const char* k : {"score", "generate", "mask_fill", "paraphrase", "synonyms"}) CHECK(kinds.count(k) == 1);

  backend::ToyBackend toy(testing::news_model(), testing::dictionary());
  const bridge::LineChannel in_process = [&](std::string_view line) { return backend::handle_line(toy, line); };
  CHECK(bridge::check(t, in_process, bridge::CheckMode::strict).empty());

  backend::ExternalBackend echo(serve_command("--paraphraser echo"));
  const bridge::LineChannel wire = [&](std::string_view line) { return echo.exchange(line); };
  CHECK(bridge::check(t, wire, bridge::CheckMode::shape).empty());
  CHECK(bridge::check(t, wire, bridge::CheckMode::strict).size() >= 1);

  const bridge::LineChannel rude = [](std::string_view) { return std::string(R"({"v":1,"id":0,"ok":false,"error":"no"})"); };
  CHECK(bridge::check(t, rude, bridge::CheckMode::shape).size() >= t.size() - failures);
}

TEST_CASE("shape comparison") {
  std::vector<std::string> problems;
  bridge::compare_shape(json{{"a", 1}, {"b", {1.5, 2.5}}}, json{{"a", 2.5}, {"b", {3}}}, "$", problems);
  CHECK(problems.empty());
  bridge::compare_shape(json{{"a", 1}}, json{{"a", "1"}}, "$", problems);
  CHECK(problems.size() == 1);
  problems.clear();
  bridge::compare_shape(json{{"a", 1}}, json{{"b", 1}}, "$", problems);
  CHECK(problems.size() >= 1);
  problems.clear();
  bridge::compare_shape(json{{"x", json::array({json{{"t", "s"}}})}}, json{{"x", json::array({json{{"t", 1}}})}}, "$",
                        problems);
  CHECK(problems.size() == 1);
}
