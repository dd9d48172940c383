#include "mgt/corpus.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "mgt/error.hpp"
#include "mgt/text.hpp"

namespace mgt::corpus {

using nlohmann::json;

std::string_view to_string(Label label) { return label == Label::HWT ? "HWT" : "MGT"; }

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::eval: return "eval";
    case Split::test: return "test";
  }
  return "test";
}

Label parse_label(std::string_view s) {
  if (s == "HWT") return Label::HWT;
  if (s == "MGT") return Label::MGT;
  throw DataError(fmt::format("unknown label '{}'", s));
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "eval") return Split::eval;
  if (s == "test") return Split::test;
  throw UsageError(fmt::format("unknown split '{}'", s));
}

std::size_t Dataset::count(Label label) const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.label == label;
  return n;
}

std::vector<Document> Dataset::with_label(Label label) const {
  std::vector<Document> out;
  for (const auto& d : documents) {
    if (d.label == label) out.push_back(d);
  }
  return out;
}

namespace {

bool blank(std::string_view s) {
  for (char32_t cp : text::decode(s)) {
    if (!text::is_space(cp)) return false;
  }
  return true;
}

std::string string_field(const json& j, const char* key, std::size_t line_no, bool required) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) throw DataError(fmt::format("line {}: missing field '{}'", line_no, key));
    return {};
  }
  if (!it->is_string()) throw DataError(fmt::format("line {}: field '{}' must be a string", line_no, key));
  return it->get<std::string>();
}

}  // namespace

Document parse_record(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("line {}: malformed record: {}", line_no, e.what()));
  }
  if (!j.is_object()) throw DataError(fmt::format("line {}: record is not an object", line_no));
  Document doc;
  doc.id = string_field(j, "id", line_no, true);
  doc.text = string_field(j, "text", line_no, true);
  try {
    doc.label = parse_label(string_field(j, "label", line_no, true));
  } catch (const DataError& e) {
    throw DataError(fmt::format("line {}: {}", line_no, e.what()));
  }
  doc.generator_tag = string_field(j, "generator_tag", line_no, false);
  doc.prompt = string_field(j, "prompt", line_no, false);
  if (doc.id.empty()) throw DataError(fmt::format("line {}: empty id", line_no));
  if (blank(doc.text)) throw DataError(fmt::format("line {}: text of '{}' is blank", line_no, doc.id));
  return doc;
}

std::string to_record(const Document& doc) {
  // Insertion order keeps the field order stable for byte-identical outputs.
  json j = json::object();
  j["id"] = doc.id;
  j["text"] = doc.text;
  j["label"] = std::string(to_string(doc.label));
  j["generator_tag"] = doc.generator_tag;
  j["prompt"] = doc.prompt;
  return j.dump();
}

void validate(const Dataset& dataset) {
  std::unordered_set<std::string> seen;
  for (const auto& d : dataset.documents) {
    if (!seen.insert(d.id).second) throw DataError(fmt::format("duplicate id '{}'", d.id));
    if (blank(d.text)) throw DataError(fmt::format("text of '{}' is blank", d.id));
  }
}

Dataset load_dataset(const std::filesystem::path& path, Split expected_split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open dataset '{}'", path.string()));
  Dataset ds;
  ds.split = expected_split;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Document doc = parse_record(line, line_no);
    if (!seen.insert(doc.id).second) {
      throw DataError(fmt::format("{}:{}: duplicate id '{}'", path.string(), line_no, doc.id));
    }
    ds.documents.push_back(std::move(doc));
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  validate(dataset);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write dataset '{}'", path.string()));
  for (const auto& d : dataset.documents) out << to_record(d) << '\n';
}

std::vector<Prompt> derive_prompts(const Dataset& dataset, std::size_t n_tokens) {
  if (n_tokens == 0) throw UsageError("prompt length must be at least one token");
  std::vector<Prompt> out;
  for (const auto& d : dataset.documents) {
    if (d.label != Label::HWT) continue;
    auto words = text::split_words(d.text);
    Prompt p;
    p.doc_id = d.id;
    p.truncated = words.size() < n_tokens;
    if (!p.truncated) words.resize(n_tokens);
    p.text = text::join(words);
    out.push_back(std::move(p));
  }
  return out;
}

double repetition_score(std::string_view s, std::size_t n) {
  if (n == 0) throw UsageError("n-gram order must be at least 1");
  const auto words = text::split_words(s);
  if (words.size() < n) return 0.0;
  std::set<std::vector<std::string_view>> seen;
  std::size_t total = 0;
  std::size_t repeats = 0;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::vector<std::string_view> gram(words.begin() + static_cast<std::ptrdiff_t>(i),
                                       words.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++total;
    if (!seen.insert(std::move(gram)).second) ++repeats;
  }
  return static_cast<double>(repeats) / static_cast<double>(total);
}

}  // namespace mgt::corpus
