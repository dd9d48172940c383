#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgt/corpus.hpp"
#include "mgt/synonyms.hpp"
#include "mgt/toylm.hpp"

#include <unistd.h>

namespace mgt::testing {

inline std::filesystem::path data_dir() { return MGT_DATA_DIR; }

inline std::vector<corpus::Document> human(const std::string& file, corpus::Split split) {
  return corpus::load_dataset(data_dir() / file, split).with_label(corpus::Label::HWT);
}

inline std::vector<std::string> texts(const std::vector<corpus::Document>& docs) {
  std::vector<std::string> out;
  for (const auto& d : docs) out.push_back(d.text);
  return out;
}

/// The news model every command trains by default.
inline const toylm::NGramModel& news_model() {
  static const toylm::NGramModel model =
      toylm::NGramModel::train_texts(texts(human("news_train.jsonl", corpus::Split::train)), 3, 1e-3);
  return model;
}

inline const toylm::NGramModel& mini_model() {
  static const toylm::NGramModel model =
      toylm::NGramModel::train_texts(texts(human("mini_train.jsonl", corpus::Split::train)), 3, 1e-3);
  return model;
}

inline const attacks::SynonymDictionary& dictionary() {
  static const attacks::SynonymDictionary dict = attacks::SynonymDictionary::load(data_dir() / "synonyms.tsv");
  return dict;
}

/// A scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("mgtstress-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

inline TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mgt::testing
