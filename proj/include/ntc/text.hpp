#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ntc/rng.hpp"
#include "ntc/tensor.hpp"

namespace ntc {

// Lowercases, then splits on every maximal run of non-alphanumeric bytes
// (ASCII semantics; bytes outside [0-9a-z] separate). Empty tokens dropped.
std::vector<std::string> tokenize(const std::string& text);

// Token <-> id map with reserved ids pad=0 and unk=1; real tokens get dense
// ids from 2 in (frequency desc, token asc) order.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

  Vocabulary();

  // Builds from token lists. Tokens below min_count are dropped; at most
  // max_size ids total (including pad/unk) are assigned.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t min_count, std::size_t max_size);

  int id_of(const std::string& token) const;  // kUnk when absent
  const std::string& token_of(int id) const;
  std::int64_t count_of(int id) const;
  std::size_t size() const { return id_to_token_.size(); }

  void save(const std::string& path) const;       // "token\tid\tcount" lines
  static Vocabulary load(const std::string& path);

  // Space-joined tokens for ids 2..|V|-1, and the inverse; used to embed
  // the vocabulary into checkpoints. Tokens never contain spaces.
  std::string joined_tokens() const;
  static Vocabulary from_joined_tokens(const std::string& joined);

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::vector<std::int64_t> counts_;
};

// Unknown tokens map to unk; sequences are truncated to max_len and
// right-padded with pad. Empty token list throws std::invalid_argument.
std::pair<std::vector<int>, std::size_t> encode(const std::vector<std::string>& tokens,
                                                const Vocabulary& vocab,
                                                std::size_t max_len);

// Non-pad prefix of ids mapped back to tokens.
std::vector<std::string> decode(const std::vector<int>& ids, const Vocabulary& vocab);

struct NewsRecord {
  std::string category;
  std::string headline;
  std::string short_description;
  int label = -1;  // set once a category -> id map exists
  std::string text() const { return headline + " " + short_description; }
};

struct LoadReport {
  std::size_t total_lines = 0;
  std::size_t malformed = 0;
  std::vector<std::string> warnings;
};

// Reads line-delimited JSON records with string fields "category",
// "headline", "short_description" (an optional integer "label" is picked up
// when present). Records whose category is not in the allow-list are
// dropped. Malformed lines are skipped with a per-line warning; more than
// 10% malformed lines is a hard std::runtime_error.
std::vector<NewsRecord> load_news_lines(const std::string& path,
                                        const std::vector<std::string>& allow_list,
                                        LoadReport* report = nullptr);

void write_news_lines(const std::string& path, const std::vector<NewsRecord>& records);

// Per class, round-half-up of n_c * test_fraction records go to test, chosen
// by seeded shuffle. Classes are processed in sorted category order so the
// split is deterministic. A class with fewer than 2 records throws
// std::invalid_argument naming it.
std::pair<std::vector<NewsRecord>, std::vector<NewsRecord>> stratified_split(
    const std::vector<NewsRecord>& records, double test_fraction, std::uint64_t seed);

struct Example {
  int label = 0;
  std::string text;
  std::vector<int> ids;      // exactly max_len entries
  std::size_t length = 0;    // true token count, in [1, max_len]
};

// Encodes records; records whose text tokenizes to nothing are dropped with
// a warning appended to `warnings` when given.
std::vector<Example> encode_records(const std::vector<NewsRecord>& records,
                                    const Vocabulary& vocab, std::size_t max_len,
                                    std::vector<std::string>* warnings = nullptr);

struct Batch {
  std::vector<std::vector<int>> ids;  // B rows of max_len ids
  std::vector<std::size_t> lengths;   // B
  Tensor labels;                      // [B x K] one-hot
  std::size_t size() const { return ids.size(); }
};

// Splits examples into batches of batch_size (final batch may be smaller),
// optionally after a seeded shuffle. Empty input throws
// std::invalid_argument.
std::vector<Batch> batch_iter(const std::vector<Example>& examples,
                              std::size_t batch_size, std::size_t num_classes,
                              bool shuffle, std::uint64_t seed);

}  // namespace ntc
