#include "ntc/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "ntc/strutil.hpp"
#include "json.hpp"

namespace ntc {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary::Vocabulary() {
  id_to_token_ = {kPadToken, kUnkToken};
  counts_ = {0, 0};
  token_to_id_[kPadToken] = kPad;
  token_to_id_[kUnkToken] = kUnk;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::size_t min_count, std::size_t max_size) {
  if (min_count < 1) {
    throw std::invalid_argument("build_vocab: min_count must be >= 1");
  }
  std::unordered_map<std::string, std::int64_t> freq;
  for (const auto& tokens : corpus) {
    for (const auto& tok : tokens) ++freq[tok];
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked;
  ranked.reserve(freq.size());
  for (auto& kv : freq) {
    if (kv.second >= static_cast<std::int64_t>(min_count)) ranked.push_back(kv);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t capacity = max_size > 2 ? max_size - 2 : 0;
  if (ranked.size() > capacity) ranked.resize(capacity);

  Vocabulary v;
  for (auto& [token, count] : ranked) {
    v.token_to_id_[token] = static_cast<int>(v.id_to_token_.size());
    v.id_to_token_.push_back(token);
    v.counts_.push_back(count);
  }
  return v;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw std::out_of_range("vocabulary: id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::int64_t Vocabulary::count_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= counts_.size()) {
    throw std::out_of_range("vocabulary: id " + std::to_string(id) + " out of range");
  }
  return counts_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("vocabulary: cannot write " + path);
  for (std::size_t id = 0; id < id_to_token_.size(); ++id) {
    out << id_to_token_[id] << '\t' << id << '\t' << counts_[id] << '\n';
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("vocabulary: cannot read " + path);
  Vocabulary v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 3) {
      throw std::runtime_error("vocabulary: malformed line " + std::to_string(line_no) +
                               " in " + path);
    }
    const int id = std::stoi(parts[1]);
    const std::int64_t count = std::stoll(parts[2]);
    if (id == kPad || id == kUnk) continue;  // reserved rows were added by ctor
    if (static_cast<std::size_t>(id) != v.id_to_token_.size()) {
      throw std::runtime_error("vocabulary: non-dense id " + parts[1] + " in " + path);
    }
    v.token_to_id_[parts[0]] = id;
    v.id_to_token_.push_back(parts[0]);
    v.counts_.push_back(count);
  }
  return v;
}

std::string Vocabulary::joined_tokens() const {
  std::string out;
  for (std::size_t id = 2; id < id_to_token_.size(); ++id) {
    if (id > 2) out += ' ';
    out += id_to_token_[id];
  }
  return out;
}

Vocabulary Vocabulary::from_joined_tokens(const std::string& joined) {
  Vocabulary v;
  if (joined.empty()) return v;
  for (const auto& token : split(joined, ' ')) {
    v.token_to_id_[token] = static_cast<int>(v.id_to_token_.size());
    v.id_to_token_.push_back(token);
    v.counts_.push_back(0);
  }
  return v;
}

std::pair<std::vector<int>, std::size_t> encode(const std::vector<std::string>& tokens,
                                                const Vocabulary& vocab,
                                                std::size_t max_len) {
  if (max_len < 1) throw std::invalid_argument("encode: max_len must be >= 1");
  if (tokens.empty()) throw std::invalid_argument("encode: empty text");
  std::vector<int> ids(max_len, Vocabulary::kPad);
  const std::size_t length = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < length; ++i) ids[i] = vocab.id_of(tokens[i]);
  return {ids, length};
}

std::vector<std::string> decode(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::vector<std::string> tokens;
  for (int id : ids) {
    if (id == Vocabulary::kPad) break;
    tokens.push_back(vocab.token_of(id));
  }
  return tokens;
}

std::vector<NewsRecord> load_news_lines(const std::string& path,
                                        const std::vector<std::string>& allow_list,
                                        LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset: cannot read " + path);
  const std::set<std::string> allowed(allow_list.begin(), allow_list.end());

  std::vector<NewsRecord> records;
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ++rep.total_lines;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      ++rep.malformed;
      rep.warnings.push_back(strprintf("line %zu: not a JSON object, skipped", line_no));
      continue;
    }
    bool ok = true;
    for (const char* field : {"category", "headline", "short_description"}) {
      if (!obj.contains(field) || !obj[field].is_string()) {
        ++rep.malformed;
        rep.warnings.push_back(
            strprintf("line %zu: missing string field \"%s\", skipped", line_no, field));
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    NewsRecord rec;
    rec.category = obj["category"].get<std::string>();
    rec.headline = obj["headline"].get<std::string>();
    rec.short_description = obj["short_description"].get<std::string>();
    if (obj.contains("label") && obj["label"].is_number_integer()) {
      rec.label = obj["label"].get<int>();
    }
    if (!allowed.empty() && !allowed.count(rec.category)) continue;
    records.push_back(std::move(rec));
  }
  // Hard failure above 10% malformed; the extra count floor keeps a couple
  // of bad lines in a tiny file at warning level.
  if (10 * rep.malformed > rep.total_lines && rep.malformed > 2) {
    throw std::runtime_error(strprintf(
        "dataset: %zu of %zu lines malformed (> 10%%) in %s", rep.malformed,
        rep.total_lines, path.c_str()));
  }
  return records;
}

void write_news_lines(const std::string& path, const std::vector<NewsRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dataset: cannot write " + path);
  for (const auto& rec : records) {
    nlohmann::json obj;
    obj["category"] = rec.category;
    obj["headline"] = rec.headline;
    obj["short_description"] = rec.short_description;
    if (rec.label >= 0) obj["label"] = rec.label;
    out << obj.dump() << '\n';
  }
}

std::pair<std::vector<NewsRecord>, std::vector<NewsRecord>> stratified_split(
    const std::vector<NewsRecord>& records, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test_fraction must be in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_class[records[i].category].push_back(i);
  }
  Rng rng(seed);
  std::vector<NewsRecord> train, test;
  for (auto& [category, indices] : by_class) {
    if (indices.size() < 2) {
      throw std::invalid_argument("split: class \"" + category +
                                  "\" has fewer than 2 records");
    }
    // Fisher-Yates with our own rng so the shuffle replays across platforms.
    for (std::size_t i = indices.size() - 1; i > 0; --i) {
      const std::size_t j = rng.next_below(i + 1);
      std::swap(indices[i], indices[j]);
    }
    const std::size_t n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(indices.size()) * test_fraction + 0.5));
    for (std::size_t k = 0; k < indices.size(); ++k) {
      (k < n_test ? test : train).push_back(records[indices[k]]);
    }
  }
  return {train, test};
}

std::vector<Example> encode_records(const std::vector<NewsRecord>& records,
                                    const Vocabulary& vocab, std::size_t max_len,
                                    std::vector<std::string>* warnings) {
  std::vector<Example> examples;
  examples.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto tokens = tokenize(records[i].text());
    if (tokens.empty()) {
      if (warnings) {
        warnings->push_back(strprintf("record %zu: empty text after tokenization, dropped", i));
      }
      continue;
    }
    Example ex;
    ex.label = records[i].label;
    ex.text = records[i].text();
    std::tie(ex.ids, ex.length) = encode(tokens, vocab, max_len);
    examples.push_back(std::move(ex));
  }
  return examples;
}

std::vector<Batch> batch_iter(const std::vector<Example>& examples,
                              std::size_t batch_size, std::size_t num_classes,
                              bool shuffle, std::uint64_t seed) {
  if (batch_size < 1) throw std::invalid_argument("batch_iter: batch_size must be >= 1");
  if (examples.empty()) throw std::invalid_argument("batch_iter: empty dataset");

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (shuffle) {
    Rng rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = rng.next_below(i + 1);
      std::swap(order[i], order[j]);
    }
  }

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    b.labels = Tensor({end - start, num_classes});
    for (std::size_t k = start; k < end; ++k) {
      const Example& ex = examples[order[k]];
      if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= num_classes) {
        throw std::invalid_argument("batch_iter: label " + std::to_string(ex.label) +
                                    " out of range for " + std::to_string(num_classes) +
                                    " classes");
      }
      b.ids.push_back(ex.ids);
      b.lengths.push_back(ex.length);
      b.labels.at(k - start, static_cast<std::size_t>(ex.label)) = 1.0;
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace ntc
