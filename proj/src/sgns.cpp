#include "ntc/sgns.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ntc/strutil.hpp"

namespace ntc {

std::vector<std::pair<int, int>> generate_pairs(const std::vector<int>& ids,
                                                std::size_t window, Rng* rng) {
  if (window < 1) throw std::invalid_argument("generate_pairs: window must be >= 1");
  std::vector<std::pair<int, int>> pairs;
  const std::size_t n = ids.size();
  for (std::size_t t = 0; t < n; ++t) {
    if (ids[t] < 2) continue;  // pad/unk never a center
    const std::size_t span =
        rng ? 1 + static_cast<std::size_t>(rng->next_below(window)) : window;
    for (std::size_t k = 1; k <= span; ++k) {
      if (t >= k && ids[t - k] >= 2) pairs.emplace_back(ids[t], ids[t - k]);
      if (t + k < n && ids[t + k] >= 2) pairs.emplace_back(ids[t], ids[t + k]);
    }
  }
  return pairs;
}

double sgns_pair_objective(const double* center, const double* positive,
                           const std::vector<const double*>& negatives,
                           std::size_t dim, double* grad_center,
                           double* grad_positive,
                           const std::vector<double*>& grad_negatives) {
  double loss = 0.0;
  {
    const double s = sigmoid(dot(center, positive, dim));
    loss += -std::log(std::max(s, 1e-12));
    const double d = s - 1.0;  // d/dscore of -log(sigmoid(score))
    if (grad_center) axpy(d, positive, grad_center, dim);
    if (grad_positive) axpy(d, center, grad_positive, dim);
  }
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const double s = sigmoid(dot(center, negatives[k], dim));
    loss += -std::log(std::max(1.0 - s, 1e-12));
    if (grad_center) axpy(s, negatives[k], grad_center, dim);
    if (k < grad_negatives.size() && grad_negatives[k]) {
      axpy(s, center, grad_negatives[k], dim);
    }
  }
  return loss;
}

namespace {

// Cumulative unigram^(3/4) distribution over ids >= 2; sampling is a binary
// search over one uniform draw.
class NegativeSampler {
 public:
  NegativeSampler(const std::vector<std::int64_t>& counts) {
    cum_.reserve(counts.size());
    double total = 0.0;
    for (std::size_t id = 0; id < counts.size(); ++id) {
      if (id >= 2 && counts[id] > 0) {
        total += std::pow(static_cast<double>(counts[id]), 0.75);
      }
      cum_.push_back(total);
    }
    total_ = total;
  }

  bool empty() const { return total_ <= 0.0; }

  int draw(Rng& rng) const {
    const double u = rng.uniform() * total_;
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return static_cast<int>(std::min<std::size_t>(it - cum_.begin(), cum_.size() - 1));
  }

 private:
  std::vector<double> cum_;
  double total_ = 0.0;
};

}  // namespace

SgnsResult sgns_train(const std::vector<std::vector<int>>& corpus,
                      std::size_t vocab_size, const SgnsConfig& config) {
  if (vocab_size < 2) throw std::invalid_argument("sgns: vocab_size must be >= 2");
  if (config.dim < 1 || config.window < 1 || config.negatives < 1) {
    throw std::invalid_argument("sgns: dim, window and negatives must be >= 1");
  }

  std::vector<std::int64_t> counts(vocab_size, 0);
  std::int64_t total_tokens = 0;
  for (const auto& seq : corpus) {
    for (int id : seq) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
        throw std::invalid_argument("sgns: id " + std::to_string(id) +
                                    " out of range for vocab size " +
                                    std::to_string(vocab_size));
      }
      if (id >= 2) {
        ++counts[static_cast<std::size_t>(id)];
        ++total_tokens;
      }
    }
  }
  if (total_tokens == 0) {
    throw std::runtime_error("sgns: corpus has no trainable tokens");
  }

  Rng rng(config.seed);
  SgnsResult result;
  result.table = Tensor({vocab_size, config.dim});
  Tensor output({vocab_size, config.dim});
  const double half = 0.5 / static_cast<double>(config.dim);
  for (std::size_t id = 1; id < vocab_size; ++id) {  // pad row stays zero
    for (std::size_t j = 0; j < config.dim; ++j) {
      result.table.at(id, j) = rng.uniform(-half, half);
    }
  }

  const NegativeSampler sampler(counts);
  const double total_work =
      static_cast<double>(total_tokens) * static_cast<double>(config.epochs);
  std::int64_t processed = 0;

  std::vector<double> grad_center(config.dim);
  std::vector<int> filtered;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::int64_t epoch_pairs = 0;
    for (const auto& seq : corpus) {
      filtered.clear();
      for (int id : seq) {
        if (id < 2) continue;
        ++processed;
        if (config.subsample > 0.0) {
          const double f = static_cast<double>(counts[static_cast<std::size_t>(id)]) /
                           static_cast<double>(total_tokens);
          const double keep =
              (std::sqrt(f / config.subsample) + 1.0) * (config.subsample / f);
          if (keep < 1.0 && rng.uniform() >= keep) continue;
        }
        filtered.push_back(id);
      }
      const double lr = std::max(
          config.min_learning_rate,
          config.learning_rate * (1.0 - static_cast<double>(processed) / total_work));
      for (const auto& [center, context] : generate_pairs(filtered, config.window, &rng)) {
        double* c = result.table.row(static_cast<std::size_t>(center));
        double* pos = output.row(static_cast<std::size_t>(context));
        std::vector<const double*> negs;
        std::vector<double*> neg_grads;
        std::vector<int> neg_ids;
        for (std::size_t k = 0; k < config.negatives; ++k) {
          const int neg = sampler.draw(rng);
          if (neg == context) continue;  // resample policy: skip collisions
          neg_ids.push_back(neg);
          negs.push_back(output.row(static_cast<std::size_t>(neg)));
        }
        std::fill(grad_center.begin(), grad_center.end(), 0.0);
        std::vector<std::vector<double>> neg_grad_store(neg_ids.size(),
                                                        std::vector<double>(config.dim, 0.0));
        for (auto& g : neg_grad_store) neg_grads.push_back(g.data());
        std::vector<double> grad_pos(config.dim, 0.0);
        epoch_loss += sgns_pair_objective(c, pos, negs, config.dim, grad_center.data(),
                                          grad_pos.data(), neg_grads);
        ++epoch_pairs;
        axpy(-lr, grad_center.data(), c, config.dim);
        axpy(-lr, grad_pos.data(), pos, config.dim);
        for (std::size_t k = 0; k < neg_ids.size(); ++k) {
          axpy(-lr, neg_grad_store[k].data(),
               output.row(static_cast<std::size_t>(neg_ids[k])), config.dim);
        }
      }
    }
    result.epoch_losses.push_back(
        epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
  }
  return result;
}

std::vector<Neighbor> nearest_neighbors(const Tensor& table, const std::string& token,
                                        std::size_t k, const Vocabulary& vocab) {
  const int query = vocab.id_of(token);
  if (query == Vocabulary::kUnk && token != Vocabulary::kUnkToken) {
    throw std::out_of_range("nearest_neighbors: unknown token \"" + token + "\"");
  }
  const std::size_t dim = table.dim(1);
  const double* q = table.row(static_cast<std::size_t>(query));
  const double qn = std::sqrt(dot(q, q, dim));

  std::vector<Neighbor> all;
  for (std::size_t id = 2; id < table.dim(0); ++id) {
    if (static_cast<int>(id) == query) continue;
    const double* v = table.row(id);
    const double vn = std::sqrt(dot(v, v, dim));
    const double cosine = (qn > 0.0 && vn > 0.0) ? dot(q, v, dim) / (qn * vn) : 0.0;
    all.push_back({static_cast<int>(id), vocab.token_of(static_cast<int>(id)), cosine});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

void save_embeddings(const std::string& path, const Tensor& table,
                     const Vocabulary& vocab) {
  if (table.dim(0) != vocab.size()) {
    throw std::invalid_argument(strprintf("embeddings: table has %zu rows, vocab %zu",
                                          table.dim(0), vocab.size()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("embeddings: cannot write " + path);
  out << table.dim(0) << ' ' << table.dim(1) << '\n';
  for (std::size_t id = 0; id < table.dim(0); ++id) {
    out << vocab.token_of(static_cast<int>(id));
    for (std::size_t j = 0; j < table.dim(1); ++j) {
      out << ' ' << format_double(table.at(id, j));
    }
    out << '\n';
  }
}

Tensor load_embeddings(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("embeddings: cannot read " + path);
  std::size_t count = 0, dim = 0;
  {
    std::string header;
    if (!std::getline(in, header)) {
      throw std::runtime_error("embeddings: missing header in " + path);
    }
    std::istringstream hs(header);
    if (!(hs >> count >> dim) || count == 0 || dim == 0) {
      throw std::runtime_error("embeddings: bad header \"" + header + "\" in " + path);
    }
  }
  if (count != vocab.size()) {
    throw std::runtime_error(strprintf(
        "embeddings: file has %zu rows but vocabulary has %zu tokens", count,
        vocab.size()));
  }
  Tensor table({vocab.size(), dim});
  std::vector<bool> seen(vocab.size(), false);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    const int id = token == Vocabulary::kPadToken   ? Vocabulary::kPad
                   : token == Vocabulary::kUnkToken ? Vocabulary::kUnk
                                                    : vocab.id_of(token);
    if (id == Vocabulary::kUnk && token != Vocabulary::kUnkToken) {
      throw std::runtime_error(strprintf("embeddings: line %zu token \"%s\" not in vocabulary",
                                         line_no, token.c_str()));
    }
    if (seen[static_cast<std::size_t>(id)]) {
      throw std::runtime_error(strprintf("embeddings: duplicate row for \"%s\"", token.c_str()));
    }
    seen[static_cast<std::size_t>(id)] = true;
    for (std::size_t j = 0; j < dim; ++j) {
      if (!(ls >> table.at(static_cast<std::size_t>(id), j))) {
        throw std::runtime_error(strprintf("embeddings: line %zu has fewer than %zu values",
                                           line_no, dim));
      }
    }
    double extra;
    if (ls >> extra) {
      throw std::runtime_error(strprintf("embeddings: line %zu has more than %zu values",
                                         line_no, dim));
    }
  }
  for (std::size_t id = 0; id < seen.size(); ++id) {
    if (!seen[id]) {
      throw std::runtime_error("embeddings: no row for token \"" +
                               vocab.token_of(static_cast<int>(id)) + "\"");
    }
  }
  return table;
}

}  // namespace ntc
