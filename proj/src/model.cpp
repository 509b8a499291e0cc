#include "ntc/model.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ntc/strutil.hpp"
#include "json.hpp"

namespace ntc {

namespace {

constexpr std::size_t kConvWidths[3] = {3, 4, 5};
constexpr std::size_t kConvFilters = 64;
constexpr std::size_t kMaxConvWidth = 5;

}  // namespace

Arch arch_from_string(const std::string& tag) {
  if (tag == "rnn") return Arch::Rnn;
  if (tag == "cnn") return Arch::Cnn;
  if (tag == "lstm") return Arch::Lstm;
  if (tag == "bilstm") return Arch::Bilstm;
  if (tag == "attn") return Arch::Attn;
  if (tag == "bilstm-attn") return Arch::BilstmAttn;
  std::string valid;
  for (const auto& t : arch_tags()) valid += (valid.empty() ? "" : ", ") + t;
  throw std::invalid_argument("unknown architecture \"" + tag + "\" (valid: " + valid +
                              ")");
}

const char* arch_to_string(Arch arch) {
  switch (arch) {
    case Arch::Rnn: return "rnn";
    case Arch::Cnn: return "cnn";
    case Arch::Lstm: return "lstm";
    case Arch::Bilstm: return "bilstm";
    case Arch::Attn: return "attn";
    case Arch::BilstmAttn: return "bilstm-attn";
  }
  return "?";
}

std::vector<std::string> arch_tags() {
  return {"rnn", "cnn", "lstm", "bilstm", "attn", "bilstm-attn"};
}

struct ExampleCache {
  std::size_t length = 0;  // effective length fed to the layers
  EmbeddingCache emb;
  DropoutCache drop_in;
  RnnSeqCache rnn;
  LstmSeqCache lstm;
  BiLstm::Cache bilstm;
  AttentionCache attn;
  GcnCache gcn;
  Tensor gcn_out;  // aggregated states, kept for the alpha-path backward
  std::vector<ConvCache> convs;
  DropoutCache drop_out;
  DenseCache dense;
};

struct BatchCaches {
  std::vector<ExampleCache> ex;
  Mode mode = Mode::Eval;
  bool consumed = false;
};

Model::Model(const ModelConfig& config) : config_(config) {
  Rng rng(config.seed);
  build(rng);
}

Model::Model(const ModelConfig& config, const Tensor& pretrained_table)
    : config_(config) {
  Rng rng(config.seed);
  build(rng);
  Param& table = embedding_->table();
  if (!pretrained_table.same_shape(table.value)) {
    throw std::invalid_argument("model: pretrained table " +
                                pretrained_table.shape_str() + " does not match " +
                                table.value.shape_str());
  }
  table.value = pretrained_table;
}

void Model::build(Rng& rng) {
  if (config_.vocab_size < 2 || config_.classes < 1 || config_.embed_dim < 1 ||
      config_.hidden < 1 || config_.max_len < 1) {
    throw std::invalid_argument("model: all config sizes must be >= 1");
  }
  if (!(config_.dropout >= 0.0 && config_.dropout < 1.0) || config_.lambda < 0.0) {
    throw std::invalid_argument("model: dropout must be in [0,1) and lambda >= 0");
  }
  if (config_.graph_round && config_.arch != Arch::BilstmAttn) {
    throw std::invalid_argument("model: graph_round is only available for bilstm-attn");
  }
  if (config_.arch == Arch::Cnn && config_.max_len < kMaxConvWidth) {
    throw std::invalid_argument("model: cnn requires max_len >= " +
                                std::to_string(kMaxConvWidth));
  }

  const std::size_t d = config_.embed_dim;
  const std::size_t h = config_.hidden;
  embedding_ = std::make_unique<Embedding>(params_, "embed", config_.vocab_size, d, rng);
  embedding_->table().trainable = config_.train_embedding;

  std::size_t head_in = 0;
  switch (config_.arch) {
    case Arch::Rnn:
      rnn_ = std::make_unique<RnnCell>(params_, "rnn", d, h, rng);
      head_in = h;
      break;
    case Arch::Lstm:
      lstm_ = std::make_unique<LstmCell>(params_, "lstm", d, h, rng);
      head_in = h;
      break;
    case Arch::Bilstm:
      bilstm_ = std::make_unique<BiLstm>(params_, "bilstm", d, h, rng);
      head_in = 2 * h;
      break;
    case Arch::BilstmAttn:
      bilstm_ = std::make_unique<BiLstm>(params_, "bilstm", d, h, rng);
      // attention dim defaults to the width of its input
      attention_ = std::make_unique<AttentionPool>(params_, "attn", 2 * h, 2 * h, rng);
      if (config_.graph_round) {
        graph_w_ = &params_.add_glorot("graph.W", 2 * h, 2 * h, {2 * h, 2 * h}, rng);
        graph_b_ = &params_.add("graph.b", {2 * h});
      }
      head_in = 2 * h;
      break;
    case Arch::Attn:
      attention_ = std::make_unique<AttentionPool>(params_, "attn", d, d, rng);
      head_in = d;
      break;
    case Arch::Cnn:
      for (std::size_t w : kConvWidths) {
        convs_.push_back(std::make_unique<Conv1dMaxPool>(
            params_, "conv.w" + std::to_string(w), w, kConvFilters, d, rng));
      }
      head_in = 3 * kConvFilters;
      break;
  }
  head_ = std::make_unique<DenseSoftmax>(params_, "head", head_in, config_.classes, rng);
}

Model::ForwardResult Model::forward(const Batch& batch, Mode mode, Rng& rng) {
  const std::size_t b = batch.size();
  if (b == 0) throw std::invalid_argument("model: empty batch");

  ForwardResult result;
  result.probs = Tensor({b, config_.classes});
  result.caches = std::make_shared<BatchCaches>();
  result.caches->ex.resize(b);
  result.caches->mode = mode;

  for (std::size_t i = 0; i < b; ++i) {
    ExampleCache& c = result.caches->ex[i];
    std::size_t len = batch.lengths[i];
    if (len == 0 || len > config_.max_len) {
      throw std::invalid_argument("model: example length " + std::to_string(len) +
                                  " outside [1, max_len]");
    }
    if (config_.arch == Arch::Cnn) {
      len = std::min(std::max(len, kMaxConvWidth), config_.max_len);
    }
    c.length = len;
    const std::vector<int> ids(batch.ids[i].begin(), batch.ids[i].begin() + len);

    Tensor x = embedding_->forward(ids, c.emb);
    Tensor pooled;
    switch (config_.arch) {
      case Arch::Rnn: {
        const Tensor xd = dropout_forward(x, config_.dropout, mode, rng, c.drop_in);
        const Tensor hs = rnn_->run(xd, len, c.rnn);
        pooled = Tensor({rnn_->hidden()});
        for (std::size_t j = 0; j < rnn_->hidden(); ++j) pooled[j] = hs.at(len - 1, j);
        break;
      }
      case Arch::Lstm: {
        const Tensor xd = dropout_forward(x, config_.dropout, mode, rng, c.drop_in);
        const Tensor hs = lstm_->run(xd, len, c.lstm);
        pooled = Tensor({lstm_->hidden()});
        for (std::size_t j = 0; j < lstm_->hidden(); ++j) pooled[j] = hs.at(len - 1, j);
        break;
      }
      case Arch::Bilstm: {
        const Tensor xd = dropout_forward(x, config_.dropout, mode, rng, c.drop_in);
        bilstm_->run(xd, len, c.bilstm);
        pooled = bilstm_->final_states(c.bilstm);
        break;
      }
      case Arch::BilstmAttn: {
        const Tensor xd = dropout_forward(x, config_.dropout, mode, rng, c.drop_in);
        const Tensor hs = bilstm_->run(xd, len, c.bilstm);
        auto [s, alpha] = attention_->forward(hs, len, c.attn);
        if (config_.graph_round) {
          WeightedGraph g;
          g.adjacency = Tensor({len, len});
          for (std::size_t r = 0; r < len; ++r) {
            for (std::size_t q = 0; q < len; ++q) g.adjacency.at(r, q) = alpha[q];
          }
          g.features = hs;
          c.gcn_out = gcn_aggregate(g, graph_w_->value, graph_b_->value, c.gcn);
          pooled = Tensor({2 * config_.hidden});
          for (std::size_t t = 0; t < len; ++t) {
            axpy(alpha[t], c.gcn_out.row(t), pooled.data().data(), pooled.size());
          }
        } else {
          pooled = s;
        }
        result.alphas.push_back(alpha);
        break;
      }
      case Arch::Attn: {
        auto [s, alpha] = attention_->forward(x, len, c.attn);
        pooled = s;
        result.alphas.push_back(alpha);
        break;
      }
      case Arch::Cnn: {
        const Tensor xd = dropout_forward(x, config_.dropout, mode, rng, c.drop_in);
        pooled = Tensor({3 * kConvFilters});
        c.convs.resize(3);
        for (std::size_t k = 0; k < 3; ++k) {
          const Tensor out = convs_[k]->forward(xd, c.convs[k]);
          for (std::size_t j = 0; j < kConvFilters; ++j) {
            pooled[k * kConvFilters + j] = out[j];
          }
        }
        break;
      }
    }

    Tensor head_in = pooled;
    if (config_.arch != Arch::Attn && config_.arch != Arch::Cnn) {
      head_in = dropout_forward(pooled, config_.dropout, mode, rng, c.drop_out);
    }
    const Tensor probs = head_->forward(head_in, c.dense);
    for (std::size_t j = 0; j < config_.classes; ++j) result.probs.at(i, j) = probs[j];
  }
  return result;
}

double Model::backward(ForwardResult& result, const Batch& batch) {
  BatchCaches& caches = *result.caches;
  if (caches.consumed) throw std::logic_error("model: caches already consumed");
  caches.consumed = true;

  const std::size_t b = batch.size();
  const std::size_t k = config_.classes;
  const double loss = loss_ce_l2(result.probs, batch.labels, params_, config_.lambda);
  const double inv_m = 1.0 / static_cast<double>(b);

  for (std::size_t i = 0; i < b; ++i) {
    ExampleCache& c = caches.ex[i];
    const std::size_t len = c.length;
    Tensor dlogits({k});
    for (std::size_t j = 0; j < k; ++j) {
      dlogits[j] = (result.probs.at(i, j) - batch.labels.at(i, j)) * inv_m;
    }
    Tensor dv = head_->backward_logits(c.dense, dlogits);
    if (config_.arch != Arch::Attn && config_.arch != Arch::Cnn) {
      dv = dropout_backward(c.drop_out, dv);
    }

    Tensor dx;  // gradient at the embedding output
    switch (config_.arch) {
      case Arch::Rnn: {
        Tensor dhs({len, rnn_->hidden()});
        for (std::size_t j = 0; j < rnn_->hidden(); ++j) dhs.at(len - 1, j) = dv[j];
        dx = rnn_->run_backward(c.rnn, dhs);
        dx = dropout_backward(c.drop_in, dx);
        break;
      }
      case Arch::Lstm: {
        Tensor dhs({len, lstm_->hidden()});
        for (std::size_t j = 0; j < lstm_->hidden(); ++j) dhs.at(len - 1, j) = dv[j];
        dx = lstm_->run_backward(c.lstm, dhs);
        dx = dropout_backward(c.drop_in, dx);
        break;
      }
      case Arch::Bilstm: {
        const std::size_t h = bilstm_->hidden();
        Tensor dhs({len, 2 * h});
        for (std::size_t j = 0; j < h; ++j) dhs.at(len - 1, j) = dv[j];
        for (std::size_t j = 0; j < h; ++j) dhs.at(0, h + j) = dv[h + j];
        dx = bilstm_->run_backward(c.bilstm, dhs);
        dx = dropout_backward(c.drop_in, dx);
        break;
      }
      case Arch::BilstmAttn: {
        Tensor dH;
        if (config_.graph_round) {
          const std::size_t width = 2 * config_.hidden;
          const Tensor& alpha = c.attn.alpha;
          Tensor dHg({len, width});
          Tensor dalpha({len});
          for (std::size_t t = 0; t < len; ++t) {
            axpy(alpha[t], dv.data().data(), dHg.row(t), width);
            dalpha[t] = dot(dv.data().data(), c.gcn_out.row(t), width);
          }
          GcnGradients grads = gcn_backward(c.gcn, dHg);
          axpy(1.0, grads.weight.data().data(), graph_w_->grad.data().data(),
               grads.weight.size());
          axpy(1.0, grads.bias.data().data(), graph_b_->grad.data().data(),
               grads.bias.size());
          for (std::size_t r = 0; r < len; ++r) {
            for (std::size_t q = 0; q < len; ++q) {
              dalpha[q] += grads.adjacency.at(r, q);
            }
          }
          const Tensor zero_s({width});
          dH = attention_->backward(c.attn, zero_s, dalpha);
          for (std::size_t t = 0; t < len; ++t) {
            axpy(1.0, grads.features.row(t), dH.row(t), width);
          }
        } else {
          dH = attention_->backward(c.attn, dv);
        }
        dx = bilstm_->run_backward(c.bilstm, dH);
        dx = dropout_backward(c.drop_in, dx);
        break;
      }
      case Arch::Attn: {
        dx = attention_->backward(c.attn, dv);
        break;
      }
      case Arch::Cnn: {
        Tensor dgrad({len, config_.embed_dim});
        for (std::size_t w = 0; w < 3; ++w) {
          Tensor part({kConvFilters});
          for (std::size_t j = 0; j < kConvFilters; ++j) {
            part[j] = dv[w * kConvFilters + j];
          }
          const Tensor dseq = convs_[w]->backward(c.convs[w], part);
          for (std::size_t q = 0; q < dgrad.size(); ++q) dgrad[q] += dseq[q];
        }
        dx = dropout_backward(c.drop_in, dgrad);
        break;
      }
    }
    if (config_.train_embedding) {
      embedding_->backward(c.emb, dx);
    }
  }

  if (config_.lambda > 0.0) {
    for (const auto& p : params_.all()) {
      if (!p->trainable) continue;
      axpy(2.0 * config_.lambda, p->value.data().data(), p->grad.data().data(),
           p->value.size());
    }
  }
  return loss;
}

Model::Prediction Model::predict(const std::string& text, const Vocabulary& vocab) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) {
    throw std::invalid_argument("predict: text is empty after tokenization");
  }
  Batch batch;
  batch.labels = Tensor({1, config_.classes});
  batch.labels.at(0, 0) = 1.0;  // placeholder; labels unused by forward
  auto [ids, length] = encode(tokens, vocab, config_.max_len);
  batch.ids.push_back(std::move(ids));
  batch.lengths.push_back(length);

  Rng rng(0);  // eval mode draws nothing
  ForwardResult fr = forward(batch, Mode::Eval, rng);

  Prediction pred;
  pred.probs = Tensor({config_.classes});
  for (std::size_t j = 0; j < config_.classes; ++j) {
    pred.probs[j] = fr.probs.at(0, j);
  }
  pred.label = 0;
  for (std::size_t j = 1; j < config_.classes; ++j) {
    if (pred.probs[j] > pred.probs[static_cast<std::size_t>(pred.label)]) {
      pred.label = static_cast<int>(j);
    }
  }
  pred.tokens.assign(tokens.begin(), tokens.begin() + length);
  if (has_attention() && !fr.alphas.empty()) {
    const Tensor& alpha = fr.alphas[0];
    pred.alpha.assign(alpha.data().begin(), alpha.data().begin() + length);
  }
  return pred;
}

GradCheckReport model_grad_check(const ModelConfig& config, const Batch& batch,
                                 Mode mode, std::uint64_t dropout_seed, double epsilon,
                                 double tol) {
  Model model(config);
  Rng rng(dropout_seed);
  auto fr = model.forward(batch, mode, rng);
  model.params().zero_grads();
  model.backward(fr, batch);
  const Tensor analytic = model.params().flatten_grads();
  const Tensor theta0 = model.params().flatten_values();

  auto f = [&config, &batch, mode, dropout_seed](const Tensor& theta) {
    Model probe(config);
    probe.params().unflatten_values(theta);
    Rng r(dropout_seed);
    auto res = probe.forward(batch, mode, r);
    return loss_ce_l2(res.probs, batch.labels, probe.params(), config.lambda);
  };
  return grad_check(f, theta0, analytic, epsilon, tol);
}

// ----------------------------------------------------------- checkpoint IO

namespace {

constexpr char kMagic[] = "NTC1";

void write_f64_le(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated data section");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model,
                     const Vocabulary& vocab,
                     const std::vector<std::string>& class_names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  const ModelConfig& c = model.config();
  if (class_names.size() != c.classes) {
    throw std::invalid_argument("checkpoint: class name count does not match config");
  }
  out << kMagic << '\n';
  out << "arch=" << arch_to_string(c.arch) << '\n';
  out << "vocab_size=" << c.vocab_size << '\n';
  out << "embed_dim=" << c.embed_dim << '\n';
  out << "hidden=" << c.hidden << '\n';
  out << "classes=" << c.classes << '\n';
  out << "max_len=" << c.max_len << '\n';
  out << "dropout=" << format_double(c.dropout) << '\n';
  out << "lambda=" << format_double(c.lambda) << '\n';
  out << "seed=" << c.seed << '\n';
  out << "train_embedding=" << (c.train_embedding ? 1 : 0) << '\n';
  out << "graph_round=" << (c.graph_round ? 1 : 0) << '\n';
  out << "class_names=" << nlohmann::json(class_names).dump() << '\n';
  out << "vocab_tokens=" << vocab.joined_tokens() << '\n';
  for (const auto& p : model.params().all()) {
    out << "param=" << p->name;
    for (std::size_t d : p->value.shape()) out << ' ' << d;
    out << '\n';
  }
  out << "data\n";
  for (const auto& p : model.params().all()) {
    for (double v : p->value.data()) write_f64_le(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

LoadedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }

  std::unordered_map<std::string, std::string> kv;
  std::vector<std::string> manifest;
  while (std::getline(in, line)) {
    if (line == "data") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("checkpoint: malformed header line \"" + line + "\"");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "param") {
      manifest.push_back(value);
    } else if (kv.count(key)) {
      throw std::runtime_error("checkpoint: duplicate header key " + key);
    } else {
      kv[key] = value;
    }
  }
  if (line != "data") throw std::runtime_error("checkpoint: missing data section");

  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw std::runtime_error(std::string("checkpoint: missing header key ") + key);
    }
    return it->second;
  };

  ModelConfig config;
  config.arch = arch_from_string(need("arch"));
  config.vocab_size = std::stoull(need("vocab_size"));
  config.embed_dim = std::stoull(need("embed_dim"));
  config.hidden = std::stoull(need("hidden"));
  config.classes = std::stoull(need("classes"));
  config.max_len = std::stoull(need("max_len"));
  config.dropout = std::stod(need("dropout"));
  config.lambda = std::stod(need("lambda"));
  config.seed = std::stoull(need("seed"));
  config.train_embedding = need("train_embedding") == "1";
  config.graph_round = need("graph_round") == "1";

  LoadedModel loaded;
  const auto names_json = nlohmann::json::parse(need("class_names"));
  for (const auto& n : names_json) loaded.class_names.push_back(n.get<std::string>());
  if (loaded.class_names.size() != config.classes) {
    throw std::runtime_error("checkpoint: class_names count does not match classes");
  }
  loaded.vocab = Vocabulary::from_joined_tokens(need("vocab_tokens"));
  if (loaded.vocab.size() != config.vocab_size) {
    throw std::runtime_error(strprintf(
        "checkpoint: vocab_tokens has %zu entries but vocab_size is %zu",
        loaded.vocab.size(), config.vocab_size));
  }

  loaded.model = std::make_unique<Model>(config);
  const auto& params = loaded.model->params().all();
  if (manifest.size() != params.size()) {
    throw std::runtime_error(strprintf("checkpoint: manifest has %zu params, model %zu",
                                       manifest.size(), params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::string expected = params[i]->name;
    for (std::size_t d : params[i]->value.shape()) expected += ' ' + std::to_string(d);
    if (manifest[i] != expected) {
      throw std::runtime_error("checkpoint: manifest entry \"" + manifest[i] +
                               "\" does not match model parameter \"" + expected + "\"");
    }
  }
  for (const auto& p : params) {
    for (double& v : p->value.data()) v = read_f64_le(in);
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw std::runtime_error("checkpoint: trailing bytes after data section");
  }
  return loaded;
}

}  // namespace ntc
