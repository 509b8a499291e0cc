#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ntc/model.hpp"
#include "ntc/text.hpp"
#include "support/tempdir.hpp"

using namespace ntc;
using ntc::testing::TempDir;

namespace {

ModelConfig toy_config(Arch arch, std::uint64_t seed = 1) {
  ModelConfig c;
  c.arch = arch;
  c.vocab_size = 50;
  c.embed_dim = 8;
  c.hidden = 4;
  c.classes = 3;
  c.max_len = 6;
  c.dropout = 0.5;
  c.lambda = 1e-3;
  c.seed = seed;
  return c;
}

Batch toy_batch(const ModelConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  Batch batch;
  batch.labels = Tensor({2, config.classes});
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<int> ids(config.max_len, Vocabulary::kPad);
    const std::size_t len = i == 0 ? config.max_len : config.max_len - 2;
    for (std::size_t t = 0; t < len; ++t) {
      ids[t] = 2 + static_cast<int>(rng.next_below(config.vocab_size - 2));
    }
    batch.ids.push_back(std::move(ids));
    batch.lengths.push_back(len);
    batch.labels.at(i, rng.next_below(config.classes)) = 1.0;
  }
  return batch;
}

std::size_t param_count(const Model& model) {
  std::size_t n = 0;
  for (const auto& p : model.params().all()) n += p->value.size();
  return n;
}

}  // namespace

TEST_CASE("parameter counts follow the documented shapes") {
  ModelConfig c;
  c.vocab_size = 100;
  c.embed_dim = 8;
  c.hidden = 4;
  c.classes = 2;
  c.max_len = 8;

  // embed 100*8 + two lstm directions 2*4*(8*4+4*4+4) + attention
  // (8*8+8+8) + head (8*2+2)
  c.arch = Arch::BilstmAttn;
  CHECK(param_count(Model(c)) == 800 + 416 + 80 + 18);

  c.arch = Arch::Bilstm;
  CHECK(param_count(Model(c)) == 800 + 416 + 18);

  // lstm has exactly four times the recurrent-block parameters of rnn
  c.arch = Arch::Lstm;
  const std::size_t lstm_total = param_count(Model(c));
  c.arch = Arch::Rnn;
  const std::size_t rnn_total = param_count(Model(c));
  const std::size_t head_and_embed = 800 + (4 * 2 + 2);
  CHECK(lstm_total - head_and_embed == 4 * (rnn_total - head_and_embed));
}

TEST_CASE("identical config and seed give bit-identical parameters") {
  const ModelConfig c = toy_config(Arch::BilstmAttn, 42);
  const Model a(c), b(c);
  const auto& pa = a.params().all();
  const auto& pb = b.params().all();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(pa[i]->value == pb[i]->value);
  }
}

TEST_CASE("unknown architecture tags are rejected with the valid list") {
  CHECK_THROWS_WITH_AS(arch_from_string("transformer"),
                       doctest::Contains("bilstm-attn"), std::invalid_argument);
}

TEST_CASE("zeroed head gives uniform probabilities") {
  for (const Arch arch : {Arch::Rnn, Arch::Cnn, Arch::Lstm, Arch::Bilstm, Arch::Attn,
                          Arch::BilstmAttn}) {
    const ModelConfig c = toy_config(arch);
    Model model(c);
    model.params().get("head.W").value.zero();
    model.params().get("head.b").value.zero();
    Rng rng(0);
    const Batch batch = toy_batch(c, 3);
    const auto fr = model.forward(batch, Mode::Eval, rng);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < c.classes; ++j) {
        CHECK(fr.probs.at(i, j) == doctest::Approx(1.0 / 3).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("eval forward is deterministic and rows sum to one") {
  for (const Arch arch : {Arch::Rnn, Arch::Cnn, Arch::Lstm, Arch::Bilstm, Arch::Attn,
                          Arch::BilstmAttn}) {
    const ModelConfig c = toy_config(arch, 5);
    Model model(c);
    const Batch batch = toy_batch(c, 8);
    Rng r1(1), r2(2);
    const auto a = model.forward(batch, Mode::Eval, r1);
    const auto b = model.forward(batch, Mode::Eval, r2);
    CHECK(a.probs == b.probs);  // bitwise
    for (std::size_t i = 0; i < 2; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < c.classes; ++j) sum += a.probs.at(i, j);
      CHECK(std::fabs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("permuting the batch permutes the outputs") {
  const ModelConfig c = toy_config(Arch::BilstmAttn, 6);
  Model model(c);
  const Batch batch = toy_batch(c, 9);
  Batch swapped = batch;
  std::swap(swapped.ids[0], swapped.ids[1]);
  std::swap(swapped.lengths[0], swapped.lengths[1]);
  for (std::size_t j = 0; j < c.classes; ++j) {
    std::swap(swapped.labels.at(0, j), swapped.labels.at(1, j));
  }
  Rng rng(0);
  const auto a = model.forward(batch, Mode::Eval, rng);
  const auto b = model.forward(swapped, Mode::Eval, rng);
  for (std::size_t j = 0; j < c.classes; ++j) {
    CHECK(a.probs.at(0, j) == b.probs.at(1, j));
    CHECK(a.probs.at(1, j) == b.probs.at(0, j));
  }
}

TEST_CASE("full-model gradients match finite differences for every architecture") {
  for (const Arch arch : {Arch::Rnn, Arch::Cnn, Arch::Lstm, Arch::Bilstm, Arch::Attn,
                          Arch::BilstmAttn}) {
    CAPTURE(arch_to_string(arch));
    const ModelConfig c = toy_config(arch, 11);
    const Batch batch = toy_batch(c, 12);
    const auto report = model_grad_check(c, batch, Mode::Train, 13, 1e-5, 1e-4);
    CHECK(report.passed());
    CHECK(report.max_rel_err < 1e-4);
  }
}

TEST_CASE("graph aggregation round trains and gradchecks") {
  ModelConfig c = toy_config(Arch::BilstmAttn, 21);
  c.graph_round = true;
  const Model model(c);
  CHECK(model.params().has("graph.W"));
  CHECK(model.params().has("graph.b"));

  const Batch batch = toy_batch(c, 22);
  const auto report = model_grad_check(c, batch, Mode::Train, 23, 1e-5, 1e-4);
  CHECK(report.passed());

  ModelConfig bad = toy_config(Arch::Lstm);
  bad.graph_round = true;
  CHECK_THROWS_AS(Model{bad}, std::invalid_argument);
}

TEST_CASE("frozen embeddings stay fixed under backward/step") {
  ModelConfig c = toy_config(Arch::Attn, 31);
  c.train_embedding = false;
  Model model(c);
  const Tensor before = model.params().get("embed.table").value;
  const Batch batch = toy_batch(c, 32);
  Rng rng(0);
  auto fr = model.forward(batch, Mode::Train, rng);
  model.params().zero_grads();
  model.backward(fr, batch);
  const Tensor& grad = model.params().get("embed.table").grad;
  for (double g : grad.data()) CHECK(g == 0.0);
  CHECK_FALSE(model.params().get("embed.table").trainable);
  CHECK(model.params().get("embed.table").value == before);
}

TEST_CASE("backward consumes caches exactly once and returns the loss") {
  const ModelConfig c = toy_config(Arch::Bilstm, 41);
  Model model(c);
  const Batch batch = toy_batch(c, 42);
  Rng rng(7);
  auto fr = model.forward(batch, Mode::Train, rng);
  model.params().zero_grads();
  const double loss = model.backward(fr, batch);
  CHECK(loss == loss_ce_l2(fr.probs, batch.labels, model.params(), c.lambda));
  CHECK_THROWS_AS(model.backward(fr, batch), std::logic_error);
}

TEST_CASE("predict argmax, tiebreak and attention weights") {
  const Vocabulary vocab = Vocabulary::build({{"alpha", "beta", "news", "sport"}}, 1, 100);
  ModelConfig c = toy_config(Arch::BilstmAttn, 51);
  c.vocab_size = vocab.size();
  Model model(c);
  model.params().get("head.W").value.zero();
  model.params().get("head.b").value.zero();

  const auto pred = model.predict("alpha news beta", vocab);
  CHECK(pred.label == 0);  // uniform probabilities, lowest id wins
  for (std::size_t j = 0; j < c.classes; ++j) {
    CHECK(pred.probs[j] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
  CHECK(pred.tokens == std::vector<std::string>{"alpha", "news", "beta"});
  REQUIRE(pred.alpha.size() == 3);
  double sum = 0.0;
  for (double a : pred.alpha) sum += a;
  CHECK(std::fabs(sum - 1.0) < 1e-12);

  CHECK_THROWS_AS(model.predict("...", vocab), std::invalid_argument);

  // truncation: alpha length = min(token count, max_len)
  std::string longtext;
  for (int i = 0; i < 12; ++i) longtext += " alpha";
  const auto truncated = model.predict(longtext, vocab);
  CHECK(truncated.alpha.size() == c.max_len);

  ModelConfig plain = toy_config(Arch::Lstm, 52);
  plain.vocab_size = vocab.size();
  Model no_attention(plain);
  CHECK(no_attention.predict("alpha beta", vocab).alpha.empty());
}

TEST_CASE("argmax is invariant to a constant shift of the head bias") {
  const ModelConfig c = toy_config(Arch::Attn, 61);
  Model model(c);
  const Batch batch = toy_batch(c, 62);
  Rng rng(0);
  const auto base = model.forward(batch, Mode::Eval, rng);

  for (double& v : model.params().get("head.b").value.data()) v += 3.75;
  const auto shifted = model.forward(batch, Mode::Eval, rng);
  for (std::size_t i = 0; i < 2; ++i) {
    std::size_t argmax_base = 0, argmax_shifted = 0;
    for (std::size_t j = 1; j < c.classes; ++j) {
      if (base.probs.at(i, j) > base.probs.at(i, argmax_base)) argmax_base = j;
      if (shifted.probs.at(i, j) > shifted.probs.at(i, argmax_shifted)) {
        argmax_shifted = j;
      }
    }
    CHECK(argmax_base == argmax_shifted);
    for (std::size_t j = 0; j < c.classes; ++j) {
      CHECK(shifted.probs.at(i, j) == doctest::Approx(base.probs.at(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("checkpoint round trip reproduces eval outputs bitwise") {
  TempDir tmp;
  const Vocabulary vocab =
      Vocabulary::build({{"one", "two", "three", "four", "five"}}, 1, 100);
  ModelConfig c = toy_config(Arch::BilstmAttn, 71);
  c.vocab_size = vocab.size();
  Model model(c);
  const std::vector<std::string> classes = {"A", "B", "C"};

  const std::string path = tmp.file("model.ckpt");
  save_checkpoint(path, model, vocab, classes);
  LoadedModel loaded = load_checkpoint(path);
  CHECK(loaded.class_names == classes);
  CHECK(loaded.vocab.size() == vocab.size());
  CHECK(loaded.vocab.id_of("three") == vocab.id_of("three"));

  Batch batch = toy_batch(c, 72);
  for (auto& row : batch.ids) {
    for (int& id : row) id = id % static_cast<int>(vocab.size());
  }
  for (auto& id : batch.ids[0]) id = std::max(id, 2);
  for (auto& id : batch.ids[1]) id = std::max(id, 2);
  Rng rng(0);
  const auto a = model.forward(batch, Mode::Eval, rng);
  const auto b = loaded.model->forward(batch, Mode::Eval, rng);
  CHECK(a.probs == b.probs);  // bitwise
}

TEST_CASE("checkpoint loader rejects damage") {
  TempDir tmp;
  const Vocabulary vocab = Vocabulary::build({{"one", "two"}}, 1, 100);
  ModelConfig c = toy_config(Arch::Lstm, 81);
  c.vocab_size = vocab.size();
  Model model(c);
  const std::string path = tmp.file("model.ckpt");
  save_checkpoint(path, model, vocab, {"A", "B", "C"});

  const std::string bytes = ntc::testing::read_file(path);

  SUBCASE("bad magic") {
    ntc::testing::write_file(tmp.file("bad.ckpt"), "XXXX" + bytes.substr(4));
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.file("bad.ckpt")),
                         doctest::Contains("magic"), std::runtime_error);
  }
  SUBCASE("truncated data") {
    ntc::testing::write_file(tmp.file("trunc.ckpt"), bytes.substr(0, bytes.size() - 9));
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.file("trunc.ckpt")),
                         doctest::Contains("truncated"), std::runtime_error);
  }
  SUBCASE("trailing bytes") {
    ntc::testing::write_file(tmp.file("extra.ckpt"), bytes + "x");
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.file("extra.ckpt")),
                         doctest::Contains("trailing"), std::runtime_error);
  }
  SUBCASE("manifest mismatch") {
    std::string tampered = bytes;
    const auto pos = tampered.find("param=lstm.W_i 8 4");
    REQUIRE(pos != std::string::npos);
    tampered.replace(pos, 18, "param=lstm.W_i 4 8");
    ntc::testing::write_file(tmp.file("manifest.ckpt"), tampered);
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.file("manifest.ckpt")),
                         doctest::Contains("manifest"), std::runtime_error);
  }
}

TEST_CASE("cnn handles texts shorter than the widest filter") {
  const Vocabulary vocab = Vocabulary::build({{"tiny", "text"}}, 1, 100);
  ModelConfig c = toy_config(Arch::Cnn, 91);
  c.vocab_size = vocab.size();
  Model model(c);
  const auto pred = model.predict("tiny", vocab);  // 1 token < width 5
  double sum = 0.0;
  for (std::size_t j = 0; j < c.classes; ++j) sum += pred.probs[j];
  CHECK(std::fabs(sum - 1.0) < 1e-9);

  ModelConfig bad = toy_config(Arch::Cnn);
  bad.max_len = 4;  // narrower than the widest filter
  CHECK_THROWS_AS(Model{bad}, std::invalid_argument);
}
