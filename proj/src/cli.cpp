#include "ntc/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "ntc/grad_check.hpp"
#include "ntc/metrics.hpp"
#include "ntc/model.hpp"
#include "ntc/plot.hpp"
#include "ntc/sgns.hpp"
#include "ntc/strutil.hpp"
#include "ntc/text.hpp"
#include "ntc/train.hpp"

namespace fs = std::filesystem;

namespace ntc::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitDiverged = 3;

// Binds a CLI option to a config-file key so a flat key=value file can fill
// in anything not given on the command line.
struct Binding {
  std::string key;
  CLI::Option* opt;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {
    config_opt_ = app->add_option("--config", config_path_,
                                  "flat key=value config file; explicit flags win");
  }

  template <typename T>
  CLI::Option* add(const std::string& flag, T& ref, const std::string& help) {
    CLI::Option* opt = app_->add_option(flag, ref, help);
    bind(flag, opt, ref);
    return opt;
  }

  CLI::Option* add_flag(const std::string& flag, bool& ref, const std::string& help) {
    CLI::Option* opt = app_->add_flag(flag, ref, help);
    bindings_.push_back({key_of(flag), opt,
                         [&ref](const std::string& v) {
                           if (v == "1" || v == "true") {
                             ref = true;
                           } else if (v == "0" || v == "false") {
                             ref = false;
                           } else {
                             throw std::invalid_argument("config: bad boolean \"" + v +
                                                         "\"");
                           }
                         },
                         [&ref] { return std::string(ref ? "1" : "0"); }});
    return opt;
  }

  // Applies the config file (if any), rejecting unknown keys, then echoes the
  // effective configuration.
  void finalize(const std::string& command) {
    if (!config_path_.empty()) apply_file();
    std::cout << "# effective config (" << command << ")\n";
    for (const auto& b : bindings_) {
      std::cout << b.key << "=" << b.get() << "\n";
    }
  }

 private:
  static std::string key_of(const std::string& flag) {
    // last long name, stripped of leading dashes
    std::string key = flag;
    const auto comma = key.rfind(',');
    if (comma != std::string::npos) key = key.substr(comma + 1);
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    return key;
  }

  template <typename T>
  void bind(const std::string& flag, CLI::Option* opt, T& ref) {
    bindings_.push_back({key_of(flag), opt,
                         [&ref](const std::string& v) {
                           std::stringstream ss(v);
                           T parsed;
                           ss >> parsed;
                           if (ss.fail() || !ss.eof()) {
                             throw std::invalid_argument("config: bad value \"" + v +
                                                         "\"");
                           }
                           ref = parsed;
                         },
                         [&ref] {
                           if constexpr (std::is_same_v<T, double>) {
                             return format_double(ref);
                           } else if constexpr (std::is_same_v<T, std::string>) {
                             return ref;
                           } else {
                             return std::to_string(ref);
                           }
                         }});
  }

  void apply_file() {
    std::ifstream in(config_path_);
    if (!in) throw std::invalid_argument("config: cannot read " + config_path_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument(strprintf("config: line %zu: expected key=value",
                                              line_no));
      }
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      auto it = std::find_if(bindings_.begin(), bindings_.end(),
                             [&](const Binding& b) { return b.key == key; });
      if (it == bindings_.end()) {
        throw std::invalid_argument("config: unknown key \"" + key + "\"");
      }
      if (it->opt->count() == 0) it->set(value);
    }
  }

  CLI::App* app_;
  CLI::Option* config_opt_;
  std::string config_path_;
  std::vector<Binding> bindings_;
};

// ----------------------------------------------------------------- prepare

struct PrepareArgs {
  std::string data;
  std::string classes = "4";
  double test_fraction = 0.2;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::size_t min_count = 2;
  std::size_t max_size = 50000;
};

std::vector<std::string> resolve_classes(const std::vector<NewsRecord>& records,
                                         const std::string& spec) {
  const bool numeric = !spec.empty() && std::all_of(spec.begin(), spec.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
  if (!numeric) {
    auto names = split(spec, ',');
    if (names.empty() || names[0].empty()) {
      throw std::invalid_argument("prepare: empty class list");
    }
    return names;
  }
  const std::size_t n = std::stoull(spec);
  if (n < 2) throw std::invalid_argument("prepare: need at least 2 classes");
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.category];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() < n) {
    throw std::invalid_argument(strprintf(
        "prepare: dataset has %zu categories, %zu requested", ranked.size(), n));
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(ranked[i].first);
  return names;
}

int cmd_prepare(const PrepareArgs& args) {
  LoadReport report;
  auto records = load_news_lines(args.data, {}, &report);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

  const auto class_names = resolve_classes(records, args.classes);
  std::map<std::string, int> label_of;
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    label_of[class_names[i]] = static_cast<int>(i);
  }

  std::vector<NewsRecord> kept;
  std::size_t dropped_empty = 0;
  for (auto& r : records) {
    auto it = label_of.find(r.category);
    if (it == label_of.end()) continue;
    if (tokenize(r.text()).empty()) {
      ++dropped_empty;
      std::cerr << "warning: record with empty text dropped (category "
                << r.category << ")\n";
      continue;
    }
    r.label = it->second;
    kept.push_back(std::move(r));
  }

  auto [train, test] = stratified_split(kept, args.test_fraction, args.seed);

  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(train.size());
  for (const auto& r : train) corpus.push_back(tokenize(r.text()));
  const Vocabulary vocab = Vocabulary::build(corpus, args.min_count, args.max_size);

  fs::create_directories(args.out_dir);
  write_news_lines(args.out_dir + "/train.jsonl", train);
  write_news_lines(args.out_dir + "/test.jsonl", test);
  vocab.save(args.out_dir + "/vocab.tsv");

  std::string summary;
  summary += strprintf("classes: %zu\n", class_names.size());
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    std::size_t n_train = 0, n_test = 0;
    for (const auto& r : train) n_train += r.label == static_cast<int>(i);
    for (const auto& r : test) n_test += r.label == static_cast<int>(i);
    summary += strprintf("  %zu %s train=%zu test=%zu\n", i, class_names[i].c_str(),
                         n_train, n_test);
  }
  summary += strprintf("vocabulary: %zu tokens (min_count=%zu, max_size=%zu)\n",
                       vocab.size(), args.min_count, args.max_size);
  summary += strprintf("records: kept=%zu train=%zu test=%zu dropped_empty=%zu\n",
                       kept.size(), train.size(), test.size(), dropped_empty);
  std::ofstream(args.out_dir + "/summary.txt", std::ios::binary) << summary;
  std::cout << summary;
  return kExitOk;
}

// ---------------------------------------------------------------- pretrain

struct PretrainArgs {
  std::string data;
  std::size_t dim = 200;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr = 0.025;
  double subsample = 1e-3;
  std::uint64_t seed = 1;
  std::string out;
};

std::vector<std::string> class_names_from_records(const std::vector<NewsRecord>& records) {
  std::map<int, std::string> by_label;
  for (const auto& r : records) {
    if (r.label < 0) {
      throw std::invalid_argument("dataset: record without label field; run prepare first");
    }
    auto [it, inserted] = by_label.emplace(r.label, r.category);
    if (!inserted && it->second != r.category) {
      throw std::invalid_argument(strprintf("dataset: label %d maps to both \"%s\" and \"%s\"",
                                            r.label, it->second.c_str(),
                                            r.category.c_str()));
    }
  }
  std::vector<std::string> names;
  for (const auto& [label, name] : by_label) {
    if (label != static_cast<int>(names.size())) {
      throw std::invalid_argument("dataset: label ids are not dense from 0");
    }
    names.push_back(name);
  }
  return names;
}

int cmd_pretrain(const PretrainArgs& args) {
  const Vocabulary vocab = Vocabulary::load(args.data + "/vocab.tsv");
  const auto records = load_news_lines(args.data + "/train.jsonl", {});

  std::vector<std::vector<int>> corpus;
  corpus.reserve(records.size());
  for (const auto& r : records) {
    std::vector<int> ids;
    for (const auto& tok : tokenize(r.text())) ids.push_back(vocab.id_of(tok));
    corpus.push_back(std::move(ids));
  }

  SgnsConfig config;
  config.dim = args.dim;
  config.window = args.window;
  config.negatives = args.negatives;
  config.epochs = args.epochs;
  config.learning_rate = args.lr;
  config.subsample = args.subsample;
  config.seed = args.seed;

  const SgnsResult result = sgns_train(corpus, vocab.size(), config);
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    std::cout << strprintf("epoch %zu/%zu: loss %.6f\n", e + 1, args.epochs,
                           result.epoch_losses[e]);
  }
  const std::string out = args.out.empty() ? args.data + "/embeddings.txt" : args.out;
  save_embeddings(out, result.table, vocab);
  std::cout << "wrote " << out << " (" << vocab.size() << " x " << args.dim << ")\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string arch = "bilstm-attn";
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double lr = 0.001;
  double dropout = 0.5;
  std::size_t hidden = 128;
  std::size_t embed_dim = 200;
  std::size_t max_len = 64;
  double lambda = 1e-4;
  std::string embed = "random";
  bool freeze_embedding = false;
  bool graph_round = false;
  std::uint64_t seed = 1;
  std::size_t restarts = 1;
  std::string out;
  std::string trace;
  std::string epoch_trace;
};

int cmd_train(const TrainArgs& args) {
  const Vocabulary vocab = Vocabulary::load(args.data + "/vocab.tsv");
  const auto train_records = load_news_lines(args.data + "/train.jsonl", {});
  const auto test_records = load_news_lines(args.data + "/test.jsonl", {});
  const auto class_names = class_names_from_records(train_records);

  const auto train_set = encode_records(train_records, vocab, args.max_len);
  const auto eval_set = encode_records(test_records, vocab, args.max_len);

  ModelConfig mc;
  mc.arch = arch_from_string(args.arch);
  mc.vocab_size = vocab.size();
  mc.embed_dim = args.embed_dim;
  mc.hidden = args.hidden;
  mc.classes = class_names.size();
  mc.max_len = args.max_len;
  mc.dropout = args.dropout;
  mc.lambda = args.lambda;
  mc.train_embedding = !args.freeze_embedding;
  mc.graph_round = args.graph_round;

  Tensor pretrained;
  if (args.embed != "random") {
    pretrained = load_embeddings(args.embed, vocab);
    if (pretrained.dim(1) != args.embed_dim) {
      throw std::invalid_argument(strprintf(
          "train: embedding file dim %zu != embed-dim %zu", pretrained.dim(1),
          args.embed_dim));
    }
  }

  const std::string out = args.out.empty() ? args.data + "/model-" + args.arch + ".ckpt"
                                           : args.out;
  const std::string trace = args.trace.empty() ? args.data + "/trace-" + args.arch + ".csv"
                                               : args.trace;
  const std::string epoch_trace =
      args.epoch_trace.empty() ? args.data + "/epochs-" + args.arch + ".csv"
                               : args.epoch_trace;

  double best_f1 = -1.0;
  std::size_t best_restart = 0;
  for (std::size_t r = 0; r < std::max<std::size_t>(args.restarts, 1); ++r) {
    const bool multi = args.restarts > 1;
    mc.seed = args.seed + r;
    std::unique_ptr<Model> model;
    if (args.embed != "random") {
      model = std::make_unique<Model>(mc, pretrained);
    } else {
      model = std::make_unique<Model>(mc);
    }

    TrainConfig tc;
    tc.epochs = args.epochs;
    tc.batch_size = args.batch_size;
    tc.seed = args.seed + r;
    tc.checkpoint_path = multi ? out + strprintf(".r%zu", r) : out;
    tc.trace_path = multi ? trace + strprintf(".r%zu", r) : trace;
    tc.epoch_trace_path = multi ? epoch_trace + strprintf(".r%zu", r) : epoch_trace;

    AdamConfig ac;
    ac.learning_rate = args.lr;

    TrainResult result = train(*model, train_set, eval_set, tc, ac, vocab, class_names);
    for (const auto& e : result.trace.epochs) {
      std::cout << strprintf(
          "epoch %zu/%zu: train_loss %.6f eval P %.3f R %.3f F1 %.3f\n", e.epoch,
          args.epochs, e.train_loss, e.precision, e.recall, e.f1);
    }
    std::cout << strprintf("restart %zu: best epoch %zu (macro-F1 %.4f)\n", r,
                           result.best_epoch, result.best_f1);
    if (result.best_f1 > best_f1) {
      best_f1 = result.best_f1;
      best_restart = r;
    }
  }

  if (args.restarts > 1) {
    for (std::size_t r = 0; r < args.restarts; ++r) {
      const std::string suffix = strprintf(".r%zu", r);
      if (r == best_restart) {
        fs::rename(out + suffix, out);
        fs::rename(trace + suffix, trace);
        fs::rename(epoch_trace + suffix, epoch_trace);
      } else {
        fs::remove(out + suffix);
        fs::remove(trace + suffix);
        fs::remove(epoch_trace + suffix);
      }
    }
  }
  std::cout << "wrote " << out << "\n";

  // Final report for the retained checkpoint.
  LoadedModel loaded = load_checkpoint(out);
  const MetricsReport report = evaluate(*loaded.model, eval_set, class_names.size());
  std::cout << render_report_table({args.arch}, {report});
  return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> ckpts;
  std::string data;
  std::string out_csv;
};

int cmd_eval(const EvalArgs& args) {
  std::vector<std::string> names;
  std::vector<MetricsReport> reports;
  for (const auto& path : args.ckpts) {
    LoadedModel loaded;
    try {
      loaded = load_checkpoint(path);
    } catch (const std::exception& e) {
      throw std::invalid_argument("eval: checkpoint " + path + ": " + e.what());
    }
    const auto records = load_news_lines(args.data, {});
    const auto examples =
        encode_records(records, loaded.vocab, loaded.model->config().max_len);
    for (const auto& ex : examples) {
      if (ex.label < 0) {
        throw std::invalid_argument("eval: dataset has records without labels");
      }
    }
    reports.push_back(evaluate(*loaded.model, examples, loaded.class_names.size()));
    names.push_back(arch_to_string(loaded.model->config().arch));
  }
  std::cout << render_report_table(names, reports);
  if (!args.out_csv.empty()) {
    std::ofstream(args.out_csv, std::ios::binary) << render_report_csv(names, reports);
  }
  return kExitOk;
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
  std::string ckpt;
  std::string text;
  bool show_attention = false;
};

int cmd_predict(const PredictArgs& args) {
  LoadedModel loaded = load_checkpoint(args.ckpt);
  Model::Prediction pred;
  try {
    pred = loaded.model->predict(args.text, loaded.vocab);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("predict: ") + e.what());
  }
  std::cout << "category: " << loaded.class_names[static_cast<std::size_t>(pred.label)]
            << "\n";
  std::cout << "probabilities:";
  for (std::size_t j = 0; j < pred.probs.size(); ++j) {
    std::cout << strprintf(" %s=%.4f", loaded.class_names[j].c_str(), pred.probs[j]);
  }
  std::cout << "\n";
  if (args.show_attention) {
    if (pred.alpha.empty()) {
      std::cout << "attention not available for architecture "
                << arch_to_string(loaded.model->config().arch) << "\n";
    } else {
      std::cout << "attention:";
      for (std::size_t t = 0; t < pred.tokens.size(); ++t) {
        std::cout << strprintf(" %s:%.4f", pred.tokens[t].c_str(), pred.alpha[t]);
      }
      std::cout << "\n";
    }
  }
  return kExitOk;
}

// --------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::string arch = "all";
  std::uint64_t seed = 1;
  std::size_t seeds = 5;
  double eps = 1e-5;
  double tol = 1e-4;
  bool corrupt = false;  // negative-control fixture
};

Batch toy_batch(const ModelConfig& config, Rng& rng) {
  Batch batch;
  const std::size_t b = 2;
  batch.labels = Tensor({b, config.classes});
  for (std::size_t i = 0; i < b; ++i) {
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

int cmd_gradcheck(const GradcheckArgs& args) {
  std::vector<std::string> tags;
  if (args.arch == "all") {
    tags = arch_tags();
  } else {
    arch_from_string(args.arch);  // validates
    tags = {args.arch};
  }

  bool all_ok = true;
  for (const auto& tag : tags) {
    ModelConfig config;
    config.arch = arch_from_string(tag);
    config.vocab_size = 50;
    config.embed_dim = 8;
    config.hidden = 4;
    config.classes = 3;
    config.max_len = 6;
    config.dropout = 0.5;
    config.lambda = 1e-3;

    // name/size layout for per-group reporting
    config.seed = args.seed;
    Model layout(config);
    struct Group {
      std::string name;
      std::size_t begin, end;
      double worst = 0.0;
    };
    std::vector<Group> groups;
    std::size_t offset = 0;
    for (const auto& p : layout.params().all()) {
      if (!p->trainable) continue;
      groups.push_back({p->name, offset, offset + p->value.size(), 0.0});
      offset += p->value.size();
    }

    double worst = 0.0;
    for (std::size_t s = 0; s < args.seeds; ++s) {
      config.seed = args.seed + s;
      Rng rng(config.seed * 7919 + 17);
      const Batch batch = toy_batch(config, rng);
      GradCheckReport report = model_grad_check(config, batch, Mode::Train,
                                                /*dropout_seed=*/config.seed + 101,
                                                args.eps, args.tol);
      if (args.corrupt) {
        // Fixture: pretend the backward produced a wrong entry so the
        // detector's failure path can be exercised end to end.
        report.flagged.push_back(0);
        report.max_rel_err = std::max(report.max_rel_err, 1.0);
        report.entries[0].rel_err = 1.0;
      }
      worst = std::max(worst, report.max_rel_err);
      for (auto& g : groups) {
        for (std::size_t i = g.begin; i < g.end; ++i) {
          g.worst = std::max(g.worst, report.entries[i].rel_err);
        }
      }
      if (!report.passed()) all_ok = false;
    }

    std::cout << strprintf("%-12s worst rel_err %.3e over %zu seeds: %s\n", tag.c_str(),
                           worst, args.seeds, worst < args.tol ? "PASS" : "FAIL");
    for (const auto& g : groups) {
      std::cout << strprintf("  %-22s %.3e\n", g.name.c_str(), g.worst);
    }
  }
  return all_ok ? kExitOk : kExitCheckFailed;
}

// -------------------------------------------------------------------- plot

struct PlotArgs {
  std::string trace;
  std::string out;
};

int cmd_plot(const PlotArgs& args) {
  const auto steps = parse_step_trace(args.trace);
  const std::string svg = render_loss_svg(steps);
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw std::runtime_error("plot: cannot write " + args.out);
  out << svg;
  std::cout << "wrote " << args.out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"news text classification experiments"};
  app.require_subcommand(1);

  auto* prepare = app.add_subcommand("prepare", "split a dataset and build the vocabulary");
  PrepareArgs pa;
  Options po(prepare);
  po.add("--data", pa.data, "line-delimited news dataset")->required();
  po.add("--classes", pa.classes, "class count (top-n by frequency) or comma list");
  po.add("--test-fraction", pa.test_fraction, "test fraction of each class");
  po.add("--seed", pa.seed, "split seed");
  po.add("--out-dir", pa.out_dir, "output directory")->required();
  po.add("--min-count", pa.min_count, "minimum token frequency");
  po.add("--max-size", pa.max_size, "maximum vocabulary size");

  auto* pretrain = app.add_subcommand("pretrain", "train skip-gram embeddings");
  PretrainArgs ta;
  Options to(pretrain);
  to.add("--data", ta.data, "prepared data directory")->required();
  to.add("--dim", ta.dim, "embedding dimension");
  to.add("--window", ta.window, "context window");
  to.add("--negatives", ta.negatives, "negative samples per pair");
  to.add("--epochs", ta.epochs, "training epochs");
  to.add("--lr", ta.lr, "initial learning rate");
  to.add("--subsample", ta.subsample, "frequent-word subsampling threshold");
  to.add("--seed", ta.seed, "seed");
  to.add("--out", ta.out, "embedding file (default <data>/embeddings.txt)");

  auto* train_cmd_app = app.add_subcommand("train", "train a classifier");
  TrainArgs ra;
  Options ro(train_cmd_app);
  ro.add("--data", ra.data, "prepared data directory")->required();
  ro.add("--arch", ra.arch, "rnn | cnn | lstm | bilstm | attn | bilstm-attn");
  ro.add("--epochs", ra.epochs, "training epochs");
  ro.add("--batch-size", ra.batch_size, "batch size");
  ro.add("--lr", ra.lr, "Adam learning rate");
  ro.add("--dropout", ra.dropout, "dropout rate");
  ro.add("--hidden", ra.hidden, "hidden units per direction");
  ro.add("--embed-dim", ra.embed_dim, "embedding dimension");
  ro.add("--max-len", ra.max_len, "maximum sequence length");
  ro.add("--lambda", ra.lambda, "L2 coefficient");
  ro.add("--embed", ra.embed, "\"random\" or a pretrained embedding file");
  ro.add_flag("--freeze-embedding", ra.freeze_embedding, "do not fine-tune embeddings");
  ro.add_flag("--graph-round", ra.graph_round,
              "experimental graph aggregation round (bilstm-attn)");
  ro.add("--seed", ra.seed, "seed");
  ro.add("--restarts", ra.restarts, "independent restarts; best eval F1 wins");
  ro.add("--out", ra.out, "checkpoint path (default <data>/model-<arch>.ckpt)");
  ro.add("--trace", ra.trace, "step trace CSV (default <data>/trace-<arch>.csv)");
  ro.add("--epoch-trace", ra.epoch_trace,
         "epoch trace CSV (default <data>/epochs-<arch>.csv)");

  auto* eval_cmd_app = app.add_subcommand("eval", "evaluate checkpoints on a dataset");
  EvalArgs ea;
  Options eo(eval_cmd_app);
  eval_cmd_app->add_option("--ckpt", ea.ckpts, "checkpoint file(s)")->required();
  eo.add("--data", ea.data, "labeled dataset file")->required();
  eo.add("--out-csv", ea.out_csv, "also write the report as CSV");

  auto* predict = app.add_subcommand("predict", "classify one text");
  PredictArgs da;
  Options dopt(predict);
  dopt.add("--ckpt", da.ckpt, "checkpoint file")->required();
  dopt.add("--text", da.text, "input text")->required();
  dopt.add_flag("--show-attention", da.show_attention, "print per-token weights");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  GradcheckArgs ga;
  Options go(gradcheck);
  go.add("--arch", ga.arch, "architecture tag or \"all\"");
  go.add("--seed", ga.seed, "base seed");
  go.add("--seeds", ga.seeds, "number of seeds");
  go.add("--eps", ga.eps, "finite-difference epsilon");
  go.add("--tol", ga.tol, "relative-error tolerance");
  gradcheck->add_flag("--corrupt", ga.corrupt)->group("");  // negative-control fixture

  auto* plot = app.add_subcommand("plot", "render a loss trace as SVG");
  PlotArgs la;
  Options lo(plot);
  lo.add("--trace", la.trace, "step trace CSV")->required();
  lo.add("--out", la.out, "output SVG path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (prepare->parsed()) {
      po.finalize("prepare");
      return cmd_prepare(pa);
    }
    if (pretrain->parsed()) {
      to.finalize("pretrain");
      return cmd_pretrain(ta);
    }
    if (train_cmd_app->parsed()) {
      ro.finalize("train");
      return cmd_train(ra);
    }
    if (eval_cmd_app->parsed()) {
      eo.finalize("eval");
      return cmd_eval(ea);
    }
    if (predict->parsed()) {
      dopt.finalize("predict");
      return cmd_predict(da);
    }
    if (gradcheck->parsed()) {
      go.finalize("gradcheck");
      return cmd_gradcheck(ga);
    }
    if (plot->parsed()) {
      lo.finalize("plot");
      return cmd_plot(la);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.last_good_checkpoint.empty()) {
      std::cerr << "last good checkpoint: " << e.last_good_checkpoint << "\n";
    }
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace ntc::cli
