#include "ntc/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "ntc/strutil.hpp"

namespace ntc {

Adam::Adam(const ParamSet& params, const AdamConfig& config) : config_(config) {
  for (const auto& p : params.all()) {
    if (!p->trainable) continue;
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::step(ParamSet& params) {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  std::size_t slot = 0;
  for (const auto& p : params.all()) {
    if (!p->trainable) continue;
    if (!p->grad.all_finite()) {
      throw std::runtime_error("adam: non-finite gradient in parameter " + p->name);
    }
    Tensor& m = m_[slot];
    Tensor& v = v_[slot];
    ++slot;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / corr1;
      const double v_hat = v[i] / corr2;
      p->value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void write_step_trace(const std::string& path, const LossTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trace: cannot write " + path);
  out << "epoch,step,loss\n";
  for (const auto& s : trace.steps) {
    out << s.epoch << ',' << s.step << ',' << format_double(s.loss) << '\n';
  }
}

void write_epoch_trace(const std::string& path, const LossTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trace: cannot write " + path);
  out << "epoch,train_loss,precision,recall,f1\n";
  for (const auto& e : trace.epochs) {
    out << e.epoch << ',' << format_double(e.train_loss) << ','
        << format_double(e.precision) << ',' << format_double(e.recall) << ','
        << format_double(e.f1) << '\n';
  }
}

std::vector<StepRecord> parse_step_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("trace: cannot read " + path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != "epoch,step,loss") {
    throw std::runtime_error("trace: line 1: expected header \"epoch,step,loss\" in " +
                             path);
  }
  line_no = 1;
  std::vector<StepRecord> steps;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    StepRecord rec;
    try {
      if (parts.size() != 3) throw std::invalid_argument("need 3 fields");
      rec.epoch = std::stoull(parts[0]);
      rec.step = std::stoull(parts[1]);
      std::size_t used = 0;
      rec.loss = std::stod(parts[2], &used);
      if (used != parts[2].size()) throw std::invalid_argument("bad loss");
    } catch (const std::exception&) {
      throw std::runtime_error(strprintf("trace: line %zu: malformed row in %s",
                                         line_no, path.c_str()));
    }
    steps.push_back(rec);
  }
  return steps;
}

std::vector<int> predict_labels(Model& model, const std::vector<Example>& examples,
                                std::size_t batch_size) {
  std::vector<int> preds;
  preds.reserve(examples.size());
  Rng rng(0);  // eval mode draws nothing
  const auto batches = batch_iter(examples, batch_size, model.config().classes,
                                  /*shuffle=*/false, /*seed=*/0);
  for (const auto& batch : batches) {
    auto fr = model.forward(batch, Mode::Eval, rng);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      int best = 0;
      for (std::size_t j = 1; j < model.config().classes; ++j) {
        if (fr.probs.at(i, j) > fr.probs.at(i, static_cast<std::size_t>(best))) {
          best = static_cast<int>(j);
        }
      }
      preds.push_back(best);
    }
  }
  return preds;
}

MetricsReport evaluate(Model& model, const std::vector<Example>& examples,
                       std::size_t num_classes) {
  const std::vector<int> preds = predict_labels(model, examples);
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const auto& ex : examples) labels.push_back(ex.label);
  return precision_recall_f1(confusion(preds, labels, num_classes));
}

TrainResult train(Model& model, const std::vector<Example>& train_set,
                  const std::vector<Example>& eval_set, const TrainConfig& config,
                  const AdamConfig& adam_config, const Vocabulary& vocab,
                  const std::vector<std::string>& class_names) {
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (config.epochs < 1 || config.batch_size < 1) {
    throw std::invalid_argument("train: epochs and batch_size must be >= 1");
  }

  Adam adam(model.params(), adam_config);
  // One dropout stream for the whole run, offset from the shuffle seeds.
  Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::ofstream step_out, epoch_out;
  if (!config.trace_path.empty()) {
    step_out.open(config.trace_path, std::ios::binary);
    if (!step_out) throw std::runtime_error("trace: cannot write " + config.trace_path);
    step_out << "epoch,step,loss\n";
  }
  if (!config.epoch_trace_path.empty()) {
    epoch_out.open(config.epoch_trace_path, std::ios::binary);
    if (!epoch_out) {
      throw std::runtime_error("trace: cannot write " + config.epoch_trace_path);
    }
    epoch_out << "epoch,train_loss,precision,recall,f1\n";
  }

  TrainResult result;
  double best_f1 = -1.0;
  std::string last_good;
  std::size_t global_step = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = batch_iter(train_set, config.batch_size,
                                    model.config().classes, /*shuffle=*/true,
                                    config.seed + epoch);
    double epoch_loss = 0.0;
    for (const auto& batch : batches) {
      model.params().zero_grads();
      auto fr = model.forward(batch, Mode::Train, dropout_rng);
      const double loss = model.backward(fr, batch);
      if (!std::isfinite(loss)) {
        if (!config.trace_path.empty()) write_step_trace(config.trace_path, result.trace);
        throw DivergenceError(
            strprintf("train: non-finite loss at epoch %zu step %zu", epoch,
                      global_step + 1),
            last_good);
      }
      adam.step(model.params());
      ++global_step;
      result.trace.steps.push_back({epoch, global_step, loss});
      if (step_out.is_open()) {
        step_out << epoch << ',' << global_step << ',' << format_double(loss) << '\n';
        step_out.flush();
      }
      epoch_loss += loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(batches.size());
    if (!eval_set.empty()) {
      const MetricsReport report = evaluate(model, eval_set, model.config().classes);
      rec.precision = report.macro_precision;
      rec.recall = report.macro_recall;
      rec.f1 = report.macro_f1;
      result.final_eval = report;
      if (report.macro_f1 > best_f1) {
        best_f1 = report.macro_f1;
        result.best_epoch = epoch;
        result.best_f1 = report.macro_f1;
        if (!config.checkpoint_path.empty()) {
          save_checkpoint(config.checkpoint_path, model, vocab, class_names);
          last_good = config.checkpoint_path;
        }
      }
    } else if (!config.checkpoint_path.empty()) {
      // No eval set: keep the latest parameters.
      save_checkpoint(config.checkpoint_path, model, vocab, class_names);
      last_good = config.checkpoint_path;
      result.best_epoch = epoch;
    }
    result.trace.epochs.push_back(rec);
    if (epoch_out.is_open()) {
      epoch_out << rec.epoch << ',' << format_double(rec.train_loss) << ','
                << format_double(rec.precision) << ',' << format_double(rec.recall)
                << ',' << format_double(rec.f1) << '\n';
      epoch_out.flush();
    }
  }
  return result;
}

}  // namespace ntc
