#include "ntc/metrics.hpp"

#include <stdexcept>

#include "ntc/strutil.hpp"

namespace ntc {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t n = 0;
  for (const auto& row : counts) {
    for (std::int64_t v : row) n += v;
  }
  return n;
}

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels,
                          std::size_t num_classes) {
  if (preds.size() != labels.size()) {
    throw std::invalid_argument(strprintf("confusion: %zu predictions vs %zu labels",
                                          preds.size(), labels.size()));
  }
  ConfusionMatrix cm;
  cm.counts.assign(num_classes, std::vector<std::int64_t>(num_classes, 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], t = labels[i];
    if (p < 0 || t < 0 || static_cast<std::size_t>(p) >= num_classes ||
        static_cast<std::size_t>(t) >= num_classes) {
      throw std::invalid_argument(
          strprintf("confusion: class id out of range at index %zu", i));
    }
    ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return cm;
}

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

MetricsReport precision_recall_f1(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes();
  if (k == 0) throw std::invalid_argument("metrics: empty confusion matrix");

  MetricsReport report;
  report.per_class.resize(k);
  std::int64_t trace = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::int64_t tp = cm.counts[c][c];
    std::int64_t fp = 0, fn = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == c) continue;
      fp += cm.counts[i][c];
      fn += cm.counts[c][i];
    }
    ClassMetrics& m = report.per_class[c];
    m.support = tp + fn;
    if (tp + fp == 0) {
      m.precision_undefined = true;
    } else {
      m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn == 0) {
      m.recall_undefined = true;
    } else {
      m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (m.precision + m.recall == 0.0) {
      m.f1_undefined = true;
    } else {
      m.f1 = f1_score(m.precision, m.recall);
    }
    trace += tp;
    report.macro_precision += m.precision;
    report.macro_recall += m.recall;
    report.macro_f1 += m.f1;
  }
  report.macro_precision /= static_cast<double>(k);
  report.macro_recall /= static_cast<double>(k);
  report.macro_f1 /= static_cast<double>(k);
  const std::int64_t total = cm.total();
  report.accuracy = total > 0 ? static_cast<double>(trace) / static_cast<double>(total)
                              : 0.0;
  return report;
}

double micro_average(const ConfusionMatrix& cm) {
  std::int64_t trace = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) trace += cm.counts[c][c];
  const std::int64_t total = cm.total();
  return total > 0 ? static_cast<double>(trace) / static_cast<double>(total) : 0.0;
}

std::string render_report_table(const std::vector<std::string>& names,
                                const std::vector<MetricsReport>& reports) {
  if (names.empty() || names.size() != reports.size()) {
    throw std::invalid_argument("report: need one name per report");
  }
  std::size_t width = 5;  // "Model"
  for (const auto& n : names) width = std::max(width, n.size());
  std::string out = strprintf("%-*s  Precision  Recall  F1\n",
                              static_cast<int>(width), "Model");
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += strprintf("%-*s  %9.3f  %6.3f  %5.3f\n", static_cast<int>(width),
                     names[i].c_str(), reports[i].macro_precision,
                     reports[i].macro_recall, reports[i].macro_f1);
  }
  return out;
}

std::string render_report_csv(const std::vector<std::string>& names,
                              const std::vector<MetricsReport>& reports) {
  if (names.empty() || names.size() != reports.size()) {
    throw std::invalid_argument("report: need one name per report");
  }
  std::string out = "model,precision,recall,f1,accuracy\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += names[i] + "," + format_double(reports[i].macro_precision) + "," +
           format_double(reports[i].macro_recall) + "," +
           format_double(reports[i].macro_f1) + "," +
           format_double(reports[i].accuracy) + "\n";
  }
  return out;
}

}  // namespace ntc
