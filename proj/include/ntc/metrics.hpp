#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ntc {

// K x K counts; entry [i][j] = examples with true class i predicted as j.
struct ConfusionMatrix {
  std::vector<std::vector<std::int64_t>> counts;
  std::size_t classes() const { return counts.size(); }
  std::int64_t total() const;
};

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels,
                          std::size_t num_classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  // 0/0 quotients are reported as 0 with the matching flag set.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;  // mean of per-class F1, not F1 of the macro P/R
  double accuracy = 0.0;
};

// 2PR/(P+R); 0 when both are 0.
double f1_score(double precision, double recall);

// Per class k: a = cm[k][k], b = sum_{i != k} cm[i][k], c = sum_{j != k}
// cm[k][j]; precision = a/(a+b), recall = a/(a+c), f1 = 2PR/(P+R).
MetricsReport precision_recall_f1(const ConfusionMatrix& cm);

// Micro-averaged P/R/F1 collapse to accuracy for single-label data; exposed
// for the --micro reporting flag.
double micro_average(const ConfusionMatrix& cm);

// Table-1-style comparison: one row per named report, macro P/R/F1 at 3
// decimals. The CSV twin keeps full precision and carries accuracy too.
std::string render_report_table(const std::vector<std::string>& names,
                                const std::vector<MetricsReport>& reports);
std::string render_report_csv(const std::vector<std::string>& names,
                              const std::vector<MetricsReport>& reports);

}  // namespace ntc
