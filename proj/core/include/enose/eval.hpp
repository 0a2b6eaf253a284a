#pragma once

#include "enose/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace enose {

struct ConfusionMatrix {
  // rows = true class, columns = predicted class
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

  std::int64_t total() const;
  std::int64_t row_sum(int i) const;
  std::int64_t col_sum(int j) const;
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);
ConfusionMatrix confusion(const std::vector<GasLabel>& y_true,
                          const std::vector<GasLabel>& y_pred);

struct EvalReport {
  std::string model;
  std::string setting;  // "two-sensor" | "one-sensor"
  double accuracy = 0.0;
  std::array<double, kNumClasses> precision{}, recall{}, f1{};
  std::array<std::int64_t, kNumClasses> support{};
  double precision_w = 0.0, recall_w = 0.0, f1_w = 0.0;
  ConfusionMatrix cm;
  bool zero_denominator_warning = false;  // some metric fell back to 0
};

// P_i = cm[i][i]/colsum_i, R_i = cm[i][i]/rowsum_i, F_i = 2PR/(P+R), each 0
// on a zero denominator; weighted X = sum s_i X_i / sum s_i. Weighted recall
// equals accuracy identically.
EvalReport metrics(const ConfusionMatrix& cm);

EvalReport evaluate_predictions(const std::string& model, const std::string& setting,
                                const std::vector<GasLabel>& y_true,
                                const std::vector<GasLabel>& y_pred);

struct ComparisonTable {
  std::string csv;   // full report schema, one row per (model, setting)
  std::string text;  // aligned table: model rows x sensor-setting groups
};

// Rows follow GRU, SVM, RF, KNN order; missing (model, setting) cells render
// as a dash. Duplicate pairs are an error.
ComparisonTable comparison_table(const std::vector<EvalReport>& reports);

// report.csv + report.txt
void write_report_files(const std::filesystem::path& out_dir,
                        const std::vector<EvalReport>& reports);

}  // namespace enose
