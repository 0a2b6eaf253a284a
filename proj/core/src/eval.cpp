#include "enose/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace enose {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (const auto c : row) t += c;
  }
  return t;
}

std::int64_t ConfusionMatrix::row_sum(int i) const {
  std::int64_t t = 0;
  for (const auto c : counts[static_cast<std::size_t>(i)]) t += c;
  return t;
}

std::int64_t ConfusionMatrix::col_sum(int j) const {
  std::int64_t t = 0;
  for (const auto& row : counts) t += row[static_cast<std::size_t>(j)];
  return t;
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("confusion: length mismatch (" + std::to_string(y_true.size()) +
                                " vs " + std::to_string(y_pred.size()) + ")");
  }
  if (y_true.empty()) throw std::invalid_argument("confusion: empty label vectors");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses) {
      throw std::out_of_range("confusion: label out of range at position " + std::to_string(i));
    }
    cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] += 1;
  }
  return cm;
}

ConfusionMatrix confusion(const std::vector<GasLabel>& y_true,
                          const std::vector<GasLabel>& y_pred) {
  std::vector<int> t(y_true.size()), p(y_pred.size());
  std::transform(y_true.begin(), y_true.end(), t.begin(), class_index);
  std::transform(y_pred.begin(), y_pred.end(), p.begin(), class_index);
  return confusion(t, p);
}

EvalReport metrics(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw std::invalid_argument("metrics: all-zero confusion matrix");
  EvalReport rep;
  rep.cm = cm;
  std::int64_t trace = 0;
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  for (int i = 0; i < kNumClasses; ++i) {
    const auto ii = cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    trace += ii;
    const auto col = cm.col_sum(i);
    const auto row = cm.row_sum(i);
    rep.support[static_cast<std::size_t>(i)] = row;
    double p = 0.0, r = 0.0, f = 0.0;
    if (col > 0) {
      p = static_cast<double>(ii) / static_cast<double>(col);
    } else {
      rep.zero_denominator_warning = true;
    }
    if (row > 0) {
      r = static_cast<double>(ii) / static_cast<double>(row);
    } else {
      rep.zero_denominator_warning = true;
    }
    if (p + r > 0.0) {
      f = 2.0 * p * r / (p + r);
    } else {
      rep.zero_denominator_warning = true;
    }
    rep.precision[static_cast<std::size_t>(i)] = p;
    rep.recall[static_cast<std::size_t>(i)] = r;
    rep.f1[static_cast<std::size_t>(i)] = f;
    const auto s = static_cast<double>(row);
    sum_p += s * p;
    sum_r += s * r;
    sum_f += s * f;
  }
  rep.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  rep.precision_w = sum_p / static_cast<double>(total);
  rep.recall_w = sum_r / static_cast<double>(total);
  rep.f1_w = sum_f / static_cast<double>(total);
  return rep;
}

EvalReport evaluate_predictions(const std::string& model, const std::string& setting,
                                const std::vector<GasLabel>& y_true,
                                const std::vector<GasLabel>& y_pred) {
  EvalReport rep = metrics(confusion(y_true, y_pred));
  rep.model = model;
  rep.setting = setting;
  return rep;
}

namespace {

std::string fmt4(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

const std::array<const char*, 4> kModelOrder = {"GRU", "SVM", "RF", "KNN"};
const std::array<const char*, 2> kSettingOrder = {"two-sensor", "one-sensor"};

}  // namespace

ComparisonTable comparison_table(const std::vector<EvalReport>& reports) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& rep : reports) {
    if (!seen.emplace(rep.model, rep.setting).second) {
      throw std::invalid_argument("duplicate report for (" + rep.model + ", " + rep.setting + ")");
    }
  }
  const auto find = [&](const std::string& model,
                        const std::string& setting) -> const EvalReport* {
    for (const auto& rep : reports) {
      if (rep.model == model && rep.setting == setting) return &rep;
    }
    return nullptr;
  };

  // Row order: table order first, then any other models in input order.
  std::vector<std::string> model_rows;
  for (const auto* m : kModelOrder) {
    if (std::any_of(reports.begin(), reports.end(),
                    [&](const EvalReport& r) { return r.model == m; })) {
      model_rows.push_back(m);
    }
  }
  for (const auto& rep : reports) {
    if (std::find(model_rows.begin(), model_rows.end(), rep.model) == model_rows.end()) {
      model_rows.push_back(rep.model);
    }
  }

  ComparisonTable table;
  table.csv =
      "model,setting,accuracy,precision_w,recall_w,f1_w"
      ",p_H2,r_H2,f1_H2,s_H2,p_CO,r_CO,f1_CO,s_CO,p_MIX,r_MIX,f1_MIX,s_MIX"
      ",cm_H2_H2,cm_H2_CO,cm_H2_MIX,cm_CO_H2,cm_CO_CO,cm_CO_MIX,cm_MIX_H2,cm_MIX_CO,cm_MIX_MIX\n";
  for (const auto& rep : reports) {
    table.csv += rep.model + ',' + rep.setting + ',' + fmt4(rep.accuracy) + ',' +
                 fmt4(rep.precision_w) + ',' + fmt4(rep.recall_w) + ',' + fmt4(rep.f1_w);
    for (int c = 0; c < kNumClasses; ++c) {
      table.csv += ',' + fmt4(rep.precision[static_cast<std::size_t>(c)]) + ',' +
                   fmt4(rep.recall[static_cast<std::size_t>(c)]) + ',' +
                   fmt4(rep.f1[static_cast<std::size_t>(c)]) + ',' +
                   std::to_string(rep.support[static_cast<std::size_t>(c)]);
    }
    for (int i = 0; i < kNumClasses; ++i) {
      for (int j = 0; j < kNumClasses; ++j) {
        table.csv += ',' + std::to_string(
                               rep.cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      }
    }
    table.csv += '\n';
  }

  const int name_w = 8, cell_w = 11;
  const auto pad = [&](const std::string& s, int w) {
    return s + std::string(static_cast<std::size_t>(std::max(0, w - static_cast<int>(s.size()))),
                           ' ');
  };
  std::string& text = table.text;
  text = pad("Model", name_w);
  for (const auto* setting : kSettingOrder) {
    text += "| " + pad(setting, 4 * cell_w - 2) + ' ';
  }
  text += '\n';
  text += pad("", name_w);
  for (int g = 0; g < 2; ++g) {
    text += "| ";
    for (const auto* metric : {"Accuracy", "Precision", "Recall", "F1"}) {
      text += pad(metric, cell_w);
    }
    text.back() = ' ';
  }
  text += '\n';
  for (const auto& model : model_rows) {
    text += pad(model, name_w);
    for (const auto* setting : kSettingOrder) {
      text += "| ";
      if (const auto* rep = find(model, setting)) {
        for (const double v : {rep->accuracy, rep->precision_w, rep->recall_w, rep->f1_w}) {
          text += pad(fmt4(v), cell_w);
        }
      } else {
        for (int i = 0; i < 4; ++i) text += pad("-", cell_w);
      }
      text.back() = ' ';
    }
    text += '\n';
  }
  bool any_warning = false;
  for (const auto& rep : reports) any_warning |= rep.zero_denominator_warning;
  if (any_warning) {
    text += "note: some metrics had zero-denominator classes and were reported as 0\n";
  }
  return table;
}

void write_report_files(const std::filesystem::path& out_dir,
                        const std::vector<EvalReport>& reports) {
  const ComparisonTable table = comparison_table(reports);
  {
    std::ofstream out(out_dir / "report.csv", std::ios::binary);
    if (!out) throw std::runtime_error((out_dir / "report.csv").string() + ": cannot open");
    out << table.csv;
  }
  {
    std::ofstream out(out_dir / "report.txt", std::ios::binary);
    if (!out) throw std::runtime_error((out_dir / "report.txt").string() + ": cannot open");
    out << table.text;
  }
}

}  // namespace enose
