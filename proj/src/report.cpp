#include "ifl/report.hpp"

#include <fmt/format.h>

#include "ifl/error.hpp"

namespace ifl {

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

struct FinalCohort {
  double mseSum = 0.0;
  std::size_t tasks = 0;
};

// Cohort -> mean over its final members of each task's last recorded held-out MSE.
std::map<std::string, FinalCohort> final_mse(const nlohmann::json& report) {
  std::map<std::string, double> lastMse;
  for (const auto& r : report.at("rounds"))
    for (const auto& t : r.at("perTask")) lastMse[t.at("taskId").get<std::string>()] = t.at("evalMetrics").at("mse").get<double>();
  std::map<std::string, FinalCohort> out;
  for (const auto& [task, cohort] : report.at("finalAssignment").items()) {
    auto& fc = out[cohort.get<std::string>()];
    if (const auto it = lastMse.find(task); it != lastMse.end()) {
      fc.mseSum += it->second;
      ++fc.tasks;
    }
  }
  return out;
}

std::optional<double> report_ari(const nlohmann::json& report) {
  if (!report.contains("groundTruth")) return std::nullopt;
  const auto truth = report.at("groundTruth").get<std::map<TaskId, std::string>>();
  const auto assignment = report.at("finalAssignment").get<Assignment>();
  return adjusted_rand_index(truth, assignment);
}

std::string event_detail(const nlohmann::json& e) {
  const auto kind = e.at("kind").get<std::string>();
  if (kind == "split") {
    std::string into;
    for (const auto& c : e.at("into")) into += fmt::format(" {}{}", c.at("id").get<std::string>(), c.at("taskIds").dump());
    return fmt::format("{} ->{}", e.at("cohort").get<std::string>(), into);
  }
  if (kind == "merge")
    return fmt::format("{} -> {}{}", e.at("cohorts").dump(), e.at("into").at("id").get<std::string>(), e.at("into").at("taskIds").dump());
  return fmt::format("{} {} -> {}", e.at("task").get<std::string>(), e.at("from").get<std::string>(), e.at("to").get<std::string>());
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

double adjusted_rand_index(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "", "labelings differ in length");
  std::map<std::pair<std::string, std::string>, double> joint;
  std::map<std::string, double> rows;
  std::map<std::string, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [k, n] : joint) index += choose2(n);
  double sumRows = 0.0;
  double sumCols = 0.0;
  for (const auto& [k, n] : rows) sumRows += choose2(n);
  for (const auto& [k, n] : cols) sumCols += choose2(n);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sumRows * sumCols / total : 0.0;
  const double maximum = 0.5 * (sumRows + sumCols);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

double adjusted_rand_index(const std::map<TaskId, std::string>& truth, const Assignment& assignment) {
  std::vector<std::string> a;
  std::vector<std::string> b;
  for (const auto& [task, label] : truth)
    if (const auto it = assignment.find(task); it != assignment.end()) {
      a.push_back(label);
      b.push_back(it->second);
    }
  return adjusted_rand_index(a, b);
}

void write_metrics_csv(std::ostream& out, const RunReport& report) {
  out << kMetricsCsvHeader << '\n';
  for (const auto& r : report.rounds)
    for (const auto& t : r.perTask) {
      out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.round, r.cohortId, t.taskId, t.evalMetrics.mse,
                         t.trainMetrics ? fmt::format("{}", t.trainMetrics->finalLoss) : std::string(),
                         t.qoiReport ? fmt::format("{}", t.qoiReport->score) : std::string(), t.uplinkTicks, t.downlinkTicks,
                         r.convergenceDelta);
    }
}

std::string summarize_text(const nlohmann::json& report) {
  std::string out = fmt::format("scenario: {}\nstop reason: {}\nrounds recorded: {}\n\n", report.at("scenarioId").get<std::string>(),
                                report.at("stopReason").get<std::string>(), report.at("rounds").size());
  out += "final held-out MSE per cohort\n";
  out += fmt::format("  {:<10} {:>6} {:>14}\n", "cohort", "tasks", "mean mse");
  for (const auto& [cohort, fc] : final_mse(report))
    out += fmt::format("  {:<10} {:>6} {:>14.6g}\n", cohort, fc.tasks, fc.tasks ? fc.mseSum / static_cast<double>(fc.tasks) : 0.0);

  out += "\ncohort events\n";
  if (report.at("cohortEvents").empty()) out += "  (none)\n";
  for (const auto& e : report.at("cohortEvents"))
    out += fmt::format("  round {:>4}  {:<5}  {}\n", e.at("round").get<int>(), e.at("kind").get<std::string>(), event_detail(e));

  out += "\noptimizer decisions\n";
  if (report.at("optimizerEvents").empty()) out += "  (none)\n";
  for (const auto& e : report.at("optimizerEvents")) {
    out += fmt::format("  round {:>4}  {:<10}  cost {:.6g} (current {:.6g}), {} move(s)\n", e.at("round").get<int>(),
                       e.at("strategy").get<std::string>(), e.at("cost").get<double>(), e.at("currentCost").get<double>(),
                       e.at("moves").size());
    for (const auto& m : e.at("moves"))
      out += fmt::format("    {} {} -> {}\n", m.at("task").get<std::string>(), m.at("from").get<std::string>(), m.at("to").get<std::string>());
  }
  if (const auto ari = report_ari(report)) out += fmt::format("\nARI vs ground truth: {:.6g}\n", *ari);
  return out;
}

std::string summarize_csv(const nlohmann::json& report) {
  std::string out = "section,key,field,value\n";
  out += fmt::format("run,{},stopReason,{}\n", report.at("scenarioId").get<std::string>(), report.at("stopReason").get<std::string>());
  for (const auto& [cohort, fc] : final_mse(report)) {
    out += fmt::format("final_mse,{},tasks,{}\n", cohort, fc.tasks);
    out += fmt::format("final_mse,{},mean,{}\n", cohort, fc.tasks ? fc.mseSum / static_cast<double>(fc.tasks) : 0.0);
  }
  for (const auto& e : report.at("cohortEvents"))
    out += fmt::format("cohort_event,{},{},{}\n", e.at("round").get<int>(), e.at("kind").get<std::string>(), csv_quote(event_detail(e)));
  for (const auto& e : report.at("optimizerEvents")) {
    const auto round = e.at("round").get<int>();
    out += fmt::format("optimizer,{},cost,{}\n", round, e.at("cost").get<double>());
    out += fmt::format("optimizer,{},currentCost,{}\n", round, e.at("currentCost").get<double>());
    out += fmt::format("optimizer,{},moves,{}\n", round, e.at("moves").size());
  }
  if (const auto ari = report_ari(report)) out += fmt::format("ari,groundTruth,value,{}\n", *ari);
  return out;
}

}  // namespace ifl
