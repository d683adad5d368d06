#include "augpipe/report.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "augpipe/corruption.hpp"
#include "augpipe/errors.hpp"

namespace augpipe {

using nlohmann::json;

namespace {

std::string format_rate(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", r);
  return buf;
}

void check_report(const SweepReport& r) {
  for (double rate : r.rates) {
    if (!(rate >= 0.0 && rate <= 100.0)) {
      throw InvalidParameterError("success rate " + std::to_string(rate) + " outside [0,100]");
    }
  }
}

}  // namespace

int display_average(double mean) { return static_cast<int>(std::floor(mean + 0.5)); }

std::string aggregate_and_render(std::span<const SweepReport> reports, std::string_view format) {
  if (reports.empty()) throw InvalidParameterError("no reports to aggregate");
  const auto levels = sweep_levels();
  if (format == "csv") {
    std::string out = "task,method";
    for (const ExposureLevel& l : levels) out += ",e" + std::to_string(l.value);
    out += ",avg\n";
    for (const SweepReport& r : reports) {
      check_report(r);
      out += r.task + "," + r.method;
      for (double rate : r.rates) out += "," + format_rate(rate);
      out += "," + std::to_string(display_average(r.average)) + "\n";
    }
    return out;
  }
  if (format == "markdown") {
    std::string out = "| Task | Method |";
    for (const ExposureLevel& l : levels) out += " " + std::to_string(l.value) + " |";
    out += " AVG |\n|---|---|";
    for (std::size_t i = 0; i < levels.size(); ++i) out += "---|";
    out += "---|\n";
    for (const SweepReport& r : reports) {
      check_report(r);
      out += "| " + r.task + " | " + r.method + " |";
      for (double rate : r.rates) out += " " + format_rate(rate) + " |";
      out += " " + std::to_string(display_average(r.average)) + " |\n";
    }
    return out;
  }
  throw InvalidParameterError("unknown report format '" + std::string(format) +
                              "' (expected markdown or csv)");
}

std::string sweep_report_to_json(const SweepReport& report) {
  check_report(report);
  json j;
  j["task"] = report.task;
  j["method"] = report.method;
  json levels = json::array();
  for (const ExposureLevel& l : sweep_levels()) levels.push_back(l.value);
  j["levels"] = std::move(levels);
  json rates = json::array();
  for (double r : report.rates) rates.push_back(r);
  j["rates"] = std::move(rates);
  j["average"] = report.average;
  return j.dump(2) + "\n";
}

SweepReport sweep_report_from_json(std::string_view text, std::string_view origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw FormatError(std::string(origin) + ": not a JSON object");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "task" && key != "method" && key != "levels" && key != "rates" &&
        key != "average") {
      throw FormatError(std::string(origin) + ": unknown key '" + key + "'");
    }
  }
  SweepReport r;
  try {
    r.task = j.at("task").get<std::string>();
    r.method = j.at("method").get<std::string>();
    const auto levels = j.at("levels");
    const auto expected = sweep_levels();
    if (levels.size() != expected.size()) {
      throw FormatError(std::string(origin) + ": expected 10 levels");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (levels.at(i).get<int>() != expected[i].value) {
        throw FormatError(std::string(origin) + ": level order must be 10..170");
      }
    }
    const auto rates = j.at("rates");
    if (rates.size() != r.rates.size()) {
      throw FormatError(std::string(origin) + ": expected 10 rates");
    }
    for (std::size_t i = 0; i < r.rates.size(); ++i) r.rates[i] = rates.at(i).get<double>();
    r.average = j.at("average").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(origin) + ": " + e.what());
  }
  try {
    check_report(r);
  } catch (const Error& e) {
    throw FormatError(std::string(origin) + ": " + e.what());
  }
  double sum = 0.0;
  for (double rate : r.rates) sum += rate;
  if (std::fabs(sum / 10.0 - r.average) > 1e-9) {
    throw FormatError(std::string(origin) + ": stored average " + std::to_string(r.average) +
                      " does not equal the mean of the rates");
  }
  return r;
}

}  // namespace augpipe
