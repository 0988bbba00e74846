#pragma once

/// @file report.hpp
/// @brief CSV / JSON emission of experiment rows with a fixed field order.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "../errors.hpp"
#include "experiment.hpp"

namespace mspg {

inline constexpr const char* kReportHeader =
    "example,alpha,H,h,m_trial,L_test,eigenproblem,online_iter,err_ms_pct,err_proj_pct,w_norm,"
    "min_lambda_excluded,infsup_est";

namespace detail {

inline std::string format_real(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.10g}", v);
}

inline nlohmann::json json_real(double v)
{
  if (std::isfinite(v))
    return v;
  return format_real(v);
}

inline double real_from_json(const nlohmann::json& j)
{
  if (j.is_number())
    return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf")
    return std::numeric_limits<double>::infinity();
  if (s == "-inf")
    return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline std::string format_csv(const std::vector<ReportRow>& rows)
{
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.example, detail::format_real(r.alpha),
                       detail::format_real(r.H), detail::format_real(r.h), r.m_trial, r.L_test, r.eigenproblem,
                       r.online_iter, detail::format_real(r.err_ms_pct), detail::format_real(r.err_proj_pct),
                       detail::format_real(r.w_norm), detail::format_real(r.min_lambda_excluded),
                       detail::format_real(r.infsup_est));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const std::vector<ReportRow>& rows)
{
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["example"] = r.example;
    j["alpha"] = detail::json_real(r.alpha);
    j["H"] = detail::json_real(r.H);
    j["h"] = detail::json_real(r.h);
    j["m_trial"] = r.m_trial;
    j["L_test"] = r.L_test;
    j["eigenproblem"] = r.eigenproblem;
    j["online_iter"] = r.online_iter;
    j["err_ms_pct"] = detail::json_real(r.err_ms_pct);
    j["err_proj_pct"] = detail::json_real(r.err_proj_pct);
    j["w_norm"] = detail::json_real(r.w_norm);
    j["min_lambda_excluded"] = detail::json_real(r.min_lambda_excluded);
    j["infsup_est"] = detail::json_real(r.infsup_est);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<ReportRow> rows_from_json(const nlohmann::json& arr)
{
  std::vector<ReportRow> rows;
  try {
    for (const auto& j : arr) {
      ReportRow r;
      r.example = j.at("example").get<int>();
      r.alpha = detail::real_from_json(j.at("alpha"));
      r.H = detail::real_from_json(j.at("H"));
      r.h = detail::real_from_json(j.at("h"));
      r.m_trial = j.at("m_trial").get<int>();
      r.L_test = j.at("L_test").get<int>();
      r.eigenproblem = j.at("eigenproblem").get<int>();
      r.online_iter = j.at("online_iter").get<int>();
      r.err_ms_pct = detail::real_from_json(j.at("err_ms_pct"));
      r.err_proj_pct = detail::real_from_json(j.at("err_proj_pct"));
      r.w_norm = detail::real_from_json(j.at("w_norm"));
      r.min_lambda_excluded = detail::real_from_json(j.at("min_lambda_excluded"));
      r.infsup_est = detail::real_from_json(j.at("infsup_est"));
      rows.push_back(r);
    }
  }
  catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::parse, std::string("report JSON: ") + e.what());
  }
  return rows;
}

inline std::string format_report(const std::vector<ReportRow>& rows, const std::string& format)
{
  if (format == "csv")
    return format_csv(rows);
  if (format == "json")
    return to_json(rows).dump(2) + "\n";
  throw Error(ErrorCategory::config, "unknown report format '" + format + "' (csv or json)");
}

/// Writes the report to `path`, or to stdout when path is empty or "-".
inline void emit_report(const std::vector<ReportRow>& rows, const std::string& format, const std::string& path)
{
  if (rows.empty())
    throw Error(ErrorCategory::config, "no report rows to emit");
  const std::string text = format_report(rows, format);
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCategory::io, "cannot write report to '" + path + "'");
  out << text;
  if (!out)
    throw Error(ErrorCategory::io, "failed writing report to '" + path + "'");
}

}  // namespace mspg
