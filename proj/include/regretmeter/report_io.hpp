// Copyright 2026 The regretmeter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "regretmeter/metrics.hpp"

namespace regretmeter {

// Marker written for undefined values (0/0 ratios, missing metrics).
inline constexpr const char* kUndefined = "undefined";

// Minimal RFC 4180 CSV: fields containing ',', '"' or newlines are quoted.
std::string CsvEscape(const std::string& field);
std::vector<std::string> ParseCsvLine(const std::string& line);
// Reads a header plus rows; throws ParseError on ragged rows or a header
// that differs from `expected_header` (when non-empty).
std::vector<std::vector<std::string>> ReadCsv(std::istream& in,
                                              const std::vector<std::string>& expected_header);

std::string FormatOptional(const std::optional<double>& x);
std::optional<double> ParseOptional(const std::string& field);

// Exposure report: one row per l.
//   l,eps_le_l,R_le_l,acc_err,pct_ex_acc_err,bound_lo,bound_hi,stderr,
//   eps_stderr,acc_err_stderr,pct_ex_acc_err_stderr,active
const std::vector<std::string>& ExposureCsvHeader();
void WriteExposureCsv(std::ostream& out, const std::vector<ExposureRow>& rows);
std::vector<ExposureRow> ReadExposureCsv(std::istream& in);

// Generation quality, one row per (model, spec), in summary-table column order:
//   model,spec,pct_ex_acc_err,seq_rep_4,rep128,wrep128,uniq
struct QualityRow {
  std::string model;
  std::string spec;
  std::optional<double> pct_ex_acc_err;
  std::optional<double> seq_rep_4;
  std::optional<double> rep128;
  std::optional<double> wrep128;
  std::size_t uniq = 0;
};
const std::vector<std::string>& QualityCsvHeader();
void WriteQualityCsv(std::ostream& out, const std::vector<QualityRow>& rows);
std::vector<QualityRow> ReadQualityCsv(std::istream& in);

// Per (model, spec) scalars at the final horizon L, used for the
// perplexity/error scatter:
//   model,spec,horizon,entropy_rate,perplexity,eps,regret,regret_per_l,
//   acc_err,pct_ex_acc_err,pct_ex_acc_err_stderr,bound_position
struct SummaryRow {
  std::string model;
  std::string spec;
  std::size_t horizon = 0;
  double entropy_rate = 0.0;
  double perplexity = 0.0;
  double eps = 0.0;
  double regret = 0.0;
  double regret_per_l = 0.0;
  std::optional<double> acc_err;
  std::optional<double> pct_ex_acc_err;
  std::optional<double> pct_ex_acc_err_stderr;
  std::string bound_position;
};
const std::vector<std::string>& SummaryCsvHeader();
void WriteSummaryCsv(std::ostream& out, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> ReadSummaryCsv(std::istream& in);

}  // namespace regretmeter
