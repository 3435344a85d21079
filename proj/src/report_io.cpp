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

#include "regretmeter/report_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "regretmeter/errors.hpp"
#include "regretmeter/model_io.hpp"

namespace regretmeter {

namespace {

void WriteRow(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << CsvEscape(fields[i]);
  }
  out << '\n';
}

double ParseDouble(const std::string& s) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("malformed number '" + s + "'");
  }
  return x;
}

std::size_t ParseCount(const std::string& s) {
  std::size_t x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("malformed count '" + s + "'");
  }
  return x;
}

std::string Real(double x) { return FormatShortest(x); }

}  // namespace

std::string CsvEscape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> ParseCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote in CSV line");
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<std::vector<std::string>> ReadCsv(std::istream& in,
                                              const std::vector<std::string>& expected_header) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV input");
  const auto header = ParseCsvLine(line);
  if (!expected_header.empty() && header != expected_header) {
    throw ParseError("unexpected CSV header '" + line + "'", 1);
  }
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = ParseCsvLine(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string FormatOptional(const std::optional<double>& x) {
  return x ? Real(*x) : std::string(kUndefined);
}

std::optional<double> ParseOptional(const std::string& field) {
  if (field == kUndefined) return std::nullopt;
  return ParseDouble(field);
}

const std::vector<std::string>& ExposureCsvHeader() {
  static const std::vector<std::string> h{
      "l",        "eps_le_l", "R_le_l",     "acc_err",        "pct_ex_acc_err",        "bound_lo",
      "bound_hi", "stderr",   "eps_stderr", "acc_err_stderr", "pct_ex_acc_err_stderr", "active"};
  return h;
}

void WriteExposureCsv(std::ostream& out, const std::vector<ExposureRow>& rows) {
  WriteRow(out, ExposureCsvHeader());
  for (const auto& r : rows) {
    WriteRow(out, {std::to_string(r.l), Real(r.eps_le_l), Real(r.regret_le_l),
                   FormatOptional(r.acc_err), FormatOptional(r.pct_ex_acc_err),
                   Real(r.bound_lo), Real(r.bound_hi), Real(r.stderr), Real(r.eps_stderr),
                   FormatOptional(r.acc_err_stderr), FormatOptional(r.pct_ex_acc_err_stderr),
                   std::to_string(r.active)});
  }
}

std::vector<ExposureRow> ReadExposureCsv(std::istream& in) {
  std::vector<ExposureRow> out;
  for (const auto& f : ReadCsv(in, ExposureCsvHeader())) {
    ExposureRow r;
    r.l = ParseCount(f[0]);
    r.eps_le_l = ParseDouble(f[1]);
    r.regret_le_l = ParseDouble(f[2]);
    r.acc_err = ParseOptional(f[3]);
    r.pct_ex_acc_err = ParseOptional(f[4]);
    r.bound_lo = ParseDouble(f[5]);
    r.bound_hi = ParseDouble(f[6]);
    r.stderr = ParseDouble(f[7]);
    r.eps_stderr = ParseDouble(f[8]);
    r.acc_err_stderr = ParseOptional(f[9]);
    r.pct_ex_acc_err_stderr = ParseOptional(f[10]);
    r.active = ParseCount(f[11]);
    out.push_back(r);
  }
  return out;
}

const std::vector<std::string>& QualityCsvHeader() {
  static const std::vector<std::string> h{"model",  "spec",    "pct_ex_acc_err", "seq_rep_4",
                                          "rep128", "wrep128", "uniq"};
  return h;
}

void WriteQualityCsv(std::ostream& out, const std::vector<QualityRow>& rows) {
  WriteRow(out, QualityCsvHeader());
  for (const auto& r : rows) {
    WriteRow(out, {r.model, r.spec, FormatOptional(r.pct_ex_acc_err), FormatOptional(r.seq_rep_4),
                   FormatOptional(r.rep128), FormatOptional(r.wrep128), std::to_string(r.uniq)});
  }
}

std::vector<QualityRow> ReadQualityCsv(std::istream& in) {
  std::vector<QualityRow> out;
  for (const auto& f : ReadCsv(in, QualityCsvHeader())) {
    out.push_back({f[0], f[1], ParseOptional(f[2]), ParseOptional(f[3]), ParseOptional(f[4]),
                   ParseOptional(f[5]), ParseCount(f[6])});
  }
  return out;
}

const std::vector<std::string>& SummaryCsvHeader() {
  static const std::vector<std::string> h{
      "model",  "spec",         "horizon", "entropy_rate",   "perplexity",
      "eps",    "regret",       "regret_per_l", "acc_err",   "pct_ex_acc_err",
      "pct_ex_acc_err_stderr",  "bound_position"};
  return h;
}

void WriteSummaryCsv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  WriteRow(out, SummaryCsvHeader());
  for (const auto& r : rows) {
    WriteRow(out, {r.model, r.spec, std::to_string(r.horizon), Real(r.entropy_rate),
                   Real(r.perplexity), Real(r.eps), Real(r.regret), Real(r.regret_per_l),
                   FormatOptional(r.acc_err), FormatOptional(r.pct_ex_acc_err),
                   FormatOptional(r.pct_ex_acc_err_stderr), r.bound_position});
  }
}

std::vector<SummaryRow> ReadSummaryCsv(std::istream& in) {
  std::vector<SummaryRow> out;
  for (const auto& f : ReadCsv(in, SummaryCsvHeader())) {
    SummaryRow r;
    r.model = f[0];
    r.spec = f[1];
    r.horizon = ParseCount(f[2]);
    r.entropy_rate = ParseDouble(f[3]);
    r.perplexity = ParseDouble(f[4]);
    r.eps = ParseDouble(f[5]);
    r.regret = ParseDouble(f[6]);
    r.regret_per_l = ParseDouble(f[7]);
    r.acc_err = ParseOptional(f[8]);
    r.pct_ex_acc_err = ParseOptional(f[9]);
    r.pct_ex_acc_err_stderr = ParseOptional(f[10]);
    r.bound_position = f[11];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace regretmeter
