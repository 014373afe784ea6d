// Copyright 2026 The annealscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Plain-text result tables shared by the simulator, the device decoder and
// the fitting code.
//
//   # annealscale <schema> v<version>
//   # config_digest: <hex>
//   # <free-form notes>
//   L,v,delta_e_mean,delta_e_stderr,n_real,n_bins[,delta_m_mean,delta_m_stderr]
//   32,0.001,...
//
// A missing standard error is written as "nan". Points that failed are kept as
// "# failed L=<L> v=<v>: <message>" comments and are not rows.

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace annealscale {

inline constexpr int table_version = 1;

struct CurveRow {
    std::size_t L = 0;
    double v = 0.0;
    double delta_e_mean = 0.0;
    double delta_e_stderr = 0.0;
    std::size_t n_real = 0;
    std::size_t n_bins = 0;
    std::optional<double> delta_m_mean;
    std::optional<double> delta_m_stderr;
};

struct TableHeader {
    std::string schema = "ensemble";
    std::string config_digest;
    std::vector<std::string> notes;
    bool with_magnetization = false;
};

struct FailedPoint {
    std::size_t L = 0;
    double v = 0.0;
    std::string message;
};

struct CurveTable {
    TableHeader header;
    std::vector<CurveRow> rows;
    std::vector<FailedPoint> failures;
};

enum class Observable { energy, magnetization };
Observable parse_observable(const std::string& name);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Appends rows to a table file, flushing after each one.
class CurveTableWriter {
  public:
    /// Creates `path` with a fresh header, or appends to it when `append` is
    /// true and the file already exists.
    CurveTableWriter(const std::string& path, const TableHeader& header, bool append);

    void write(const CurveRow& row);
    void write_failure(const FailedPoint& failure);

  private:
    std::ofstream out_;
    bool magnetization_;
};

void write_curve_table(const std::string& path, const CurveTable& table);

/// Reads a table. Columns are located by header name; commas, tabs or blanks
/// separate fields. Throws FormatError with the line number on bad input.
CurveTable read_curve_table(const std::string& path);
CurveTable parse_curve_table(const std::string& text, const std::string& source = "<text>");

}  // namespace annealscale
