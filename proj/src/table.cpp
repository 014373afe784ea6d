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

#include "annealscale/table.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>

#include "annealscale/error.hpp"

namespace annealscale {

namespace {

const char* const base_columns[] = {"L", "v", "delta_e_mean", "delta_e_stderr", "n_real",
                                    "n_bins"};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Comma-separated when the line has a comma, otherwise whitespace-separated.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    if (line.find(',') != std::string::npos) {
        std::istringstream in(line);
        std::string field;
        while (std::getline(in, field, ',')) fields.push_back(trim(field));
        if (line.back() == ',') fields.emplace_back();
    } else {
        std::istringstream in(line);
        std::string field;
        while (in >> field) fields.push_back(field);
    }
    return fields;
}

double parse_number(const std::string& text, const std::string& where) {
    if (text == "nan" || text == "NaN" || text.empty()) return std::nan("");
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) throw FormatError(where + ": not a number '" + text + "'");
    return value;
}

std::size_t parse_count(const std::string& text, const std::string& where) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw FormatError(where + ": not a non-negative integer '" + text + "'");
    }
    return value;
}

void write_header(std::ostream& out, const TableHeader& header) {
    out << "# annealscale " << header.schema << " v" << table_version << '\n';
    if (!header.config_digest.empty()) out << "# config_digest: " << header.config_digest << '\n';
    for (const auto& note : header.notes) out << "# " << note << '\n';
    for (std::size_t i = 0; i < 6; ++i) out << (i ? "," : "") << base_columns[i];
    if (header.with_magnetization) out << ",delta_m_mean,delta_m_stderr";
    out << '\n';
}

void write_row(std::ostream& out, const CurveRow& row, bool magnetization) {
    out << row.L << ',' << format_double(row.v) << ',' << format_double(row.delta_e_mean) << ','
        << format_double(row.delta_e_stderr) << ',' << row.n_real << ',' << row.n_bins;
    if (magnetization) {
        out << ',' << format_double(row.delta_m_mean.value_or(std::nan(""))) << ','
            << format_double(row.delta_m_stderr.value_or(std::nan("")));
    }
    out << '\n';
}

}  // namespace

Observable parse_observable(const std::string& name) {
    if (name == "delta_e" || name == "energy") return Observable::energy;
    if (name == "delta_m" || name == "magnetization") return Observable::magnetization;
    throw ParameterError("unknown observable '" + name + "' (expected delta_e or delta_m)");
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

CurveTableWriter::CurveTableWriter(const std::string& path, const TableHeader& header,
                                   bool append)
        : magnetization_(header.with_magnetization) {
    const bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
    out_.open(path, append && exists ? std::ios::app : std::ios::trunc);
    if (!out_) throw Error("cannot open '" + path + "' for writing");
    if (!(append && exists)) {
        write_header(out_, header);
        out_.flush();
    }
}

void CurveTableWriter::write(const CurveRow& row) {
    write_row(out_, row, magnetization_);
    out_.flush();
}

void CurveTableWriter::write_failure(const FailedPoint& failure) {
    std::string message = failure.message;
    for (char& c : message) {
        if (c == '\n') c = ' ';
    }
    out_ << "# failed L=" << failure.L << " v=" << format_double(failure.v) << ": " << message
         << '\n';
    out_.flush();
}

void write_curve_table(const std::string& path, const CurveTable& table) {
    CurveTableWriter writer(path, table.header, false);
    for (const auto& row : table.rows) writer.write(row);
    for (const auto& f : table.failures) writer.write_failure(f);
}

CurveTable read_curve_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open table '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_curve_table(buffer.str(), path);
}

CurveTable parse_curve_table(const std::string& text, const std::string& source) {
    CurveTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> column;
    bool have_columns = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = source + ":" + std::to_string(line_no);
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            if (body.rfind("annealscale ", 0) == 0) {
                std::istringstream words(body.substr(12));
                std::string schema, version;
                words >> schema >> version;
                table.header.schema = schema;
                if (version != "v" + std::to_string(table_version)) {
                    throw FormatError(where + ": unsupported table version '" + version + "'");
                }
            } else if (body.rfind("config_digest: ", 0) == 0) {
                table.header.config_digest = body.substr(15);
            } else if (body.rfind("failed L=", 0) == 0) {
                FailedPoint f;
                const auto space = body.find(" v=");
                const auto colon = body.find(": ", space);
                if (space == std::string::npos || colon == std::string::npos) {
                    throw FormatError(where + ": malformed failure marker");
                }
                f.L = parse_count(body.substr(9, space - 9), where);
                f.v = parse_number(body.substr(space + 3, colon - space - 3), where);
                f.message = body.substr(colon + 2);
                table.failures.push_back(f);
            } else {
                table.header.notes.push_back(body);
            }
            continue;
        }
        const auto fields = split_fields(line);
        if (!have_columns) {
            for (std::size_t i = 0; i < fields.size(); ++i) column[fields[i]] = i;
            for (const char* name : {"L", "v"}) {
                if (!column.count(name)) {
                    throw FormatError(where + ": header lacks column '" + name + "'");
                }
            }
            if (!column.count("delta_e_mean") && !column.count("delta_m_mean")) {
                throw FormatError(where + ": header has neither delta_e_mean nor delta_m_mean");
            }
            table.header.with_magnetization = column.count("delta_m_mean") > 0;
            have_columns = true;
            continue;
        }
        if (fields.size() != column.size()) {
            throw FormatError(where + ": expected " + std::to_string(column.size()) +
                              " fields, found " + std::to_string(fields.size()));
        }
        auto field = [&](const char* name) -> const std::string* {
            const auto it = column.find(name);
            return it == column.end() ? nullptr : &fields[it->second];
        };
        CurveRow row;
        row.L = parse_count(*field("L"), where);
        row.v = parse_number(*field("v"), where);
        row.delta_e_mean = std::numeric_limits<double>::quiet_NaN();
        row.delta_e_stderr = std::numeric_limits<double>::quiet_NaN();
        if (const auto* f = field("delta_e_mean")) row.delta_e_mean = parse_number(*f, where);
        if (const auto* f = field("delta_e_stderr")) row.delta_e_stderr = parse_number(*f, where);
        if (const auto* f = field("n_real")) row.n_real = parse_count(*f, where);
        if (const auto* f = field("n_bins")) row.n_bins = parse_count(*f, where);
        if (const auto* f = field("delta_m_mean")) row.delta_m_mean = parse_number(*f, where);
        if (const auto* f = field("delta_m_stderr")) row.delta_m_stderr = parse_number(*f, where);
        if (!(row.v > 0.0)) throw FormatError(where + ": velocity must be positive");
        table.rows.push_back(row);
    }
    if (!have_columns) throw FormatError(source + ": no header row");
    return table;
}

}  // namespace annealscale
