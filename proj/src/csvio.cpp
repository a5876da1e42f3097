#include "agvcost/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace agvcost {

std::string format_double(double v) {
    if (v == 0.0)
        v = 0.0;  // normalize -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write file '" + path + "'");
    out << content;
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

std::string series_to_csv(const std::vector<TraversalObservation>& series) {
    std::string out = "t,arc,agv,duration\n";
    for (const auto& obs : series) {
        out += format_double(obs.start_time);
        out += ',';
        out += obs.arc;
        out += ',';
        out += obs.agv;
        out += ',';
        out += format_double(obs.duration);
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

double parse_field(const std::string& s, const char* what, int line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string(what) + " is not a number: '" + s + "'", line_no);
    }
}

}  // namespace

std::vector<TraversalObservation> series_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<TraversalObservation> out;

    if (!std::getline(in, line))
        throw ParseError("empty series file", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "t,arc,agv,duration")
        throw ParseError("expected header 't,arc,agv,duration'", 1);

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 4)
            throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line_no);
        TraversalObservation obs;
        obs.start_time = parse_field(fields[0], "t", line_no);
        obs.arc = fields[1];
        obs.agv = fields[2];
        obs.duration = parse_field(fields[3], "duration", line_no);
        if (!(obs.duration > 0.0))
            throw ParseError("duration must be positive", line_no);
        out.push_back(std::move(obs));
    }
    return out;
}

std::string estimates_to_csv(const std::vector<EstimateRow>& rows, const ErrorStats& stats) {
    std::string out = "t,observed,predicted,residual\n";
    for (const auto& r : rows) {
        out += format_double(r.t);
        out += ',';
        out += format_double(r.observed);
        out += ',';
        if (r.predicted)
            out += format_double(*r.predicted);
        out += ',';
        if (r.residual)
            out += format_double(*r.residual);
        out += '\n';
    }
    out += "# rmse=" + format_double(stats.rmse) + ", std=" + format_double(stats.std_dev) +
           ", mean=" + format_double(stats.mean_error) + "\n";
    return out;
}

}  // namespace agvcost
