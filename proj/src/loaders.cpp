#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "alrec/data.hpp"
#include "alrec/errors.hpp"

namespace alrec {

namespace {

constexpr double kJesterMissing = 99.0;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

// Splits on `sep`, honouring double-quoted fields ("" escapes a quote).
std::optional<std::vector<std::string>> split_fields(std::string_view line, char sep) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    cur += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && trim(cur).empty()) {
            cur.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == sep) {
            fields.push_back(was_quoted ? cur : std::string(trim(cur)));
            cur.clear();
            was_quoted = false;
        } else if (!was_quoted) {
            cur += c;
        } else if (c != ' ' && c != '\t' && c != '\r') {
            return std::nullopt;  // text after a closing quote
        }
    }
    if (quoted) return std::nullopt;
    fields.push_back(was_quoted ? cur : std::string(trim(cur)));
    return fields;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

void strip_bom(std::string& line) {
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
}

}  // namespace

RatingMatrix load_jester(const std::filesystem::path& path, IngestStats* stats) {
    auto in = open(path);
    RatingMatrix m(RatingScale::jester());
    IngestStats local;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) strip_bom(line);
        if (trim(line).empty()) continue;
        auto fields = split_fields(line, ',');
        if (!fields || fields->size() != 3) {
            throw ParseError("expected 3 comma-separated fields `user,item,rating`", line_no);
        }
        const auto value = parse_number((*fields)[2]);
        if (!value) {
            if (line_no == 1) continue;  // header
            throw ParseError("rating is not a number: '" + (*fields)[2] + "'", line_no);
        }
        if ((*fields)[0].empty() || (*fields)[1].empty()) {
            throw ParseError("empty user or item identifier", line_no);
        }
        ++local.rows;
        seen.insert((*fields)[0]);
        if (*value == kJesterMissing) {
            ++local.skipped;
            continue;
        }
        if (!m.scale().contains(*value)) {
            throw ValidationError("line " + std::to_string(line_no) + ": rating " + (*fields)[2] +
                                  " outside [-10, 10]");
        }
        const auto u = m.add_user((*fields)[0]);
        const auto i = m.add_item((*fields)[1]);
        if (m.has(u, i)) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate rating for (" +
                                  (*fields)[0] + ", " + (*fields)[1] + ")");
        }
        m.set(u, i, *value);
    }
    local.users_seen = seen.size();
    if (stats) *stats = local;
    return m;
}

RatingMatrix load_bookcrossing(const std::filesystem::path& path, IngestStats* stats) {
    auto in = open(path);
    RatingMatrix m(RatingScale::bookcrossing());
    IngestStats local;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) strip_bom(line);
        if (trim(line).empty()) continue;
        auto fields = split_fields(line, ';');
        if (!fields || fields->size() != 3) {
            throw ParseError("expected 3 semicolon-separated fields", line_no);
        }
        if (line_no == 1 && (*fields)[2] == "Book-Rating") continue;
        const auto value = parse_number((*fields)[2]);
        if (!value) {
            throw ValidationError("line " + std::to_string(line_no) + ": non-numeric rating '" +
                                  (*fields)[2] + "'");
        }
        if ((*fields)[0].empty() || (*fields)[1].empty()) {
            throw ParseError("empty user or item identifier", line_no);
        }
        ++local.rows;
        seen.insert((*fields)[0]);
        if (*value == 0.0) {
            ++local.skipped;
            continue;
        }
        if (!m.scale().contains(*value)) {
            throw ValidationError("line " + std::to_string(line_no) + ": rating " + (*fields)[2] +
                                  " outside [1, 10]");
        }
        const auto u = m.add_user((*fields)[0]);
        const auto i = m.add_item((*fields)[1]);
        if (m.has(u, i)) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate rating for (" +
                                  (*fields)[0] + ", " + (*fields)[1] + ")");
        }
        m.set(u, i, *value);
    }
    local.users_seen = seen.size();
    if (stats) *stats = local;
    return m;
}

}  // namespace alrec
