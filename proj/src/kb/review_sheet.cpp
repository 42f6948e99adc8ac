#include "expertloop/kb/review_sheet.hpp"

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::kb {

namespace {

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_records(std::string_view csv) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };
    for (std::size_t i = 0; i < csv.size(); ++i) {
        char c = csv[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < csv.size() && csv[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' && i + 1 < csv.size() && csv[i + 1] == '\n') {
            // CRLF: the '\n' ends the record
        } else if (c == '\n') {
            end_record();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw Error(Errc::SchemaViolation, "unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

}  // namespace

std::string_view to_string(ShouldUpdate v) {
    switch (v) {
        case ShouldUpdate::Yes: return "Yes";
        case ShouldUpdate::No: return "No";
        case ShouldUpdate::Unset: return "";
    }
    return "";
}

ShouldUpdate parse_should_update(std::string_view s) {
    auto t = text::trim(s);
    if (t.empty()) return ShouldUpdate::Unset;
    if (text::iequals(t, "yes")) return ShouldUpdate::Yes;
    if (text::iequals(t, "no")) return ShouldUpdate::No;
    throw Error(Errc::SchemaViolation, "should_update must be Yes, No or empty: " + t);
}

std::string render_csv(const std::vector<ReviewRow>& rows) {
    std::string out(kReviewHeader);
    out += "\r\n";
    for (const auto& r : rows) {
        out += quote(r.row_id) + "," + quote(r.question) + "," + quote(r.bot_answer) + "," +
               quote(r.expert_correction) + "," + quote(r.merged_final_answer) + "," +
               std::string(to_string(r.should_update)) + "," + quote(r.final_answer_for_kb) + "\r\n";
    }
    return out;
}

std::vector<ReviewRow> parse_csv(std::string_view csv) {
    if (csv.substr(0, 3) == "\xEF\xBB\xBF") csv.remove_prefix(3);
    auto records = parse_records(csv);
    if (records.empty() || text::join(records.front(), ",") != kReviewHeader) {
        throw Error(Errc::SchemaViolation, "review sheet header must be: " + std::string(kReviewHeader));
    }
    std::vector<ReviewRow> rows;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        if (f.size() == 1 && text::trim(f[0]).empty()) continue;  // blank line
        if (f.size() != 7) {
            throw Error(Errc::SchemaViolation, "row " + std::to_string(i) + " has " + std::to_string(f.size()) +
                                                   " columns, expected 7");
        }
        rows.push_back({f[0], f[1], f[2], f[3], f[4], parse_should_update(f[5]), f[6]});
    }
    return rows;
}

void to_json(nlohmann::json& j, const ReviewRow& r) {
    j = nlohmann::json{{"row_id", r.row_id},
                       {"question", r.question},
                       {"bot_answer", r.bot_answer},
                       {"expert_correction", r.expert_correction},
                       {"merged_final_answer", r.merged_final_answer},
                       {"should_update", to_string(r.should_update)},
                       {"final_answer_for_kb", r.final_answer_for_kb}};
}

void from_json(const nlohmann::json& j, ReviewRow& r) {
    r.row_id = j.at("row_id").get<std::string>();
    r.question = j.value("question", "");
    r.bot_answer = j.value("bot_answer", "");
    r.expert_correction = j.value("expert_correction", "");
    r.merged_final_answer = j.value("merged_final_answer", "");
    r.should_update = parse_should_update(j.value("should_update", ""));
    r.final_answer_for_kb = j.value("final_answer_for_kb", "");
}

}  // namespace expertloop::kb
