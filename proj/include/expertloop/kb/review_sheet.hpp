#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "expertloop/core/types.hpp"

namespace expertloop::kb {

inline constexpr std::string_view kReviewHeader =
    "row_id,question,bot_answer,expert_correction,merged_final_answer,should_update,final_answer_for_kb";

enum class ShouldUpdate { Unset, Yes, No };

std::string_view to_string(ShouldUpdate v);
// "Yes" / "No" / "" (case-insensitive); anything else is SchemaViolation.
ShouldUpdate parse_should_update(std::string_view s);

struct ReviewRow {
    TaskId row_id;
    std::string question;
    std::string bot_answer;
    std::string expert_correction;
    std::string merged_final_answer;
    ShouldUpdate should_update = ShouldUpdate::Unset;
    std::string final_answer_for_kb;

    friend bool operator==(const ReviewRow&, const ReviewRow&) = default;
};

// RFC 4180 CSV with the fixed header above and CRLF-tolerant parsing.
std::string render_csv(const std::vector<ReviewRow>& rows);
// Throws SchemaViolation on a wrong header, wrong column count or an
// unterminated quoted field.
std::vector<ReviewRow> parse_csv(std::string_view csv);

void to_json(nlohmann::json& j, const ReviewRow& r);
void from_json(const nlohmann::json& j, ReviewRow& r);

}  // namespace expertloop::kb
