#include "expertloop/sim/random_script.hpp"

#include <random>

namespace expertloop::sim {

namespace {

const char* const kQuestions[] = {
    "How many days after surgery can I wash my hair?",
    "How long will the surgery take?",
    "Will I feel any pain during the surgery?",
    "How often should I put the eye drops?",
    "Does insurance cover the lens cost?",
    "What documents should I bring for admission?",
    "Can I fly in an aeroplane next month?",
    "Is it safe to use a mobile phone?",
    "Hello",
    "Thank you",
};

const char* const kCorrections[] = {
    "Btr avoid for 2 wks..",
    "Please come and check",
    "Use the drops 4 times a day for 4 wks.",
    "Pls call the hospital helpdesk.",
};

const char* const kExperts[] = {"dr-rao", "dr-iyer", "pc-meena", "pc-joseph"};
const char* const kLabels[] = {"Yes", "No", "Send to Patient Coordinator", "Send to Doctor"};

}  // namespace

ScenarioScript random_script(std::uint64_t seed, std::size_t steps) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    ScenarioScript s;
    s.name = "random-" + std::to_string(seed);
    s.start = parse_rfc3339("2023-11-20T09:00:00+05:30");
    const char* langs[] = {"EN", "HI", "EN"};
    for (int i = 0; i < 3; ++i) {
        nlohmann::json form{{"patient_phone", "+91990000010" + std::to_string(i)},
                            {"patient_language", langs[i]},
                            {"operating_doctor_id", "dr-rao"},
                            {"operating_coordinator_id", "pc-meena"},
                            {"surgery_date", "2023-11-24"},
                            {"demographics", {{"age", std::to_string(50 + i * 7)}, {"gender", i % 2 ? "F" : "M"}}}};
        s.profiles.push_back({"seeker" + std::to_string(i + 1), "", form});
    }

    Timestamp at = s.start;
    for (std::size_t i = 0; i < steps; ++i) {
        Step step;
        step.line = static_cast<int>(i + 1);
        auto roll = pick(100);
        if (roll < 20) {
            static const int minutes[] = {1, 10, 45, 90, 181, 240, 361, 540};
            at += std::chrono::minutes(minutes[pick(std::size(minutes))]);
            step.action = "advance_clock";
        } else {
            at += std::chrono::seconds(1 + pick(120));
            if (roll < 50) {
                step.action = "send_text";
                step.actor = "seeker" + std::to_string(1 + pick(3));
                step.args["text"] = kQuestions[pick(std::size(kQuestions))];
            } else if (roll < 55) {
                step.action = "tap_suggestion";
                step.actor = "seeker" + std::to_string(1 + pick(3));
                step.args["index"] = 1 + pick(3);
            } else if (roll < 85) {
                step.action = "press_button";
                step.actor = kExperts[pick(std::size(kExperts))];
                step.args["label"] = kLabels[pick(std::size(kLabels))];
            } else {
                step.action = "submit_correction_text";
                step.actor = kExperts[pick(std::size(kExperts))];
                step.args["text"] = kCorrections[pick(std::size(kCorrections))];
            }
        }
        step.at = at;
        s.steps.push_back(std::move(step));
    }
    return s;
}

}  // namespace expertloop::sim
