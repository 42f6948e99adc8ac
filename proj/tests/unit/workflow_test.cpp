#include <gtest/gtest.h>

#include <atomic>
#include <barrier>
#include <thread>

#include "expertloop/workflow/workflow.hpp"
#include "support/task_oracle.hpp"
#include "support/test_world.hpp"

using namespace expertloop;
using fakes::at;
using fakes::TestWorld;

namespace {

constexpr const char* kPatient = "+919900000001";
constexpr const char* kMedical = "How often should I put the eye drops?";
constexpr const char* kLogistical = "Does insurance cover the lens cost?";

enum class Actor { Operating, Escalation, OtherTrack, KbExpert };
enum class Op { Yes, No, Reroute, Correct, Wait3h };

std::string actor_id(Actor a) {
    switch (a) {
        case Actor::Operating: return "dr-rao";
        case Actor::Escalation: return "dr-iyer";
        case Actor::OtherTrack: return "pc-meena";
        case Actor::KbExpert: return "dr-kapoor";
    }
    return "";
}

struct Step {
    Actor actor;
    Op op;
};

std::vector<Step> all_steps() {
    std::vector<Step> out;
    for (auto a : {Actor::Operating, Actor::Escalation, Actor::OtherTrack, Actor::KbExpert}) {
        for (auto o : {Op::Yes, Op::No, Op::Reroute, Op::Correct}) out.push_back({a, o});
    }
    out.push_back({Actor::Operating, Op::Wait3h});
    return out;
}

Decision decision_for(Op op) { return op == Op::Yes ? Decision::Yes : op == Op::No ? Decision::No : Decision::Reroute; }

// Runs `steps` against a fresh service and checks each against the oracle.
void check_sequence(const std::vector<Step>& steps) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    auto asked = t0 + std::chrono::minutes(1);
    w.text(kPatient, kMedical, asked);
    auto task_id = w.service->workflow().tasks().at(0).task_id;

    oracle::TaskModel model{TaskState::AwaitingOperating, "dr-rao", "dr-iyer", asked};
    auto now = asked;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        auto id = actor_id(s.actor);
        now += s.op == Op::Wait3h ? std::chrono::hours(3) : Seconds(std::chrono::minutes(1));
        model = oracle::advance(model, now);
        auto expected = s.op == Op::Wait3h    ? oracle::Outcome(model)
                        : s.op == Op::Correct ? oracle::correct(model, id)
                                              : oracle::decide(model, id, decision_for(s.op));
        std::optional<Errc> got_error;
        try {
            if (s.op == Op::Wait3h) w.service->advance_to(now);
            else if (s.op == Op::Correct) w.service->correct(id, task_id, "Use the drops 4 times a day.", now);
            else w.service->decide(id, task_id, decision_for(s.op), now);
        } catch (const Error& e) {
            got_error = e.code();
        }
        auto actual = w.service->workflow().task(task_id)->state;
        SCOPED_TRACE("step " + std::to_string(i) + " actor " + id + " op " + std::to_string(static_cast<int>(s.op)));
        if (std::holds_alternative<Errc>(expected)) {
            ASSERT_TRUE(got_error.has_value());
            EXPECT_EQ(*got_error, std::get<Errc>(expected));
            EXPECT_EQ(actual, model.state);
        } else {
            ASSERT_FALSE(got_error.has_value());
            model = std::get<oracle::TaskModel>(expected);
            EXPECT_EQ(actual, model.state);
        }
    }
    for (const auto& r : w.events(event_kind::kTaskTransition)) {
        if (r.event.payload.at("task_id") != task_id) continue;
        auto edge = std::pair{parse_task_state(r.event.payload.at("from").get<std::string>()),
                              parse_task_state(r.event.payload.at("to").get<std::string>())};
        EXPECT_TRUE(oracle::kAllowedEdges.count(edge));
    }
    // Seeker notifications happen at most once per outcome.
    auto tagged = w.sent_to(kPatient, "tagged_reply");
    auto count = [&](std::string_view text) {
        return std::count_if(tagged.begin(), tagged.end(), [&](const auto& p) { return p.at("text") == text; });
    };
    EXPECT_LE(count(workflow::kVerifiedNotice), 1);
    EXPECT_LE(count(workflow::kAwaitCorrectionNotice), 1);
}

}  // namespace

TEST(WorkflowOracle, EverySingleOperationMatchesTheModel) {
    for (const auto& s : all_steps()) check_sequence({s});
}

TEST(WorkflowOracle, EveryPairOfOperationsMatchesTheModel) {
    for (const auto& a : all_steps()) {
        for (const auto& b : all_steps()) check_sequence({a, b});
    }
}

TEST(WorkflowOracle, SelectedTriplesMatchTheModel) {
    check_sequence({{Actor::Operating, Op::Wait3h}, {Actor::Escalation, Op::No}, {Actor::Escalation, Op::Correct}});
    check_sequence({{Actor::Operating, Op::Wait3h}, {Actor::Escalation, Op::No}, {Actor::Operating, Op::Correct}});
    check_sequence({{Actor::Operating, Op::No}, {Actor::Operating, Op::Wait3h}, {Actor::Escalation, Op::Yes}});
    check_sequence({{Actor::Operating, Op::Wait3h}, {Actor::Operating, Op::Yes}, {Actor::Escalation, Op::Yes}});
}

TEST(Workflow, MedicalAnswerIsDeliveredThenVerifiedByTheOperatingDoctor) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kMedical, t0 + std::chrono::minutes(1));

    auto tasks = w.service->workflow().tasks();
    ASSERT_EQ(tasks.size(), 1u);
    EXPECT_EQ(tasks[0].track, Track::DoctorTrack);
    EXPECT_EQ(tasks[0].operating_expert_id, "dr-rao");
    EXPECT_EQ(tasks[0].escalation_expert_id, "dr-iyer");
    auto answer = w.service->workflow().answer(tasks[0].answer_id);
    ASSERT_TRUE(answer && answer->seeker_message_id);
    EXPECT_EQ(answer->answer.status, AnswerStatus::Unverified);

    auto reactions = w.sent_to(kPatient, "reaction");
    ASSERT_EQ(reactions.size(), 1u);
    EXPECT_EQ(reactions[0].at("glyph"), "❓");
    EXPECT_EQ(reactions[0].at("target_message_id"), *answer->seeker_message_id);
    auto doctor = w.sent_to("+919800000001");
    ASSERT_EQ(doctor.size(), 4u);
    EXPECT_EQ(doctor[0].at("text"), std::string("Question: ") + kMedical);
    EXPECT_EQ(doctor[3].at("buttons"), (nlohmann::json{"Yes", "No", "Send to Patient Coordinator"}));

    w.press("+919800000001", "Yes", t0 + std::chrono::minutes(5), doctor[3].at("message_id").get<std::string>());
    EXPECT_EQ(w.service->workflow().task(tasks[0].task_id)->state, TaskState::ApprovedYes);
    EXPECT_EQ(w.service->workflow().answer(tasks[0].answer_id)->answer.status, AnswerStatus::Verified);
    reactions = w.sent_to(kPatient, "reaction");
    ASSERT_EQ(reactions.size(), 2u);
    EXPECT_EQ(reactions[1].at("glyph"), "✅");
}

TEST(Workflow, LogisticalQuestionGoesToTheCoordinator) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kLogistical, t0 + std::chrono::minutes(1));
    auto tasks = w.service->workflow().tasks();
    ASSERT_EQ(tasks.size(), 1u);
    EXPECT_EQ(tasks[0].track, Track::CoordinatorTrack);
    EXPECT_EQ(tasks[0].operating_expert_id, "pc-meena");
    EXPECT_EQ(tasks[0].escalation_expert_id, "pc-joseph");
    auto menu = w.sent_to("+919800000003", "buttons");
    ASSERT_EQ(menu.size(), 1u);
    EXPECT_EQ(menu[0].at("buttons"), (nlohmann::json{"Yes", "No", "Send to Doctor"}));
}

TEST(Workflow, SmallTalkCreatesNoTask) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, "Hello", t0 + std::chrono::minutes(1));
    EXPECT_TRUE(w.service->workflow().tasks().empty());
    EXPECT_TRUE(w.sent_to(kPatient, "reaction").empty());
}

TEST(Workflow, RerouteDisabledRejectsCoordinatorToDoctor) {
    auto config = fakes::bundled_config();
    config.allow_reroute_to_doctor = false;
    TestWorld w(config);
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kLogistical, t0 + std::chrono::minutes(1));
    auto id = w.service->workflow().tasks().at(0).task_id;
    try {
        w.service->decide("pc-meena", id, Decision::Reroute, t0 + std::chrono::minutes(2));
        FAIL() << "reroute accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::RerouteDisabled);
    }
    EXPECT_EQ(w.service->workflow().task(id)->state, TaskState::AwaitingOperating);
}

TEST(Workflow, RerouteCreatesLinkedSuccessorOnTheOtherTrack) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kMedical, t0 + std::chrono::minutes(1));
    auto id = w.service->workflow().tasks().at(0).task_id;
    auto r = w.service->decide("dr-rao", id, Decision::Reroute, t0 + std::chrono::minutes(2));
    ASSERT_TRUE(r.successor_task_id);
    auto succ = w.service->workflow().task(*r.successor_task_id);
    ASSERT_TRUE(succ);
    EXPECT_EQ(succ->track, Track::CoordinatorTrack);
    EXPECT_EQ(succ->predecessor_task_id, id);
    EXPECT_EQ(succ->state, TaskState::AwaitingOperating);
    EXPECT_EQ(succ->created_at, t0 + std::chrono::minutes(2));
    EXPECT_EQ(w.service->workflow().task(id)->successor_task_id, succ->task_id);
    // The successor runs its own escalation clock.
    w.service->advance_to(t0 + std::chrono::minutes(2) + std::chrono::hours(3));
    EXPECT_EQ(w.service->workflow().task(succ->task_id)->state, TaskState::Escalated);
    EXPECT_EQ(w.service->workflow().task(succ->task_id)->escalated_at, t0 + std::chrono::minutes(2) + std::chrono::hours(3));
}

TEST(Workflow, CorrectionIsMergedDeliveredAndTicked) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kMedical, t0 + std::chrono::minutes(1));
    auto id = w.service->workflow().tasks().at(0).task_id;
    w.service->decide("dr-rao", id, Decision::No, t0 + std::chrono::minutes(2));
    EXPECT_EQ(w.sent_to(kPatient, "reaction").back().at("glyph"), "❌");
    auto r = w.service->correct("dr-rao", id, "use drops 4 times a day for 4 wks", t0 + std::chrono::minutes(3));
    EXPECT_FALSE(r.final_answer.empty());
    EXPECT_LE(r.final_answer.size(), 700u);
    auto t = *w.service->workflow().task(id);
    EXPECT_EQ(t.state, TaskState::CorrectedDone);
    EXPECT_EQ(t.correction_text, "use drops 4 times a day for 4 wks");
    EXPECT_EQ(t.final_answer, r.final_answer);
    auto tagged = w.sent_to(kPatient, "tagged_reply");
    ASSERT_EQ(tagged.size(), 2u);
    EXPECT_EQ(tagged[1].at("text"), r.final_answer);
    EXPECT_EQ(w.service->workflow().answer(t.answer_id)->answer.status, AnswerStatus::Corrected);

    try {
        w.service->correct("dr-rao", id, "again", t0 + std::chrono::minutes(4));
        FAIL() << "second correction accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::WrongState);
    }
}

TEST(Workflow, EmptyCorrectionIsRejected) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kMedical, t0 + std::chrono::minutes(1));
    auto id = w.service->workflow().tasks().at(0).task_id;
    w.service->decide("dr-rao", id, Decision::No, t0 + std::chrono::minutes(2));
    EXPECT_THROW(w.service->correct("dr-rao", id, "   ", t0 + std::chrono::minutes(3)), Error);
    EXPECT_EQ(w.service->workflow().task(id)->state, TaskState::AwaitingCorrection);
}

TEST(Workflow, UnknownTaskIsReported) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    try {
        w.service->decide("dr-rao", "TSK-missing", Decision::Yes, t0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnknownTask);
    }
}

TEST(WorkflowTimers, EscalationFiresExactlyThreeHoursAfterCreation) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    auto created = t0 + std::chrono::minutes(7) + std::chrono::seconds(13);
    w.text(kPatient, kMedical, created);
    auto id = w.service->workflow().tasks().at(0).task_id;
    w.service->advance_to(created + std::chrono::hours(3) - std::chrono::seconds(1));
    EXPECT_EQ(w.service->workflow().task(id)->state, TaskState::AwaitingOperating);
    w.service->advance_to(created + std::chrono::hours(5));
    auto t = *w.service->workflow().task(id);
    EXPECT_EQ(t.state, TaskState::Escalated);
    EXPECT_EQ(t.escalated_at, created + std::chrono::hours(3));
    auto transitions = w.events(event_kind::kTaskTransition);
    ASSERT_EQ(transitions.size(), 1u);
    EXPECT_EQ(transitions[0].event.at, created + std::chrono::hours(3));
    EXPECT_EQ(w.sent_to("+919800000002", "buttons").size(), 1u);
}

TEST(WorkflowTimers, ReminderFiresOnceToBothExperts) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    auto created = t0 + std::chrono::minutes(1);
    w.text(kPatient, kMedical, created);
    w.service->advance_to(created + std::chrono::hours(30));
    auto reminders = w.events(event_kind::kReminderSent);
    ASSERT_EQ(reminders.size(), 1u);
    EXPECT_EQ(reminders[0].event.at, created + std::chrono::hours(6));
    EXPECT_EQ(reminders[0].event.payload.at("recipients"), (nlohmann::json{"dr-rao", "dr-iyer"}));
    EXPECT_TRUE(w.service->workflow().tasks().at(0).reminder_sent);
}

TEST(WorkflowTimers, NoReminderWhenDecidedInTime) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kMedical, t0 + std::chrono::minutes(1));
    auto id = w.service->workflow().tasks().at(0).task_id;
    w.service->decide("dr-rao", id, Decision::Yes, t0 + std::chrono::hours(5));
    w.service->advance_to(t0 + std::chrono::hours(24));
    EXPECT_TRUE(w.events(event_kind::kReminderSent).empty());
    EXPECT_EQ(w.events(event_kind::kTaskTransition).size(), 2u);  // escalation at 3h, then Yes
}

TEST(WorkflowTimers, DigestsListOnlyTasksPendingOverSixHours) {
    TestWorld w;
    auto t0 = at("2023-11-20T07:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kMedical, at("2023-11-20T07:30:00+05:30"));
    w.text(kPatient, kLogistical, at("2023-11-20T11:00:00+05:30"));
    w.service->advance_to(at("2023-11-21T08:30:00+05:30"));
    auto tasks = w.service->workflow().tasks();
    std::map<std::string, nlohmann::json> listed;
    for (const auto& d : w.events(event_kind::kDigestFired)) {
        listed[format_rfc3339(d.event.at, LocalZone::parse("+05:30"))] = d.event.payload.at("task_ids");
    }
    ASSERT_EQ(listed.size(), 4u);
    EXPECT_EQ(listed.at("2023-11-20T08:00:00+05:30"), nlohmann::json::array());
    EXPECT_EQ(listed.at("2023-11-20T12:00:00+05:30"), nlohmann::json::array());
    EXPECT_EQ(listed.at("2023-11-20T16:00:00+05:30"), (nlohmann::json{tasks[0].task_id}));
    EXPECT_EQ(listed.at("2023-11-21T08:00:00+05:30"), (nlohmann::json{tasks[0].task_id, tasks[1].task_id}));
}

TEST(WorkflowTimers, DigestMessagesRespectTheLengthLimit) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    for (int i = 0; i < 6; ++i) {
        auto phone = "+9199000001" + std::to_string(10 + i);
        w.onboard(phone, t0);
        for (int q = 0; q < 4; ++q) {
            w.text(phone, std::string(kMedical) + " Question variant number " + std::to_string(q) + " for patient " +
                              std::to_string(i) + ", asked with extra words to make it longer.",
                   t0 + std::chrono::minutes(1 + i * 4 + q));
        }
    }
    w.service->advance_to(at("2023-11-20T16:30:00+05:30"));
    auto msgs = w.sent_to("+919800000001", "text");
    int headers = 0;
    for (const auto& m : msgs) {
        auto text = m.at("text").get<std::string>();
        EXPECT_LE(text.size(), 700u);
        if (text.starts_with("Questions pending verification")) ++headers;
    }
    EXPECT_GE(headers, 2);
}

TEST(WorkflowRace, ConcurrentDecisionsResolveFirstWins) {
    for (int round = 0; round < 20; ++round) {
        TestWorld w;
        auto t0 = at("2023-11-20T09:00:00+05:30");
        w.start(t0);
        w.onboard(kPatient, t0);
        w.text(kPatient, kMedical, t0 + std::chrono::minutes(1));
        auto id = w.service->workflow().tasks().at(0).task_id;
        auto when = t0 + std::chrono::hours(4);
        w.service->advance_to(when);
        ASSERT_EQ(w.service->workflow().task(id)->state, TaskState::Escalated);

        std::atomic<int> ok{0}, already{0};
        std::barrier sync(2);
        auto run = [&](const std::string& expert, Decision d) {
            sync.arrive_and_wait();
            try {
                w.service->decide(expert, id, d, when);
                ++ok;
            } catch (const Error& e) {
                if (e.code() == Errc::AlreadyDecided) ++already;
            }
        };
        std::thread a(run, "dr-rao", Decision::Yes);
        std::thread b(run, "dr-iyer", round % 2 ? Decision::Yes : Decision::Reroute);
        a.join();
        b.join();
        EXPECT_EQ(ok.load(), 1);
        EXPECT_EQ(already.load(), 1);
        EXPECT_EQ(w.events(event_kind::kTaskTransition).size(), 2u);  // escalation plus the winner
    }
}

TEST(WorkflowReplay, SnapshotSurvivesRestart) {
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0);
    w.text(kPatient, kMedical, t0 + std::chrono::minutes(1));
    w.text(kPatient, kLogistical, t0 + std::chrono::minutes(2));
    auto ids = w.service->workflow().tasks();
    w.service->decide("dr-rao", ids[0].task_id, Decision::No, t0 + std::chrono::minutes(3));
    w.service->advance_to(t0 + std::chrono::hours(7));
    auto before = w.service->snapshot();
    auto count = w.log->records().size();
    w.restart(t0 + std::chrono::hours(7));
    EXPECT_EQ(w.service->snapshot(), before);
    EXPECT_EQ(w.log->records().size(), count);
    w.service->correct("dr-rao", ids[0].task_id, "Use the drops 4 times a day.", t0 + std::chrono::hours(8));
    EXPECT_EQ(w.service->workflow().task(ids[0].task_id)->state, TaskState::CorrectedDone);
}
