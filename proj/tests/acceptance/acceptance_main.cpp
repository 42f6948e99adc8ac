// Acceptance run: one PASS/FAIL line per criterion, with pinned limits.
// Usage: expertloop-acceptance [criterion-id ...]

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "expertloop/core/text.hpp"
#include "expertloop/kb/review_sheet.hpp"
#include "expertloop/knowledge/embedding.hpp"
#include "expertloop/sim/random_script.hpp"
#include "expertloop/sim/runner.hpp"
#include "support/retrieval_oracle.hpp"
#include "support/task_oracle.hpp"
#include "support/test_world.hpp"

using namespace expertloop;
using namespace std::chrono_literals;
using fakes::at;
using fakes::TestWorld;

namespace {

const std::filesystem::path kScenarios = EXPERTLOOP_SCENARIO_DIR;
const std::filesystem::path kGolden = EXPERTLOOP_GOLDEN_DIR;
constexpr const char* kPatient = "+919900000001";
constexpr const char* kAttendant = "+919900000002";
constexpr const char* kCorrection = "Use the drops 4 times a day.";
constexpr std::size_t kMessageLimit = 700;
constexpr std::size_t kLabelLimit = 72;
const Seconds kEscalation = 3h;
const Seconds kReminder = 6h;
const Seconds kZoneOffset = 5h + 30min;

// Questions that each open a verification task.
const std::vector<std::string> kQuestions{
    "How often should I put the eye drops?",
    "Does insurance cover the lens cost?",
    "Can I wash my hair after the surgery?",
    "When is my follow-up appointment?",
};

const std::vector<std::string> kExperts{"dr-rao", "dr-iyer", "pc-meena", "pc-joseph", "dr-kapoor"};

// Counts failures and keeps the first one for the report.
struct Check {
    std::size_t failures = 0;
    std::string first;

    void fail(const std::string& what) {
        if (failures++ == 0) first = what;
    }
    void expect(bool ok, const std::string& what) {
        if (!ok) fail(what);
    }
};

struct Criterion {
    std::string id;
    std::string title;
    std::chrono::milliseconds limit{0};  // zero: no time limit
    std::function<std::string(Check&)> run;
};

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::filesystem::path> scenario_files() {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(kScenarios)) {
        if (e.path().extension() == ".yaml") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string stamp(Timestamp t) { return format_rfc3339(t, LocalZone::parse("+05:30")); }

std::pair<std::string, std::string> other_track(const std::string& operating) {
    if (operating == "dr-rao") return {"pc-meena", "pc-joseph"};
    return {"dr-rao", "dr-iyer"};
}

// Digest slots at 08:00, 12:00 and 16:00 local time in (after, until].
std::vector<Timestamp> digest_slots(Timestamp after, Timestamp until) {
    std::vector<Timestamp> out;
    auto local_day = std::chrono::floor<std::chrono::days>(after + kZoneOffset);
    for (auto day = local_day; day - kZoneOffset <= until; day += std::chrono::days(1)) {
        for (auto h : {8h, 12h, 16h}) {
            Timestamp slot = day + h - kZoneOffset;
            if (slot > after && slot <= until) out.push_back(slot);
        }
    }
    return out;
}

Seconds random_offset(std::mt19937_64& rng, Seconds span) {
    // boundary values around the escalation and reminder deadlines
    static const std::vector<Seconds> edges{kEscalation - 1s, kEscalation, kEscalation + 1s,
                                            kReminder - 1s,   kReminder,   kReminder + 1s};
    if (rng() % 10 < 3) return edges[rng() % edges.size()];
    return Seconds(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(span.count())));
}

// ---------------------------------------------------------------------------

std::string golden_transcript(Check& c) {
    auto r = sim::run_scenario(sim::load_script(kScenarios / "hair_wash_correction.yaml"), {});
    auto golden = read_file(kGolden / "transcripts" / "hair_wash_correction.txt");
    c.expect(!golden.empty(), "golden transcript missing");
    c.expect(r.passed(), "scenario expectations failed");
    c.expect(r.transcript == golden, "transcript differs from the golden file");
    return std::to_string(std::count(golden.begin(), golden.end(), '\n')) + " lines byte-identical";
}

// ---------------------------------------------------------------------------

struct TimedTask {
    TaskId id;
    Timestamp created{};
    std::string operating;
    std::string escalation;
    std::optional<Timestamp> decided;
    std::optional<Timestamp> terminal;
};

enum class OpKind { Ask, Decide, Correct };

struct TimedOp {
    OpKind kind = OpKind::Ask;
    std::size_t task = 0;
    std::string expert;
    Decision decision = Decision::Yes;
    std::string question;
};

void plan_task(std::multimap<Timestamp, TimedOp>& ops, const TimedTask& t, std::size_t index,
               std::mt19937_64& rng) {
    if (rng() % 4 == 0) return;  // left pending
    auto offset = random_offset(rng, 12h);
    auto expert = offset >= kEscalation && rng() % 2 ? t.escalation : t.operating;
    auto decision = static_cast<Decision>(rng() % 3);
    ops.emplace(t.created + offset, TimedOp{OpKind::Decide, index, expert, decision, {}});
    if (decision == Decision::No && rng() % 10 < 7) {
        ops.emplace(t.created + offset + random_offset(rng, 8h), TimedOp{OpKind::Correct, index, expert, {}, {}});
    }
}

std::string timer_timelines(Check& c) {
    std::mt19937_64 rng(3);
    std::size_t task_count = 0, digest_count = 0;
    int timeline = 0;
    for (; timeline < 1000 && c.failures == 0; ++timeline) {
        auto label = "timeline " + std::to_string(timeline) + ": ";
        TestWorld w;
        Timestamp t0 = at("2023-11-20T00:00:00+05:30") + Seconds(static_cast<std::int64_t>(rng() % 86400));
        w.start(t0);
        w.onboard(kPatient, t0);

        std::multimap<Timestamp, TimedOp> ops;
        std::size_t asks = 1 + rng() % 3;
        for (std::size_t i = 0; i < asks; ++i) {
            ops.emplace(t0 + 1min + Seconds(static_cast<std::int64_t>(rng() % 36000)),
                        TimedOp{OpKind::Ask, 0, {}, {}, kQuestions[rng() % kQuestions.size()]});
        }
        std::vector<TimedTask> tasks;
        Timestamp last = t0;
        while (!ops.empty()) {
            auto [when, op] = *ops.begin();
            ops.erase(ops.begin());
            last = when;
            w.service->advance_to(when);
            try {
                if (op.kind == OpKind::Ask) {
                    auto before = w.service->workflow().tasks().size();
                    w.text(kPatient, op.question, when);
                    auto all = w.service->workflow().tasks();
                    if (all.size() != before + 1) {
                        c.fail(label + "'" + op.question + "' opened no task");
                        continue;
                    }
                    const auto& t = all.back();
                    tasks.push_back({t.task_id, when, t.operating_expert_id, t.escalation_expert_id, {}, {}});
                    plan_task(ops, tasks.back(), tasks.size() - 1, rng);
                } else if (op.kind == OpKind::Decide) {
                    auto r = w.service->decide(op.expert, tasks[op.task].id, op.decision, when);
                    tasks[op.task].decided = when;
                    if (op.decision != Decision::No) tasks[op.task].terminal = when;
                    if (op.decision == Decision::Reroute) {
                        auto [operating, escalation] = other_track(tasks[op.task].operating);
                        tasks.push_back({r.successor_task_id.value_or(""), when, operating, escalation, {}, {}});
                        plan_task(ops, tasks.back(), tasks.size() - 1, rng);
                    }
                } else {
                    w.service->correct(op.expert, tasks[op.task].id, kCorrection, when);
                    tasks[op.task].terminal = when;
                }
            } catch (const Error& e) {
                c.fail(label + "operation rejected at " + stamp(when) + ": " + e.what());
            }
        }
        Timestamp horizon = last + 30h;
        w.service->advance_to(horizon);

        std::map<TaskId, std::vector<Timestamp>> escalations, reminders;
        std::vector<std::pair<Timestamp, std::set<TaskId>>> digests;
        for (const auto& r : w.log->records()) {
            const auto& e = r.event;
            if (e.kind == event_kind::kTaskTransition && e.payload.at("to") == "Escalated") {
                escalations[e.payload.at("task_id")].push_back(e.at);
            } else if (e.kind == event_kind::kReminderSent) {
                reminders[e.payload.at("task_id")].push_back(e.at);
            } else if (e.kind == event_kind::kDigestFired) {
                digests.emplace_back(e.at, e.payload.at("task_ids").get<std::set<TaskId>>());
            }
        }
        for (const auto& t : tasks) {
            std::vector<Timestamp> esc, rem;
            if (!t.decided || *t.decided >= t.created + kEscalation) esc.push_back(t.created + kEscalation);
            if (!t.terminal || *t.terminal >= t.created + kReminder) rem.push_back(t.created + kReminder);
            c.expect(escalations[t.id] == esc, label + "escalation times differ for " + t.id);
            c.expect(reminders[t.id] == rem, label + "reminder times differ for " + t.id);
        }
        auto slots = digest_slots(t0, horizon);
        if (digests.size() != slots.size()) {
            c.fail(label + "expected " + std::to_string(slots.size()) + " digests, got " + std::to_string(digests.size()));
            continue;
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
            std::set<TaskId> listed;
            for (const auto& t : tasks) {
                bool old_enough = slots[i] - t.created > kReminder;
                bool pending = !t.terminal || *t.terminal >= slots[i];
                if (old_enough && pending) listed.insert(t.id);
            }
            c.expect(digests[i].first == slots[i], label + "digest fired at " + stamp(digests[i].first) +
                                                       ", expected " + stamp(slots[i]));
            c.expect(digests[i].second == listed, label + "digest at " + stamp(slots[i]) + " lists the wrong tasks");
        }
        task_count += tasks.size();
        digest_count += slots.size();
    }
    return std::to_string(timeline) + " timelines, " + std::to_string(task_count) + " tasks, " + std::to_string(digest_count) + " digests";
}

// ---------------------------------------------------------------------------

struct ModelTask {
    TaskId id;
    oracle::TaskModel model;
    std::size_t root = 0;
};

std::string state_machine(Check& c) {
    std::mt19937_64 rng(11);
    std::size_t operations = 0, transitions = 0;
    const auto t0 = at("2023-11-20T09:00:00+05:30");
    int run = 0;
    for (; run < 10000 && c.failures == 0; ++run) {
        auto label = "interleaving " + std::to_string(run) + ": ";
        TestWorld w;
        w.start(t0);
        w.onboard(kPatient, t0);
        Timestamp now = t0;
        std::vector<ModelTask> tasks;
        std::size_t asks = 1 + rng() % 2;
        for (std::size_t i = 0; i < asks; ++i) {
            now += 1min;
            w.text(kPatient, kQuestions[rng() % kQuestions.size()], now);
            auto all = w.service->workflow().tasks();
            if (all.size() != tasks.size() + 1) {
                c.fail(label + "question opened no task");
                break;
            }
            const auto& t = all.back();
            tasks.push_back({t.task_id, {TaskState::AwaitingOperating, t.operating_expert_id, t.escalation_expert_id, now},
                             tasks.size()});
        }
        if (c.failures) break;

        std::size_t steps = 3 + rng() % 10;
        for (std::size_t s = 0; s < steps; ++s) {
            now += Seconds(static_cast<std::int64_t>(rng() % 1800));
            auto kind = rng() % 10;
            if (kind < 2) now += Seconds(static_cast<std::int64_t>(rng() % (4 * 3600)));
            for (auto& t : tasks) t.model = oracle::advance(t.model, now, kEscalation);

            auto& target = tasks[rng() % tasks.size()];
            std::string expert;
            if (kind >= 8 && !target.model.decider.empty() && rng() % 2) expert = target.model.decider;
            else if (rng() % 10 < 6) expert = rng() % 2 ? target.model.operating : target.model.escalation;
            else expert = kExperts[rng() % kExperts.size()];
            auto decision = static_cast<Decision>(rng() % 3);

            oracle::Outcome expected = target.model;
            if (kind >= 2 && kind < 8) expected = oracle::decide(target.model, expert, decision);
            else if (kind >= 8) expected = oracle::correct(target.model, expert);

            std::optional<Errc> got;
            std::optional<TaskId> successor;
            try {
                if (kind < 2) w.service->advance_to(now);
                else if (kind < 8) successor = w.service->decide(expert, target.id, decision, now).successor_task_id;
                else w.service->correct(expert, target.id, kCorrection, now);
            } catch (const Error& e) {
                got = e.code();
            }
            ++operations;
            auto what = label + "step " + std::to_string(s) + " by " + expert + " on " + target.id + ": ";
            if (auto* err = std::get_if<Errc>(&expected)) {
                c.expect(got == *err, what + "expected error " + std::string(to_string(*err)));
            } else {
                c.expect(!got, what + "unexpected error " + (got ? std::string(to_string(*got)) : ""));
                target.model = std::get<oracle::TaskModel>(expected);
                bool rerouted = kind >= 2 && kind < 8 && decision == Decision::Reroute;
                c.expect(successor.has_value() == rerouted, what + "successor mismatch");
                if (rerouted && successor) {
                    auto [operating, escalation] = other_track(target.model.operating);
                    auto root = target.root;
                    tasks.push_back({*successor, {TaskState::AwaitingOperating, operating, escalation, now}, root});
                    auto actual = w.service->workflow().task(*successor);
                    c.expect(actual && actual->operating_expert_id == operating &&
                                 actual->escalation_expert_id == escalation,
                             what + "successor has the wrong experts");
                }
            }
            for (const auto& t : tasks) {
                auto actual = w.service->workflow().task(t.id);
                c.expect(actual && actual->state == t.model.state,
                         what + t.id + " is " + (actual ? std::string(to_string(actual->state)) : "missing") +
                             ", oracle says " + std::string(to_string(t.model.state)));
            }
        }

        // every logged transition follows an allowed edge from the task's current state
        std::map<TaskId, TaskState> current;
        for (const auto& r : w.log->records()) {
            const auto& e = r.event;
            if (e.kind == event_kind::kTaskCreated) current[e.payload.at("task").at("task_id")] = TaskState::AwaitingOperating;
            if (e.kind != event_kind::kTaskTransition) continue;
            ++transitions;
            TaskId id = e.payload.at("task_id");
            auto from = parse_task_state(e.payload.at("from").get<std::string>());
            auto to = parse_task_state(e.payload.at("to").get<std::string>());
            c.expect(current.count(id) && current[id] == from, label + "transition from a stale state on " + id);
            c.expect(oracle::kAllowedEdges.count({from, to}) > 0,
                     label + "illegal edge " + std::string(to_string(from)) + " -> " + std::string(to_string(to)));
            current[id] = to;
        }

        // exactly-once notices to the seeker, per answer, from the chain's final state
        std::map<MessageId, std::vector<std::string>> tagged;
        for (const auto& p : w.sent_to(kPatient, "tagged_reply")) {
            tagged[p.at("target_message_id")].push_back(p.at("text"));
        }
        for (std::size_t root = 0; root < tasks.size(); ++root) {
            if (tasks[root].root != root) continue;
            TaskState final_state = tasks[root].model.state;
            for (const auto& t : tasks) {
                if (t.root == root) final_state = t.model.state;
            }
            bool corrected = final_state == TaskState::CorrectedDone;
            auto task = w.service->workflow().task(tasks[root].id);
            auto answer = task ? w.service->workflow().answer(task->answer_id) : std::nullopt;
            if (!answer || !answer->seeker_message_id) {
                c.fail(label + "answer message missing for " + tasks[root].id);
                continue;
            }
            const auto& replies = tagged[*answer->seeker_message_id];
            auto count = [&](std::string_view text) { return std::count(replies.begin(), replies.end(), std::string(text)); };
            long verified = count(workflow::kVerifiedNotice);
            long awaiting = count(workflow::kAwaitCorrectionNotice);
            long corrections = static_cast<long>(replies.size()) - verified - awaiting;
            c.expect(verified == (final_state == TaskState::ApprovedYes ? 1 : 0), label + "verified notice count");
            c.expect(awaiting == (final_state == TaskState::AwaitingCorrection || corrected ? 1 : 0),
                     label + "await-correction notice count");
            c.expect(corrections == (corrected ? 1 : 0), label + "corrected answer count");
        }
    }
    return std::to_string(run) + " interleavings, " + std::to_string(operations) + " operations, " + std::to_string(transitions) +
           " transitions";
}

// ---------------------------------------------------------------------------

std::string retrieval(Check& c) {
    auto config = fakes::bundled_config();
    std::shared_ptr<const knowledge::EmbeddingProvider> embedder =
        knowledge::make_embedding_provider(config.providers.embedding, config.providers.embedding_dimension);
    const std::vector<std::string> vocab{"eye",  "drops",  "surgery", "lens",  "water", "pain",    "rest",
                                         "diet", "night",  "shield",  "dust",  "drive", "week",    "doctor",
                                         "bath", "sleep",  "light",   "blur",  "visit", "insurance"};
    const Timestamp base = at("2023-11-01T00:00:00Z");
    std::mt19937_64 rng(5);
    std::size_t queries = 0, agree = 0;
    for (int corpus = 0; corpus < 100; ++corpus) {
        knowledge::KnowledgeStore store(embedder);
        std::size_t target = 1 + rng() % 200;
        std::vector<std::string> texts;
        for (std::size_t i = 0; store.chunk_count() < target; ++i) {
            std::string text;
            if (!texts.empty() && rng() % 5 == 0) {
                text = texts[rng() % texts.size()];  // duplicates force ties
            } else {
                std::size_t words = 1 + rng() % 6;
                for (std::size_t k = 0; k < words; ++k) text += vocab[rng() % vocab.size()] + " ";
            }
            texts.push_back(text);
            auto when = base + Seconds(static_cast<std::int64_t>(rng() % 4));
            if (rng() % 5 == 0) store.append_faq_entries({{text, "See your doctor."}}, when);
            else store.ingest_document("doc-" + std::to_string(i), text, knowledge::Tier::Raw, when);
        }
        c.expect(store.chunk_count() <= 200, "corpus " + std::to_string(corpus) + " exceeds 200 chunks");
        auto chunks = store.chunks();
        for (int q = 0; q < 20; ++q) {
            std::string query;
            if (q % 4 == 0) query = chunks[rng() % chunks.size()].text;
            else if (q % 4 == 1) query = "zebra quantum";  // no shared words: every score ties at zero
            else query = vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()];
            auto got = oracle::merged_ids(store.search(query, 3));
            auto want = oracle::brute_force_top_k(chunks, embedder->embed(query), 3);
            ++queries;
            if (got == want) ++agree;
            else c.fail("corpus " + std::to_string(corpus) + " query '" + query + "' disagrees with the oracle");
        }
    }
    return std::to_string(agree) + "/" + std::to_string(queries) + " queries agree over 100 corpora";
}

// ---------------------------------------------------------------------------

std::string channel_limits(Check& c) {
    std::vector<std::pair<std::string, sim::ScenarioScript>> scripts;
    for (const auto& f : scenario_files()) scripts.emplace_back(f.filename().string(), sim::load_script(f));
    for (std::uint64_t seed = 1; seed <= 50; ++seed) scripts.emplace_back("random seed " + std::to_string(seed), sim::random_script(seed, 60));
    std::size_t bodies = 0, labels = 0;
    for (const auto& [name, script] : scripts) {
        auto r = sim::run_scenario(script, {});
        for (const auto& entry : r.outbound) {
            const auto& p = entry.payload;
            for (const char* key : {"text", "header"}) {
                if (!p.contains(key)) continue;
                ++bodies;
                auto n = text::char_count(p.at(key).get<std::string>());
                c.expect(n <= kMessageLimit, name + ": " + key + " of " + std::to_string(n) + " characters");
            }
            for (const auto& option : p.value("options", nlohmann::json::array())) {
                ++labels;
                auto n = text::char_count(option.get<std::string>());
                c.expect(n <= kLabelLimit, name + ": suggestion of " + std::to_string(n) + " characters");
            }
        }
    }
    return std::to_string(scripts.size()) + " scripts, " + std::to_string(bodies) + " bodies, " +
           std::to_string(labels) + " suggestion labels";
}

// ---------------------------------------------------------------------------

std::string kb_closed_loop(Check& c) {
    const std::string question = "Can I fly in an aeroplane next month?";
    TestWorld w;
    auto t0 = at("2023-11-20T09:00:00+05:30");
    w.start(t0);
    w.onboard(kPatient, t0, "EN", "2023-11-22", kAttendant);
    auto faq_before = w.service->store().chunk_count(knowledge::Tier::ExpertFAQ);

    w.text(kPatient, question, t0 + 5min);
    auto first = w.service->workflow().tasks().back();
    auto first_answer = w.service->workflow().answer(first.answer_id);
    c.expect(first_answer && first_answer->answer.is_unknown, "first answer was not unknown");
    w.service->decide("dr-rao", first.task_id, Decision::No, t0 + 30min);
    w.service->correct("dr-rao", first.task_id, "Flying is safe after 1 wk if there is no pain.", t0 + 35min);

    w.service->advance_to(at("2023-11-20T20:00:00+05:30"));
    if (w.reviews->sheets.size() != 1) {
        c.fail("expected one review sheet at 20:00, got " + std::to_string(w.reviews->sheets.size()));
        return "";
    }
    auto rows = w.reviews->sheets.back().rows;
    c.expect(rows.size() == 1 && rows[0].row_id == first.task_id, "review sheet rows");
    for (auto& r : rows) r.should_update = kb::ShouldUpdate::Yes;
    w.service->review(kb::parse_csv(kb::render_csv(rows)), at("2023-11-20T21:00:00+05:30"));

    w.service->advance_to(at("2023-11-21T02:59:59+05:30"));
    c.expect(w.service->store().chunk_count(knowledge::Tier::ExpertFAQ) == faq_before, "FAQ applied before 03:00");
    w.service->advance_to(at("2023-11-21T03:00:00+05:30"));
    c.expect(w.service->store().chunk_count(knowledge::Tier::ExpertFAQ) == faq_before + 1, "FAQ not applied at 03:00");

    w.text(kAttendant, question, at("2023-11-21T09:00:00+05:30"));
    auto second = w.service->workflow().tasks().back();
    auto second_answer = w.service->workflow().answer(second.answer_id);
    if (!second_answer || second.task_id == first.task_id) {
        c.fail("re-asked question produced no answer");
        return "";
    }
    c.expect(!second_answer->answer.is_unknown, "re-asked answer is still unknown");
    const auto& cited = second_answer->answer.citations;
    bool cites_faq = std::find(cited.begin(), cited.end(), knowledge::kExpertFaqDocId) != cited.end();
    c.expect(cites_faq, "re-asked answer does not cite the expert-FAQ tier");
    return "re-asked answer: \"" + second_answer->answer.english_answer + "\"";
}

// ---------------------------------------------------------------------------

// Scheduler firings keyed so that a duplicate shows up as a repeated key.
std::vector<std::string> firings(const std::vector<EventRecord>& events) {
    std::vector<std::string> out;
    for (const auto& r : events) {
        const auto& e = r.event;
        bool timer = e.kind == event_kind::kReminderSent || e.kind == event_kind::kDigestFired ||
                     e.kind == event_kind::kSeekerReminderFired || e.kind == event_kind::kDigestEmitted ||
                     e.kind == event_kind::kFAQApplied ||
                     (e.kind == event_kind::kTaskTransition && e.payload.at("to") == "Escalated");
        if (timer) out.push_back(e.kind + " " + format_rfc3339(e.at) + " " + e.payload.value("task_id", ""));
    }
    return out;
}

std::string crash_recovery(Check& c) {
    std::mt19937_64 rng(17);
    auto files = scenario_files();
    std::size_t compared = 0;
    for (int kill = 0; kill < 20; ++kill) {
        sim::ScenarioScript script;
        std::string name;
        if (kill % 2 == 0) {
            script = sim::random_script(1000 + kill, 40);
            name = "random seed " + std::to_string(1000 + kill);
        } else {
            do {
                auto f = files[rng() % files.size()];
                script = sim::load_script(f);
                name = f.filename().string();
            } while (script.steps.size() < 2);
        }
        std::size_t after = 1 + rng() % (script.steps.size() - 1);
        auto label = name + " killed after step " + std::to_string(after) + ": ";
        auto baseline = sim::run_scenario(script, {});
        sim::RunOptions o;
        o.restart_after_step = after;
        auto restarted = sim::run_scenario(script, o);
        c.expect(restarted.snapshot == baseline.snapshot, label + "task states differ");
        c.expect(restarted.transcript == baseline.transcript, label + "transcript differs");
        auto fired = firings(restarted.events);
        c.expect(fired == firings(baseline.events), label + "scheduler firings differ");
        c.expect(std::set<std::string>(fired.begin(), fired.end()).size() == fired.size(),
                 label + "a scheduler firing was duplicated");
        compared += fired.size();
    }
    return "20 kill points, " + std::to_string(compared) + " firings compared";
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria{
        {"golden-transcript", "hair-wash flow reproduces the golden transcript", 5s, golden_transcript},
        {"timer-semantics", "escalation, reminder and digest timing over random timelines", 30s, timer_timelines},
        {"state-machine", "random interleavings match the transition oracle", 60s, state_machine},
        {"retrieval-oracle", "top-3 search matches exhaustive cosine ranking", 10s, retrieval},
        {"channel-limits", "every text within 700 and every suggestion within 72 characters", 0s, channel_limits},
        {"kb-closed-loop", "a corrected unknown answer is served from the expert FAQ", 0s, kb_closed_loop},
        {"crash-recovery", "replay after a kill gives identical state and firings", 0s, crash_recovery},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    int failed = 0, ran = 0;
    for (const auto& cr : criteria) {
        if (!only.empty() && !only.count(cr.id)) continue;
        ++ran;
        Check check;
        std::string summary;
        auto start = std::chrono::steady_clock::now();
        try {
            summary = cr.run(check);
        } catch (const std::exception& e) {
            check.fail(std::string("exception: ") + e.what());
        }
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
        bool in_time = cr.limit.count() == 0 || elapsed < cr.limit;
        bool pass = check.failures == 0 && in_time;
        if (!pass) ++failed;
        std::cout << (pass ? "PASS " : "FAIL ") << cr.id << ": " << cr.title << " | " << summary << " | "
                  << elapsed.count() << " ms";
        if (cr.limit.count()) std::cout << " (limit " << cr.limit.count() << " ms)";
        if (check.failures) std::cout << " | " << check.failures << " failure(s), first: " << check.first;
        std::cout << std::endl;
    }
    std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
