#include "expertloop/workflow/workflow.hpp"

#include <algorithm>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::workflow {

namespace {

template <typename T>
void put_opt(nlohmann::json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

void put_time(nlohmann::json& j, const char* key, const std::optional<Timestamp>& v) {
    if (v) j[key] = format_rfc3339(*v);
}

std::optional<Timestamp> get_time(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return parse_rfc3339(j[key].get<std::string>());
}

template <typename T>
std::optional<T> get_opt(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<T>();
}

int due_rank(DueKind k) { return static_cast<int>(k); }

std::string role_label(Role r) {
    switch (r) {
        case Role::Patient: return "patient";
        case Role::Attendant: return "attendant";
        default: return std::string(to_string(r));
    }
}

}  // namespace

std::string_view to_string(DueKind kind) {
    switch (kind) {
        case DueKind::Escalate: return "Escalate";
        case DueKind::PendingReminder: return "PendingReminder";
        case DueKind::Digest: return "Digest";
    }
    return "?";
}

void to_json(nlohmann::json& j, const VerificationTask& t) {
    j = nlohmann::json{{"task_id", t.task_id},
                       {"query_id", t.query_id},
                       {"answer_id", t.answer_id},
                       {"track", to_string(t.track)},
                       {"operating_expert_id", t.operating_expert_id},
                       {"escalation_expert_id", t.escalation_expert_id},
                       {"state", to_string(t.state)},
                       {"created_at", format_rfc3339(t.created_at)},
                       {"reminder_sent", t.reminder_sent},
                       {"expert_messages", t.expert_messages},
                       {"button_messages", t.button_messages}};
    put_time(j, "escalated_at", t.escalated_at);
    put_time(j, "decided_at", t.decided_at);
    put_time(j, "corrected_at", t.corrected_at);
    put_opt(j, "deciding_expert_id", t.deciding_expert_id);
    put_opt(j, "correction_text", t.correction_text);
    put_opt(j, "final_answer", t.final_answer);
    put_opt(j, "predecessor_task_id", t.predecessor_task_id);
    put_opt(j, "successor_task_id", t.successor_task_id);
    put_opt(j, "correction_request_message", t.correction_request_message);
}

void from_json(const nlohmann::json& j, VerificationTask& t) {
    t.task_id = j.at("task_id").get<std::string>();
    t.query_id = j.at("query_id").get<std::string>();
    t.answer_id = j.at("answer_id").get<std::string>();
    t.track = parse_track(j.at("track").get<std::string>());
    t.operating_expert_id = j.at("operating_expert_id").get<std::string>();
    t.escalation_expert_id = j.at("escalation_expert_id").get<std::string>();
    t.state = parse_task_state(j.at("state").get<std::string>());
    t.created_at = parse_rfc3339(j.at("created_at").get<std::string>());
    t.reminder_sent = j.value("reminder_sent", false);
    if (j.contains("expert_messages")) t.expert_messages = j["expert_messages"].get<std::map<UserId, std::vector<MessageId>>>();
    if (j.contains("button_messages")) t.button_messages = j["button_messages"].get<std::map<UserId, MessageId>>();
    t.escalated_at = get_time(j, "escalated_at");
    t.decided_at = get_time(j, "decided_at");
    t.corrected_at = get_time(j, "corrected_at");
    t.deciding_expert_id = get_opt<std::string>(j, "deciding_expert_id");
    t.correction_text = get_opt<std::string>(j, "correction_text");
    t.final_answer = get_opt<std::string>(j, "final_answer");
    t.predecessor_task_id = get_opt<std::string>(j, "predecessor_task_id");
    t.successor_task_id = get_opt<std::string>(j, "successor_task_id");
    t.correction_request_message = get_opt<std::string>(j, "correction_request_message");
}

VerificationWorkflow::VerificationWorkflow(Journal& journal, channel::Messenger& messenger,
                                           const ProfileDirectory& directory, knowledge::KnowledgeStore& store,
                                           llm::LlmGateway& gateway, language::LanguageServices& language,
                                           WorkflowConfig config)
    : journal_(&journal),
      messenger_(&messenger),
      directory_(&directory),
      store_(&store),
      gateway_(&gateway),
      language_(&language),
      config_(std::move(config)) {
    journal.subscribe(event_kind::kQueryReceived, [this](const EventRecord& r) { apply_query(r); });
    journal.subscribe(event_kind::kAnswerGenerated, [this](const EventRecord& r) { apply_answer(r); });
    journal.subscribe(event_kind::kAnswerDelivered, [this](const EventRecord& r) { apply_delivered(r); });
    journal.subscribe(event_kind::kTaskCreated, [this](const EventRecord& r) { apply_task_created(r); });
    journal.subscribe(event_kind::kTaskTransition, [this](const EventRecord& r) { apply_transition(r); });
    journal.subscribe(event_kind::kVerificationSent, [this](const EventRecord& r) { apply_verification_sent(r); });
    journal.subscribe(event_kind::kReminderSent, [this](const EventRecord& r) { apply_reminder(r); });
    journal.subscribe(event_kind::kDigestFired, [this](const EventRecord& r) { apply_digest(r); });
}

void VerificationWorkflow::set_origin(Timestamp origin) {
    std::lock_guard lock(mutex_);
    if (!origin_set_) {
        digest_watermark_ = std::max(digest_watermark_, origin);
        origin_set_ = true;
    }
}

UserProfile VerificationWorkflow::require_profile(const UserId& id) const {
    auto p = directory_->find(id);
    if (!p) throw Error(Errc::UnknownUser, id);
    return *p;
}

ReplyPlan VerificationWorkflow::handle_seeker_message(const UserProfile& seeker,
                                                      const language::NormalizedInbound& inbound,
                                                      const MessageId& inbound_message_id, Timestamp now) {
    std::lock_guard lock(mutex_);
    if (!is_seeker(seeker.role)) throw Error(Errc::InvalidArgument, "only seekers ask questions");
    if (!seeker.is_active(now)) throw Error(Errc::InactiveSeeker, seeker.user_id);
    if (text::trim(inbound.english_text).empty()) throw Error(Errc::InvalidArgument, "empty question");

    // compute everything that can fail before recording anything
    llm::AnswerGeneration gen;
    std::vector<std::string> related;
    std::vector<std::string> citations;
    try {
        auto found = store_->search(inbound.english_text, config_.retrieval_k);
        std::vector<std::string> raw;
        std::vector<std::string> faq;
        std::vector<knowledge::ScoredChunk> ranked = found.raw_chunks;
        ranked.insert(ranked.end(), found.faq_chunks.begin(), found.faq_chunks.end());
        std::sort(ranked.begin(), ranked.end(), knowledge::ranks_before);
        for (const auto& c : ranked) {
            (c.chunk.tier == knowledge::Tier::Raw ? raw : faq).push_back(c.chunk.text);
            if (std::find(citations.begin(), citations.end(), c.chunk.doc_id) == citations.end()) {
                citations.push_back(c.chunk.doc_id);
            }
        }
        auto hist = history(seeker.user_id);
        gen = gateway_->answer_query(inbound.english_text, raw, faq, hist);
        if (text::char_count(gen.english_answer) > text::kMessageLimit) {
            gen.english_answer = gateway_->shorten(gen.english_answer);
        }
        if (gen.query_type == QueryType::Medical || gen.query_type == QueryType::Logistical) {
            related = gateway_->related_questions(inbound.english_text, gen.english_answer);
        }
    } catch (const Error& e) {
        if (e.code() != Errc::ProviderFailure && e.code() != Errc::EmbeddingProviderFailure) throw;
        messenger_->send_text(seeker, std::string(kTryAgainNotice), false, now);
        return {std::nullopt, std::nullopt, QueryType::Other, true};
    }
    if (gen.is_unknown || gen.query_type == QueryType::SmallTalk || gen.query_type == QueryType::Other) {
        citations.clear();
    }

    QueryRecord q;
    q.query_id = journal_->next_id("qry", now);
    q.seeker_id = seeker.user_id;
    q.original_text = inbound.original_text;
    q.original_modality = inbound.original_modality;
    q.english_text = inbound.english_text;
    q.query_type = gen.query_type;
    q.asked_at = now;
    q.conversation_id = "conv-" + seeker.user_id;
    q.audio_ref = inbound.audio_ref;
    journal_->record({event_kind::kQueryReceived, now, {{"query", q}, {"inbound_message_id", inbound_message_id}}});

    BotAnswer a;
    a.answer_id = journal_->next_id("ans", now);
    a.query_id = q.query_id;
    a.english_answer = gen.english_answer;
    a.citations = citations;
    a.is_unknown = gen.is_unknown;
    a.related_questions = related;
    journal_->record({event_kind::kAnswerGenerated, now, {{"answer", a}, {"seeker_id", seeker.user_id}}});

    bool verify = gen.query_type == QueryType::Medical || gen.query_type == QueryType::Logistical;
    bool want_audio = inbound.original_modality == Modality::Audio;
    auto sent = messenger_->send_text(seeker, a.english_answer, want_audio, now);
    if (verify) {
        messenger_->react(seeker, sent.text_id, IconState::QuestionMark, now);
        messenger_->offer_suggestions(seeker, related, now);
    }
    journal_->record({event_kind::kAnswerDelivered, now,
                      {{"query_id", q.query_id}, {"answer_id", a.answer_id}, {"message_id", sent.text_id}}});

    ReplyPlan plan{q.query_id, std::nullopt, gen.query_type, false};
    if (verify) {
        auto track = gen.query_type == QueryType::Medical ? Track::DoctorTrack : Track::CoordinatorTrack;
        plan.task_id = create_task(q, answers_.at(a.answer_id), track, seeker, std::nullopt, now);
    }
    return plan;
}

TaskId VerificationWorkflow::create_task(const QueryRecord& q, const AnswerRecord& a, Track track,
                                         const UserProfile& seeker, std::optional<TaskId> predecessor, Timestamp now) {
    auto operating_id = track == Track::DoctorTrack ? seeker.operating_doctor_id : seeker.operating_coordinator_id;
    if (!operating_id) throw Error(Errc::InvalidArgument, "seeker has no operating expert for the track");
    auto escalation = directory_->escalation_expert(track);
    if (!escalation) throw Error(Errc::InvalidArgument, "no escalation expert configured for the track");

    VerificationTask t;
    t.task_id = journal_->next_id("tsk", now);
    t.query_id = q.query_id;
    t.answer_id = a.answer.answer_id;
    t.track = track;
    t.operating_expert_id = *operating_id;
    t.escalation_expert_id = escalation->user_id;
    t.state = TaskState::AwaitingOperating;
    t.created_at = now;
    t.predecessor_task_id = std::move(predecessor);
    journal_->record({event_kind::kTaskCreated, now, {{"task", t}}});
    send_verification(tasks_.at(t.task_id), require_profile(t.operating_expert_id), now);
    return t.task_id;
}

void VerificationWorkflow::send_verification(const VerificationTask& t, const UserProfile& expert, Timestamp now) {
    const auto& q = queries_.at(t.query_id);
    const auto& a = answers_.at(t.answer_id).answer;
    auto seeker = directory_->find(q.seeker_id);

    std::vector<MessageId> ids;
    auto text_to = [&](const std::string& body) {
        return messenger_->send(expert, channel::send_text(expert.channel_address,
                                                           text::truncate_at_sentence(body, text::kMessageLimit)),
                                now);
    };
    ids.push_back(text_to("Question: " + q.english_text));
    ids.push_back(text_to(a.english_answer));
    std::string details = "Sources: " + (a.citations.empty() ? std::string("none") : text::join(a.citations, ", "));
    if (seeker) {
        details += "\nPatient: " + (seeker->display_demographics.empty() ? std::string("-") : seeker->display_demographics);
        details += " (" + role_label(seeker->role) + ")";
        if (seeker->surgery_date) details += ", surgery on " + format_date(*seeker->surgery_date);
    }
    if (q.audio_ref) details += "\nOriginal audio: " + *q.audio_ref;
    ids.push_back(text_to(details));
    auto buttons = messenger_->send(expert, channel::button_menu(expert.channel_address, t.track), now);
    ids.push_back(buttons);
    journal_->record({event_kind::kVerificationSent, now,
                      {{"task_id", t.task_id}, {"expert_id", expert.user_id}, {"message_ids", ids},
                       {"buttons_message_id", buttons}}});
}

void VerificationWorkflow::record_transition(const VerificationTask& t, TaskState to, Timestamp at,
                                             nlohmann::json extra) {
    extra["task_id"] = t.task_id;
    extra["from"] = to_string(t.state);
    extra["to"] = to_string(to);
    journal_->record({event_kind::kTaskTransition, at, std::move(extra)});
}

void VerificationWorkflow::mark_experts_done(const VerificationTask& t, Timestamp now) {
    for (const auto& [expert_id, ids] : t.expert_messages) {
        if (ids.empty()) continue;
        auto expert = directory_->find(expert_id);
        if (expert) messenger_->react(*expert, ids.front(), IconState::GreenTick, now);
    }
}

TransitionResult VerificationWorkflow::submit_decision(const UserId& expert_id, const TaskId& task_id,
                                                       Decision decision, Timestamp now) {
    std::lock_guard lock(mutex_);
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw Error(Errc::UnknownTask, task_id);
    const VerificationTask t = it->second;
    if (expert_id != t.operating_expert_id && expert_id != t.escalation_expert_id) {
        throw Error(Errc::NotAssignedExpert, expert_id + " is not assigned to " + task_id);
    }
    if (expert_id != t.operating_expert_id && !t.escalated_at) {
        throw Error(Errc::NotAssignedExpert, "task " + task_id + " has not been escalated");
    }
    if (t.is_terminal()) throw Error(Errc::AlreadyDecided, task_id + " is " + std::string(to_string(t.state)));
    if (t.state == TaskState::AwaitingCorrection) {
        if (t.deciding_expert_id == expert_id) throw Error(Errc::AlreadyDecided, task_id + " awaits your correction");
        throw Error(Errc::CorrectionPendingElsewhere, task_id + " awaits another expert's correction");
    }
    if (decision == Decision::Reroute && t.track == Track::CoordinatorTrack && !config_.allow_reroute_to_doctor) {
        throw Error(Errc::RerouteDisabled, "coordinator to doctor reroute is disabled");
    }

    const auto& q = queries_.at(t.query_id);
    const auto& rec = answers_.at(t.answer_id);
    auto seeker = require_profile(q.seeker_id);
    auto expert = require_profile(expert_id);
    TransitionResult result{task_id, t.state, t.state, std::nullopt};

    switch (decision) {
        case Decision::Yes: {
            record_transition(t, TaskState::ApprovedYes, now, {{"expert_id", expert_id}, {"decision", "Yes"}});
            if (rec.seeker_message_id) {
                messenger_->react(seeker, *rec.seeker_message_id, IconState::GreenTick, now);
                messenger_->send_tagged(seeker, *rec.seeker_message_id, std::string(kVerifiedNotice), false, now);
            }
            mark_experts_done(t, now);
            result.to = TaskState::ApprovedYes;
            break;
        }
        case Decision::No: {
            std::optional<MessageId> request;
            auto mine = t.expert_messages.find(expert_id);
            if (mine != t.expert_messages.end() && !mine->second.empty()) {
                request = messenger_->send(expert,
                                           channel::tagged_reply(expert.channel_address, mine->second.front(),
                                                                 std::string(kCorrectionRequest)),
                                           now);
            } else {
                request = messenger_->send(expert, channel::send_text(expert.channel_address, std::string(kCorrectionRequest)), now);
            }
            nlohmann::json extra{{"expert_id", expert_id}, {"decision", "No"}};
            if (request) extra["correction_request_message"] = *request;
            record_transition(t, TaskState::AwaitingCorrection, now, std::move(extra));
            if (rec.seeker_message_id) {
                messenger_->react(seeker, *rec.seeker_message_id, IconState::RedCross, now);
                messenger_->send_tagged(seeker, *rec.seeker_message_id, std::string(kAwaitCorrectionNotice), false, now);
            }
            result.to = TaskState::AwaitingCorrection;
            break;
        }
        case Decision::Reroute: {
            auto successor_id = journal_->next_id("tsk", now);
            record_transition(t, TaskState::Rerouted, now,
                              {{"expert_id", expert_id}, {"decision", "Reroute"}, {"successor_task_id", successor_id}});
            mark_experts_done(t, now);
            auto track = opposite(t.track);
            auto operating_id = track == Track::DoctorTrack ? seeker.operating_doctor_id : seeker.operating_coordinator_id;
            auto escalation = directory_->escalation_expert(track);
            if (!operating_id || !escalation) throw Error(Errc::InvalidArgument, "no experts for the opposite track");
            VerificationTask s;
            s.task_id = successor_id;
            s.query_id = t.query_id;
            s.answer_id = t.answer_id;
            s.track = track;
            s.operating_expert_id = *operating_id;
            s.escalation_expert_id = escalation->user_id;
            s.created_at = now;
            s.predecessor_task_id = t.task_id;
            journal_->record({event_kind::kTaskCreated, now, {{"task", s}}});
            send_verification(tasks_.at(s.task_id), require_profile(s.operating_expert_id), now);
            result.to = TaskState::Rerouted;
            result.successor_task_id = successor_id;
            break;
        }
    }
    return result;
}

CorrectionResult VerificationWorkflow::submit_correction(const UserId& expert_id, const TaskId& task_id,
                                                         const std::string& correction, Timestamp now) {
    std::lock_guard lock(mutex_);
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw Error(Errc::UnknownTask, task_id);
    const VerificationTask t = it->second;
    if (t.state != TaskState::AwaitingCorrection) {
        throw Error(Errc::WrongState, task_id + " is " + std::string(to_string(t.state)));
    }
    if (t.deciding_expert_id != expert_id) throw Error(Errc::WrongExpert, expert_id + " did not mark " + task_id);
    if (text::trim(correction).empty()) throw Error(Errc::InvalidArgument, "empty correction");

    const auto& q = queries_.at(t.query_id);
    const auto rec = answers_.at(t.answer_id);
    auto merged = gateway_->merge_correction(q.english_text, rec.answer.english_answer, correction);
    if (text::char_count(merged) > text::kMessageLimit) merged = gateway_->shorten(merged);
    auto seeker = require_profile(q.seeker_id);

    record_transition(t, TaskState::CorrectedDone, now,
                      {{"expert_id", expert_id}, {"correction_text", correction}, {"final_answer", merged}});
    CorrectionResult result{task_id, merged, {}};
    bool want_audio = q.original_modality == Modality::Audio;
    if (rec.seeker_message_id) {
        auto sent = messenger_->send_tagged(seeker, *rec.seeker_message_id, merged, want_audio, now);
        messenger_->react(seeker, sent.text_id, IconState::GreenTick, now);
        messenger_->react(seeker, *rec.seeker_message_id, IconState::GreenTick, now);
        result.seeker_message_id = sent.text_id;
    } else {
        result.seeker_message_id = messenger_->send_text(seeker, merged, want_audio, now).text_id;
        messenger_->react(seeker, result.seeker_message_id, IconState::GreenTick, now);
    }
    journal_->record({event_kind::kAnswerDelivered, now,
                      {{"query_id", q.query_id}, {"answer_id", rec.answer.answer_id},
                       {"message_id", result.seeker_message_id}, {"final", true}}});
    mark_experts_done(tasks_.at(task_id), now);
    return result;
}

std::vector<VerificationWorkflow::Due> VerificationWorkflow::due_until(Timestamp now) const {
    std::vector<Due> out;
    for (const auto& id : task_order_) {
        const auto& t = tasks_.at(id);
        if (t.is_terminal()) continue;
        if (t.state == TaskState::AwaitingOperating && !t.escalated_at &&
            t.created_at + config_.escalation_delay <= now) {
            out.push_back({t.created_at + config_.escalation_delay, DueKind::Escalate, id});
        }
        if (!t.reminder_sent && t.created_at + config_.reminder_delay <= now) {
            out.push_back({t.created_at + config_.reminder_delay, DueKind::PendingReminder, id});
        }
    }
    for (auto slot : config_.zone.firings_between(digest_watermark_, now, config_.digest_times)) {
        out.push_back({slot, DueKind::Digest, {}});
    }
    std::stable_sort(out.begin(), out.end(), [](const Due& a, const Due& b) {
        if (a.at != b.at) return a.at < b.at;
        return due_rank(a.kind) < due_rank(b.kind);
    });
    return out;
}

std::string VerificationWorkflow::digest_line(const VerificationTask& t, Timestamp at) const {
    const auto& q = queries_.at(t.query_id);
    auto hours = std::chrono::duration_cast<std::chrono::hours>(at - t.created_at).count();
    auto question = text::truncate_words_with_ellipsis(q.english_text, 150);
    return "- " + question + " (pending " + std::to_string(hours) + "h, " + std::string(to_string(t.state)) + ")";
}

std::vector<DueEvent> VerificationWorkflow::tick(Timestamp now) {
    std::lock_guard lock(mutex_);
    std::vector<DueEvent> fired;
    for (const auto& due : due_until(now)) {
        if (due.kind == DueKind::Escalate) {
            const auto t = tasks_.at(due.task_id);
            if (t.state != TaskState::AwaitingOperating || t.escalated_at) continue;
            record_transition(t, TaskState::Escalated, due.at, nlohmann::json::object());
            send_verification(tasks_.at(t.task_id), require_profile(t.escalation_expert_id), due.at);
            fired.push_back({DueKind::Escalate, t.task_id, {t.escalation_expert_id}, due.at, {}});
        } else if (due.kind == DueKind::PendingReminder) {
            const auto t = tasks_.at(due.task_id);
            if (t.is_terminal() || t.reminder_sent) continue;
            std::vector<UserId> recipients{t.operating_expert_id};
            if (t.escalation_expert_id != t.operating_expert_id) recipients.push_back(t.escalation_expert_id);
            journal_->record({event_kind::kReminderSent, due.at, {{"task_id", t.task_id}, {"recipients", recipients}}});
            const auto& q = queries_.at(t.query_id);
            auto body = text::truncate_at_sentence(
                "Reminder: this question has been awaiting verification for over 6 hours.\nQuestion: " + q.english_text,
                text::kMessageLimit);
            for (const auto& r : recipients) {
                auto expert = require_profile(r);
                messenger_->send(expert, channel::send_text(expert.channel_address, body), due.at);
            }
            fired.push_back({DueKind::PendingReminder, t.task_id, recipients, due.at, {}});
        } else {
            std::vector<TaskId> listed;
            std::map<UserId, std::vector<std::string>> lines;
            for (const auto& id : task_order_) {
                const auto& t = tasks_.at(id);
                if (t.is_terminal() || due.at - t.created_at <= config_.reminder_delay) continue;
                listed.push_back(id);
                auto line = digest_line(t, due.at);
                lines[t.operating_expert_id].push_back(line);
                if (t.escalation_expert_id != t.operating_expert_id) lines[t.escalation_expert_id].push_back(line);
            }
            std::vector<UserId> recipients;
            for (const auto& [r, _] : lines) recipients.push_back(r);
            journal_->record({event_kind::kDigestFired, due.at,
                              {{"slot", format_rfc3339(due.at)}, {"task_ids", listed}, {"recipients", recipients}}});
            const std::string header = "Questions pending verification for more than 6 hours:";
            for (const auto& [r, ls] : lines) {
                auto expert = require_profile(r);
                std::string body = header;
                for (const auto& l : ls) {
                    if (text::char_count(body) + 1 + text::char_count(l) > text::kMessageLimit) {
                        messenger_->send(expert, channel::send_text(expert.channel_address, body), due.at);
                        body = header + " (continued)";
                    }
                    body += "\n" + l;
                }
                messenger_->send(expert, channel::send_text(expert.channel_address, body), due.at);
            }
            fired.push_back({DueKind::Digest, std::nullopt, recipients, due.at, listed});
        }
    }
    return fired;
}

std::optional<Timestamp> VerificationWorkflow::next_due() const {
    std::lock_guard lock(mutex_);
    std::optional<Timestamp> best = config_.zone.next_firing(digest_watermark_, config_.digest_times);
    auto consider = [&](Timestamp t) {
        if (!best || t < *best) best = t;
    };
    for (const auto& [id, t] : tasks_) {
        if (t.is_terminal()) continue;
        if (t.state == TaskState::AwaitingOperating && !t.escalated_at) consider(t.created_at + config_.escalation_delay);
        if (!t.reminder_sent) consider(t.created_at + config_.reminder_delay);
    }
    return best;
}

std::optional<TaskId> VerificationWorkflow::task_for_button(const UserId& expert,
                                                            const std::optional<MessageId>& context) const {
    std::lock_guard lock(mutex_);
    if (context) {
        for (const auto& [id, t] : tasks_) {
            for (const auto& [e, ids] : t.expert_messages) {
                if (std::find(ids.begin(), ids.end(), *context) != ids.end()) return id;
            }
        }
    }
    std::optional<TaskId> fallback;
    for (auto it = task_order_.rbegin(); it != task_order_.rend(); ++it) {
        const auto& t = tasks_.at(*it);
        if (!t.button_messages.count(expert)) continue;
        if (!t.is_terminal() && t.state != TaskState::AwaitingCorrection) return t.task_id;
        if (!fallback) fallback = t.task_id;
    }
    return fallback;
}

std::optional<TaskId> VerificationWorkflow::task_awaiting_correction(const UserId& expert,
                                                                     const std::optional<MessageId>& context) const {
    std::lock_guard lock(mutex_);
    if (context) {
        for (const auto& [id, t] : tasks_) {
            if (t.correction_request_message == context) return id;
            auto mine = t.expert_messages.find(expert);
            if (mine != t.expert_messages.end() &&
                std::find(mine->second.begin(), mine->second.end(), *context) != mine->second.end()) {
                return id;
            }
        }
    }
    for (auto it = task_order_.rbegin(); it != task_order_.rend(); ++it) {
        const auto& t = tasks_.at(*it);
        if (t.state == TaskState::AwaitingCorrection && t.deciding_expert_id == expert) return t.task_id;
    }
    return std::nullopt;
}

std::optional<VerificationTask> VerificationWorkflow::task(const TaskId& id) const {
    std::lock_guard lock(mutex_);
    auto it = tasks_.find(id);
    if (it == tasks_.end()) return std::nullopt;
    return it->second;
}

std::vector<VerificationTask> VerificationWorkflow::tasks() const {
    std::lock_guard lock(mutex_);
    std::vector<VerificationTask> out;
    for (const auto& id : task_order_) out.push_back(tasks_.at(id));
    return out;
}

std::optional<QueryRecord> VerificationWorkflow::query(const QueryId& id) const {
    std::lock_guard lock(mutex_);
    auto it = queries_.find(id);
    if (it == queries_.end()) return std::nullopt;
    return it->second;
}

std::optional<AnswerRecord> VerificationWorkflow::answer(const AnswerId& id) const {
    std::lock_guard lock(mutex_);
    auto it = answers_.find(id);
    if (it == answers_.end()) return std::nullopt;
    return it->second;
}

std::vector<llm::Turn> VerificationWorkflow::history(const UserId& seeker) const {
    std::lock_guard lock(mutex_);
    auto it = history_.find(seeker);
    return it == history_.end() ? std::vector<llm::Turn>{} : it->second;
}

void VerificationWorkflow::apply_query(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    auto q = rec.event.payload.at("query").get<QueryRecord>();
    queries_[q.query_id] = std::move(q);
}

void VerificationWorkflow::apply_answer(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    auto a = rec.event.payload.at("answer").get<BotAnswer>();
    auto seeker = rec.event.payload.at("seeker_id").get<std::string>();
    const auto& q = queries_.at(a.query_id);
    auto& h = history_[seeker];
    h.push_back({q.english_text, a.english_answer});
    // the gateway only reads the most recent few turns
    if (h.size() > 16) h.erase(h.begin(), h.end() - 16);
    answer_for_query_[a.query_id] = a.answer_id;
    auto id = a.answer_id;
    answers_[id] = AnswerRecord{std::move(a), std::nullopt, std::nullopt};
}

void VerificationWorkflow::apply_delivered(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    const auto& p = rec.event.payload;
    auto& a = answers_.at(p.at("answer_id").get<std::string>());
    auto id = p.at("message_id").get<std::string>();
    if (p.value("final", false)) a.final_message_id = id;
    else a.seeker_message_id = id;
}

void VerificationWorkflow::apply_task_created(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    auto t = rec.event.payload.at("task").get<VerificationTask>();
    if (tasks_.count(t.task_id)) throw Error(Errc::CorruptLog, "task created twice: " + t.task_id);
    task_order_.push_back(t.task_id);
    tasks_[t.task_id] = std::move(t);
}

void VerificationWorkflow::apply_transition(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    const auto& p = rec.event.payload;
    auto& t = tasks_.at(p.at("task_id").get<std::string>());
    auto from = parse_task_state(p.at("from").get<std::string>());
    auto to = parse_task_state(p.at("to").get<std::string>());
    if (from != t.state || !is_legal_transition(from, to)) {
        throw Error(Errc::IllegalTransition, t.task_id + ": " + std::string(to_string(t.state)) + " -> " +
                                                 std::string(to_string(to)));
    }
    auto& answer = answers_.at(t.answer_id).answer;
    auto set_status = [&](AnswerStatus s) {
        if (!is_legal_transition(answer.status, s)) {
            throw Error(Errc::IllegalTransition, "answer " + answer.answer_id + ": " +
                                                     std::string(to_string(answer.status)) + " -> " +
                                                     std::string(to_string(s)));
        }
        answer.status = s;
    };
    t.state = to;
    auto at = rec.event.at;
    switch (to) {
        case TaskState::Escalated: t.escalated_at = at; break;
        case TaskState::ApprovedYes:
            t.decided_at = at;
            t.deciding_expert_id = p.at("expert_id").get<std::string>();
            set_status(AnswerStatus::Verified);
            break;
        case TaskState::AwaitingCorrection:
            t.decided_at = at;
            t.deciding_expert_id = p.at("expert_id").get<std::string>();
            t.correction_request_message = get_opt<std::string>(p, "correction_request_message");
            set_status(AnswerStatus::MarkedIncorrect);
            break;
        case TaskState::CorrectedDone:
            t.corrected_at = at;
            t.correction_text = p.at("correction_text").get<std::string>();
            t.final_answer = p.at("final_answer").get<std::string>();
            set_status(AnswerStatus::Corrected);
            break;
        case TaskState::Rerouted:
            t.decided_at = at;
            t.deciding_expert_id = p.at("expert_id").get<std::string>();
            t.successor_task_id = p.at("successor_task_id").get<std::string>();
            break;
        case TaskState::AwaitingOperating: break;
    }
}

void VerificationWorkflow::apply_verification_sent(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    const auto& p = rec.event.payload;
    auto& t = tasks_.at(p.at("task_id").get<std::string>());
    auto expert = p.at("expert_id").get<std::string>();
    auto ids = p.at("message_ids").get<std::vector<std::string>>();
    auto& mine = t.expert_messages[expert];
    mine.insert(mine.end(), ids.begin(), ids.end());
    t.button_messages[expert] = p.at("buttons_message_id").get<std::string>();
}

void VerificationWorkflow::apply_reminder(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    tasks_.at(rec.event.payload.at("task_id").get<std::string>()).reminder_sent = true;
}

void VerificationWorkflow::apply_digest(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    digest_watermark_ = std::max(digest_watermark_, rec.event.at);
}

nlohmann::json VerificationWorkflow::snapshot() const {
    std::lock_guard lock(mutex_);
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& id : task_order_) tasks.push_back(tasks_.at(id));
    nlohmann::json answers = nlohmann::json::object();
    for (const auto& [id, a] : answers_) {
        nlohmann::json j = a.answer;
        if (a.seeker_message_id) j["seeker_message_id"] = *a.seeker_message_id;
        if (a.final_message_id) j["final_message_id"] = *a.final_message_id;
        answers[id] = j;
    }
    nlohmann::json queries = nlohmann::json::object();
    for (const auto& [id, q] : queries_) queries[id] = q;
    return {{"tasks", tasks},
            {"answers", answers},
            {"queries", queries},
            {"digest_watermark", format_rfc3339(digest_watermark_)}};
}

}  // namespace expertloop::workflow
