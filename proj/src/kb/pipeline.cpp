#include "expertloop/kb/pipeline.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::kb {

namespace {

nlohmann::json entries_json(const std::vector<knowledge::FaqEntry>& entries) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : entries) out.push_back({{"question", e.question}, {"answer", e.answer}});
    return out;
}

std::vector<knowledge::FaqEntry> entries_from(const nlohmann::json& j) {
    std::vector<knowledge::FaqEntry> out;
    for (const auto& e : j) out.push_back({e.at("question").get<std::string>(), e.at("answer").get<std::string>()});
    return out;
}

}  // namespace

std::filesystem::path FileReviewSink::path_for(Date day) const {
    return dir_ / ("review-" + format_date(day) + ".csv");
}

void FileReviewSink::emit(const ReviewSheet& sheet) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    std::ofstream out(path_for(sheet.day), std::ios::binary | std::ios::trunc);
    out << render_csv(sheet.rows);
    if (!out) throw Error(Errc::StorageFailure, "cannot write review sheet to " + path_for(sheet.day).string());
}

KbUpdatePipeline::KbUpdatePipeline(Journal& journal, const workflow::VerificationWorkflow& workflow,
                                   knowledge::KnowledgeStore& store, ReviewSink& sink, KbUpdateConfig config)
    : journal_(&journal), workflow_(&workflow), store_(&store), sink_(&sink), config_(std::move(config)) {
    journal.subscribe(event_kind::kDigestEmitted, [this](const EventRecord& r) { apply_digest(r); });
    journal.subscribe(event_kind::kReviewIngested, [this](const EventRecord& r) { apply_review(r); });
    journal.subscribe(event_kind::kFAQApplied, [this](const EventRecord& r) { apply_faq(r); });
}

void KbUpdatePipeline::set_origin(Timestamp origin) {
    std::lock_guard lock(mutex_);
    if (origin_set_) return;
    digest_watermark_ = std::max(digest_watermark_, origin);
    apply_watermark_ = std::max(apply_watermark_, origin);
    origin_set_ = true;
}

ReviewSheet KbUpdatePipeline::build_daily_digest(Timestamp firing) {
    std::lock_guard lock(mutex_);
    ReviewSheet sheet{config_.zone.local_date(firing), firing, {}};
    for (const auto& t : workflow_->tasks()) {
        if (t.state != TaskState::CorrectedDone || !t.corrected_at || *t.corrected_at > firing) continue;
        if (emitted_.count(t.task_id)) continue;
        auto q = workflow_->query(t.query_id);
        auto a = workflow_->answer(t.answer_id);
        ReviewRow row;
        row.row_id = t.task_id;
        row.question = q ? q->english_text : "";
        row.bot_answer = a ? a->answer.english_answer : "";
        row.expert_correction = t.correction_text.value_or("");
        row.merged_final_answer = t.final_answer.value_or("");
        row.final_answer_for_kb = row.merged_final_answer;
        sheet.rows.push_back(std::move(row));
    }
    journal_->record({event_kind::kDigestEmitted, firing,
                      {{"day", format_date(sheet.day)}, {"slot", format_rfc3339(firing)}, {"rows", sheet.rows}}});
    sink_->emit(sheet);
    return sheet;
}

std::size_t KbUpdatePipeline::ingest_review(const std::vector<ReviewRow>& rows, Timestamp now) {
    std::lock_guard lock(mutex_);
    std::set<TaskId> seen;
    for (const auto& r : rows) {
        if (!emitted_.count(r.row_id)) throw Error(Errc::UnknownRow, r.row_id);
        if (reviewed_.count(r.row_id) || !seen.insert(r.row_id).second) throw Error(Errc::DuplicateReview, r.row_id);
        if (r.should_update == ShouldUpdate::Yes && text::trim(r.final_answer_for_kb).empty()) {
            throw Error(Errc::MissingFinalAnswer, r.row_id);
        }
    }
    nlohmann::json decisions = nlohmann::json::array();
    std::size_t queued = 0;
    for (const auto& r : rows) {
        auto question = text::trim(r.question).empty() ? emitted_.at(r.row_id).question : text::trim(r.question);
        nlohmann::json d{{"row_id", r.row_id}, {"should_update", to_string(r.should_update)}};
        if (r.should_update == ShouldUpdate::Yes) {
            d["question"] = question;
            d["answer"] = text::trim(r.final_answer_for_kb);
            ++queued;
        }
        decisions.push_back(std::move(d));
    }
    journal_->record({event_kind::kReviewIngested, now, {{"rows", decisions}}});
    return queued;
}

std::size_t KbUpdatePipeline::apply_updates(Timestamp now) {
    std::lock_guard lock(mutex_);
    auto entries = queue_;
    std::size_t appended = 0;
    nlohmann::json payload{{"slot", format_rfc3339(now)}};
    if (!entries.empty()) {
        try {
            appended = store_->append_faq_entries(entries, now);
        } catch (const Error& e) {
            spdlog::warn("expert-FAQ append failed, keeping {} queued entries: {}", entries.size(), e.what());
            payload["failed"] = e.what();
            entries.clear();
        }
    }
    payload["entries"] = entries_json(entries);
    journal_->record({event_kind::kFAQApplied, now, std::move(payload)});
    for (const auto& e : entries) spdlog::info("expert-FAQ entry applied: {}", e.question);
    return appended;
}

std::size_t KbUpdatePipeline::tick(Timestamp now) {
    std::lock_guard lock(mutex_);
    struct Firing {
        Timestamp at;
        bool digest;
    };
    std::vector<Firing> due;
    for (auto t : config_.zone.firings_between(digest_watermark_, now, {config_.digest_time})) due.push_back({t, true});
    for (auto t : config_.zone.firings_between(apply_watermark_, now, {config_.apply_time})) due.push_back({t, false});
    std::stable_sort(due.begin(), due.end(), [](const Firing& a, const Firing& b) { return a.at < b.at; });
    for (const auto& f : due) {
        if (f.digest) build_daily_digest(f.at);
        else apply_updates(f.at);
    }
    return due.size();
}

std::optional<Timestamp> KbUpdatePipeline::next_due() const {
    std::lock_guard lock(mutex_);
    return std::min(config_.zone.next_firing(digest_watermark_, {config_.digest_time}),
                    config_.zone.next_firing(apply_watermark_, {config_.apply_time}));
}

std::vector<knowledge::FaqEntry> KbUpdatePipeline::queue() const {
    std::lock_guard lock(mutex_);
    return queue_;
}

std::optional<ReviewRow> KbUpdatePipeline::emitted_row(const TaskId& row_id) const {
    std::lock_guard lock(mutex_);
    auto it = emitted_.find(row_id);
    if (it == emitted_.end()) return std::nullopt;
    return it->second;
}

std::size_t KbUpdatePipeline::applied_count() const {
    std::lock_guard lock(mutex_);
    return applied_;
}

void KbUpdatePipeline::apply_digest(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    for (const auto& j : rec.event.payload.at("rows")) {
        auto row = j.get<ReviewRow>();
        if (emitted_.emplace(row.row_id, row).second) emitted_order_.push_back(row.row_id);
    }
    digest_watermark_ = std::max(digest_watermark_, rec.event.at);
}

void KbUpdatePipeline::apply_review(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    for (const auto& d : rec.event.payload.at("rows")) {
        reviewed_.insert(d.at("row_id").get<std::string>());
        if (d.at("should_update").get<std::string>() == "Yes") {
            queue_.push_back({d.at("question").get<std::string>(), d.at("answer").get<std::string>()});
        }
    }
}

void KbUpdatePipeline::apply_faq(const EventRecord& rec) {
    std::lock_guard lock(mutex_);
    auto entries = entries_from(rec.event.payload.at("entries"));
    // Live, the store was appended before the event was recorded; on replay
    // the store is rebuilt from the corpus, so the append is redone here.
    if (journal_->replaying() && !entries.empty()) store_->append_faq_entries(entries, rec.event.at);
    if (!rec.event.payload.contains("failed")) {
        applied_ += entries.size();
        queue_.erase(queue_.begin(), queue_.begin() + std::min(entries.size(), queue_.size()));
    }
    apply_watermark_ = std::max(apply_watermark_, rec.event.at);
}

nlohmann::json KbUpdatePipeline::snapshot() const {
    std::lock_guard lock(mutex_);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& id : emitted_order_) rows.push_back(emitted_.at(id));
    return {{"emitted", rows},
            {"reviewed", std::vector<std::string>(reviewed_.begin(), reviewed_.end())},
            {"queue", entries_json(queue_)},
            {"applied", applied_},
            {"digest_watermark", format_rfc3339(digest_watermark_)},
            {"apply_watermark", format_rfc3339(apply_watermark_)}};
}

}  // namespace expertloop::kb
