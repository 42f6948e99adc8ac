#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/core/journal.hpp"
#include "expertloop/kb/review_sheet.hpp"
#include "expertloop/knowledge/knowledge_store.hpp"
#include "expertloop/workflow/workflow.hpp"

namespace expertloop::kb {

struct ReviewSheet {
    Date day{};
    Timestamp fired_at{};
    std::vector<ReviewRow> rows;
};

class ReviewSink {
public:
    virtual ~ReviewSink() = default;
    virtual void emit(const ReviewSheet& sheet) = 0;
};

// Writes review-<YYYY-MM-DD>.csv into a directory the reviewer watches.
class FileReviewSink final : public ReviewSink {
public:
    explicit FileReviewSink(std::filesystem::path dir) : dir_(std::move(dir)) {}
    void emit(const ReviewSheet& sheet) override;
    std::filesystem::path path_for(Date day) const;

private:
    std::filesystem::path dir_;
};

class MemoryReviewSink final : public ReviewSink {
public:
    void emit(const ReviewSheet& sheet) override { sheets.push_back(sheet); }
    std::vector<ReviewSheet> sheets;
};

struct KbUpdateConfig {
    LocalZone zone;
    TimeOfDay digest_time = TimeOfDay::parse("20:00");
    TimeOfDay apply_time = TimeOfDay::parse("03:00");
};

// Nightly loop from expert corrections to the expert-FAQ tier: the 20:00
// review sheet, the reviewer's answers, and the 03:00 append.
class KbUpdatePipeline {
public:
    KbUpdatePipeline(Journal& journal, const workflow::VerificationWorkflow& workflow,
                     knowledge::KnowledgeStore& store, ReviewSink& sink, KbUpdateConfig config);

    // Rows for every CorrectedDone task corrected at or before `firing` that
    // no earlier sheet carried. Always emitted, even when empty.
    ReviewSheet build_daily_digest(Timestamp firing);

    // All-or-nothing: throws UnknownRow, DuplicateReview or MissingFinalAnswer
    // without queueing anything. Returns the number of entries queued.
    std::size_t ingest_review(const std::vector<ReviewRow>& rows, Timestamp now);

    // Appends the queue to the expert-FAQ tier. A store failure keeps the
    // queue for the next firing and returns 0.
    std::size_t apply_updates(Timestamp now);

    // Runs the digest and apply firings due in (watermark, now], in order.
    std::size_t tick(Timestamp now);
    std::optional<Timestamp> next_due() const;

    std::vector<knowledge::FaqEntry> queue() const;
    std::optional<ReviewRow> emitted_row(const TaskId& row_id) const;
    std::size_t applied_count() const;

    void set_origin(Timestamp origin);
    nlohmann::json snapshot() const;

private:
    void apply_digest(const EventRecord& rec);
    void apply_review(const EventRecord& rec);
    void apply_faq(const EventRecord& rec);

    Journal* journal_;
    const workflow::VerificationWorkflow* workflow_;
    knowledge::KnowledgeStore* store_;
    ReviewSink* sink_;
    KbUpdateConfig config_;
    mutable std::recursive_mutex mutex_;
    std::map<TaskId, ReviewRow> emitted_;
    std::vector<TaskId> emitted_order_;
    std::set<TaskId> reviewed_;
    std::vector<knowledge::FaqEntry> queue_;
    std::size_t applied_ = 0;
    Timestamp digest_watermark_{};
    Timestamp apply_watermark_{};
    bool origin_set_ = false;
};

}  // namespace expertloop::kb
