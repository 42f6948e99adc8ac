#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace expertloop {

// One error vocabulary shared by every module. Codes map 1:1 onto the
// failure modes each operation documents.
enum class Errc {
    InvalidArgument,
    // knowledge store
    DuplicateDocument,
    EmptyDocument,
    EmbeddingProviderFailure,
    // llm gateway
    ProviderFailure,
    MalformedOutput,
    // language services
    TranscriptionFailure,
    TranslationFailure,
    SynthesisFailure,
    // workflow
    UnknownTask,
    NotAssignedExpert,
    AlreadyDecided,
    CorrectionPendingElsewhere,
    WrongState,
    WrongExpert,
    RerouteDisabled,
    InactiveSeeker,
    IllegalTransition,
    // kb update
    UnknownRow,
    MissingFinalAnswer,
    DuplicateReview,
    // channel
    SchemaViolation,
    OversizeBody,
    // onboarding
    DuplicateEnrollment,
    InvalidForm,
    UnknownUser,
    ExpertLanguageLocked,
    // service
    StorageFailure,
    CorruptLog,
    // simulator
    ScriptError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace expertloop
