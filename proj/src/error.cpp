#include "reviewkit/error.hpp"

namespace reviewkit {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::InvalidConfig: return "invalid_config";
    case ErrorKind::EndpointUnavailable: return "endpoint_unavailable";
    case ErrorKind::Credentials: return "credentials";
    case ErrorKind::JudgeUnparseable: return "judge_unparseable";
    case ErrorKind::DimensionScoreMissing: return "dimension_score_missing";
    case ErrorKind::QueryGenerationFailed: return "query_generation_failed";
    case ErrorKind::RetrievalUnavailable: return "retrieval_unavailable";
    case ErrorKind::FeedParse: return "feed_parse";
    case ErrorKind::SynthesisFailed: return "synthesis_failed";
    case ErrorKind::IngestionFailed: return "ingestion_failed";
    case ErrorKind::UndefinedMetric: return "undefined_metric";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

} // namespace reviewkit
