#ifndef HEMTFIT_CLASSIFY_HPP
#define HEMTFIT_CLASSIFY_HPP

#include <string>

#include "datasets.hpp"

namespace hemtfit::classify {

/// Classification endpoint problems (timeout, HTTP errors, malformed
/// responses). Callers that have user-supplied categories treat this
/// as a warning, not a failure.
struct ClassifyError : Error {
    using Error::Error;
};

enum class AssetCategory { IvCurve, SParamTable, Other };

std::string to_string(AssetCategory c);

struct ClassifyResult {
    AssetCategory category = AssetCategory::Other;
    BiasMetadata bias;
};

struct LlmConfig {
    /// "" = unavailable, "mock" = deterministic offline rules,
    /// otherwise an HTTP endpoint such as http://host:port/classify.
    std::string endpoint;
    /// Environment variable holding the bearer token, if any.
    std::string api_key_env = "HEMTFIT_API_KEY";
    double timeout_s = 30.0;
};

/// Classifies a chart raster. `filename` matters only to the mock,
/// which maps `*_iv.png` to IvCurve. One attempt, no retry.
ClassifyResult classify_image(const std::string& png_bytes, const std::string& filename,
                              const LlmConfig& cfg);

/// Classifies table text; the mock recognizes S-parameter tables by
/// their header shape and pulls bias metadata out of the title.
ClassifyResult classify_text(const std::string& text, const LlmConfig& cfg);

std::string base64_encode(const std::string& bytes);

} // namespace hemtfit::classify

#endif
