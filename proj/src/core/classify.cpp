#include "classify.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "sparam_io.hpp"

namespace hemtfit::classify {

std::string to_string(AssetCategory c) {
    switch (c) {
        case AssetCategory::IvCurve: return "iv_curve";
        case AssetCategory::SParamTable: return "sparam_table";
        case AssetCategory::Other: return "other";
    }
    return "other";
}

std::string base64_encode(const std::string& bytes) {
    static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) v |= static_cast<unsigned char>(bytes[i + 2]);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += i + 1 < bytes.size() ? table[(v >> 6) & 63] : '=';
        out += i + 2 < bytes.size() ? table[v & 63] : '=';
    }
    return out;
}

namespace {

AssetCategory category_from_string(const std::string& s) {
    if (s == "iv_curve") return AssetCategory::IvCurve;
    if (s == "sparam_table") return AssetCategory::SParamTable;
    if (s == "other") return AssetCategory::Other;
    throw ClassifyError("unknown category '" + s + "' in response");
}

bool looks_like_sparam_table(const std::string& text) {
    static const std::regex head_re(R"(s\s*[12]\s*[12])", std::regex::icase);
    static const std::regex title_re(R"(s\s*[- ]?\s*parameter)", std::regex::icase);
    return std::regex_search(text, head_re) || std::regex_search(text, title_re);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ClassifyResult http_classify(const nlohmann::json& payload, const LlmConfig& cfg) {
    // endpoint = scheme://host[:port][/path]
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg.endpoint, m, url_re))
        throw ClassifyError("bad endpoint '" + cfg.endpoint + "'");
    const std::string base = m[1];
    const std::string path = m[2].matched && m[2].length() ? m[2].str() : "/classify";

    httplib::Client cli(base);
    cli.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
    cli.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
    if (!cfg.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key)
            cli.set_default_headers({{"Authorization", std::string("Bearer ") + key}});
    }

    auto res = cli.Post(path, payload.dump(), "application/json");
    if (!res) throw ClassifyError("classification endpoint unreachable");
    if (res->status >= 400)
        throw ClassifyError("classification endpoint returned HTTP " +
                            std::to_string(res->status));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
        throw ClassifyError("malformed classification response");
    }
    if (!j.is_object() || !j.contains("category"))
        throw ClassifyError("classification response lacks a category");
    ClassifyResult r;
    r.category = category_from_string(j["category"].get<std::string>());
    if (j.contains("vds") && j["vds"].is_number()) r.bias.vds = j["vds"].get<double>();
    if (j.contains("id") && j["id"].is_number()) r.bias.id = j["id"].get<double>();
    if (j.contains("temperature") && j["temperature"].is_number())
        r.bias.temperature_c = j["temperature"].get<double>();
    return r;
}

} // namespace

ClassifyResult classify_image(const std::string& png_bytes, const std::string& filename,
                              const LlmConfig& cfg) {
    if (cfg.endpoint.empty()) throw ClassifyError("no classification endpoint configured");
    if (cfg.endpoint == "mock") {
        ClassifyResult r;
        r.category = ends_with(filename, "_iv.png") ? AssetCategory::IvCurve
                                                    : AssetCategory::Other;
        return r;
    }
    nlohmann::json payload = {{"task", "classify"},
                              {"content_type", "image/png"},
                              {"content", base64_encode(png_bytes)},
                              {"prompt_version", "1"}};
    return http_classify(payload, cfg);
}

ClassifyResult classify_text(const std::string& text, const LlmConfig& cfg) {
    if (cfg.endpoint.empty()) throw ClassifyError("no classification endpoint configured");
    if (cfg.endpoint == "mock") {
        ClassifyResult r;
        if (looks_like_sparam_table(text)) {
            r.category = AssetCategory::SParamTable;
            r.bias = sparam::scan_bias_text(text);
        }
        return r;
    }
    nlohmann::json payload = {{"task", "classify"},
                              {"content_type", "text/plain"},
                              {"content", text},
                              {"prompt_version", "1"}};
    return http_classify(payload, cfg);
}

} // namespace hemtfit::classify
