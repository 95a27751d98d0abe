#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "bslab/matrix.hpp"
#include "bslab/model.hpp"
#include "bslab/resonance.hpp"
#include "bslab/spectral.hpp"

namespace bslab {

using json = nlohmann::json;

/// Complex scalars are written either as a plain number or as [re, im].
cplx complex_from_json(const json& j, const std::string& path);
json complex_to_json(cplx v);

ComplexMatrix matrix_from_json(const json& j, const std::string& path);
json matrix_to_json(const ComplexMatrix& m);

ModelConfig model_config_from_json(const json& j, const std::string& path = "model");
/// Only the keys relevant to the kind are written, with defaults filled in.
json model_config_to_json(const ModelConfig& cfg);

/// Typed reader over a JSON object that records every value it hands out
/// (defaults included) and rejects keys nobody asked for.
class ParamReader {
public:
    ParamReader(const json& obj, std::string path);

    double number(const std::string& key, std::optional<double> fallback = std::nullopt);
    int integer(const std::string& key, std::optional<int> fallback = std::nullopt);
    bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt);
    cplx complex(const std::string& key, std::optional<cplx> fallback = std::nullopt);
    std::uint64_t u64(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt);
    std::vector<double> reals(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
    std::vector<cplx> complexes(const std::string& key);
    std::optional<ComplexMatrix> matrix(const std::string& key);

    /// An explicit array, {"start", "stop", "count"} (inclusive),
    /// {"start", "stop", "step"} or the geometric {"start", "ratio", "count"}.
    std::vector<double> grid(const std::string& key, std::optional<json> fallback = std::nullopt);
    /// [re_min, re_max, im_min, im_max]
    CouplingBox box(const std::string& key, std::optional<CouplingBox> fallback = std::nullopt);
    /// [[a, b], ...] or a single [a, b].
    KSet intervals(const std::string& key);
    /// {"tent": {"a", "b", "peak", "apex"?}} or {"pieces": [{"grid", "values"}]}
    TestFunction test_function(const std::string& key);

    /// Nested object, handed back raw; the caller reads it with its own
    /// ParamReader and attaches the echo.
    json object(const std::string& key, bool allow_string = false);
    void attach(const std::string& key, json resolved);

    bool has(const std::string& key) const;
    std::string field(const std::string& key) const { return path_ + "." + key; }

    /// Throws InvalidConfig on unread keys; returns the resolved echo.
    json finish();

private:
    const json& require(const std::string& key);

    json obj_;
    std::string path_;
    json resolved_ = json::object();
    std::set<std::string> seen_;
};

}  // namespace bslab
