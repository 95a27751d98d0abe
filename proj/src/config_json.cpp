#include "bslab/config_json.hpp"

#include <cmath>

#include "bslab/error.hpp"

namespace bslab {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    fail(ErrorCode::InvalidConfig, "config", path + ": " + what);
}

double real_from_json(const json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(path, "not finite");
    return v;
}

std::vector<double> reals_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(real_from_json(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

json reals_to_json(const std::vector<double>& xs) { return json(xs); }

}  // namespace

cplx complex_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return {real_from_json(j, path), 0.0};
    if (j.is_array() && j.size() == 2) return {real_from_json(j[0], path + "[0]"), real_from_json(j[1], path + "[1]")};
    bad(path, "expected a number or [re, im]");
}

json complex_to_json(cplx v) {
    if (v.imag() == 0.0) return v.real();
    return json::array({v.real(), v.imag()});
}

ComplexMatrix matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) bad(path, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) bad(path + "[0]", "expected a non-empty row");
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != cols) bad(rp, "row length differs from row 0");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------

ParamReader::ParamReader(const json& obj, std::string path) : obj_(obj.is_null() ? json::object() : obj), path_(std::move(path)) {
    if (!obj_.is_object()) bad(path_, "expected an object");
}

bool ParamReader::has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

const json& ParamReader::require(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) bad(field(key), "required");
    return obj_.at(key);
}

double ParamReader::number(const std::string& key, std::optional<double> fallback) {
    seen_.insert(key);
    const double v = (!has(key) && fallback) ? *fallback : real_from_json(require(key), field(key));
    resolved_[key] = v;
    return v;
}

int ParamReader::integer(const std::string& key, std::optional<int> fallback) {
    seen_.insert(key);
    int v = 0;
    if (!has(key) && fallback) {
        v = *fallback;
    } else {
        const json& j = require(key);
        if (!j.is_number_integer()) bad(field(key), "expected an integer");
        v = j.get<int>();
    }
    resolved_[key] = v;
    return v;
}

bool ParamReader::boolean(const std::string& key, std::optional<bool> fallback) {
    seen_.insert(key);
    bool v = false;
    if (!has(key) && fallback) {
        v = *fallback;
    } else {
        const json& j = require(key);
        if (!j.is_boolean()) bad(field(key), "expected true or false");
        v = j.get<bool>();
    }
    resolved_[key] = v;
    return v;
}

cplx ParamReader::complex(const std::string& key, std::optional<cplx> fallback) {
    seen_.insert(key);
    const cplx v = (!has(key) && fallback) ? *fallback : complex_from_json(require(key), field(key));
    resolved_[key] = complex_to_json(v);
    return v;
}

std::uint64_t ParamReader::u64(const std::string& key, std::optional<std::uint64_t> fallback) {
    seen_.insert(key);
    std::uint64_t v = 0;
    if (!has(key) && fallback) {
        v = *fallback;
    } else {
        const json& j = require(key);
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
            bad(field(key), "expected a non-negative integer");
        }
        v = j.get<std::uint64_t>();
    }
    resolved_[key] = v;
    return v;
}

std::string ParamReader::string(const std::string& key, std::optional<std::string> fallback) {
    seen_.insert(key);
    std::string v;
    if (!has(key) && fallback) {
        v = *fallback;
    } else {
        const json& j = require(key);
        if (!j.is_string()) bad(field(key), "expected a string");
        v = j.get<std::string>();
    }
    resolved_[key] = v;
    return v;
}

std::vector<double> ParamReader::reals(const std::string& key, std::optional<std::vector<double>> fallback) {
    seen_.insert(key);
    std::vector<double> v = (!has(key) && fallback) ? *fallback : reals_from_json(require(key), field(key));
    resolved_[key] = reals_to_json(v);
    return v;
}

std::vector<cplx> ParamReader::complexes(const std::string& key) {
    const json& j = require(key);
    if (!j.is_array()) bad(field(key), "expected an array");
    std::vector<cplx> out;
    json echo = json::array();
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(complex_from_json(j[i], field(key) + "[" + std::to_string(i) + "]"));
        echo.push_back(complex_to_json(out.back()));
    }
    resolved_[key] = echo;
    return out;
}

std::optional<ComplexMatrix> ParamReader::matrix(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    auto m = matrix_from_json(obj_.at(key), field(key));
    resolved_[key] = matrix_to_json(m);
    return m;
}

std::vector<double> ParamReader::grid(const std::string& key, std::optional<json> fallback) {
    seen_.insert(key);
    const json spec = (!has(key) && fallback) ? *fallback : require(key);
    const std::string p = field(key);
    std::vector<double> out;
    if (spec.is_array()) {
        out = reals_from_json(spec, p);
    } else if (spec.is_object()) {
        ParamReader g(spec, p);
        const double start = g.number("start");
        const double stop = g.has("ratio") ? start : g.number("stop");
        if (g.has("ratio")) {
            const double ratio = g.number("ratio");
            const int count = g.integer("count");
            if (!(ratio > 0.0) || count < 1) bad(p, "geometric grid needs ratio > 0 and count >= 1");
            double v = start;
            for (int i = 0; i < count; ++i, v *= ratio) out.push_back(v);
        } else if (g.has("count")) {
            const int count = g.integer("count");
            if (count < 1) bad(p + ".count", "must be >= 1");
            for (int i = 0; i < count; ++i)
                out.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / (count - 1));
        } else {
            const double step = g.number("step");
            if (!(step > 0.0)) bad(p + ".step", "must be positive");
            const double span = (stop - start) / step;
            if (span < -1e-9) bad(p, "stop must not precede start");
            const long n = std::lround(std::floor(span + 1e-9));
            for (long i = 0; i <= n; ++i) out.push_back(start + step * static_cast<double>(i));
        }
        g.finish();
    } else {
        bad(p, "expected an array or {start, stop, count|step}");
    }
    if (out.empty()) bad(p, "grid must be non-empty");
    resolved_[key] = out;
    return out;
}

CouplingBox ParamReader::box(const std::string& key, std::optional<CouplingBox> fallback) {
    seen_.insert(key);
    CouplingBox b;
    if (!has(key) && fallback) {
        b = *fallback;
    } else {
        const auto v = reals_from_json(require(key), field(key));
        if (v.size() != 4) bad(field(key), "expected [re_min, re_max, im_min, im_max]");
        b = {v[0], v[1], v[2], v[3]};
    }
    if (!(b.re_min < b.re_max && b.im_min < b.im_max)) bad(field(key), "box must have positive width and height");
    resolved_[key] = json::array({b.re_min, b.re_max, b.im_min, b.im_max});
    return b;
}

KSet ParamReader::intervals(const std::string& key) {
    const json& j = require(key);
    const std::string p = field(key);
    KSet k;
    auto one = [&](const json& iv, const std::string& ip) {
        const auto v = reals_from_json(iv, ip);
        if (v.size() != 2 || !(v[0] <= v[1])) bad(ip, "expected [a, b] with a <= b");
        k.intervals.push_back({v[0], v[1]});
    };
    if (j.is_array() && !j.empty() && j[0].is_number()) {
        one(j, p);
    } else if (j.is_array() && !j.empty()) {
        for (std::size_t i = 0; i < j.size(); ++i) one(j[i], p + "[" + std::to_string(i) + "]");
    } else {
        bad(p, "expected [a, b] or [[a, b], ...]");
    }
    std::sort(k.intervals.begin(), k.intervals.end(), [](const Interval& a, const Interval& b) { return a.a < b.a; });
    for (std::size_t i = 1; i < k.intervals.size(); ++i)
        if (k.intervals[i].a <= k.intervals[i - 1].b) bad(p, "intervals must be disjoint");
    json echo = json::array();
    for (const auto& iv : k.intervals) echo.push_back(json::array({iv.a, iv.b}));
    resolved_[key] = echo;
    return k;
}

TestFunction ParamReader::test_function(const std::string& key) {
    const json& j = require(key);
    const std::string p = field(key);
    ParamReader r(j, p);
    TestFunction phi;
    if (r.has("tent")) {
        ParamReader t(j.at("tent"), p + ".tent");
        const double a = t.number("a"), b = t.number("b"), peak = t.number("peak", 1.0);
        const double apex = t.number("apex", 0.5 * (a + b));
        r.resolved_["tent"] = t.finish();
        r.seen_.insert("tent");
        phi = TestFunction::tent(a, b, peak, apex);
    } else if (r.has("pieces")) {
        const json& ps = j.at("pieces");
        if (!ps.is_array()) bad(p + ".pieces", "expected an array");
        std::vector<TestFunction::Piece> pieces;
        json echo = json::array();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            ParamReader pr(ps[i], p + ".pieces[" + std::to_string(i) + "]");
            TestFunction::Piece piece{pr.reals("grid"), pr.reals("values")};
            echo.push_back(pr.finish());
            pieces.push_back(std::move(piece));
        }
        r.resolved_["pieces"] = echo;
        r.seen_.insert("pieces");
        phi = TestFunction(std::move(pieces));
    } else {
        bad(p, "expected {\"tent\": {...}} or {\"pieces\": [...]}");
    }
    resolved_[key] = r.finish();
    return phi;
}

json ParamReader::object(const std::string& key, bool allow_string) {
    const json& j = require(key);
    if (!j.is_object() && !(allow_string && j.is_string())) {
        bad(field(key), allow_string ? "expected an object or a file path" : "expected an object");
    }
    return j;
}

void ParamReader::attach(const std::string& key, json resolved) {
    seen_.insert(key);
    resolved_[key] = std::move(resolved);
}

json ParamReader::finish() {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
        if (!seen_.count(it.key())) bad(field(it.key()), "unknown key");
    }
    return resolved_;
}

// ---------------------------------------------------------------------------

ModelConfig model_config_from_json(const json& j, const std::string& path) {
    ParamReader r(j, path);
    ModelConfig cfg;
    try {
        cfg.kind = model_kind_from_string(r.string("kind"));
    } catch (const Error& e) {
        bad(r.field("kind"), e.what());
    }
    const auto iv = r.reals("interval", std::vector<double>{-1.0, 1.0});
    if (iv.size() != 2) bad(r.field("interval"), "expected [a, b]");
    cfg.interval = {iv[0], iv[1]};
    cfg.seed = r.u64("seed", 0);
    switch (cfg.kind) {
        case ModelKind::Diagonal:
            cfg.spectrum = r.reals("spectrum");
            cfg.weights = r.reals("weights", std::vector<double>{});
            cfg.signs = r.reals("signs", std::vector<double>{});
            break;
        case ModelKind::Schrodinger1d:
            cfg.sites = static_cast<std::size_t>(r.u64("sites"));
            cfg.alpha = r.number("alpha", 0.5);
            cfg.potential = r.reals("potential", std::vector<double>{});
            cfg.disorder = r.number("disorder", 0.0);
            cfg.signs = r.reals("signs", std::vector<double>{});
            break;
        case ModelKind::Jacobi:
            cfg.jacobi_diagonal = r.reals("diagonal");
            cfg.jacobi_offdiagonal = r.reals("offdiagonal");
            cfg.alpha = r.number("alpha", 0.5);
            cfg.weights = r.reals("weights", std::vector<double>{});
            cfg.signs = r.reals("signs", std::vector<double>{});
            break;
        case ModelKind::RankOne:
            cfg.spectrum = r.reals("spectrum", std::vector<double>{});
            cfg.vector = r.complexes("vector");
            cfg.sign = r.number("sign", 1.0);
            cfg.h0 = r.matrix("h0");
            break;
        case ModelKind::Explicit:
            cfg.h0 = r.matrix("h0");
            cfg.f = r.matrix("f");
            cfg.j = r.matrix("j");
            if (!cfg.h0) bad(r.field("h0"), "required");
            if (!cfg.f) bad(r.field("f"), "required");
            if (!cfg.j) bad(r.field("j"), "required");
            break;
    }
    r.finish();
    return cfg;
}

json model_config_to_json(const ModelConfig& cfg) {
    auto ones_if_empty = [](const std::vector<double>& v, std::size_t n) {
        return v.empty() ? std::vector<double>(n, 1.0) : v;
    };
    json j;
    j["kind"] = to_string(cfg.kind);
    j["interval"] = json::array({cfg.interval.a, cfg.interval.b});
    j["seed"] = cfg.seed;
    switch (cfg.kind) {
        case ModelKind::Diagonal:
            j["spectrum"] = cfg.spectrum;
            j["weights"] = ones_if_empty(cfg.weights, cfg.spectrum.size());
            j["signs"] = ones_if_empty(cfg.signs, cfg.spectrum.size());
            break;
        case ModelKind::Schrodinger1d:
            j["sites"] = cfg.sites;
            j["alpha"] = cfg.alpha;
            j["potential"] = cfg.potential;
            j["disorder"] = cfg.disorder;
            j["signs"] = ones_if_empty(cfg.signs, cfg.sites);
            break;
        case ModelKind::Jacobi:
            j["diagonal"] = cfg.jacobi_diagonal;
            j["offdiagonal"] = cfg.jacobi_offdiagonal;
            j["alpha"] = cfg.alpha;
            j["weights"] = cfg.weights;
            j["signs"] = ones_if_empty(cfg.signs, cfg.jacobi_diagonal.size());
            break;
        case ModelKind::RankOne: {
            j["spectrum"] = cfg.spectrum;
            json v = json::array();
            for (auto c : cfg.vector) v.push_back(complex_to_json(c));
            j["vector"] = v;
            j["sign"] = cfg.sign;
            if (cfg.h0) j["h0"] = matrix_to_json(*cfg.h0);
            break;
        }
        case ModelKind::Explicit:
            j["h0"] = matrix_to_json(*cfg.h0);
            j["f"] = matrix_to_json(*cfg.f);
            j["j"] = matrix_to_json(*cfg.j);
            break;
    }
    return j;
}

}  // namespace bslab
