#include "bslab/bslab.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "bslab/error.hpp"
#include "bslab/experiment.hpp"

struct bslab_model {
    bslab::OperatorModel model;
};

namespace {

thread_local std::string g_message;
thread_local std::string g_code;

bslab_status record(bslab_status status, std::string code, std::string message) {
    g_code = std::move(code);
    g_message = std::move(message);
    return status;
}

bslab_status ok() {
    g_code.clear();
    g_message.clear();
    return BSLAB_OK;
}

bslab_status from_run_status(bslab::RunStatus s) { return static_cast<bslab_status>(static_cast<int>(s)); }

template <class Body>
bslab_status guarded(Body&& body) {
    try {
        body();
        return ok();
    } catch (const bslab::Error& e) {
        using bslab::ErrorCode;
        bslab_status status = BSLAB_COMPUTE_ERROR;
        if (e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::NonHermitianInput ||
            e.code() == ErrorCode::InvalidArgument) {
            status = BSLAB_INVALID_CONFIG;
        } else if (e.code() == ErrorCode::IoError) {
            status = BSLAB_IO_ERROR;
        }
        return record(status, std::string(bslab::to_string(e.code())), e.operation() + ": " + e.what());
    } catch (const bslab::json::exception& e) {
        return record(BSLAB_INVALID_CONFIG, "InvalidConfig", e.what());
    } catch (const std::bad_alloc&) {
        return record(BSLAB_COMPUTE_ERROR, "OutOfMemory", "allocation failed");
    } catch (const std::exception& e) {
        return record(BSLAB_COMPUTE_ERROR, "Internal", e.what());
    }
}

bslab::CouplingBox to_box(const double b[4]) { return {b[0], b[1], b[2], b[3]}; }

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* bslab_version(void) { return bslab::kToolVersion; }
const char* bslab_last_error(void) { return g_message.c_str(); }
const char* bslab_last_error_code(void) { return g_code.c_str(); }

bslab_status bslab_model_from_json(const char* model_json, bslab_model** out) {
    if (!model_json || !out) return record(BSLAB_INVALID_HANDLE, "InvalidArgument", "null argument");
    *out = nullptr;
    return guarded([&] {
        const auto cfg = bslab::model_config_from_json(bslab::json::parse(model_json));
        *out = new bslab_model{bslab::build_model(cfg)};
    });
}

void bslab_model_free(bslab_model* model) { delete model; }

size_t bslab_model_dim(const bslab_model* model) { return model ? model->model.dim() : 0; }

bslab_status bslab_sandwich(const bslab_model* model, double s, double lambda, double y, int route, double* out) {
    if (!model || !out) return record(BSLAB_INVALID_HANDLE, "InvalidArgument", "null argument");
    if (route != 0 && route != 1) return record(BSLAB_INVALID_CONFIG, "InvalidArgument", "route must be 0 or 1");
    return guarded([&] {
        const bslab::SpectralParameter z{lambda, y};
        const auto v = route == 0 ? bslab::sandwiched_direct(model->model, s, z) : bslab::sandwiched_identity(model->model, s, z);
        const auto data = v.t.data();
        for (std::size_t k = 0; k < data.size(); ++k) {
            out[2 * k] = data[k].real();
            out[2 * k + 1] = data[k].imag();
        }
    });
}

bslab_status bslab_count_resonances(const bslab_model* model, double lambda, double y, const double box[4], int* count) {
    if (!model || !box || !count) return record(BSLAB_INVALID_HANDLE, "InvalidArgument", "null argument");
    return guarded([&] { *count = bslab::count_resonances(model->model, {lambda, y}, to_box(box)); });
}

bslab_status bslab_locate(const bslab_model* model, double lambda, double y, const double box[4], double* points,
                          int* multiplicities, size_t capacity, size_t* found) {
    if (!model || !box || !found || (capacity > 0 && (!points || !multiplicities))) {
        return record(BSLAB_INVALID_HANDLE, "InvalidArgument", "null argument");
    }
    return guarded([&] {
        const auto res = bslab::locate_resonances(model->model, {lambda, y}, to_box(box), {.with_riesz = false});
        *found = res.points.size();
        for (std::size_t k = 0; k < res.points.size() && k < capacity; ++k) {
            points[2 * k] = res.points[k].r.real();
            points[2 * k + 1] = res.points[k].r.imag();
            multiplicities[k] = res.points[k].multiplicity;
        }
    });
}

bslab_status bslab_run(const char* command, const char* config_json, const char* base_dir, const char* out_dir,
                       int has_seed, uint64_t seed, int threads, char** manifest_out) {
    if (!command || !config_json) return record(BSLAB_INVALID_HANDLE, "InvalidArgument", "null argument");
    if (manifest_out) *manifest_out = nullptr;
    bslab_status status = BSLAB_OK;
    std::string fail_code, fail_message;
    const bslab_status call = guarded([&] {
        bslab::json config;
        try {
            config = bslab::json::parse(config_json);
        } catch (const bslab::json::exception& e) {
            bslab::fail(bslab::ErrorCode::InvalidConfig, "config", std::string("config is not valid JSON: ") + e.what());
        }
        bslab::RunOptions opts;
        opts.command = command;
        if (base_dir) opts.base_dir = base_dir;
        if (out_dir) opts.out_dir = std::filesystem::path(out_dir);
        if (has_seed) opts.seed = seed;
        opts.threads = threads < 1 ? 1 : threads;
        const auto outcomes = bslab::run_config(config, opts);
        status = from_run_status(bslab::combined_status(outcomes));
        bslab::json manifests;
        if (config.is_array()) {
            manifests = bslab::json::array();
            for (const auto& o : outcomes) manifests.push_back(o.manifest);
        } else {
            manifests = outcomes.front().manifest;
        }
        if (manifest_out) *manifest_out = copy_string(manifests.dump(2));
        if (status != BSLAB_OK) {
            for (const auto& o : outcomes) {
                if (o.status == bslab::RunStatus::Ok) continue;
                const auto& f = o.manifest.at("failure");
                fail_code = f.value("code", std::string{});
                fail_message = f.value("operation", std::string{}) + ": " + f.value("message", std::string{});
                break;
            }
        }
    });
    if (call != BSLAB_OK) return call;
    if (status != BSLAB_OK) return record(status, fail_code, fail_message);
    return BSLAB_OK;
}

void bslab_string_free(char* s) { delete[] s; }

}  // extern "C"
