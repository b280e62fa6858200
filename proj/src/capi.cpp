#include "bpe_atlas.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "bpe/bpe_engine.hpp"
#include "bpe/config.hpp"
#include "bpe/error.hpp"
#include "bpe/report.hpp"

struct bpe_config {
  bpe::RunConfig config;
};

struct bpe_operator {
  bpe::ShiftModel model;
  bpe::DualWeights dual;
  bpe::WanderingBasis basis;
};

namespace {

thread_local std::string g_last_error;

bpe_status to_status(bpe::ErrorCode code) {
  switch (code) {
    case bpe::ErrorCode::InvalidArgument: return BPE_INVALID_ARGUMENT;
    case bpe::ErrorCode::HorizonExceeded: return BPE_HORIZON_EXCEEDED;
    case bpe::ErrorCode::NotLeftInvertible: return BPE_NOT_LEFT_INVERTIBLE;
    case bpe::ErrorCode::InfiniteKernel: return BPE_INFINITE_KERNEL;
    case bpe::ErrorCode::DivergentSeries: return BPE_DIVERGENT_SERIES;
    case bpe::ErrorCode::Parse: return BPE_PARSE_ERROR;
    case bpe::ErrorCode::Validation: return BPE_VALIDATION_ERROR;
    case bpe::ErrorCode::Io: return BPE_IO_ERROR;
  }
  return BPE_INTERNAL_ERROR;
}

template <class F>
bpe_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return BPE_OK;
  } catch (const bpe::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BPE_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BPE_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown failure";
    return BPE_INTERNAL_ERROR;
  }
}

bpe_status null_argument(const char* name) {
  g_last_error = std::string(name) + " must not be NULL";
  return BPE_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bpe_operator* make_operator(bpe::ShiftModel model) {
  auto dual = bpe::cauchy_dual(model.graph, model.weights);
  auto basis = bpe::wandering_basis(model.graph, model.weights);
  return new bpe_operator{std::move(model), std::move(dual), std::move(basis)};
}

std::optional<std::filesystem::path> dir_of(const char* out_dir) {
  if (!out_dir) return std::nullopt;
  return std::filesystem::path(out_dir);
}

bpe::Complex cx(bpe_complex z) { return {z.re, z.im}; }

}  // namespace

extern "C" {

const char* bpe_version(void) { return "1.0.0"; }

const char* bpe_status_string(bpe_status status) {
  switch (status) {
    case BPE_OK: return "ok";
    case BPE_INVALID_ARGUMENT: return "invalid-argument";
    case BPE_HORIZON_EXCEEDED: return "horizon-exceeded";
    case BPE_NOT_LEFT_INVERTIBLE: return "not-left-invertible";
    case BPE_INFINITE_KERNEL: return "infinite-kernel";
    case BPE_DIVERGENT_SERIES: return "divergent-series";
    case BPE_PARSE_ERROR: return "parse-error";
    case BPE_VALIDATION_ERROR: return "validation-error";
    case BPE_IO_ERROR: return "io-error";
    case BPE_INTERNAL_ERROR: return "internal-error";
  }
  return "unknown";
}

const char* bpe_last_error(void) { return g_last_error.c_str(); }

void bpe_string_free(char* s) { std::free(s); }

bpe_status bpe_config_parse(const char* text, bpe_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new bpe_config{bpe::parse_config(text)}; });
}

bpe_status bpe_config_default(bpe_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new bpe_config{}; });
}

void bpe_config_free(bpe_config* config) { delete config; }

bpe_status bpe_config_to_json(const bpe_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] { *out = dup_string(bpe::serialize_config(config->config)); });
}

bpe_status bpe_operator_from_config(const bpe_config* config, bpe_operator** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = make_operator(bpe::build_model(config->config.op)); });
}

bpe_status bpe_operator_example1(uint32_t depth, bpe_operator** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = make_operator(bpe::build_example1(depth)); });
}

bpe_status bpe_operator_example2(uint32_t k, const double* base, size_t base_len,
                                 uint32_t depth, bpe_operator** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    std::vector<double> b = base ? std::vector<double>(base, base + base_len)
                                 : bpe::base_sequence("example1-rule", depth);
    *out = make_operator(bpe::build_example2(k, b, depth));
  });
}

bpe_status bpe_operator_classical(const double* weights, size_t len, uint32_t depth,
                                  bpe_operator** out) {
  if (!out) return null_argument("out");
  if (!weights && len > 0) return null_argument("weights");
  *out = nullptr;
  return guarded([&] {
    *out = make_operator(bpe::build_classical(
        std::span<const double>(weights, len), depth));
  });
}

void bpe_operator_free(bpe_operator* op) { delete op; }

size_t bpe_operator_kernel_dim(const bpe_operator* op) {
  return op ? op->basis.dim() : 0;
}

uint32_t bpe_operator_depth(const bpe_operator* op) {
  return op ? op->model.graph.depth() : 0;
}

bpe_status bpe_b_n_log2(const bpe_operator* op, bpe_complex w, uint32_t N,
                        double* out) {
  if (!op) return null_argument("op");
  if (!out) return null_argument("out");
  return guarded([&] {
    const bpe::BpeEvaluator ev(op->model.graph, op->model.weights, op->dual,
                               op->basis, N);
    const auto v = ev.log2_b_n(cx(w));
    std::copy(v.begin(), v.end(), out);
  });
}

bpe_status bpe_classify(const double* log2_b, size_t count, double tail_fraction,
                        double slope_threshold, double cap, double* slope,
                        bpe_class* cls) {
  if (!log2_b) return null_argument("log2_b");
  if (!slope || !cls) return null_argument("slope/cls");
  return guarded([&] {
    const auto pc = bpe::classify_point(std::span<const double>(log2_b, count),
                                        {tail_fraction, slope_threshold, cap});
    *slope = pc.slope;
    *cls = static_cast<bpe_class>(pc.classification);
  });
}

bpe_status bpe_kernel_gram(const bpe_operator* op, bpe_complex z, bpe_complex w,
                           uint32_t N, bpe_complex* out) {
  if (!op) return null_argument("op");
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto k = bpe::kernel_gram(op->model.graph, op->dual, op->basis, cx(z), cx(w), N);
    for (Eigen::Index i = 0; i < k.rows(); ++i)
      for (Eigen::Index j = 0; j < k.cols(); ++j)
        out[i * k.cols() + j] = {k(i, j).real(), k(i, j).imag()};
  });
}

bpe_status bpe_gram_test(const bpe_operator* op, bpe_complex w, uint32_t depth,
                         double* sigma_min, int* dimension_mismatch) {
  if (!op) return null_argument("op");
  if (!sigma_min) return null_argument("sigma_min");
  return guarded([&] {
    const auto eb = bpe::adjoint_eigenbasis(op->model.graph, op->model.weights, cx(w), depth);
    const auto r = bpe::gram_test(op->basis, eb);
    *sigma_min = r.sigma_min;
    if (dimension_mismatch) *dimension_mismatch = r.dimension_mismatch ? 1 : 0;
  });
}

bpe_status bpe_radii(const bpe_operator* op, uint32_t N, uint32_t sphere_samples,
                     uint64_t seed, bpe_radii_report* out) {
  if (!op) return null_argument("op");
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto r = bpe::disc_radii(op->model.graph, op->dual, op->basis, N,
                                   sphere_samples, seed);
    double local = r.r_local_sampled_max;
    for (double v : r.r_local) local = std::max(local, v);
    *out = {r.r_dual_estimate, r.r_dual_upper, r.r_inner, r.r_disc, local};
  });
}

bpe_status bpe_run_describe(const bpe_config* config, const char* out_dir, char** json) {
  if (!config) return null_argument("config");
  if (!json) return null_argument("json");
  return guarded([&] {
    *json = dup_string(bpe::run_describe(config->config, dir_of(out_dir)).dump(2));
  });
}

bpe_status bpe_run_radii(const bpe_config* config, const char* out_dir, char** json) {
  if (!config) return null_argument("config");
  if (!json) return null_argument("json");
  return guarded([&] {
    *json = dup_string(bpe::run_radii(config->config, dir_of(out_dir)).dump(2));
  });
}

bpe_status bpe_run_scan(const bpe_config* config, const char* out_dir,
                        unsigned threads, char** json) {
  if (!config) return null_argument("config");
  if (!json) return null_argument("json");
  return guarded([&] {
    *json = dup_string(bpe::run_scan(config->config, dir_of(out_dir), threads).dump(2));
  });
}

bpe_status bpe_run_kernel(const bpe_config* config, const char* out_dir, char** json) {
  if (!config) return null_argument("config");
  if (!json) return null_argument("json");
  return guarded([&] {
    *json = dup_string(bpe::run_kernel(config->config, dir_of(out_dir)).dump(2));
  });
}

bpe_status bpe_run_verify(int which, const bpe_config* config, const char* out_dir,
                          char** json, int* all_pass) {
  if (!config) return null_argument("config");
  if (!json) return null_argument("json");
  return guarded([&] {
    const auto report = bpe::run_verify(which, config->config, dir_of(out_dir));
    if (all_pass) *all_pass = report["table"]["all_pass"].get<bool>() ? 1 : 0;
    *json = dup_string(report.dump(2));
  });
}

}  // extern "C"
