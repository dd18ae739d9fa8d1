#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "convgemm/blocking.hpp"
#include "convgemm/model.hpp"

namespace convgemm {

enum class Algo {
    Direct,      // seven-loop reference convolution
    Im2col,      // explicit transform + gemm per repetition
    ConvGemm,    // fused transform-in-packing
    GemmOnly,    // gemm on a pre-materialized lowered matrix
    Im2colOnly,  // the transform alone
};

Algo parse_algo(const std::string& name);  // throws std::invalid_argument
std::string algo_name(Algo algo);

struct LayerResult {
    int layer = 0;  // 1-based position in the model file
    LayerSpec::Kind kind = LayerSpec::Kind::Conv;
    GemmDims dims{};
    double time_s = 0.0;
    int repetitions = 0;
    double gflops = 0.0;
    index_t workspace_bytes = 0;
};

struct RunOptions {
    BlockingParams bp{};
    int threads = 1;
    double min_time = 1.0;  // per-layer measurement threshold, seconds
    bool check = false;     // verify conv outputs against conv_direct
    std::uint64_t seed = 20177;
};

// Simulates one inference sweep of the model at a given batch size:
// synthesizes weights and activations from the fixed seed, walks the layers
// with two ping-pong activation buffers (the output of a layer becomes the
// input of the next by swap), and times each layer by repeating it until
// min_time elapses, reporting total wall time divided by the repetition
// count. Pool layers advance shapes only and produce no row; fc layers run
// as plain gemm of (m x batch x k) and are skipped under Algo::Im2colOnly.
std::vector<LayerResult> run_inference(const ModelSpec& model, index_t batch,
                                       Algo algo, const RunOptions& opt);

void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const ModelSpec& model, index_t batch,
                    Algo algo, int threads, const std::vector<LayerResult>& results);

// Header, one row per timed layer, then a "total" row.
void emit_csv(const std::vector<LayerResult>& results, const std::string& path,
              const ModelSpec& model, index_t batch, Algo algo, int threads);

}  // namespace convgemm
