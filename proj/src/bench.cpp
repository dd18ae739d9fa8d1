#include "convgemm/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>

#include "convgemm/conv.hpp"

namespace convgemm {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void fill_uniform(float* p, index_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (index_t i = 0; i < n; ++i)
        p[i] = dist(rng);
}

struct LayerShapes {
    index_t in_elems = 0;
    index_t out_elems = 0;
    index_t weight_elems = 0;
};

LayerShapes shapes_for(const LayerSpec& layer, index_t batch) {
    switch (layer.kind) {
        case LayerSpec::Kind::Conv: {
            ConvParams cp = layer.conv;
            cp.b = batch;
            const OutputDims od = output_dims(cp);
            return {cp.h_i * cp.w_i * cp.c_i * batch,
                    cp.k_n * od.h_o * od.w_o * batch,
                    cp.k_n * cp.k_h * cp.k_w * cp.c_i};
        }
        case LayerSpec::Kind::Fc:
            return {layer.fc_k * batch, layer.fc_m * batch, layer.fc_m * layer.fc_k};
        case LayerSpec::Kind::Pool:
        default:
            return {};
    }
}

// max |a-b| scaled by max(1, max|ref|)
double normalized_max_error(const float* a, const float* ref, index_t n) {
    double scale = 1.0;
    double diff = 0.0;
    for (index_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::fabs(static_cast<double>(ref[i])));
        diff = std::max(diff, std::fabs(static_cast<double>(a[i]) -
                                        static_cast<double>(ref[i])));
    }
    return diff / scale;
}

double row_flops(const LayerResult& r) {
    return r.gflops * r.time_s * 1e9;
}

}  // namespace

Algo parse_algo(const std::string& name) {
    if (name == "direct") return Algo::Direct;
    if (name == "im2col") return Algo::Im2col;
    if (name == "convgemm") return Algo::ConvGemm;
    if (name == "gemm-only") return Algo::GemmOnly;
    if (name == "im2col-only") return Algo::Im2colOnly;
    throw std::invalid_argument("unknown algo '" + name + "'");
}

std::string algo_name(Algo algo) {
    switch (algo) {
        case Algo::Direct: return "direct";
        case Algo::Im2col: return "im2col";
        case Algo::ConvGemm: return "convgemm";
        case Algo::GemmOnly: return "gemm-only";
        case Algo::Im2colOnly: return "im2col-only";
    }
    return "?";
}

std::vector<LayerResult> run_inference(const ModelSpec& model, index_t batch,
                                       Algo algo, const RunOptions& opt) {
    if (batch < 1)
        throw InvalidGeometry("batch must be positive");
    validate(opt.bp);
    const int threads = std::max(1, opt.threads);

    index_t act_elems = 1;
    index_t weight_elems = 1;
    for (const LayerSpec& layer : model.layers) {
        const LayerShapes sh = shapes_for(layer, batch);
        act_elems = std::max({act_elems, sh.in_elems, sh.out_elems});
        weight_elems = std::max(weight_elems, sh.weight_elems);
    }

    // Two ping-pong activation buffers sized to the per-model maximum; a
    // layer reads one and writes the other, then they swap.
    std::vector<float> act_a(static_cast<std::size_t>(act_elems));
    std::vector<float> act_b(static_cast<std::size_t>(act_elems));
    std::vector<float> weights(static_cast<std::size_t>(weight_elems));
    std::mt19937_64 rng(opt.seed);
    fill_uniform(act_a.data(), act_elems, rng);
    fill_uniform(act_b.data(), act_elems, rng);

    std::vector<LayerResult> results;
    float* src = act_a.data();
    float* dst = act_b.data();

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const LayerSpec& layer = model.layers[li];
        if (layer.kind == LayerSpec::Kind::Pool) continue;
        if (layer.kind == LayerSpec::Kind::Fc && algo == Algo::Im2colOnly) continue;

        const LayerShapes sh = shapes_for(layer, batch);
        fill_uniform(weights.data(), sh.weight_elems, rng);

        LayerResult res;
        res.layer = static_cast<int>(li + 1);
        res.kind = layer.kind;

        std::function<void()> op;
        double flops = 0.0;
        bool wrote_output = true;

        ConvParams cp;                                 // conv layers only
        std::optional<Im2colMatrix<float>> lowered;    // gemm-only keeps it live

        if (layer.kind == LayerSpec::Kind::Fc) {
            const GemmDims dims{layer.fc_m, batch, layer.fc_k};
            res.dims = dims;
            res.workspace_bytes = convgemm_scratch_bytes(opt.bp);
            flops = 2.0 * static_cast<double>(dims.m) * static_cast<double>(dims.n) *
                    static_cast<double>(dims.k);
            const MatrixView<const float> W{weights.data(), dims.m, dims.k, dims.m};
            const MatrixView<const float> X{src, dims.k, dims.n, dims.k};
            const MatrixView<float> Y{dst, dims.m, dims.n, dims.m};
            op = [=, &opt] {
                zero_matrix(Y);
                MatrixSource<float> bsrc(X);
                gemm<float>(W, bsrc, Y, dims, opt.bp, threads);
            };
        } else {
            cp = layer.conv;
            cp.b = batch;
            const OutputDims od = output_dims(cp);
            const GemmDims dims = gemm_dims(cp);
            res.dims = dims;
            flops = 2.0 * static_cast<double>(dims.m) * static_cast<double>(dims.n) *
                    static_cast<double>(dims.k);
            const Tensor4View<const float> F{weights.data(), cp.k_n, cp.k_h, cp.k_w, cp.c_i};
            const Tensor4View<const float> I{src, cp.h_i, cp.w_i, cp.c_i, cp.b};
            const Tensor4View<float> O{dst, cp.k_n, od.h_o, od.w_o, cp.b};

            switch (algo) {
                case Algo::Direct:
                    res.workspace_bytes = 0;
                    op = [=] { conv_direct<float>(F, I, cp, O); };
                    break;
                case Algo::Im2col:
                    res.workspace_bytes = im2col_workspace_bytes(cp);
                    op = [=, &opt] { conv_im2col_gemm<float>(F, I, cp, opt.bp, threads, O); };
                    break;
                case Algo::ConvGemm:
                    res.workspace_bytes = convgemm_scratch_bytes(opt.bp);
                    op = [=, &opt] { conv_gemm<float>(F, I, cp, opt.bp, threads, O); };
                    break;
                case Algo::GemmOnly: {
                    res.workspace_bytes = im2col_workspace_bytes(cp);
                    lowered.emplace(im2col<float>(I, cp, threads));
                    const MatrixView<const float> B = lowered->view();
                    op = [=, &opt] {
                        MatrixView<float> Chat = output_as_matrix(O);
                        zero_matrix(Chat);
                        MatrixSource<float> bsrc(B);
                        gemm<float>(filters_as_matrix(F), bsrc, Chat, dims, opt.bp, threads);
                    };
                    break;
                }
                case Algo::Im2colOnly:
                    res.workspace_bytes = im2col_workspace_bytes(cp);
                    flops = 0.0;
                    wrote_output = false;
                    op = [=] { auto tmp = im2col<float>(I, cp, threads); (void)tmp; };
                    break;
            }
        }

        int reps = 0;
        double elapsed = 0.0;
        const auto t0 = clock_type::now();
        do {
            op();
            ++reps;
            elapsed = seconds_since(t0);
        } while (elapsed < opt.min_time);
        res.repetitions = reps;
        res.time_s = elapsed / reps;
        res.gflops = flops > 0.0 ? flops / res.time_s / 1e9 : 0.0;

        if (opt.check && layer.kind == LayerSpec::Kind::Conv && wrote_output &&
            algo != Algo::Direct) {
            const OutputDims od = output_dims(cp);
            std::vector<float> ref(static_cast<std::size_t>(sh.out_elems));
            const Tensor4View<const float> F{weights.data(), cp.k_n, cp.k_h, cp.k_w, cp.c_i};
            const Tensor4View<const float> I{src, cp.h_i, cp.w_i, cp.c_i, cp.b};
            conv_direct<float>(F, I, cp, Tensor4View<float>{ref.data(), cp.k_n, od.h_o, od.w_o, cp.b});
            const double err = normalized_max_error(dst, ref.data(), sh.out_elems);
            if (err > 1e-5)
                throw std::runtime_error("check failed at layer " +
                                         std::to_string(res.layer) + ": error " +
                                         std::to_string(err));
        }

        results.push_back(res);
        if (wrote_output)
            std::swap(src, dst);
    }
    return results;
}

void write_csv_header(std::ostream& out) {
    out << "model,batch,algo,threads,layer,m,n,k,time_s,gflops,workspace_bytes\n";
}

void write_csv_rows(std::ostream& out, const ModelSpec& model, index_t batch,
                    Algo algo, int threads, const std::vector<LayerResult>& results) {
    char line[512];
    double total_time = 0.0;
    double total_flops = 0.0;
    index_t worst_ws = 0;
    const std::string algo_text = algo_name(algo);
    for (const LayerResult& r : results) {
        std::snprintf(line, sizeof line,
                      "%s,%lld,%s,%d,%d,%lld,%lld,%lld,%.9g,%.6g,%lld\n",
                      model.name.c_str(), static_cast<long long>(batch),
                      algo_text.c_str(), threads, r.layer,
                      static_cast<long long>(r.dims.m),
                      static_cast<long long>(r.dims.n),
                      static_cast<long long>(r.dims.k), r.time_s, r.gflops,
                      static_cast<long long>(r.workspace_bytes));
        out << line;
        total_time += r.time_s;
        total_flops += row_flops(r);
        worst_ws = std::max(worst_ws, r.workspace_bytes);
    }
    const double total_gflops = total_time > 0.0 ? total_flops / total_time / 1e9 : 0.0;
    std::snprintf(line, sizeof line, "%s,%lld,%s,%d,total,0,0,0,%.9g,%.6g,%lld\n",
                  model.name.c_str(), static_cast<long long>(batch),
                  algo_text.c_str(), threads, total_time, total_gflops,
                  static_cast<long long>(worst_ws));
    out << line;
}

void emit_csv(const std::vector<LayerResult>& results, const std::string& path,
              const ModelSpec& model, index_t batch, Algo algo, int threads) {
    std::ofstream file(path);
    if (!file)
        throw IoError("cannot open '" + path + "' for writing");
    write_csv_header(file);
    write_csv_rows(file, model, batch, algo, threads, results);
    if (!file)
        throw IoError("write to '" + path + "' failed");
}

}  // namespace convgemm
