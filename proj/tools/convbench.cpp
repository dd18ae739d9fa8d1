// convbench: times the convolution back-ends over the layers of a CNN model
// file across a range of batch sizes and writes one CSV row per layer.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "convgemm/bench.hpp"
#include "convgemm/scratch.hpp"

using namespace convgemm;

namespace {

struct BatchRange {
    index_t begin = 1, end = 1, step = 1;
};

BatchRange parse_batch(const std::string& text) {
    BatchRange r;
    char extra = 0;
    long long b0 = 0, b1 = 0, st = 0;
    const int n = std::sscanf(text.c_str(), "%lld:%lld:%lld%c", &b0, &b1, &st, &extra);
    if (n == 3) {
        r = {b0, b1, st};
    } else if (std::sscanf(text.c_str(), "%lld:%lld%c", &b0, &b1, &extra) == 2) {
        r = {b0, b1, 1};
    } else if (std::sscanf(text.c_str(), "%lld%c", &b0, &extra) == 1) {
        r = {b0, b0, 1};
    } else {
        throw std::invalid_argument("bad --batch '" + text + "', expected b0[:b1[:step]]");
    }
    if (r.begin < 1 || r.end < r.begin || r.step < 1)
        throw std::invalid_argument("bad --batch range '" + text + "'");
    return r;
}

int default_threads() {
    if (const char* env = std::getenv("CONVBENCH_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CNN convolution-layer inference benchmark"};
    std::string model_path;
    std::string batch_text = "1";
    std::string algo_text = "convgemm";
    std::string out_path;
    RunOptions opt;
    opt.threads = default_threads();

    app.add_option("--model", model_path, "model layer file")->required();
    app.add_option("--batch", batch_text, "batch size or range b0[:b1[:step]]");
    app.add_option("--algo", algo_text, "convolution back-end")
        ->check(CLI::IsMember({"direct", "im2col", "convgemm", "gemm-only", "im2col-only"}));
    app.add_option("--threads", opt.threads, "worker threads (default $CONVBENCH_THREADS or 1)");
    app.add_option("--min-time", opt.min_time, "per-layer measurement threshold in seconds");
    app.add_option("--out", out_path, "CSV output path (default stdout)");
    app.add_flag("--check", opt.check, "verify conv outputs against the direct reference");
    app.add_option("--mc", opt.bp.mc, "cache block rows");
    app.add_option("--nc", opt.bp.nc, "cache block columns");
    app.add_option("--kc", opt.bp.kc, "cache block depth");
    app.add_option("--mr", opt.bp.mr, "micro-tile rows");
    app.add_option("--nr", opt.bp.nr, "micro-tile columns");
    CLI11_PARSE(app, argc, argv);

    try {
        if (const char* limit = std::getenv("CONVBENCH_SCRATCH_LIMIT_BYTES"))
            ScratchTracker::set_limit(std::strtoull(limit, nullptr, 10));

        const BatchRange range = parse_batch(batch_text);
        const Algo algo = parse_algo(algo_text);
        const ModelSpec model = parse_model(model_path);

        std::ofstream file;
        std::ostream* out = &std::cout;
        if (!out_path.empty()) {
            file.open(out_path);
            if (!file)
                throw IoError("cannot open '" + out_path + "' for writing");
            out = &file;
        }

        write_csv_header(*out);
        for (index_t b = range.begin; b <= range.end; b += range.step) {
            const auto results = run_inference(model, b, algo, opt);
            write_csv_rows(*out, model, b, algo, opt.threads, results);
            out->flush();
            double total = 0.0;
            for (const LayerResult& r : results) total += r.time_s;
            std::fprintf(stderr, "%s b=%lld %s threads=%d: %zu layers, %.4fs per sweep\n",
                         model.name.c_str(), static_cast<long long>(b),
                         algo_name(algo).c_str(), opt.threads, results.size(), total);
        }
        return 0;
    } catch (const AllocationFailure& e) {
        std::cerr << "allocation failure: " << e.what() << "\n";
        return 2;
    } catch (const std::bad_alloc&) {
        std::cerr << "allocation failure: out of memory\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
