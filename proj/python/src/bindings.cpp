#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "convgemm/bench.hpp"
#include "convgemm/conv.hpp"
#include "convgemm/scratch.hpp"

namespace py = pybind11;
using namespace convgemm;

namespace {

template <typename T>
using farray = py::array_t<T, py::array::f_style | py::array::forcecast>;

template <typename T>
Tensor4View<const T> as_tensor4(const farray<T>& a, const char* name) {
    if (a.ndim() != 4)
        throw std::invalid_argument(std::string(name) + " must be a rank-4 array");
    return {a.data(), a.shape(0), a.shape(1), a.shape(2), a.shape(3)};
}

bool wants_double(const py::array& a, const py::array& b) {
    const auto f64 = py::dtype::of<double>();
    return a.dtype().is(f64) || b.dtype().is(f64);
}

enum class ConvKind { Direct, TwoStage, Fused };

template <typename T>
py::array_t<T> run_conv(ConvKind kind, const farray<T>& F, const farray<T>& I,
                        const ConvParams& cp, const BlockingParams& bp, int threads) {
    const Tensor4View<const T> Fv = as_tensor4<T>(F, "filters");
    const Tensor4View<const T> Iv = as_tensor4<T>(I, "input");
    const OutputDims od = output_dims(cp);
    py::array_t<T, py::array::f_style> out(
        {static_cast<py::ssize_t>(cp.k_n), static_cast<py::ssize_t>(od.h_o),
         static_cast<py::ssize_t>(od.w_o), static_cast<py::ssize_t>(cp.b)});
    const Tensor4View<T> Ov{out.mutable_data(), cp.k_n, od.h_o, od.w_o, cp.b};
    {
        py::gil_scoped_release release;
        switch (kind) {
            case ConvKind::Direct:
                conv_direct<T>(Fv, Iv, cp, Ov);
                break;
            case ConvKind::TwoStage:
                conv_im2col_gemm<T>(Fv, Iv, cp, bp, threads, Ov);
                break;
            case ConvKind::Fused:
                conv_gemm<T>(Fv, Iv, cp, bp, threads, Ov);
                break;
        }
    }
    return out;
}

py::array dispatch_conv(ConvKind kind, const py::array& F, const py::array& I,
                        const ConvParams& cp, const BlockingParams& bp, int threads) {
    if (wants_double(F, I))
        return run_conv<double>(kind, farray<double>::ensure(F),
                                farray<double>::ensure(I), cp, bp, threads);
    return run_conv<float>(kind, farray<float>::ensure(F), farray<float>::ensure(I),
                           cp, bp, threads);
}

template <typename T>
py::array_t<T> run_gemm(const farray<T>& A, const farray<T>& B,
                        const BlockingParams& bp, int threads) {
    if (A.ndim() != 2 || B.ndim() != 2)
        throw std::invalid_argument("gemm expects two rank-2 arrays");
    const index_t m = A.shape(0), k = A.shape(1), n = B.shape(1);
    if (B.shape(0) != k)
        throw DimensionMismatch("inner dimensions disagree");
    py::array_t<T, py::array::f_style> out(
        {static_cast<py::ssize_t>(m), static_cast<py::ssize_t>(n)});
    const MatrixView<T> C{out.mutable_data(), m, n, m};
    const MatrixView<const T> Av{A.data(), m, k, m};
    const MatrixView<const T> Bv{B.data(), k, n, k};
    {
        py::gil_scoped_release release;
        zero_matrix(C);
        gemm<T>(Av, Bv, C, bp, threads);
    }
    return out;
}

template <typename T>
py::array_t<T> run_im2col(const farray<T>& I, const ConvParams& cp, int threads) {
    const Tensor4View<const T> Iv = as_tensor4<T>(I, "input");
    const GemmDims g = gemm_dims(cp);
    py::array_t<T, py::array::f_style> out(
        {static_cast<py::ssize_t>(g.k), static_cast<py::ssize_t>(g.n)});
    {
        py::gil_scoped_release release;
        const Im2colMatrix<T> lowered = im2col<T>(Iv, cp, threads);
        std::copy_n(lowered.view().data, g.k * g.n, out.mutable_data());
    }
    return out;
}

std::string kind_name(LayerSpec::Kind kind) {
    switch (kind) {
        case LayerSpec::Kind::Conv: return "conv";
        case LayerSpec::Kind::Fc: return "fc";
        case LayerSpec::Kind::Pool: return "pool";
    }
    return "?";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Blocked gemm and gemm-backed convolution kernels with a fused "
              "im2col packing path";

    py::register_exception<InvalidGeometry>(m, "InvalidGeometry", PyExc_ValueError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", PyExc_ValueError);
    py::register_exception<AllocationFailure>(m, "AllocationFailure", PyExc_MemoryError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<ConvParams>(m, "ConvParams")
        .def(py::init([](index_t k_n, index_t k_h, index_t k_w, index_t c_i,
                         index_t h_i, index_t w_i, index_t b, index_t s, index_t p) {
                 return ConvParams{k_n, k_h, k_w, c_i, h_i, w_i, b, s, p};
             }),
             py::arg("k_n"), py::arg("k_h"), py::arg("k_w"), py::arg("c_i"),
             py::arg("h_i"), py::arg("w_i"), py::arg("b") = 1, py::arg("s") = 1,
             py::arg("p") = 0)
        .def_readwrite("k_n", &ConvParams::k_n)
        .def_readwrite("k_h", &ConvParams::k_h)
        .def_readwrite("k_w", &ConvParams::k_w)
        .def_readwrite("c_i", &ConvParams::c_i)
        .def_readwrite("h_i", &ConvParams::h_i)
        .def_readwrite("w_i", &ConvParams::w_i)
        .def_readwrite("b", &ConvParams::b)
        .def_readwrite("s", &ConvParams::s)
        .def_readwrite("p", &ConvParams::p)
        .def("__repr__", [](const ConvParams& cp) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "ConvParams(k_n=%lld, k_h=%lld, k_w=%lld, c_i=%lld, "
                          "h_i=%lld, w_i=%lld, b=%lld, s=%lld, p=%lld)",
                          (long long)cp.k_n, (long long)cp.k_h, (long long)cp.k_w,
                          (long long)cp.c_i, (long long)cp.h_i, (long long)cp.w_i,
                          (long long)cp.b, (long long)cp.s, (long long)cp.p);
            return std::string(buf);
        });

    py::class_<BlockingParams>(m, "BlockingParams")
        .def(py::init([](index_t mc, index_t nc, index_t kc, index_t mr, index_t nr) {
                 BlockingParams bp{mc, nc, kc, mr, nr};
                 validate(bp);
                 return bp;
             }),
             py::arg("mc") = 120, py::arg("nc") = 3072, py::arg("kc") = 640,
             py::arg("mr") = 8, py::arg("nr") = 12)
        .def_readwrite("mc", &BlockingParams::mc)
        .def_readwrite("nc", &BlockingParams::nc)
        .def_readwrite("kc", &BlockingParams::kc)
        .def_readwrite("mr", &BlockingParams::mr)
        .def_readwrite("nr", &BlockingParams::nr);

    m.def("output_dims",
          [](const ConvParams& cp) {
              const OutputDims od = output_dims(cp);
              return py::make_tuple(od.h_o, od.w_o);
          },
          py::arg("params"));
    m.def("gemm_dims",
          [](const ConvParams& cp) {
              const GemmDims g = gemm_dims(cp);
              return py::make_tuple(g.m, g.n, g.k);
          },
          py::arg("params"));
    m.def("im2col_workspace_bytes", &im2col_workspace_bytes, py::arg("params"));
    m.def("convgemm_scratch_bytes", &convgemm_scratch_bytes, py::arg("blocking"));

    m.def("conv_direct",
          [](const py::array& F, const py::array& I, const ConvParams& cp) {
              return dispatch_conv(ConvKind::Direct, F, I, cp, BlockingParams{}, 1);
          },
          py::arg("filters"), py::arg("input"), py::arg("params"));
    m.def("conv_im2col_gemm",
          [](const py::array& F, const py::array& I, const ConvParams& cp,
             const BlockingParams& bp, int threads) {
              return dispatch_conv(ConvKind::TwoStage, F, I, cp, bp, threads);
          },
          py::arg("filters"), py::arg("input"), py::arg("params"),
          py::arg("blocking") = BlockingParams{}, py::arg("threads") = 1);
    m.def("conv_gemm",
          [](const py::array& F, const py::array& I, const ConvParams& cp,
             const BlockingParams& bp, int threads) {
              return dispatch_conv(ConvKind::Fused, F, I, cp, bp, threads);
          },
          py::arg("filters"), py::arg("input"), py::arg("params"),
          py::arg("blocking") = BlockingParams{}, py::arg("threads") = 1);

    m.def("gemm",
          [](const py::array& A, const py::array& B, const BlockingParams& bp,
             int threads) -> py::array {
              if (wants_double(A, B))
                  return run_gemm<double>(farray<double>::ensure(A),
                                          farray<double>::ensure(B), bp, threads);
              return run_gemm<float>(farray<float>::ensure(A),
                                     farray<float>::ensure(B), bp, threads);
          },
          py::arg("a"), py::arg("b"), py::arg("blocking") = BlockingParams{},
          py::arg("threads") = 1);

    m.def("im2col",
          [](const py::array& I, const ConvParams& cp, int threads) -> py::array {
              if (I.dtype().is(py::dtype::of<double>()))
                  return run_im2col<double>(farray<double>::ensure(I), cp, threads);
              return run_im2col<float>(farray<float>::ensure(I), cp, threads);
          },
          py::arg("input"), py::arg("params"), py::arg("threads") = 1);

    py::class_<LayerSpec>(m, "LayerSpec")
        .def_property_readonly("kind",
                               [](const LayerSpec& l) { return kind_name(l.kind); })
        .def_readonly("conv", &LayerSpec::conv)
        .def_readonly("fc_m", &LayerSpec::fc_m)
        .def_readonly("fc_k", &LayerSpec::fc_k)
        .def_readonly("pool_h", &LayerSpec::pool_h)
        .def_readonly("pool_w", &LayerSpec::pool_w)
        .def_readonly("pool_c", &LayerSpec::pool_c);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_readonly("name", &ModelSpec::name)
        .def_readonly("layers", &ModelSpec::layers)
        .def("__repr__", [](const ModelSpec& ms) {
            return "ModelSpec(name='" + ms.name + "', layers=" +
                   std::to_string(ms.layers.size()) + ")";
        });

    m.def("parse_model",
          [](const std::string& path) { return parse_model(path); },
          py::arg("path"));
    m.def("model_workspace_bytes", &model_workspace_bytes, py::arg("model"),
          py::arg("batch"));

    py::class_<LayerResult>(m, "LayerResult")
        .def_readonly("layer", &LayerResult::layer)
        .def_property_readonly("kind",
                               [](const LayerResult& r) { return kind_name(r.kind); })
        .def_property_readonly("m", [](const LayerResult& r) { return r.dims.m; })
        .def_property_readonly("n", [](const LayerResult& r) { return r.dims.n; })
        .def_property_readonly("k", [](const LayerResult& r) { return r.dims.k; })
        .def_readonly("time_s", &LayerResult::time_s)
        .def_readonly("repetitions", &LayerResult::repetitions)
        .def_readonly("gflops", &LayerResult::gflops)
        .def_readonly("workspace_bytes", &LayerResult::workspace_bytes)
        .def("__repr__", [](const LayerResult& r) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "LayerResult(layer=%d, kind='%s', m=%lld, n=%lld, k=%lld, "
                          "time_s=%.6g, gflops=%.4g)",
                          r.layer, kind_name(r.kind).c_str(), (long long)r.dims.m,
                          (long long)r.dims.n, (long long)r.dims.k, r.time_s,
                          r.gflops);
            return std::string(buf);
        });

    m.def("run_inference",
          [](const ModelSpec& model, index_t batch, const std::string& algo,
             int threads, double min_time, bool check, const BlockingParams& bp) {
              RunOptions opt;
              opt.threads = threads;
              opt.min_time = min_time;
              opt.check = check;
              opt.bp = bp;
              const Algo a = parse_algo(algo);
              py::gil_scoped_release release;
              return run_inference(model, batch, a, opt);
          },
          py::arg("model"), py::arg("batch"), py::arg("algo") = "convgemm",
          py::arg("threads") = 1, py::arg("min_time") = 0.05,
          py::arg("check") = false, py::arg("blocking") = BlockingParams{});

    m.def("scratch_peak_bytes",
          [] { return static_cast<std::uint64_t>(ScratchTracker::peak_bytes()); });
    m.def("scratch_reset_peak", [] { ScratchTracker::reset_peak(); });
}
