#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <random>
#include <vector>

#include "convgemm/conv.hpp"
#include "convgemm/scratch.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace convgemm;

TEST_CASE("conv_direct: scalar case") {
    Tensor4<float> f(1, 1, 1, 1), in(1, 1, 1, 1);
    f.data()[0] = 3.0f;
    in.data()[0] = -2.0f;
    auto out = conv_direct(f, in, ConvParams{1, 1, 1, 1, 1, 1, 1, 1, 0});
    CHECK(out.data()[0] == -6.0f);
}

TEST_CASE("conv_direct: 2x2 ones filter over 2x2 ones input sums to 4") {
    Tensor4<float> f(1, 2, 2, 1), in(2, 2, 1, 1);
    std::fill_n(f.data(), 4, 1.0f);
    std::fill_n(in.data(), 4, 1.0f);
    auto out = conv_direct(f, in, ConvParams{1, 2, 2, 1, 2, 2, 1, 1, 0});
    CHECK(out.size() == 1);
    CHECK(out.data()[0] == 4.0f);
}

TEST_CASE("conv_direct: 1x1 filter scales and strides") {
    std::mt19937_64 rng(21);
    auto in = testutil::random_tensor<float>(5, 5, 1, 1, rng);
    Tensor4<float> f(1, 1, 1, 1);
    f.data()[0] = 2.5f;
    const ConvParams cp{1, 1, 1, 1, 5, 5, 1, 2, 0};
    auto out = conv_direct(f, in, cp);
    CHECK(out.d1() == 3);
    CHECK(out.d2() == 3);
    for (index_t i_h = 0; i_h < 3; ++i_h)
        for (index_t i_w = 0; i_w < 3; ++i_w)
            CHECK(out(0, i_h, i_w, 0) == 2.5f * in(2 * i_h, 2 * i_w, 0, 0));
}

TEST_CASE("conv_direct rejects mismatched tensors") {
    Tensor4<float> f(1, 2, 2, 1), in(2, 2, 2, 1);
    CHECK_THROWS_AS(conv_direct(f, in, ConvParams{1, 2, 2, 1, 2, 2, 1, 1, 0}),
                    InvalidGeometry);
}

TEST_CASE("im2col: 1x1 filter is a pure re-layout") {
    std::mt19937_64 rng(22);
    const ConvParams cp{1, 1, 1, 3, 4, 5, 2, 1, 0};
    auto in = testutil::random_tensor<float>(4, 5, 3, 2, rng);
    auto b = im2col<float>(in.view(), cp);
    auto v = b.view();
    CHECK(v.rows == 3);
    CHECK(v.cols == 4 * 5 * 2);
    for (index_t i_b = 0; i_b < 2; ++i_b)
        for (index_t i_w = 0; i_w < 5; ++i_w)
            for (index_t i_h = 0; i_h < 4; ++i_h)
                for (index_t i_c = 0; i_c < 3; ++i_c)
                    CHECK(v(i_c, i_h + i_w * 4 + i_b * 20) == in(i_h, i_w, i_c, i_b));
}

TEST_CASE("im2col: hand-traced 2x2 patch column") {
    // input rows [[1,2],[3,4]]: I(h=0,w=0)=1, I(0,1)=2, I(1,0)=3, I(1,1)=4
    Tensor4<float> in(2, 2, 1, 1);
    in(0, 0, 0, 0) = 1.0f;
    in(0, 1, 0, 0) = 2.0f;
    in(1, 0, 0, 0) = 3.0f;
    in(1, 1, 0, 0) = 4.0f;
    const ConvParams cp{1, 2, 2, 1, 2, 2, 1, 1, 0};
    auto b = im2col<float>(in.view(), cp);
    auto v = b.view();
    CHECK(v.rows == 4);
    CHECK(v.cols == 1);
    const float expect[] = {1, 3, 2, 4};  // filter row runs fastest
    CHECK(std::memcmp(v.data, expect, sizeof expect) == 0);
}

TEST_CASE("im2col: every element equals the decomposed input read") {
    std::mt19937_64 rng(23);
    for (int iter = 0; iter < 25; ++iter) {
        const ConvParams cp = testutil::random_conv_params(rng);
        const OutputDims od = output_dims(cp);
        const GemmDims g = gemm_dims(cp);
        auto in = testutil::random_tensor<float>(cp.h_i, cp.w_i, cp.c_i, cp.b, rng);
        auto b = im2col<float>(in.view(), cp, iter % 3 + 1);
        auto v = b.view();
        REQUIRE(v.rows == g.k);
        REQUIRE(v.cols == g.n);
        for (index_t r = 0; r < g.k; ++r)
            for (index_t c = 0; c < g.n; ++c) {
                // independent index decomposition
                const index_t i_c = r / (cp.k_h * cp.k_w);
                const index_t i_kw = (r % (cp.k_h * cp.k_w)) / cp.k_h;
                const index_t i_kh = (r % (cp.k_h * cp.k_w)) % cp.k_h;
                const index_t i_b = c / (od.h_o * od.w_o);
                const index_t i_w = (c % (od.h_o * od.w_o)) / od.h_o;
                const index_t i_h = (c % (od.h_o * od.w_o)) % od.h_o;
                const index_t h_in = i_h * cp.s + i_kh - cp.p;
                const index_t w_in = i_w * cp.s + i_kw - cp.p;
                const float expect =
                    (h_in >= 0 && h_in < cp.h_i && w_in >= 0 && w_in < cp.w_i)
                        ? in(h_in, w_in, i_c, i_b)
                        : 0.0f;
                if (v(r, c) != expect) {
                    REQUIRE(v(r, c) == expect);  // fail loudly with context
                }
            }
    }
}

TEST_CASE("im2col: coverage counts for s=1, p=0") {
    std::mt19937_64 rng(24);
    for (int iter = 0; iter < 10; ++iter) {
        ConvParams cp = testutil::random_conv_params(rng);
        cp.s = 1;
        cp.p = 0;
        if (cp.h_i < cp.k_h || cp.w_i < cp.k_w) continue;
        const OutputDims od = output_dims(cp);
        const GemmDims g = gemm_dims(cp);
        // histogram input positions by walking the index decomposition
        std::vector<index_t> counts(static_cast<std::size_t>(cp.h_i * cp.w_i), 0);
        for (index_t r = 0; r < g.k; ++r) {
            const index_t i_kw = (r % (cp.k_h * cp.k_w)) / cp.k_h;
            const index_t i_kh = (r % (cp.k_h * cp.k_w)) % cp.k_h;
            if (r / (cp.k_h * cp.k_w) != 0) continue;  // one channel is enough
            for (index_t c = 0; c < od.h_o * od.w_o; ++c) {
                const index_t i_w = c / od.h_o;
                const index_t i_h = c % od.h_o;
                ++counts[static_cast<std::size_t>((i_h + i_kh) + (i_w + i_kw) * cp.h_i)];
            }
        }
        for (index_t pos = 0; pos < cp.h_i * cp.w_i; ++pos) {
            CHECK(counts[pos] >= 1);
            CHECK(counts[pos] <= cp.k_h * cp.k_w);
        }
    }
}

TEST_CASE("conv_im2col_gemm equals conv_direct") {
    std::mt19937_64 rng(25);
    SUBCASE("all-ones 3x3 input, 2x2 filter") {
        Tensor4<float> f(1, 2, 2, 1), in(3, 3, 1, 1);
        std::fill_n(f.data(), 4, 1.0f);
        std::fill_n(in.data(), 9, 1.0f);
        const ConvParams cp{1, 2, 2, 1, 3, 3, 1, 1, 0};
        auto ref = conv_direct(f, in, cp);
        auto got = conv_im2col_gemm(f, in, cp);
        CHECK(std::memcmp(got.data(), ref.data(), ref.size() * sizeof(float)) == 0);
    }
    SUBCASE("layer-6 shapes") {
        const ConvParams cp{384, 3, 3, 192, 27, 27, 1, 1, 0};
        auto f = testutil::random_tensor<float>(384, 3, 3, 192, rng);
        auto in = testutil::random_tensor<float>(27, 27, 192, 1, rng);
        auto ref = conv_direct(f, in, cp);
        auto got = conv_im2col_gemm(f, in, cp);
        CHECK(testutil::normalized_max_error(got.data(), ref.data(), ref.size()) <= 1e-5);
    }
    SUBCASE("1x1 unit filter is a strided copy") {
        auto in = testutil::random_tensor<float>(6, 6, 1, 1, rng);
        Tensor4<float> f(1, 1, 1, 1);
        f.data()[0] = 1.0f;
        const ConvParams cp{1, 1, 1, 1, 6, 6, 1, 2, 0};
        auto got = conv_im2col_gemm(f, in, cp);
        for (index_t i_h = 0; i_h < 3; ++i_h)
            for (index_t i_w = 0; i_w < 3; ++i_w)
                CHECK(got(0, i_h, i_w, 0) == in(2 * i_h, 2 * i_w, 0, 0));
    }
}

TEST_CASE("randomized equivalence: direct vs im2col+gemm, f32 and f64") {
    std::mt19937_64 rng(26);
    for (int iter = 0; iter < 60; ++iter) {
        const ConvParams cp = testutil::random_conv_params(rng);
        auto f = testutil::random_tensor<float>(cp.k_n, cp.k_h, cp.k_w, cp.c_i, rng);
        auto in = testutil::random_tensor<float>(cp.h_i, cp.w_i, cp.c_i, cp.b, rng);
        auto ref = conv_direct(f, in, cp);
        auto got = conv_im2col_gemm(f, in, cp, BlockingParams{}, iter % 2 + 1);
        CHECK(testutil::normalized_max_error(got.data(), ref.data(), ref.size()) <= 1e-5);

        auto fd = testutil::widen(f);
        auto ind = testutil::widen(in);
        auto refd = conv_direct(fd, ind, cp);
        auto gotd = conv_im2col_gemm(fd, ind, cp);
        CHECK(std::memcmp(gotd.data(), refd.data(), refd.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("im2col_workspace_bytes") {
    CHECK(im2col_workspace_bytes({192, 5, 5, 64, 55, 55, 1, 1, 0}) == 16646400);
    CHECK(im2col_workspace_bytes({64, 3, 3, 64, 224, 224, 1, 1, 1}) == 115605504);
    CHECK(im2col_workspace_bytes({1, 1, 1, 1, 1, 1, 1, 1, 0}) == 4);
    // the buffer holds exactly k*n elements
    const ConvParams cp{3, 2, 2, 4, 6, 7, 2, 1, 1};
    const GemmDims g = gemm_dims(cp);
    CHECK(im2col_workspace_bytes(cp) == g.k * g.n * 4);
}

TEST_CASE("im2col surfaces AllocationFailure when the workspace cannot be had") {
    const ConvParams cp{192, 5, 5, 64, 55, 55, 1, 1, 0};  // needs ~15.9 MiB
    Tensor4<float> in(55, 55, 64, 1);
    ScratchTracker::set_limit(1 << 20);
    CHECK_THROWS_AS((void)im2col<float>(in.view(), cp), AllocationFailure);
    ScratchTracker::set_limit(0);
}
