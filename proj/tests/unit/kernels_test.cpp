#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "v2v/error.hpp"
#include "v2v/simd/kernels.hpp"

namespace v2v {
namespace {

using simd::Isa;

// Sizes straddle the 4- and 8-lane remainders of the vector loops.
constexpr std::size_t kSizes[] = {1, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 129};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

class KernelEquivalence : public ::testing::Test {
protected:
    void SetUp() override {
        if (!simd::isa_supported(Isa::avx2)) GTEST_SKIP() << "host or build lacks AVX2/FMA";
    }
    const simd::KernelTable& ref = simd::table(Isa::scalar);
    const simd::KernelTable& vec() const { return simd::table(Isa::avx2); }
};

TEST_F(KernelEquivalence, Dot) {
    Xoshiro256 rng(1);
    for (auto n : kSizes) {
        const auto a = test::random_vector(rng, n);
        const auto b = test::random_vector(rng, n);
        EXPECT_LT(rel_err(ref.dot(a.data(), b.data(), n), vec().dot(a.data(), b.data(), n)), 1e-13) << n;
    }
}

TEST_F(KernelEquivalence, DotRows) {
    Xoshiro256 rng(2);
    for (auto dim : kSizes) {
        const std::size_t rows = 11;
        const auto m = test::random_vector(rng, rows * dim);
        const auto q = test::random_vector(rng, dim);
        std::vector<double> s0(rows), s1(rows);
        ref.dot_rows(m.data(), rows, dim, q.data(), s0.data());
        vec().dot_rows(m.data(), rows, dim, q.data(), s1.data());
        for (std::size_t r = 0; r < rows; ++r) EXPECT_LT(rel_err(s0[r], s1[r]), 1e-13);
    }
}

template <typename T>
class DenseEquivalence : public KernelEquivalence {};

using WeightTypes = ::testing::Types<float, double>;
TYPED_TEST_SUITE(DenseEquivalence, WeightTypes);

template <typename T>
std::vector<T> random_weights(Xoshiro256& rng, std::size_t n) {
    std::vector<T> w(n);
    for (auto& x : w) x = static_cast<T>(rng.normal());
    return w;
}

TYPED_TEST(DenseEquivalence, AffineBatch) {
    Xoshiro256 rng(3);
    for (std::size_t batch : {1, 2, 3, 5, 8}) {
        for (std::size_t out : {1, 3, 4, 9}) {
            for (auto in : kSizes) {
                const auto w = random_weights<TypeParam>(rng, out * in);
                const auto b = random_weights<TypeParam>(rng, out);
                const auto x = test::random_vector(rng, batch * in);
                std::vector<double> y0(batch * out), y1(batch * out);
                this->ref.template dense<TypeParam>().affine_batch(w.data(), b.data(), out, in, x.data(), batch, y0.data());
                this->vec().template dense<TypeParam>().affine_batch(w.data(), b.data(), out, in, x.data(), batch, y1.data());
                for (std::size_t i = 0; i < y0.size(); ++i) ASSERT_LT(rel_err(y0[i], y1[i]), 1e-12);
            }
        }
    }
}

TYPED_TEST(DenseEquivalence, BackpropInput) {
    Xoshiro256 rng(4);
    for (std::size_t batch : {1, 3, 4, 6}) {
        for (std::size_t out : {1, 2, 5, 16}) {
            for (auto in : kSizes) {
                const auto w = random_weights<TypeParam>(rng, out * in);
                const auto g = test::random_vector(rng, batch * out);
                std::vector<double> g0(batch * in), g1(batch * in);
                this->ref.template dense<TypeParam>().backprop_input(w.data(), out, in, g.data(), batch, g0.data());
                this->vec().template dense<TypeParam>().backprop_input(w.data(), out, in, g.data(), batch, g1.data());
                for (std::size_t i = 0; i < g0.size(); ++i) ASSERT_LT(rel_err(g0[i], g1[i]), 1e-12);
            }
        }
    }
}

TYPED_TEST(DenseEquivalence, WeightGradOverwrites) {
    Xoshiro256 rng(5);
    for (std::size_t batch : {1, 2, 7, 32}) {
        for (std::size_t out : {1, 4, 5}) {
            for (auto in : kSizes) {
                const auto g = test::random_vector(rng, batch * out);
                const auto x = test::random_vector(rng, batch * in);
                std::vector<double> w0(out * in, 99.0), w1(out * in, -99.0), b0(out, 5.0), b1(out, -5.0);
                this->ref.template dense<TypeParam>().weight_grad(g.data(), x.data(), batch, out, in, w0.data(), b0.data());
                this->vec().template dense<TypeParam>().weight_grad(g.data(), x.data(), batch, out, in, w1.data(), b1.data());
                for (std::size_t i = 0; i < w0.size(); ++i) ASSERT_LT(rel_err(w0[i], w1[i]), 1e-12);
                for (std::size_t i = 0; i < b0.size(); ++i) ASSERT_LT(rel_err(b0[i], b1[i]), 1e-12);
            }
        }
    }
}

TYPED_TEST(DenseEquivalence, AdamUpdateIsBitwiseIdentical) {
    Xoshiro256 rng(6);
    for (auto n : kSizes) {
        auto p0 = random_weights<TypeParam>(rng, n);
        auto p1 = p0;
        std::vector<double> m0(n, 0.0), v0(n, 0.0);
        auto m1 = m0;
        auto v1 = v0;
        for (int t = 1; t <= 5; ++t) {
            const auto g = test::random_vector(rng, n);
            const double c1 = 1.0 - std::pow(0.9, t);
            const double c2 = 1.0 - std::pow(0.999, t);
            this->ref.template dense<TypeParam>().adam_update(p0.data(), g.data(), m0.data(), v0.data(), n, 1e-3, 0.9,
                                                              0.999, 1e-7, c1, c2);
            this->vec().template dense<TypeParam>().adam_update(p1.data(), g.data(), m1.data(), v1.data(), n, 1e-3, 0.9,
                                                                0.999, 1e-7, c1, c2);
        }
        EXPECT_EQ(p0, p1);
        EXPECT_EQ(m0, m1);
        EXPECT_EQ(v0, v1);
    }
}

TEST(KernelDispatch, ParsesNamesAndRejectsUnknown) {
    EXPECT_EQ(simd::parse_isa("scalar"), Isa::scalar);
    EXPECT_EQ(simd::parse_isa("avx2"), Isa::avx2);
    try {
        simd::parse_isa("neon");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    }
}

TEST(KernelDispatch, SwitchingActiveSet) {
    const Isa before = simd::active().isa;
    simd::set_active_isa(Isa::scalar);
    EXPECT_EQ(simd::active().isa, Isa::scalar);
    simd::set_active_isa(before);
    EXPECT_EQ(simd::active().isa, before);
}

}  // namespace
}  // namespace v2v
