// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "bloomprobe/activation_store.hpp"
#include "bloomprobe/error.hpp"
#include "test_util.hpp"

using namespace bloomprobe;
using bloomprobe::testing::TempDir;

namespace {

ActivationTensor random_tensor(std::mt19937_64& rng, std::size_t layers, std::size_t samples, std::size_t dims) {
    std::normal_distribution<float> dist(0.0f, 3.0f);
    std::vector<float> data(layers * samples * dims);
    for (auto& v : data) v = dist(rng);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < samples; ++i) ids.push_back("s" + std::to_string(i));
    return ActivationTensor("model/x", layers, samples, dims, std::move(ids), std::move(data));
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
    return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

TEST(ActivationStore, TinyRoundTrip) {
    TempDir dir("actv");
    ActivationTensor t("m", 1, 1, 2, {"only"}, {0.5f, -1.0f});
    write_tensor(t, dir / "t.actv");
    const auto back = read_tensor(dir / "t.actv");
    EXPECT_EQ(back, t);
    EXPECT_EQ(back.at(0, 0, 0), 0.5f);
    EXPECT_EQ(back.at(0, 0, 1), -1.0f);
}

TEST(ActivationStore, HeaderLayout) {
    ActivationTensor t("ab", 2, 2, 1, {"x", "yz"}, {1.f, 2.f, 3.f, 4.f});
    const auto bytes = encode_tensor(t);
    ASSERT_EQ(std::memcmp(bytes.data(), "ACTV", 4), 0);
    EXPECT_EQ(read_u32(bytes, 4), 1u);
    EXPECT_EQ(read_u32(bytes, 8), 2u);
    EXPECT_EQ(read_u32(bytes, 12), 2u);
    EXPECT_EQ(read_u32(bytes, 16), 1u);
    EXPECT_EQ(read_u32(bytes, 20), 2u);
    EXPECT_EQ(std::string(bytes.begin() + 24, bytes.begin() + 26), "ab");
    EXPECT_EQ(read_u32(bytes, 26), 4u);
    EXPECT_EQ(std::string(bytes.begin() + 30, bytes.begin() + 34), "x\nyz");
    ASSERT_EQ(bytes.size(), 34u + 16u);
    float third;
    std::memcpy(&third, bytes.data() + 34 + 8, 4);
    EXPECT_EQ(third, 3.0f);
}

TEST(ActivationStore, LlamaSizedHeader) {
    // 32 blocks + embedding output; only the header is inspected.
    const std::size_t layers = 33, samples = 2, dims = 4096;
    std::vector<float> data(layers * samples * dims, 0.25f);
    ActivationTensor t("Llama-3.1-8B-Instruct", layers, samples, dims, {"a", "b"}, std::move(data));
    const auto bytes = encode_tensor(t);
    EXPECT_EQ(read_u32(bytes, 8), 33u);
    EXPECT_EQ(read_u32(bytes, 16), 4096u);
}

TEST(ActivationStore, QwenSizedRoundTrip) {
    // 36 blocks + embedding output.
    const std::size_t layers = 37, samples = 1, dims = 2560;
    std::vector<float> data(layers * samples * dims);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(i % 97) - 48.0f;
    const ActivationTensor t("Qwen3-4B-Instruct-2507", layers, samples, dims, {"only"}, std::move(data));
    const auto back = decode_tensor(encode_tensor(t));
    EXPECT_EQ(back.n_layers(), 37u);
    EXPECT_EQ(back.d_model(), 2560u);
    EXPECT_EQ(back, t);
    EXPECT_EQ(layer_slice(back, 36).values(0, 2559), t.at(36, 0, 2559));
}

TEST(ActivationStore, DeterministicBytes) {
    std::mt19937_64 rng(1);
    const auto t = random_tensor(rng, 3, 4, 5);
    EXPECT_EQ(encode_tensor(t), encode_tensor(t));
}

TEST(ActivationStore, RefusesNonFinite) {
    std::vector<float> data(2 * 3 * 4, 1.0f);
    data[(1 * 3 + 2) * 4 + 3] = NAN;
    ActivationTensor t("m", 2, 3, 4, {"a", "b", "c"}, data);
    try {
        encode_tensor(t);
        FAIL();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("layer 1"), std::string::npos) << msg;
        EXPECT_NE(msg.find("sample 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("dim 3"), std::string::npos) << msg;
    }
    data[(1 * 3 + 2) * 4 + 3] = INFINITY;
    EXPECT_THROW(encode_tensor(ActivationTensor("m", 2, 3, 4, {"a", "b", "c"}, data)), ValidationError);
}

TEST(ActivationStore, ConstructorInvariants) {
    EXPECT_THROW(ActivationTensor("m", 1, 2, 2, {"a", "b"}, std::vector<float>(3)), ValidationError);
    EXPECT_THROW(ActivationTensor("m", 1, 2, 1, {"a", "a"}, std::vector<float>(2)), ValidationError);
    EXPECT_THROW(ActivationTensor("m", 1, 2, 1, {"a"}, std::vector<float>(2)), ValidationError);
    EXPECT_THROW(ActivationTensor("m", 0, 1, 1, {"a"}, {}), ValidationError);
    EXPECT_THROW(ActivationTensor("m", 1, 1, 1, {"a\nb"}, {1.0f}), ValidationError);
}

TEST(ActivationStore, CorruptFilesRejected) {
    std::mt19937_64 rng(2);
    const auto good = encode_tensor(random_tensor(rng, 2, 3, 4));

    auto truncated = good;
    truncated.resize(good.size() - 5);
    EXPECT_THROW(decode_tensor(truncated), FormatError);

    auto header_only = good;
    header_only.resize(10);
    EXPECT_THROW(decode_tensor(header_only), FormatError);

    auto magic = good;
    magic[0] = 'X';
    EXPECT_THROW(decode_tensor(magic), FormatError);

    auto version = good;
    version[4] = 99;
    try {
        decode_tensor(version);
        FAIL();
    } catch (const UnsupportedVersionError& e) {
        EXPECT_EQ(e.version(), 99u);
        EXPECT_EQ(e.offset(), 4u);
    }

    auto trailing = good;
    trailing.push_back(0);
    EXPECT_THROW(decode_tensor(trailing), FormatError);

    auto nan_payload = good;
    const float nan = NAN;
    std::memcpy(nan_payload.data() + nan_payload.size() - 4, &nan, 4);
    EXPECT_THROW(decode_tensor(nan_payload), FormatError);
}

TEST(ActivationStore, TruncationReportsOffset) {
    ActivationTensor t("m", 1, 1, 2, {"a"}, {1.0f, 2.0f});
    auto bytes = encode_tensor(t);
    const auto payload_start = bytes.size() - 8;
    bytes.resize(bytes.size() - 3);
    try {
        decode_tensor(bytes);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.offset(), payload_start);
    }
}

TEST(LayerSlice, MiddleBlock) {
    std::vector<float> data;
    for (int i = 0; i < 3 * 2 * 2; ++i) data.push_back(static_cast<float>(i));
    ActivationTensor t("m", 3, 2, 2, {"a", "b"}, data);
    const auto slice = layer_slice(t, 1);
    EXPECT_EQ(slice.layer_index, 1u);
    ASSERT_EQ(slice.rows(), 2u);
    ASSERT_EQ(slice.cols(), 2u);
    EXPECT_EQ(slice.values(0, 0), 4.0f);
    EXPECT_EQ(slice.values(0, 1), 5.0f);
    EXPECT_EQ(slice.values(1, 0), 6.0f);
    EXPECT_EQ(slice.values(1, 1), 7.0f);
    EXPECT_THROW(layer_slice(t, 3), BoundsError);
}

TEST(LayerSlice, StackingReconstructsData) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto t = random_tensor(rng, 1 + rng() % 4, 1 + rng() % 4, 1 + rng() % 4);
        std::vector<float> stacked;
        for (std::size_t l = 0; l < t.n_layers(); ++l) {
            const auto s = layer_slice(t, l);
            for (Eigen::Index i = 0; i < s.values.rows(); ++i)
                for (Eigen::Index j = 0; j < s.values.cols(); ++j) stacked.push_back(s.values(i, j));
        }
        ASSERT_EQ(stacked.size(), t.data().size());
        EXPECT_EQ(std::memcmp(stacked.data(), t.data().data(), stacked.size() * 4), 0);
    }
}

TEST(LayerSlice, ConcurrentReaders) {
    std::mt19937_64 rng(4);
    const auto t = random_tensor(rng, 8, 16, 8);
    std::vector<double> sums(8);
    std::vector<std::thread> threads;
    for (std::size_t l = 0; l < 8; ++l) {
        threads.emplace_back([&, l] { sums[l] = layer_slice(t, l).to_double().sum(); });
    }
    for (auto& th : threads) th.join();
    for (std::size_t l = 0; l < 8; ++l) EXPECT_EQ(sums[l], layer_slice(t, l).to_double().sum());
}
