// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/activation_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <unordered_set>

#include "bloomprobe/error.hpp"

namespace bloomprobe {

static_assert(std::endian::native == std::endian::little, "ACTV1 I/O assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

namespace {

constexpr char kMagic[4] = {'A', 'C', 'T', 'V'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError(std::string(what) + " does not fit in a u32 header field");
    }
    return static_cast<std::uint32_t>(v);
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t offset() const noexcept { return pos_; }
    std::uint64_t remaining() const noexcept { return bytes_.size() - pos_; }

    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::span<const std::uint8_t> take(std::uint64_t n, const char* field) {
        need(n, field);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

private:
    void need(std::uint64_t n, const char* field) const {
        if (remaining() < n) {
            throw FormatError(std::string("truncated file while reading ") + field + ": need " + std::to_string(n) +
                                  " bytes, " + std::to_string(remaining()) + " left",
                              pos_);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::uint64_t pos_ = 0;
};

std::vector<std::string> split_ids(std::string_view blob, std::size_t expected) {
    std::vector<std::string> ids;
    ids.reserve(expected);
    std::size_t start = 0;
    while (true) {
        const auto nl = blob.find('\n', start);
        ids.emplace_back(blob.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return ids;
}

}  // namespace

ActivationTensor::ActivationTensor(std::string model_id, std::size_t n_layers, std::size_t n_samples,
                                   std::size_t d_model, std::vector<std::string> sample_ids, std::vector<float> data)
    : model_id_(std::move(model_id)),
      n_layers_(n_layers),
      n_samples_(n_samples),
      d_model_(d_model),
      sample_ids_(std::move(sample_ids)),
      data_(std::move(data)) {
    if (n_layers_ == 0 || n_samples_ == 0 || d_model_ == 0) {
        throw ValidationError("tensor dimensions must be positive");
    }
    if (data_.size() != n_layers_ * n_samples_ * d_model_) {
        throw ValidationError("tensor data has " + std::to_string(data_.size()) + " values, expected " +
                              std::to_string(n_layers_ * n_samples_ * d_model_));
    }
    if (sample_ids_.size() != n_samples_) {
        throw ValidationError("tensor has " + std::to_string(sample_ids_.size()) + " sample ids for " +
                              std::to_string(n_samples_) + " samples");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& id : sample_ids_) {
        if (id.empty()) throw ValidationError("sample ids must be non-empty");
        if (id.find('\n') != std::string::npos) throw ValidationError("sample id contains a newline");
        if (!seen.insert(id).second) throw ValidationError("duplicate sample id '" + id + "'");
    }
}

std::optional<NonFiniteValue> ActivationTensor::find_non_finite() const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            return NonFiniteValue{i / (n_samples_ * d_model_), (i / d_model_) % n_samples_, i % d_model_};
        }
    }
    return std::nullopt;
}

bool ActivationTensor::operator==(const ActivationTensor& other) const {
    return model_id_ == other.model_id_ && n_layers_ == other.n_layers_ && n_samples_ == other.n_samples_ &&
           d_model_ == other.d_model_ && sample_ids_ == other.sample_ids_ &&
           std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

std::vector<std::uint8_t> encode_tensor(const ActivationTensor& tensor) {
    if (auto bad = tensor.find_non_finite()) {
        throw ValidationError("refusing to write non-finite activation at layer " + std::to_string(bad->layer) +
                              ", sample " + std::to_string(bad->sample) + ", dim " + std::to_string(bad->dim));
    }
    std::string ids_blob;
    for (std::size_t i = 0; i < tensor.sample_ids().size(); ++i) {
        if (i) ids_blob.push_back('\n');
        ids_blob += tensor.sample_ids()[i];
    }

    std::vector<std::uint8_t> out;
    out.reserve(28 + tensor.model_id().size() + ids_blob.size() + tensor.data().size_bytes());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, kActvVersion);
    put_u32(out, checked_u32(tensor.n_layers(), "n_layers"));
    put_u32(out, checked_u32(tensor.n_samples(), "n_samples"));
    put_u32(out, checked_u32(tensor.d_model(), "d_model"));
    put_u32(out, checked_u32(tensor.model_id().size(), "model_id length"));
    out.insert(out.end(), tensor.model_id().begin(), tensor.model_id().end());
    put_u32(out, checked_u32(ids_blob.size(), "sample id blob length"));
    out.insert(out.end(), ids_blob.begin(), ids_blob.end());
    const auto* payload = reinterpret_cast<const std::uint8_t*>(tensor.data().data());
    out.insert(out.end(), payload, payload + tensor.data().size_bytes());
    return out;
}

ActivationTensor decode_tensor(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    auto magic = in.take(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad magic, not an ACTV file", 0);

    const auto version_offset = in.offset();
    const auto version = in.u32("version");
    if (version != kActvVersion) throw UnsupportedVersionError(version, version_offset);

    const std::uint64_t n_layers = in.u32("n_layers");
    const std::uint64_t n_samples = in.u32("n_samples");
    const std::uint64_t d_model = in.u32("d_model");
    if (n_layers == 0 || n_samples == 0 || d_model == 0) {
        throw FormatError("header declares a zero dimension", 8);
    }
    const auto model_len = in.u32("model_id length");
    auto model_bytes = in.take(model_len, "model_id");
    std::string model_id(model_bytes.begin(), model_bytes.end());

    const auto ids_offset = in.offset();
    const auto ids_len = in.u32("sample id blob length");
    auto ids_bytes = in.take(ids_len, "sample ids");
    auto ids = split_ids(std::string_view(reinterpret_cast<const char*>(ids_bytes.data()), ids_bytes.size()), n_samples);
    if (ids.size() != n_samples) {
        throw FormatError("sample id blob holds " + std::to_string(ids.size()) + " ids, header declares " +
                              std::to_string(n_samples),
                          ids_offset);
    }

    const std::uint64_t count = n_layers * n_samples * d_model;
    const auto payload_offset = in.offset();
    if (in.remaining() != count * sizeof(float)) {
        if (in.remaining() < count * sizeof(float)) {
            throw FormatError("truncated payload: " + std::to_string(in.remaining()) + " bytes present, " +
                                  std::to_string(count * sizeof(float)) + " declared",
                              payload_offset);
        }
        throw FormatError("payload length mismatch: " + std::to_string(in.remaining() - count * sizeof(float)) +
                              " trailing bytes",
                          payload_offset + count * sizeof(float));
    }
    auto payload = in.take(count * sizeof(float), "payload");
    std::vector<float> data(count);
    std::memcpy(data.data(), payload.data(), payload.size());
    for (std::uint64_t i = 0; i < count; ++i) {
        if (!std::isfinite(data[i])) {
            throw FormatError("non-finite activation in payload", payload_offset + i * sizeof(float));
        }
    }

    try {
        return ActivationTensor(std::move(model_id), n_layers, n_samples, d_model, std::move(ids), std::move(data));
    } catch (const ValidationError& e) {
        throw FormatError(e.what(), ids_offset);
    }
}

void write_tensor(const ActivationTensor& tensor, const std::filesystem::path& path) {
    const auto bytes = encode_tensor(tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

ActivationTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

LayerMatrix layer_slice(const ActivationTensor& tensor, std::size_t layer) {
    if (layer >= tensor.n_layers()) {
        throw BoundsError("layer " + std::to_string(layer) + " out of range [0, " + std::to_string(tensor.n_layers()) +
                          ")");
    }
    const auto block = tensor.n_samples() * tensor.d_model();
    const float* base = tensor.data().data() + layer * block;
    return LayerMatrix{layer, Eigen::Map<const RowMatrixF>(base, static_cast<Eigen::Index>(tensor.n_samples()),
                                                          static_cast<Eigen::Index>(tensor.d_model()))};
}

}  // namespace bloomprobe
