#include "ostta/emb1.hpp"

#include <fstream>
#include <string>

#include "ostta/bytes.hpp"

namespace ostta {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_vec_f32(std::string& out, const Vec& v) {
    for (double x : v) put_f32(out, static_cast<float>(x));
}

Vec read_vec_f32(ByteReader& r, int dim) {
    Vec v(static_cast<std::size_t>(dim));
    for (double& x : v) x = static_cast<double>(r.f32());
    return v;
}

}  // namespace

std::string encode_embedding_dump(const ClassPrototypeSet& prototypes,
                                  std::span<const StreamSample> samples) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(prototypes.dim()));
    put_u32(out, static_cast<std::uint32_t>(prototypes.num_classes()));
    for (const Vec& p : prototypes.prototypes()) put_vec_f32(out, p);
    put_u32(out, static_cast<std::uint32_t>(samples.size()));
    for (const StreamSample& s : samples) {
        if (static_cast<int>(s.raw.size()) != prototypes.dim() ||
            static_cast<int>(s.raw_aug.size()) != prototypes.dim())
            throw DimensionMismatch("encode_embedding_dump: sample dim mismatch");
        put_vec_f32(out, s.raw);
        put_vec_f32(out, s.raw_aug);
        put_i32(out, s.gt_class);
        put_u16(out, s.domain_id);
        out.push_back('\0');
        out.push_back('\0');
    }
    return out;
}

std::pair<ClassPrototypeSet, std::vector<StreamSample>>
decode_embedding_dump(const std::string& bytes) {
    ByteReader r(bytes);
    if (r.bytes(4) != std::string(kMagic, 4))
        throw FormatError("EMB1: bad magic");

    const std::uint32_t dim = r.u32();
    const std::uint32_t num_classes = r.u32();
    if (dim == 0) throw DimensionMismatch("EMB1: dim must be positive");
    if (num_classes < 2) throw DimensionMismatch("EMB1: need at least 2 classes");

    std::vector<Vec> rows;
    rows.reserve(num_classes);
    std::vector<std::string> names;
    for (std::uint32_t c = 0; c < num_classes; ++c) {
        rows.push_back(read_vec_f32(r, static_cast<int>(dim)));
        names.push_back("class_" + std::to_string(c));
    }
    // f32 storage perturbs norms by ~1e-7; accept that, do not renormalize.
    ClassPrototypeSet protos(std::move(rows), std::move(names), 1e-5);

    const std::uint32_t num_samples = r.u32();
    std::vector<StreamSample> samples;
    samples.reserve(num_samples);
    for (std::uint32_t i = 0; i < num_samples; ++i) {
        StreamSample s;
        s.t = static_cast<std::int64_t>(i);
        s.raw = read_vec_f32(r, static_cast<int>(dim));
        s.raw_aug = read_vec_f32(r, static_cast<int>(dim));
        s.gt_class = r.i32();
        if (s.gt_class != kUndesired &&
            (s.gt_class < 0 || s.gt_class >= static_cast<int>(num_classes)))
            throw FormatError("EMB1: sample " + std::to_string(i) + " has gt_class out of range");
        s.domain_id = r.u16();
        const std::string pad = r.bytes(2);
        if (pad[0] != '\0' || pad[1] != '\0')
            throw FormatError("EMB1: nonzero padding in sample " + std::to_string(i));
        samples.push_back(std::move(s));
    }
    if (!r.exhausted()) throw FormatError("EMB1: trailing bytes after last sample");
    return {std::move(protos), std::move(samples)};
}

void write_embedding_dump(const std::string& path, const ClassPrototypeSet& prototypes,
                          std::span<const StreamSample> samples) {
    const std::string bytes = encode_embedding_dump(prototypes, samples);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::pair<ClassPrototypeSet, std::vector<StreamSample>>
load_embedding_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_embedding_dump(bytes);
}

}  // namespace ostta
