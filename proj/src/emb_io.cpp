#include "sparsegen/emb_io.hpp"

#include <bit>
#include <cstring>

#include "sparsegen/util.hpp"

namespace sparsegen {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr size_t kMaxIdLen = 1 << 20;

void put_u32le(std::string& out, uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 24) & 0xff));
}

void put_f32le(std::string& out, float f) {
    put_u32le(out, std::bit_cast<uint32_t>(f));
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    uint32_t u32le() {
        if (pos + 4 > buf.size()) throw IoError("EMB1: truncated file");
        uint32_t v = uint32_t(uint8_t(buf[pos])) | uint32_t(uint8_t(buf[pos + 1])) << 8 |
                     uint32_t(uint8_t(buf[pos + 2])) << 16 | uint32_t(uint8_t(buf[pos + 3])) << 24;
        pos += 4;
        return v;
    }

    float f32le() { return std::bit_cast<float>(u32le()); }

    std::string bytes(size_t n) {
        if (pos + n > buf.size()) throw IoError("EMB1: truncated file");
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

std::string emb1_encode(const std::vector<TokenizedEmbedding>& records) {
    std::string out;
    out.append(kMagic, 4);
    put_u32le(out, static_cast<uint32_t>(records.size()));
    for (const auto& r : records) {
        r.validate();
        put_u32le(out, static_cast<uint32_t>(r.example_id.size()));
        out += r.example_id;
        put_u32le(out, r.n_dim);
        put_u32le(out, r.m_tokens);
        for (float f : r.matrix) put_f32le(out, f);
        for (float f : r.weights) put_f32le(out, f);
    }
    return out;
}

std::vector<TokenizedEmbedding> emb1_decode(const std::string& bytes) {
    Reader rd{bytes};
    if (rd.bytes(4) != std::string(kMagic, 4)) throw IoError("EMB1: bad magic");
    uint32_t count = rd.u32le();
    std::vector<TokenizedEmbedding> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        TokenizedEmbedding te;
        uint32_t id_len = rd.u32le();
        if (id_len > kMaxIdLen) throw IoError("EMB1: unreasonable id length");
        te.example_id = rd.bytes(id_len);
        te.n_dim = rd.u32le();
        te.m_tokens = rd.u32le();
        if (te.n_dim == 0 || te.m_tokens == 0) throw IoError("EMB1: zero dimension");
        size_t cells = size_t(te.n_dim) * te.m_tokens;
        if (cells > (size_t(1) << 31)) throw IoError("EMB1: unreasonable matrix size");
        te.matrix.resize(cells);
        for (size_t j = 0; j < cells; ++j) te.matrix[j] = rd.f32le();
        te.weights.resize(te.m_tokens);
        for (size_t j = 0; j < te.m_tokens; ++j) te.weights[j] = rd.f32le();
        out.push_back(std::move(te));
    }
    if (rd.pos != bytes.size()) throw IoError("EMB1: trailing bytes");
    return out;
}

void write_emb1(const std::string& path, const std::vector<TokenizedEmbedding>& records) {
    write_file(path, emb1_encode(records));
}

std::vector<TokenizedEmbedding> read_emb1(const std::string& path) {
    return emb1_decode(read_file(path));
}

}  // namespace sparsegen
