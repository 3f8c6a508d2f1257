#include "signet/checkpoint.hpp"

#include <cstdio>
#include <cstring>

#include "signet/error.hpp"

namespace signet {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) {
        if (bytes.size() - pos < n)
            throw Error::data("checkpoint: truncated at byte " + std::to_string(pos) + " reading " + what);
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += 4;
        return v;
    }
    std::string str(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
        pos += n;
        return s;
    }
};

}  // namespace

void Container::set(const std::string& key, const std::string& value) {
    for (auto& kv : config) {
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    }
    config.emplace_back(key, value);
}

void Container::set_u64(const std::string& key, std::uint64_t v) { set(key, std::to_string(v)); }
void Container::set_i64(const std::string& key, std::int64_t v) { set(key, std::to_string(v)); }

void Container::set_f32(const std::string& key, float v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));  // round-trips any float32
    set(key, buf);
}

bool Container::has(const std::string& key) const {
    for (const auto& kv : config)
        if (kv.first == key) return true;
    return false;
}

const std::string& Container::get(const std::string& key) const {
    for (const auto& kv : config)
        if (kv.first == key) return kv.second;
    throw Error::data("checkpoint: missing config key '" + key + "'");
}

std::uint64_t Container::get_u64(const std::string& key) const { return std::stoull(get(key)); }
std::int64_t Container::get_i64(const std::string& key) const { return std::stoll(get(key)); }
float Container::get_f32(const std::string& key) const { return std::strtof(get(key).c_str(), nullptr); }

void Container::add_tensor(const std::string& name, Tensor t) { tensors.emplace_back(name, std::move(t)); }

const Tensor& Container::tensor(const std::string& name) const {
    for (const auto& nt : tensors)
        if (nt.first == name) return nt.second;
    throw Error::data("checkpoint: missing tensor '" + name + "'");
}

bool Container::has_tensor(const std::string& name) const {
    for (const auto& nt : tensors)
        if (nt.first == name) return true;
    return false;
}

std::vector<std::uint8_t> write_container(const Container& c) {
    if (c.magic.size() != 4) throw Error::data("checkpoint: magic must be 4 bytes");
    std::vector<std::uint8_t> out;
    put_bytes(out, c.magic.data(), 4);
    put_u32(out, c.version);
    put_u32(out, static_cast<std::uint32_t>(c.config.size()));
    for (const auto& [k, v] : c.config) {
        put_u32(out, static_cast<std::uint32_t>(k.size()));
        put_bytes(out, k.data(), k.size());
        put_u32(out, static_cast<std::uint32_t>(v.size()));
        put_bytes(out, v.data(), v.size());
    }
    put_u32(out, static_cast<std::uint32_t>(c.tensors.size()));
    for (const auto& [name, t] : c.tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        put_bytes(out, name.data(), name.size());
        put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (float v : t.data) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32(out, bits);
        }
    }
    return out;
}

Container read_container(std::span<const std::uint8_t> bytes, const std::string& expected_magic) {
    Reader r{bytes};
    Container c;
    c.magic = r.str(4, "magic");
    if (c.magic != expected_magic)
        throw Error::data("checkpoint: bad magic '" + c.magic + "' (expected '" + expected_magic + "')");
    c.version = r.u32("version");
    if (c.version != 1) throw Error::data("checkpoint: unsupported version " + std::to_string(c.version));
    const std::uint32_t nconfig = r.u32("config count");
    for (std::uint32_t i = 0; i < nconfig; ++i) {
        const std::uint32_t klen = r.u32("key length");
        std::string key = r.str(klen, "key");
        const std::uint32_t vlen = r.u32("value length");
        std::string value = r.str(vlen, "value");
        c.config.emplace_back(std::move(key), std::move(value));
    }
    const std::uint32_t ntensors = r.u32("tensor count");
    for (std::uint32_t i = 0; i < ntensors; ++i) {
        const std::uint32_t nlen = r.u32("tensor name length");
        std::string name = r.str(nlen, "tensor name");
        const std::uint32_t ndim = r.u32("tensor rank");
        if (ndim > 8) throw Error::data("checkpoint: implausible tensor rank " + std::to_string(ndim));
        std::vector<int> shape;
        std::int64_t numel = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            const std::uint32_t dim = r.u32("tensor dim");
            if (dim == 0 || dim > (1u << 28)) throw Error::data("checkpoint: bad tensor dimension " + std::to_string(dim));
            shape.push_back(static_cast<int>(dim));
            numel *= dim;
        }
        Tensor t(shape);
        r.need(static_cast<std::size_t>(numel) * 4, "tensor data");
        for (std::int64_t j = 0; j < numel; ++j) {
            const std::uint32_t bits = r.u32("tensor value");
            float v;
            std::memcpy(&v, &bits, 4);
            t.data[static_cast<std::size_t>(j)] = v;
        }
        c.tensors.emplace_back(std::move(name), std::move(t));
    }
    if (r.pos != bytes.size())
        throw Error::data("checkpoint: " + std::to_string(bytes.size() - r.pos) + " trailing bytes");
    return c;
}

}  // namespace signet
