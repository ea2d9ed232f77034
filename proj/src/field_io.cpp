#include "llab/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "llab/error.hpp"

namespace llab {

namespace {

constexpr char kMagic[5] = {'L', 'L', 'A', 'B', '1'};

void put_u64(std::string& s, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_u32(std::string& s, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_f64(std::string& s, double v) { put_u64(s, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    explicit Reader(const std::string& s) : s_(s) {}

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_ + b])) << (8 * b);
        pos_ += 8;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s_[pos_ + b])) << (8 * b);
        pos_ += 4;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void need(std::size_t n) const {
        if (pos_ + n > s_.size()) throw InvalidInput("truncated LLAB1 dump");
    }
    std::size_t remaining() const { return s_.size() - pos_; }

private:
    const std::string& s_;
    std::size_t pos_ = sizeof(kMagic);
};

void format_number(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

void write_csv(std::ostream& out, const ScalarField& f) {
    const auto& g = f.grid();
    out << (g.space.dim == 2 ? "x1,x2,t,value\n" : "x1,t,value\n");
    for (std::size_t l = 0; l < g.levels(); ++l) {
        const auto s = f.slice(l);
        for (std::size_t n = 0; n < s.size(); ++n) {
            format_number(out, g.space.coord(n, 0));
            out << ',';
            if (g.space.dim == 2) {
                format_number(out, g.space.coord(n, 1));
                out << ',';
            }
            format_number(out, g.time(l));
            out << ',';
            format_number(out, s[n]);
            out << '\n';
        }
    }
}

std::string to_csv(const ScalarField& f) {
    std::ostringstream os;
    write_csv(os, f);
    return os.str();
}

std::string to_binary(const ScalarField& f) {
    const auto& g = f.grid();
    std::string s(kMagic, sizeof(kMagic));
    s.reserve(sizeof(kMagic) + 4 + 8 * 8 + 8 * f.values().size());
    put_u32(s, static_cast<std::uint32_t>(g.space.dim));
    put_u64(s, g.space.extents[0]);
    put_u64(s, g.space.extents[1]);
    put_f64(s, g.space.h);
    put_f64(s, g.space.origin[0]);
    put_f64(s, g.space.origin[1]);
    put_f64(s, g.tau);
    put_f64(s, g.t0);
    put_u64(s, g.steps);
    for (double v : f.values()) put_f64(s, v);
    return s;
}

ScalarField from_binary(const std::string& bytes) {
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw InvalidInput("not an LLAB1 dump (bad magic)");
    Reader r(bytes);
    SpaceTimeGrid g;
    g.space.dim = static_cast<int>(r.u32());
    g.space.extents[0] = r.u64();
    g.space.extents[1] = r.u64();
    g.space.h = r.f64();
    g.space.origin[0] = r.f64();
    g.space.origin[1] = r.f64();
    g.tau = r.f64();
    g.t0 = r.f64();
    g.steps = r.u64();
    g.validate();
    const std::size_t count = g.value_count();
    if (r.remaining() != 8 * count) throw InvalidInput("LLAB1 dump size does not match its header");
    std::vector<double> values(count);
    for (auto& v : values) v = r.f64();
    ScalarField f(g, std::move(values));
    if (!f.all_finite()) throw InvalidInput("LLAB1 dump contains non-finite values");
    return f;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ScalarField read_binary_file(const std::string& path) { return from_binary(read_file(path)); }

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw InvalidInput("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace llab
