#include "mcrt/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mcrt/errors.hpp"

namespace mcrt {

namespace {

constexpr char kWalkMagic[8] = {'M', 'C', 'R', 'T', 'W', 'A', 'L', 'K'};
constexpr char kGraphMagic[8] = {'M', 'C', 'R', 'T', 'G', 'R', 'A', 'F'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; writers assume a matching host");

void put_bytes(std::string& out, const void* data, std::size_t size) {
    out.append(static_cast<const char*>(data), size);
}

void put_u32(std::string& out, std::uint32_t v) { put_bytes(out, &v, sizeof v); }
void put_u64(std::string& out, std::uint64_t v) { put_bytes(out, &v, sizeof v); }
void put_i64(std::string& out, std::int64_t v) { put_bytes(out, &v, sizeof v); }
void put_f64(std::string& out, double v) { put_bytes(out, &v, sizeof v); }

/// Bounds-checked cursor over a fully loaded file image.
class Reader {
  public:
    Reader(std::string_view buffer, const char* what)
        : buffer_(buffer), what_(what) {}

    void read(void* into, std::size_t size) {
        if (buffer_.size() - pos_ < size) {
            throw format_error(std::string(what_) + ": truncated file");
        }
        std::memcpy(into, buffer_.data() + pos_, size);
        pos_ += size;
    }

    std::uint32_t u32() { return scalar<std::uint32_t>(); }
    std::uint64_t u64() { return scalar<std::uint64_t>(); }
    std::int64_t i64() { return scalar<std::int64_t>(); }
    double f64() { return scalar<double>(); }
    std::uint8_t u8() { return scalar<std::uint8_t>(); }

    void expect_magic(const char (&magic)[8]) {
        char got[8];
        read(got, sizeof got);
        if (std::memcmp(got, magic, sizeof got) != 0) {
            throw format_error(std::string(what_) + ": bad magic");
        }
    }

    void expect_version() {
        const std::uint32_t version = u32();
        if (version != kFormatVersion) {
            throw format_error(std::string(what_) + ": unsupported version " +
                               std::to_string(version));
        }
    }

    std::size_t remaining() const { return buffer_.size() - pos_; }

    void expect_end() {
        if (remaining() != 0) {
            throw format_error(std::string(what_) + ": trailing data");
        }
    }

  private:
    template <typename T>
    T scalar() {
        T v;
        read(&v, sizeof v);
        return v;
    }

    std::string_view buffer_;
    std::size_t pos_ = 0;
    const char* what_;
};

std::string slurp(std::istream& in, const char* what) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw format_error(std::string(what) + ": read failure");
    return std::move(buffer).str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

WalkParams read_provenance(Reader& reader, bool gamma_first) {
    WalkParams params;
    if (gamma_first) params.gamma = reader.f64();
    const std::uint64_t window = reader.u64();
    if (window > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        throw format_error("window_n does not fit a signed count");
    }
    params.window_n = static_cast<std::int64_t>(window);
    params.mesh_k = reader.u32();
    if (!gamma_first) params.gamma = reader.f64();
    params.seed = reader.u64();
    try {
        params.validate();
    } catch (const std::invalid_argument& err) {
        throw format_error(std::string("invalid stored parameters: ") + err.what());
    }
    return params;
}

}  // namespace

void save_walk(const CorrelatedWalk& walk, std::ostream& out) {
    walk.params.validate();
    const std::size_t count = walk.params.sample_count();
    if (walk.l.size() != count || walk.r.size() != count) {
        throw std::domain_error("save_walk: sample arrays do not match the window");
    }
    std::string buffer;
    buffer.reserve(40 + 16 * count);
    put_bytes(buffer, kWalkMagic, sizeof kWalkMagic);
    put_u32(buffer, kFormatVersion);
    put_f64(buffer, walk.params.gamma);
    put_u64(buffer, static_cast<std::uint64_t>(walk.params.window_n));
    put_u32(buffer, walk.params.mesh_k);
    put_u64(buffer, walk.params.seed);
    put_bytes(buffer, walk.l.data(), count * sizeof(double));
    put_bytes(buffer, walk.r.data(), count * sizeof(double));
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw std::runtime_error("save_walk: write failure");
}

void save_walk(const CorrelatedWalk& walk, const std::string& path) {
    auto out = open_out(path);
    save_walk(walk, out);
}

CorrelatedWalk load_walk(std::istream& in) {
    const std::string image = slurp(in, "walk file");
    Reader reader(image, "walk file");
    reader.expect_magic(kWalkMagic);
    reader.expect_version();

    CorrelatedWalk walk;
    walk.params = read_provenance(reader, /*gamma_first=*/true);
    const std::size_t count = walk.params.sample_count();
    if (reader.remaining() != 2 * count * sizeof(double)) {
        throw format_error("walk file: sample payload does not match the window");
    }
    walk.l.resize(count);
    walk.r.resize(count);
    reader.read(walk.l.data(), count * sizeof(double));
    reader.read(walk.r.data(), count * sizeof(double));
    reader.expect_end();
    return walk;
}

CorrelatedWalk load_walk(const std::string& path) {
    auto in = open_in(path);
    return load_walk(in);
}

void save_graph(const MatedCrtGraph& g, std::ostream& out) {
    g.params.validate();
    const std::size_t v_count = g.vertex_count();
    if (v_count != 2 * static_cast<std::size_t>(g.params.window_n) ||
        g.first_vertex != 1 - g.params.window_n) {
        throw std::domain_error(
            "save_graph: vertex range is not the standard window of its parameters");
    }
    std::string buffer;
    buffer.reserve(48 + 8 * (v_count + 1) + 9 * g.nbr.size());
    put_bytes(buffer, kGraphMagic, sizeof kGraphMagic);
    put_u32(buffer, kFormatVersion);
    put_u64(buffer, static_cast<std::uint64_t>(g.params.window_n));
    put_u32(buffer, g.params.mesh_k);
    put_f64(buffer, g.params.gamma);
    put_u64(buffer, g.params.seed);
    put_u64(buffer, v_count);
    for (std::uint32_t off : g.off) put_u64(buffer, off);
    for (std::size_t k = 0; k < g.nbr.size(); ++k) {
        put_i64(buffer, g.vertex_id(g.nbr[k]));
        buffer.push_back(static_cast<char>(g.label[k]));
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw std::runtime_error("save_graph: write failure");
}

void save_graph(const MatedCrtGraph& g, const std::string& path) {
    auto out = open_out(path);
    save_graph(g, out);
}

MatedCrtGraph load_graph(std::istream& in) {
    const std::string image = slurp(in, "graph file");
    Reader reader(image, "graph file");
    reader.expect_magic(kGraphMagic);
    reader.expect_version();

    MatedCrtGraph g;
    g.params = read_provenance(reader, /*gamma_first=*/false);
    g.first_vertex = 1 - g.params.window_n;

    const std::uint64_t v_count = reader.u64();
    if (v_count != 2 * static_cast<std::uint64_t>(g.params.window_n)) {
        throw format_error("graph file: vertex count does not match the window");
    }
    g.off.resize(v_count + 1);
    for (auto& off : g.off) {
        const std::uint64_t value = reader.u64();
        if (value > std::numeric_limits<std::uint32_t>::max()) {
            throw format_error("graph file: offset exceeds index range");
        }
        off = static_cast<std::uint32_t>(value);
    }
    if (g.off.front() != 0) throw format_error("graph file: offsets must start at 0");
    for (std::size_t v = 0; v + 1 < g.off.size(); ++v) {
        if (g.off[v] > g.off[v + 1]) {
            throw format_error("graph file: offsets must be nondecreasing");
        }
    }
    const std::size_t end_count = g.off.back();
    if (end_count % 2 != 0) {
        throw format_error("graph file: edge-end count must be even");
    }
    if (reader.remaining() != end_count * 9) {
        throw format_error("graph file: adjacency payload does not match offsets");
    }
    g.nbr.resize(end_count);
    g.label.resize(end_count);
    const std::int64_t last_vertex =
        g.first_vertex + static_cast<std::int64_t>(v_count) - 1;
    for (std::size_t k = 0; k < end_count; ++k) {
        const std::int64_t id = reader.i64();
        if (id < g.first_vertex || id > last_vertex) {
            throw format_error("graph file: neighbor id outside the window");
        }
        g.nbr[k] = g.internal_of(id);
        const std::uint8_t label = reader.u8();
        if (label > static_cast<std::uint8_t>(EdgeLabel::chord_r)) {
            throw format_error("graph file: unknown edge label");
        }
        g.label[k] = label;
    }
    reader.expect_end();
    return g;
}

MatedCrtGraph load_graph(const std::string& path) {
    auto in = open_in(path);
    return load_graph(in);
}

std::string csv_body(std::span<const std::string> header,
                     const std::vector<std::vector<double>>& rows) {
    std::string out = "#";
    for (std::size_t c = 0; c < header.size(); ++c) {
        out += c == 0 ? " " : ",";
        out += header[c];
    }
    out += '\n';
    char cell[64];
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw std::domain_error("csv_body: row width does not match header");
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(cell, sizeof cell, "%.17g", row[c]);
            if (c > 0) out += ',';
            out += cell;
        }
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    auto in = open_in(path);
    return slurp(in, "text file");
}

void write_text_file(const std::string& path, std::string_view content) {
    auto out = open_out(path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("cannot write: " + path);
}

}  // namespace mcrt
