#include "io.hpp"

#include "errors.hpp"

#include <cstring>
#include <fstream>

namespace nsctrl {

CsvWriter::CsvWriter(std::string path, std::vector<std::string> columns)
    : path_(std::move(path)), ncols_(columns.size()) {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += columns[i];
    }
    buf_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncols_) throw IoError("csv row width mismatch for " + path_);
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += util::fmt_double(values[i]);
    }
    buf_ += '\n';
}

void CsvWriter::close() {
    if (closed_) return;
    closed_ = true;
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw IoError("cannot write " + path_);
    out.write(buf_.data(), std::streamsize(buf_.size()));
    if (!out) throw IoError("short write to " + path_);
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
        // Destructor must not throw; explicit close() reports failures.
    }
}

namespace {
constexpr char kMagic[4] = {'N', 'S', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;
} // namespace

void dump_write(const std::string& path, const std::vector<std::int64_t>& dims,
                const double* data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kMagic, 4);
    const std::uint32_t version = kVersion;
    const std::uint32_t rank = std::uint32_t(dims.size());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&rank), 4);
    std::int64_t total = 1;
    for (std::int64_t d : dims) {
        out.write(reinterpret_cast<const char*>(&d), 8);
        total *= d;
    }
    out.write(reinterpret_cast<const char*>(data), std::streamsize(total * 8));
    if (!out) throw IoError("short write to " + path);
}

std::vector<double> dump_read(const std::string& path, std::vector<std::int64_t>* dims) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    char magic[4];
    std::uint32_t version = 0, rank = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&rank), 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion)
        throw IoError("not a checkpoint dump: " + path);
    std::int64_t total = 1;
    std::vector<std::int64_t> local_dims(rank);
    for (auto& d : local_dims) {
        in.read(reinterpret_cast<char*>(&d), 8);
        total *= d;
    }
    std::vector<double> data(static_cast<size_t>(total), 0.0);
    in.read(reinterpret_cast<char*>(data.data()), std::streamsize(total * 8));
    if (!in) throw IoError("truncated checkpoint dump: " + path);
    if (dims) *dims = std::move(local_dims);
    return data;
}

void write_scalar_csv(const std::string& path, const ScalarField& s) {
    CsvWriter csv(path, {"x", "y", "value"});
    const Grid& g = *s.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) csv.row({g.cx(i), g.cy(j), s.at(i, j)});
    csv.close();
}

void write_vector_csv(const std::string& path, const VectorField& v) {
    CsvWriter csv(path, {"x", "y", "vx", "vy"});
    const Grid& g = *v.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) {
                const Vec2 u = v.at(i, j);
                csv.row({g.cx(i), g.cy(j), u.x, u.y});
            }
    csv.close();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) throw IoError("short write to " + path);
}

} // namespace nsctrl
