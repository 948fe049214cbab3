#pragma once

#include "fields.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nsctrl {

/// Deterministic CSV writer: header row plus %.17g-formatted numeric rows.
class CsvWriter {
public:
    CsvWriter(std::string path, std::vector<std::string> columns);
    void row(const std::vector<double>& values);
    void close();
    ~CsvWriter();

private:
    std::string path_;
    std::string buf_;
    size_t ncols_;
    bool closed_ = false;
};

/// Raw checkpoint dump: "NSDF" magic, u32 version, u32 rank, i64 dims,
/// then the row-major little-endian float64 payload.
void dump_write(const std::string& path, const std::vector<std::int64_t>& dims,
                const double* data);
std::vector<double> dump_read(const std::string& path, std::vector<std::int64_t>* dims);

void write_scalar_csv(const std::string& path, const ScalarField& s);
void write_vector_csv(const std::string& path, const VectorField& v);
void write_text(const std::string& path, const std::string& text);

} // namespace nsctrl
