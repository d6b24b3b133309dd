#include "stockpile/io.hpp"

#include "stockpile/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace stockpile {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

double header_value(const std::string& header, const std::string& key, const std::string& path) {
    for (const std::string& tok : split(header, ' ')) {
        if (tok.rfind(key + "=", 0) == 0) {
            try {
                return parse_double(tok.substr(key.size() + 1));
            } catch (const std::invalid_argument&) {
                break;
            }
        }
    }
    throw IoError(path + ": bad or missing '" + key + "' in grid header");
}

}  // namespace

void save_field_csv(const std::string& path, const Field2D& f, const Grid2D& g) {
    if (!f.matches(g)) throw ContractViolation("save_field_csv: shape mismatch");
    auto out = open_out(path);
    out << "# grid N=" << g.N << " M=" << g.M << " k_min=" << format_double(g.k_min)
        << " k_max=" << format_double(g.k_max) << " z_min=" << format_double(g.z_min)
        << " z_max=" << format_double(g.z_max) << "\n";
    out << "k,z,value\n";
    for (int i = 0; i <= g.N; ++i) {
        if (i > 0) out << "\n";
        for (int j = 0; j <= g.M; ++j)
            out << format_double(g.k(i)) << ',' << format_double(g.z(j)) << ',' << format_double(f(i, j)) << '\n';
    }
    finish(out, path);
}

LoadedField load_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string header, columns;
    if (!std::getline(in, header) || header.rfind("# grid ", 0) != 0) throw IoError(path + ": missing grid header");
    if (!std::getline(in, columns) || columns != "k,z,value") throw IoError(path + ": expected 'k,z,value' columns");
    const double N = header_value(header, "N", path);
    const double M = header_value(header, "M", path);
    if (N != std::floor(N) || M != std::floor(M) || N < 2 || M < 2 || N > 1e6 || M > 1e6)
        throw IoError(path + ": bad grid size");
    LoadedField lf;
    lf.grid = Grid2D::box(static_cast<int>(N), static_cast<int>(M), header_value(header, "k_min", path),
                          header_value(header, "k_max", path), header_value(header, "z_min", path),
                          header_value(header, "z_max", path));
    lf.field = Field2D(lf.grid);
    std::size_t n = 0;
    std::string line;
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 3) throw IoError(path + ":" + std::to_string(lineno) + ": expected 3 columns");
        if (n >= lf.grid.size()) throw IoError(path + ": more rows than grid nodes");
        try {
            lf.field.values()[n] = parse_double(cells[2]);
        } catch (const std::invalid_argument& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        ++n;
    }
    if (n != lf.grid.size()) throw IoError(path + ": expected " + std::to_string(lf.grid.size()) + " rows");
    return lf;
}

void save_checkpoint(const std::string& path, const FieldPair& f, const Grid2D& g, long iteration) {
    if (!f.U.matches(g) || !f.P.matches(g)) throw ContractViolation("save_checkpoint: shape mismatch");
    auto out = open_out(path, std::ios::binary);
    const std::int32_t nm[2] = {g.N, g.M};
    const double box[4] = {g.k_min, g.k_max, g.z_min, g.z_max};
    const std::int64_t it = iteration;
    out.write("STKCKPT1", 8);
    out.write(reinterpret_cast<const char*>(nm), sizeof nm);
    out.write(reinterpret_cast<const char*>(box), sizeof box);
    out.write(reinterpret_cast<const char*>(&it), sizeof it);
    out.write(reinterpret_cast<const char*>(f.U.values().data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(f.P.values().data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
    finish(out, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    char magic[8];
    std::int32_t nm[2];
    double box[4];
    std::int64_t it = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(nm), sizeof nm);
    in.read(reinterpret_cast<char*>(box), sizeof box);
    in.read(reinterpret_cast<char*>(&it), sizeof it);
    if (!in || std::memcmp(magic, "STKCKPT1", 8) != 0) throw IoError(path + ": not a checkpoint");
    Checkpoint c;
    try {
        c.grid = Grid2D::box(nm[0], nm[1], box[0], box[1], box[2], box[3]);
    } catch (const ContractViolation& e) {
        throw IoError(path + ": " + e.what());
    }
    c.fields = {Field2D(c.grid), Field2D(c.grid)};
    c.iteration = it;
    in.read(reinterpret_cast<char*>(c.fields.U.values().data()), static_cast<std::streamsize>(c.grid.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(c.fields.P.values().data()), static_cast<std::streamsize>(c.grid.size() * sizeof(double)));
    if (!in) throw IoError(path + ": truncated checkpoint");
    return c;
}

void save_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "# dt=" << format_double(traj.dt) << " seed=" << (traj.seed ? std::to_string(*traj.seed) : "none") << "\n";
    out << "t,k,z,p,q\n";
    for (const TrajectorySample& x : traj.samples)
        out << format_double(x.t) << ',' << format_double(x.k) << ',' << format_double(x.z) << ','
            << format_double(x.p) << ',' << format_double(x.q) << '\n';
    finish(out, path);
}

void save_measure_csv(const std::string& path, const MeasureHistogram& h) {
    const Grid2D& g = h.grid;
    auto out = open_out(path);
    out << "# T=" << format_double(h.T) << " burn_in=" << format_double(h.burn_in) << " dt=" << format_double(h.dt)
        << " seed=" << h.seed << " samples=" << h.samples << "\n";
    out << "k,z,density,log10_density\n";
    for (int i = 0; i <= g.N; ++i) {
        if (i > 0) out << "\n";
        for (int j = 0; j <= g.M; ++j) {
            const double d = h.density(i, j);
            out << format_double(g.k(i)) << ',' << format_double(g.z(j)) << ',' << format_double(d) << ','
                << format_double(d > 0.0 ? std::log10(d) : kLog10Sentinel) << '\n';
        }
    }
    finish(out, path);
}

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 init failed");
    }
    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md, &len);
        static const char* digits = "0123456789abcdef";
        std::string s;
        for (unsigned int n = 0; n < len; ++n) {
            s += digits[md[n] >> 4];
            s += digits[md[n] & 15];
        }
        return s;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    Sha256 h;
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string sha256_string(const std::string& data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

}  // namespace stockpile
