#pragma once

// CSV and OBJ writers. Numbers are printed with 17 significant digits so
// reruns produce identical bytes.

#include "cangle/frenet.hpp"
#include "cangle/surface.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace cangle {

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// RFC-4180 field quoting: fields with a comma, quote, CR or LF are wrapped
/// in quotes and embedded quotes are doubled.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

class CsvWriter {
public:
    using Cell = std::variant<std::string, double, long long>;

    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void row(const std::vector<Cell>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) os_ << ',';
            os_ << csv_field(text(cells[k]));
        }
        os_ << "\r\n";
    }

    void header(const std::vector<std::string>& names) {
        std::vector<Cell> cells(names.begin(), names.end());
        row(cells);
    }

private:
    static std::string text(const Cell& c) {
        if (auto s = std::get_if<std::string>(&c)) return *s;
        if (auto d = std::get_if<double>(&c)) return format_number(*d);
        return std::to_string(std::get<long long>(c));
    }

    std::ostream& os_;
};

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::BadParams, "cannot open '" + path + "' for writing");
    return os;
}

/// One row per node: u,v,g11,g12,g22,h11,h12,h22,Kext,Kint,lambda,defect.
/// The defect column is empty when no axis was extended.
inline void write_patch_csv(std::ostream& os, const RuledPatch& p, const Grid<double>* defect = nullptr) {
    detail::require_forms(p);
    CsvWriter w(os);
    w.header({"u", "v", "g11", "g12", "g22", "h11", "h12", "h22", "Kext", "Kint", "lambda", "defect"});
    for (std::size_t i = 0; i < p.nu(); ++i)
        for (std::size_t j = 0; j < p.nv(); ++j) {
            std::vector<CsvWriter::Cell> r{p.u[i],       p.v[j],       p.g11(i, j),   p.g12(i, j),
                                           p.g22(i, j),  p.h11(i, j),  p.h12(i, j),   p.h22(i, j),
                                           p.K_ext(i, j), p.K_int(i, j), p.lambda(i, j)};
            if (defect) {
                r.emplace_back((*defect)(i, j));
            } else {
                r.emplace_back(std::string());
            }
            w.row(r);
        }
}

inline void write_frenet_csv(std::ostream& os, const FrenetData& fd) {
    CsvWriter w(os);
    w.header({"s", "x", "y", "z", "kappa", "tau", "sigma", "tau_over_kappa"});
    for (std::size_t i = 0; i < fd.size(); ++i) {
        w.row({fd.s[i], fd.p[i][0], fd.p[i][1], fd.p[i][2], fd.kappa[i], fd.tau[i], fd.sigma[i],
               fd.tau[i] / fd.kappa[i]});
    }
}

/// ASCII OBJ, v and f records only. Grid quads are split along the
/// (i, j)-(i+1, j+1) diagonal.
inline void write_patch_obj(std::ostream& os, const Manifold3& m, const RuledPatch& p) {
    for (std::size_t i = 0; i < p.nu(); ++i)
        for (std::size_t j = 0; j < p.nv(); ++j) {
            const Vec3 q = visualization_point(m, p.X(i, j));
            os << "v " << format_number(q[0]) << ' ' << format_number(q[1]) << ' ' << format_number(q[2]) << '\n';
        }
    auto id = [&](std::size_t i, std::size_t j) { return i * p.nv() + j + 1; };
    for (std::size_t i = 0; i + 1 < p.nu(); ++i)
        for (std::size_t j = 0; j + 1 < p.nv(); ++j) {
            os << "f " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1) << '\n';
            os << "f " << id(i, j) << ' ' << id(i + 1, j + 1) << ' ' << id(i, j + 1) << '\n';
        }
}

}  // namespace cangle
